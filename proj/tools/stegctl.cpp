// stegctl: admin client for a running stegmq broker.
//
// Block and message files use the blob-list layout of the wire payloads:
// u32 count, then per item u32 length and the bytes (big-endian).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>

#include "stegolab/mq/client.hpp"

using namespace stegolab;

namespace {

Bytes read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return Bytes(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_output(const std::string& path, const Bytes& data) {
  if (path.empty() || path == "-") {
    std::cout.write(reinterpret_cast<const char*>(data.data()),
                    static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("cannot write " + path);
}

std::vector<Bytes> payloads(const std::vector<mq::Record>& records) {
  std::vector<Bytes> out;
  for (const auto& r : records) out.push_back(r.data);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Client for the stegmq broker"};
  app.require_subcommand(1);
  std::string socket_path;
  std::string app_id;
  std::string in_path;
  std::string out_path;
  std::uint32_t max = std::numeric_limits<std::uint32_t>::max();
  bool raw = false;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--socket", socket_path, "Broker socket")->required();
    cmd->add_option("--app", app_id, "Application id")->required();
  };
  auto* publish = app.add_subcommand("publish", "Hide a hiddentext (raw bytes from --in)");
  common(publish);
  publish->add_option("--in", in_path, "Hiddentext file, '-' for stdin");
  auto* consume = app.add_subcommand("consume", "Take stegotext blocks to send");
  common(consume);
  consume->add_option("--out", out_path, "Block list file, '-' for stdout");
  consume->add_option("--max", max, "Most blocks to take");
  auto* decode = app.add_subcommand("decode", "Feed received stegotext blocks");
  common(decode);
  decode->add_option("--in", in_path, "Block list file, '-' for stdin");
  auto* retrieve = app.add_subcommand("retrieve", "Take decoded hiddentexts");
  common(retrieve);
  retrieve->add_option("--out", out_path, "Output file, '-' for stdout");
  retrieve->add_option("--max", max, "Most messages to take");
  retrieve->add_flag("--raw", raw, "Write the messages concatenated instead of as a list");
  auto* status = app.add_subcommand("status", "Show broker and app status");
  common(status);
  CLI11_PARSE(app, argc, argv);

  try {
    mq::Client client(socket_path);
    if (*publish) {
      std::cout << client.publish(app_id, read_input(in_path)) << " blocks enqueued\n";
    } else if (*consume) {
      const auto records = client.consume(app_id, max);
      write_output(out_path, mq::encode_blobs(payloads(records)));
      std::cerr << records.size() << " blocks consumed\n";
    } else if (*decode) {
      const auto counts = client.decode(app_id, mq::decode_blobs(read_input(in_path)));
      std::cout << counts.enqueued << " hiddentexts enqueued, " << counts.skipped
                << " blocks skipped\n";
    } else if (*retrieve) {
      const auto records = client.retrieve(app_id, max);
      if (raw) {
        Bytes all;
        for (const auto& r : records) all.insert(all.end(), r.data.begin(), r.data.end());
        write_output(out_path, all);
      } else {
        write_output(out_path, mq::encode_blobs(payloads(records)));
      }
      std::cerr << records.size() << " hiddentexts retrieved\n";
    } else if (*status) {
      std::cout << client.status(app_id);
    }
  } catch (const std::exception& e) {
    std::cerr << "stegctl: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
