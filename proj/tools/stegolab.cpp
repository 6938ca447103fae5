// stegolab: warden experiments and channel utilities.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "stegolab/channel.hpp"
#include "stegolab/crypto.hpp"
#include "stegolab/ec.hpp"
#include "stegolab/warden.hpp"

using namespace stegolab;

namespace {

Flavor parse_flavor(const std::string& s) {
  if (s == "production") return Flavor::production;
  if (s == "true-random") return Flavor::true_random;
  if (s == "stub") return Flavor::stub;
  throw InvalidArgument("unknown flavor " + s);
}

std::shared_ptr<const Curve> curve_named(const std::string& s) {
  if (s == "p256") return p256_curve();
  if (s == "toy17") return toy_curve();
  return std::make_shared<const Curve>(load_curve_file(s));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steganography lab: warden games and channel tools"};
  app.require_subcommand(1);

  std::string scheme = "iv";
  std::string channel_file;
  std::string curve = "p256";
  std::string flavor = "production";
  std::string warden_name = "battery";
  std::string report_file;
  std::size_t trials = 10000;
  std::size_t queries = 10;
  std::size_t message_bits = 1024;
  std::uint64_t seed = 1;
  unsigned r = 8;
  std::size_t repeat = 1;
  unsigned threads = 1;

  auto* warden = app.add_subcommand("warden", "Estimate a warden's advantage against a scheme");
  warden->add_option("--scheme", scheme, "iv, universal, ec or copy-bit")
      ->check(CLI::IsMember({"iv", "universal", "ec", "copy-bit"}));
  warden->add_option("--channel", channel_file, "Channel definition (required for universal)");
  warden->add_option("--trials", trials, "Game repetitions");
  warden->add_option("--seed", seed, "Master seed");
  warden->add_option("--curve", curve, "p256, toy17 or a curve file (ec)");
  warden->add_option("--r", r, "Payload bits per key (ec)");
  warden->add_option("--repeat", repeat, "Repetition code length (universal)");
  warden->add_option("--flavor", flavor, "production, true-random or stub")
      ->check(CLI::IsMember({"production", "true-random", "stub"}));
  warden->add_option("--warden", warden_name, "battery, first-bit, constant-0 or constant-1")
      ->check(CLI::IsMember({"battery", "first-bit", "constant-0", "constant-1"}));
  warden->add_option("--queries", queries, "Challenge queries per trial (battery)");
  warden->add_option("--message-bits", message_bits, "Hiddentext length per query");
  warden->add_option("--threads", threads, "Worker threads");
  warden->add_option("--report", report_file, "Write key=value records here");

  auto* entropy = app.add_subcommand("entropy", "Show a channel's declared and exact min-entropy");
  entropy->add_option("--channel", channel_file, "Channel definition")->required();

  std::string key_out;
  auto* keygen = app.add_subcommand("keygen", "Write a fresh 16-byte key file");
  keygen->add_option("--out", key_out, "Destination")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*keygen) {
      save_key_file(key_out, SymmetricKey::generate(kAesBlockBytes));
      return 0;
    }
    if (*entropy) {
      auto ch = load_channel_file(channel_file, 0);
      std::cout << "channel:  " << ch->describe() << "\n"
                << "declared: " << ch->min_entropy_bound() << " bits\n";
      if (ch->enumerable()) {
        std::cout << "initial:  " << exact_min_entropy(*ch, History{}) << " bits\n";
      }
      return 0;
    }

    std::unique_ptr<StegoAdapter> steg;
    if (scheme == "iv") {
      if (!channel_file.empty() && load_channel_file(channel_file, 0)->block_size() != 128u) {
        throw InvalidArgument("the iv scheme runs over 128-bit blocks");
      }
      steg = iv_adapter(parse_flavor(flavor));
    } else if (scheme == "universal") {
      if (channel_file.empty()) throw InvalidArgument("--channel is required for universal");
      steg = universal_adapter(load_channel_file(channel_file, seed), parse_flavor(flavor),
                               EccSpec{repeat});
    } else if (scheme == "ec") {
      steg = ec_adapter(curve_named(curve), r);
    } else {
      steg = copy_bit_adapter();
    }

    Warden w = warden_name == "battery"      ? battery_warden(queries)
               : warden_name == "first-bit"  ? first_bit_warden()
               : warden_name == "constant-1" ? constant_warden(true)
                                             : constant_warden(false);
    WardenBudget budget;
    budget.trials = trials;
    budget.max_queries = std::max<std::size_t>(queries, 1);
    GameOptions options;
    options.seed = seed;
    options.threads = threads;
    options.log = [](const std::string& line) { std::cerr << line << "\n"; };

    const AdvantageReport report = play_game(w, *steg, budget, random_messages(message_bits),
                                             options);
    std::cout << "scheme: " << steg->name() << "\n"
              << "warden: " << w.name << "\n"
              << to_text(report);
    if (!report_file.empty()) {
      std::ofstream out(report_file);
      out << "scheme=" << steg->name() << "\nwarden=" << w.name << "\n" << to_records(report);
      if (!out) throw Error("cannot write " + report_file);
    }
  } catch (const std::exception& e) {
    std::cerr << "stegolab: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
