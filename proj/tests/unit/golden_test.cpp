#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "stegolab/mq/frame.hpp"

using namespace stegolab;
using namespace stegolab::mq;

namespace {

struct GoldenCase {
  std::string file;
  std::uint8_t opcode = 0;
  std::string app;
  Bytes payload;
};

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

Bytes field(const std::string& hex) { return hex == "-" ? Bytes{} : from_hex(hex); }

std::vector<GoldenCase> manifest() {
  std::ifstream in(std::string(STEGOLAB_GOLDEN_DIR) + "/manifest.txt");
  std::vector<GoldenCase> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string file, op, app, payload;
    is >> file >> op >> app >> payload;
    const Bytes app_bytes = field(app);
    out.push_back({file, static_cast<std::uint8_t>(std::stoul(op, nullptr, 16)),
                   std::string(app_bytes.begin(), app_bytes.end()), field(payload)});
  }
  return out;
}

}  // namespace

TEST(Golden, EveryFrameRoundTripsByteExactly) {
  const auto cases = manifest();
  ASSERT_GE(cases.size(), 15u);
  std::set<std::uint8_t> opcodes;
  std::set<std::size_t> app_lengths;
  for (const auto& c : cases) {
    SCOPED_TRACE(c.file);
    const Bytes raw = read_file(std::string(STEGOLAB_GOLDEN_DIR) + "/" + c.file);
    const Frame f = decode_frame(raw);
    EXPECT_EQ(f.opcode, c.opcode);
    EXPECT_EQ(f.app, c.app);
    EXPECT_EQ(f.payload, c.payload);
    EXPECT_EQ(encode_frame(f), raw);
    EXPECT_EQ(encode_frame(Frame{c.opcode, c.app, c.payload}), raw);
    opcodes.insert(c.opcode);
    app_lengths.insert(c.app.size());
  }
  for (std::uint8_t op : {0x01, 0x02, 0x03, 0x04, 0x05, 0x81, 0x82, 0x83, 0x84, 0x85, 0x7F}) {
    EXPECT_TRUE(opcodes.count(op)) << int(op);
  }
  EXPECT_TRUE(app_lengths.count(1));
  EXPECT_TRUE(app_lengths.count(64));
}

TEST(Golden, PayloadsDecode) {
  const std::string dir = STEGOLAB_GOLDEN_DIR;
  const auto records = decode_records(decode_frame(read_file(dir + "/consume_reply.bin")).payload);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].seq, 2u);
  EXPECT_EQ(records[1].data.front(), 0x0F);
  const auto blobs = decode_blobs(decode_frame(read_file(dir + "/decode_request.bin")).payload);
  EXPECT_EQ(blobs.size(), 2u);
  EXPECT_EQ(decode_count(decode_frame(read_file(dir + "/retrieve_request.bin")).payload),
            0xFFFFFFFFu);
  EXPECT_EQ(decode_decode_counts(decode_frame(read_file(dir + "/decode_reply.bin")).payload),
            (DecodeCounts{1, 0}));
}
