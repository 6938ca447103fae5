#include <charconv>
#include <fstream>
#include <sstream>

#include "stegolab/channel.hpp"
#include "stegolab/error.hpp"

namespace stegolab {

namespace {

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

double parse_probability(const std::string& word, std::size_t line_no) {
  if (word.rfind("p=", 0) != 0) {
    throw ParseError("line " + std::to_string(line_no) + ": expected p=<decimal>, got '" +
                     word + "'");
  }
  const std::string digits = word.substr(2);
  std::size_t consumed = 0;
  double p = 0.0;
  try {
    p = std::stod(digits, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed == 0 || consumed != digits.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad probability '" + digits + "'");
  }
  return p;
}

}  // namespace

std::unique_ptr<ChannelModel> parse_channel(std::string_view text, std::uint64_t seed) {
  std::istringstream in{std::string(text)};
  TableChannel::Tables tables;
  std::optional<std::size_t> uniform_bits;
  bool saw_table = false;

  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto words = split_words(line);
    if (words.empty() || words.front().starts_with('#')) continue;

    if (words.front() == "uniform") {
      if (words.size() != 2 || saw_table || uniform_bits) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": 'uniform <k>' must be the only directive");
      }
      std::size_t k = 0;
      const auto& w = words[1];
      auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), k);
      if (ec != std::errc{} || ptr != w.data() + w.size() || k == 0) {
        throw ParseError("line " + std::to_string(line_no) + ": bad block size '" + w + "'");
      }
      uniform_bits = k;
      continue;
    }

    std::optional<Bits> given;
    std::size_t pos = 0;
    if (words[0] == "given") {
      if (words.size() < 2) {
        throw ParseError("line " + std::to_string(line_no) + ": 'given' needs a bit string");
      }
      given = Bits::from_string(words[1]);
      pos = 2;
    }
    if (words.size() != pos + 3 || words[pos] != "block") {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected '[given <bits>] block <bits> p=<decimal>'");
    }
    Outcome outcome{Bits::from_string(words[pos + 1]), parse_probability(words[pos + 2], line_no)};
    if (outcome.bits.empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty block");
    }
    if (uniform_bits) {
      throw ParseError("line " + std::to_string(line_no) + ": table lines after 'uniform'");
    }
    saw_table = true;
    if (given) {
      tables.given[*given].push_back(std::move(outcome));
    } else {
      tables.initial.push_back(std::move(outcome));
    }
  }

  if (uniform_bits) return make_uniform_channel(*uniform_bits, seed);
  if (!saw_table) throw ParseError("channel definition is empty");
  if (tables.initial.empty()) {
    throw ParseError("channel definition has no unconditional block lines");
  }
  return std::make_unique<TableChannel>(std::move(tables), seed);
}

std::unique_ptr<ChannelModel> load_channel_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open channel file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_channel(buf.str(), seed);
}

}  // namespace stegolab
