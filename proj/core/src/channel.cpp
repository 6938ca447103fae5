#include "stegolab/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stegolab/error.hpp"

namespace stegolab {

History::History(std::vector<CoverBlock> blocks) {
  blocks_.reserve(blocks.size());
  for (auto& b : blocks) append(std::move(b));
}

void History::append(CoverBlock block) {
  if (!blocks_.empty() && block.timestamp < blocks_.back().timestamp) {
    throw ChannelError("history timestamps must be non-decreasing (" +
                       std::to_string(block.timestamp) + " after " +
                       std::to_string(blocks_.back().timestamp) + ")");
  }
  blocks_.push_back(std::move(block));
}

void History::keep_last(std::size_t n) {
  if (blocks_.size() > n) {
    blocks_.erase(blocks_.begin(), blocks_.end() - static_cast<std::ptrdiff_t>(n));
  }
}

double uniform_unit(ChannelRng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Outcome> ChannelModel::support(const History&) const {
  throw UnsupportedOperation("channel '" + describe() + "' has no enumerable support");
}

CoverBlock ChannelModel::sample(const History& h) {
  CoverBlock block;
  block.bits = draw(h, rng_);
  block.timestamp = h.last_timestamp() + 1;
  return block;
}

// ---------------------------------------------------------------------------

UniformChannel::UniformChannel(std::size_t bits, std::uint64_t seed)
    : ChannelModel(seed), bits_(bits) {
  if (bits == 0) {
    throw InvalidArgument("uniform channel needs at least one bit per block");
  }
}

std::string UniformChannel::describe() const { return "uniform " + std::to_string(bits_); }

std::unique_ptr<ChannelModel> UniformChannel::clone(std::uint64_t seed) const {
  return std::make_unique<UniformChannel>(bits_, seed);
}

std::vector<Outcome> UniformChannel::support(const History& h) const {
  if (!enumerable()) return ChannelModel::support(h);
  const std::size_t n = std::size_t{1} << bits_;
  std::vector<Outcome> out;
  out.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    out.push_back({Bits::from_uint(v, bits_), 1.0 / static_cast<double>(n)});
  }
  return out;
}

Bits UniformChannel::draw(const History&, ChannelRng& rng) {
  Bytes buf((bits_ + 7) / 8);
  for (std::size_t i = 0; i < buf.size(); i += 8) {
    std::uint64_t word = rng();
    for (std::size_t j = i; j < std::min(buf.size(), i + 8); ++j) {
      buf[j] = static_cast<std::uint8_t>(word >> (8 * (j - i)));
    }
  }
  return Bits::from_bytes(buf, bits_);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kProbabilityTolerance = 1e-9;

void check_table(const std::vector<Outcome>& table, const std::string& what) {
  if (table.empty()) {
    throw ChannelError(what + " table is empty");
  }
  double total = 0.0;
  for (const auto& o : table) {
    if (!(o.probability > 0.0) || o.probability > 1.0) {
      throw ChannelError(what + " table has a probability outside (0, 1]");
    }
    total += o.probability;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg << what << " table probabilities sum to " << total << ", not 1";
    throw ChannelError(msg.str());
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t j = i + 1; j < table.size(); ++j) {
      if (table[i].bits == table[j].bits) {
        throw ChannelError(what + " table lists block " + table[i].bits.to_string() + " twice");
      }
    }
  }
}

double table_min_entropy(const std::vector<Outcome>& table) {
  double pmax = 0.0;
  for (const auto& o : table) pmax = std::max(pmax, o.probability);
  return -std::log2(pmax);
}

}  // namespace

TableChannel::TableChannel(Tables tables, std::uint64_t seed)
    : ChannelModel(seed), tables_(std::move(tables)) {
  check_table(tables_.initial, "initial");
  for (const auto& [key, table] : tables_.given) {
    check_table(table, "given " + key.to_string());
  }

  std::optional<std::size_t> width = tables_.initial.front().bits.size();
  auto fold = [&](const std::vector<Outcome>& table) {
    for (const auto& o : table) {
      if (width && o.bits.size() != *width) width.reset();
    }
  };
  fold(tables_.initial);
  for (const auto& [_, table] : tables_.given) fold(table);
  block_size_ = width;

  min_entropy_ = table_min_entropy(tables_.initial);
  for (const auto& [_, table] : tables_.given) {
    min_entropy_ = std::min(min_entropy_, table_min_entropy(table));
  }
}

std::string TableChannel::describe() const {
  std::ostringstream out;
  out << "table(" << tables_.initial.size() << " blocks";
  if (!tables_.given.empty()) out << ", " << tables_.given.size() << " conditional tables";
  out << ")";
  return out.str();
}

std::unique_ptr<ChannelModel> TableChannel::clone(std::uint64_t seed) const {
  return std::make_unique<TableChannel>(tables_, seed);
}

const std::vector<Outcome>& TableChannel::table_for(const History& h) const {
  if (!h.empty()) {
    if (auto it = tables_.given.find(h.back().bits); it != tables_.given.end()) {
      return it->second;
    }
  }
  return tables_.initial;
}

std::vector<Outcome> TableChannel::support(const History& h) const { return table_for(h); }

Bits TableChannel::draw(const History& h, ChannelRng& rng) {
  const auto& table = table_for(h);
  const double u = uniform_unit(rng);
  double acc = 0.0;
  for (const auto& o : table) {
    acc += o.probability;
    if (u < acc) return o.bits;
  }
  return table.back().bits;
}

// ---------------------------------------------------------------------------

std::unique_ptr<ChannelModel> make_uniform_channel(std::size_t bits, std::uint64_t seed) {
  return std::make_unique<UniformChannel>(bits, seed);
}

std::unique_ptr<ChannelModel> make_biased_channel(std::uint64_t seed) {
  TableChannel::Tables t;
  t.initial = {{Bits::from_string("00"), 0.45},
               {Bits::from_string("01"), 0.25},
               {Bits::from_string("10"), 0.20},
               {Bits::from_string("11"), 0.10}};
  return std::make_unique<TableChannel>(std::move(t), seed);
}

std::unique_ptr<ChannelModel> make_variable_length_channel(std::uint64_t seed) {
  auto ascii = [](std::string_view s) {
    return Bits::from_bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  TableChannel::Tables t;
  t.initial = {{ascii("a"), 0.5}, {ascii("abc"), 0.5}};
  return std::make_unique<TableChannel>(std::move(t), seed);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxViewPaths = std::size_t{1} << 20;
constexpr std::size_t kMaxRejectionAttempts = 1'000'000;

std::string budget_error(const ChannelView& view) {
  return "no " + std::to_string(view.horizon) +
         "-block sequence has binary length below the budget of " +
         std::to_string(view.bit_budget) + " bits";
}

void check_view(const ChannelView& view) {
  if (view.horizon == 0) {
    throw InvalidArgument("channel view horizon must be at least 1");
  }
}

// Depth-first enumeration of budget-respecting paths. Returns false when the
// path count limit is exceeded.
bool enumerate_paths(const ChannelModel& channel, History& h, const ChannelView& view,
                     std::vector<Bits>& prefix, std::size_t used_bits, double mass,
                     std::vector<std::pair<std::vector<Bits>, double>>& out) {
  if (prefix.size() == view.horizon) {
    if (out.size() >= kMaxViewPaths) return false;
    out.emplace_back(prefix, mass);
    return true;
  }
  for (const auto& o : channel.support(h)) {
    const std::size_t total = used_bits + o.bits.size();
    if (total >= view.bit_budget) continue;
    prefix.push_back(o.bits);
    h.append(CoverBlock{o.bits, h.last_timestamp() + 1, {}});
    const bool ok = enumerate_paths(channel, h, view, prefix, total, mass * o.probability, out);
    h.pop_back();
    prefix.pop_back();
    if (!ok) return false;
  }
  return true;
}

}  // namespace

std::vector<std::pair<std::vector<Bits>, double>> view_support(const ChannelModel& channel,
                                                              const History& h,
                                                              const ChannelView& view) {
  check_view(view);
  if (!channel.enumerable()) {
    throw UnsupportedOperation("view_support needs an enumerable channel");
  }
  std::vector<std::pair<std::vector<Bits>, double>> paths;
  History scratch = h;
  std::vector<Bits> prefix;
  if (!enumerate_paths(channel, scratch, view, prefix, 0, 1.0, paths)) {
    throw UnsupportedOperation("view support exceeds the enumeration limit");
  }
  if (paths.empty()) {
    throw ChannelError(budget_error(view));
  }
  double total = 0.0;
  for (const auto& p : paths) total += p.second;
  for (auto& p : paths) p.second /= total;
  return paths;
}

std::vector<CoverBlock> sample_view(ChannelModel& channel, const History& h,
                                    const ChannelView& view) {
  check_view(view);

  if (auto b = channel.block_size()) {
    // Every sequence has the same length: the budget either admits all of
    // them or none.
    if (*b * view.horizon >= view.bit_budget) {
      throw ChannelError(budget_error(view));
    }
    std::vector<CoverBlock> out;
    History running = h;
    for (std::size_t i = 0; i < view.horizon; ++i) {
      out.push_back(channel.sample(running));
      running.append(out.back());
    }
    return out;
  }

  if (channel.enumerable()) {
    // Fails fast with the budget error when the restricted support is empty.
    // Larger supports fall through to rejection sampling.
    try {
      view_support(channel, h, view);
    } catch (const UnsupportedOperation&) {
    }
  }

  // Rejection sampling draws exactly from the renormalized distribution.
  for (std::size_t attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    std::vector<CoverBlock> out;
    History running = h;
    std::size_t used = 0;
    bool fits = true;
    for (std::size_t i = 0; i < view.horizon; ++i) {
      out.push_back(channel.sample(running));
      used += out.back().bits.size();
      if (used >= view.bit_budget) {
        fits = false;
        break;
      }
      running.append(out.back());
    }
    if (fits) return out;
  }
  throw ChannelError(budget_error(view) + " (rejection sampling gave up)");
}

double exact_min_entropy(const ChannelModel& channel, const History& h) {
  if (!channel.enumerable()) {
    throw UnsupportedOperation("exact min-entropy needs an enumerable channel, got '" +
                               channel.describe() + "'");
  }
  double pmax = 0.0;
  for (const auto& o : channel.support(h)) pmax = std::max(pmax, o.probability);
  return -std::log2(pmax);
}

}  // namespace stegolab
