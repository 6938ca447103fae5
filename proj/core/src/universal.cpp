#include "stegolab/universal.hpp"

#include <sstream>

#include "stegolab/error.hpp"

namespace stegolab {

namespace {

void check_ecc(const EccSpec& ecc) {
  if (ecc.repeat == 0 || ecc.repeat % 2 == 0) {
    throw InvalidArgument("repetition factor must be odd and positive, got " +
                          std::to_string(ecc.repeat));
  }
}

}  // namespace

Bits ecc_encode(const Bits& message, const EccSpec& ecc) {
  check_ecc(ecc);
  Bits out(message.size() * ecc.repeat);
  for (std::size_t i = 0; i < message.size(); ++i) {
    if (!message[i]) continue;
    for (std::size_t j = 0; j < ecc.repeat; ++j) out.set(i * ecc.repeat + j, true);
  }
  return out;
}

Bits ecc_decode(const Bits& codeword, const EccSpec& ecc) {
  check_ecc(ecc);
  if (codeword.size() % ecc.repeat != 0) {
    throw InvalidArgument("codeword length " + std::to_string(codeword.size()) +
                          " is not a multiple of " + std::to_string(ecc.repeat));
  }
  Bits out(codeword.size() / ecc.repeat);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < ecc.repeat; ++j) ones += codeword[i * ecc.repeat + j];
    out.set(i, 2 * ones > ecc.repeat);
  }
  return out;
}

UniversalStegoSession::UniversalStegoSession(std::shared_ptr<const BitPrf> prf,
                                             CounterState counter, EccSpec ecc,
                                             std::unique_ptr<ChannelModel> channel)
    : prf_(std::move(prf)), counter_(counter), ecc_(ecc), channel_(std::move(channel)) {
  if (!prf_) throw InvalidArgument("universal session needs a PRF");
  check_ecc(ecc_);
  if (channel_ && channel_->min_entropy_bound() < kMinEntropyAdmission) {
    std::ostringstream msg;
    msg << "channel '" << channel_->describe() << "' declares min-entropy "
        << channel_->min_entropy_bound() << " bits; at least " << kMinEntropyAdmission
        << " is required";
    throw ChannelError(msg.str());
  }
}

ChannelModel& UniversalStegoSession::channel() {
  if (!channel_) throw UnsupportedOperation("decode-only session has no channel oracle");
  return *channel_;
}

Stegotext se_universal(UniversalStegoSession& session, const Bits& message, History& h) {
  if (message.empty()) throw InvalidArgument("hiddentext must not be empty");
  ChannelModel& channel = session.channel();
  const Bits encoded = ecc_encode(message, session.ecc());
  if (!session.counter().can_advance(encoded.size())) {
    // Fail before emitting anything rather than part way through.
    session.counter().next(encoded.size());
  }

  Stegotext out;
  out.reserve(encoded.size());
  session.last_draws_ = 0;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const std::uint64_t n = session.counter().next();
    const bool want = encoded[i];
    CoverBlock c = channel.sample(h);
    ++session.last_draws_;
    if (session.prf().evaluate(n, c.bits) != want) {
      c = channel.sample(h);
      ++session.last_draws_;
    }
    h.append(c);
    out.push_back(std::move(c));
  }
  return out;
}

Bits sd_universal_raw(UniversalStegoSession& session, const Stegotext& stegotext) {
  Bits raw(stegotext.size());
  for (std::size_t i = 0; i < stegotext.size(); ++i) {
    const std::uint64_t n = session.counter().next();
    raw.set(i, session.prf().evaluate(n, stegotext[i].bits));
  }
  return raw;
}

Bits sd_universal(UniversalStegoSession& session, const Stegotext& stegotext, const History&) {
  if (stegotext.size() % session.ecc().repeat != 0) {
    throw InvalidArgument("stegotext length is not a multiple of the repetition factor");
  }
  return ecc_decode(sd_universal_raw(session, stegotext), session.ecc());
}

}  // namespace stegolab
