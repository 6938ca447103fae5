#include <benchmark/benchmark.h>

#include <random>

#include "stegolab/ec.hpp"
#include "stegolab/iv.hpp"
#include "stegolab/universal.hpp"

using namespace stegolab;

namespace {

Bits random_bits(std::size_t n, std::mt19937_64& rng) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b.set(i, rng() & 1u);
  return b;
}

void BM_AesPrp(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const AesPermutation aes(SymmetricKey::random(16, rng));
  Bits x = random_bits(128, rng);
  for (auto _ : state) {
    x = aes.apply(x);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_AesPrp);

void BM_SeIv(benchmark::State& state) {
  std::mt19937_64 rng(2);
  auto session = make_iv_session(SymmetricKey::random(16, rng));
  const Bits m = random_bits(128 * static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(se_iv(session, m));
  state.SetBytesProcessed(state.iterations() * state.range(0) * 16);
}
BENCHMARK(BM_SeIv)->Arg(1)->Arg(64);

void BM_MulBaseP256(benchmark::State& state) {
  auto curve = p256_curve();
  std::mt19937_64 rng(3);
  const BigInt k = curve->random_scalar(rng);
  for (auto _ : state) benchmark::DoNotOptimize(curve->mul_base(k));
}
BENCHMARK(BM_MulBaseP256);

void BM_ScalarMulP256(benchmark::State& state) {
  auto curve = p256_curve();
  std::mt19937_64 rng(4);
  const BigInt k = curve->random_scalar(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ec_scalar_mul(k, curve->params().g, curve->params()));
}
BENCHMARK(BM_ScalarMulP256);

// Decode one r = 8 key on P-256, by window enumeration or table lookup.
void BM_SdEc(benchmark::State& state) {
  const bool with_table = state.range(0) != 0;
  std::mt19937_64 rng(5);
  const SymmetricKey key = SymmetricKey::random(16, rng);
  auto enc = make_ec_session(key, p256_curve(), 8);
  auto dec = make_ec_session(key, p256_curve(), 8);
  for (auto _ : state) {
    state.PauseTiming();
    const EcEncoding e = se_ec(enc, static_cast<std::uint32_t>(rng() & 0xFF));
    WindowTable table;
    if (with_table) table = dec.precompute_window(dec.counter().value());
    state.ResumeTiming();
    benchmark::DoNotOptimize(sd_ec(dec, e.q, with_table ? &table : nullptr));
  }
}
BENCHMARK(BM_SdEc)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_PrecomputeWindow(benchmark::State& state) {
  std::mt19937_64 rng(6);
  auto session = make_ec_session(SymmetricKey::random(16, rng), p256_curve(), 8);
  std::uint64_t base = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(session.precompute_window(base));
    base += 256;
  }
}
BENCHMARK(BM_PrecomputeWindow)->Unit(benchmark::kMillisecond);

void BM_UniversalEncode(benchmark::State& state) {
  std::mt19937_64 rng(7);
  UniversalStegoSession session(std::make_shared<AesBitPrf>(SymmetricKey::random(16, rng)),
                                CounterState(0), EccSpec{static_cast<std::size_t>(state.range(0))},
                                make_uniform_channel(8, 8));
  const Bits m = random_bits(64, rng);
  for (auto _ : state) {
    History h;
    benchmark::DoNotOptimize(se_universal(session, m, h));
  }
}
BENCHMARK(BM_UniversalEncode)->Arg(1)->Arg(31);

}  // namespace
