#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "stegolab/ec.hpp"

namespace stegolab::testkit {

// Plain-integer affine group law on y^2 = x^3 + 2x + 2 over F_17, written
// independently of the library.
using ToyPoint = std::optional<std::pair<int, int>>;
inline constexpr int kToyP = 17;

inline int toy_inverse(int v) {
  v = ((v % kToyP) + kToyP) % kToyP;
  for (int i = 1; i < kToyP; ++i)
    if (v * i % kToyP == 1) return i;
  return 0;
}

inline ToyPoint toy_add(ToyPoint p, ToyPoint q) {
  if (!p) return q;
  if (!q) return p;
  auto [x1, y1] = *p;
  auto [x2, y2] = *q;
  if (x1 == x2 && (y1 + y2) % kToyP == 0) return std::nullopt;
  int l = (p == q) ? (3 * x1 * x1 + 2) * toy_inverse(2 * y1) : (y2 - y1) * toy_inverse(x2 - x1);
  l = ((l % kToyP) + kToyP) % kToyP;
  const int x3 = ((l * l - x1 - x2) % kToyP + 2 * kToyP) % kToyP;
  const int y3 = ((l * (x1 - x3) - y1) % kToyP + 2 * kToyP) % kToyP;
  return std::make_pair(x3, y3);
}

inline ToyPoint toy_repeat(int k, ToyPoint p) {
  ToyPoint r;
  for (int i = 0; i < k; ++i) r = toy_add(r, p);
  return r;
}

inline CurvePoint lift(const ToyPoint& p) {
  if (!p) return CurvePoint::at_infinity();
  return CurvePoint{p->first, p->second, false};
}

/// Every affine solution by exhaustive search, plus the point at infinity.
inline std::vector<ToyPoint> toy_points() {
  std::vector<ToyPoint> pts{std::nullopt};
  for (int x = 0; x < kToyP; ++x)
    for (int y = 0; y < kToyP; ++y)
      if ((y * y - (x * x * x + 2 * x + 2)) % kToyP == 0) pts.emplace_back(std::make_pair(x, y));
  return pts;
}

}  // namespace stegolab::testkit
