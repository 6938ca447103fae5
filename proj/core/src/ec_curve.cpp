#include <fstream>
#include <map>
#include <sstream>

#include "stegolab/ec.hpp"

namespace stegolab {

namespace {

// Non-negative residue.
BigInt mod(const BigInt& x, const BigInt& m) {
  BigInt r;
  mpz_mod(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
  return r;
}

void mod_in_place(BigInt& x, const BigInt& m) {
  mpz_mod(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
}

BigInt inverse(const BigInt& x, const BigInt& m) {
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t()) == 0) {
    throw InvalidArgument("element has no inverse modulo the field prime");
  }
  return r;
}

void require_on_curve(const CurvePoint& p, const CurveParams& curve) {
  if (!is_on_curve(p, curve)) {
    throw PointNotOnCurve("point (" + p.x.get_str(16) + ", " + p.y.get_str(16) +
                          ") is not on curve " + curve.name);
  }
}

CurvePoint add_unchecked(const CurvePoint& p, const CurvePoint& q, const CurveParams& c) {
  if (p.infinity) return q;
  if (q.infinity) return p;
  BigInt lambda;
  if (p.x == q.x) {
    if (mod(p.y + q.y, c.p) == 0) return CurvePoint::at_infinity();
    // Doubling: (3x^2 + a) / 2y
    lambda = mod((3 * p.x * p.x + c.a) * inverse(mod(2 * p.y, c.p), c.p), c.p);
  } else {
    lambda = mod((q.y - p.y) * inverse(mod(q.x - p.x, c.p), c.p), c.p);
  }
  CurvePoint r;
  r.x = mod(lambda * lambda - p.x - q.x, c.p);
  r.y = mod(lambda * (p.x - r.x) - p.y, c.p);
  return r;
}

}  // namespace

bool is_on_curve(const CurvePoint& point, const CurveParams& curve) {
  if (point.infinity) return true;
  if (point.x < 0 || point.x >= curve.p || point.y < 0 || point.y >= curve.p) return false;
  const BigInt lhs = mod(point.y * point.y, curve.p);
  const BigInt rhs = mod(point.x * point.x * point.x + curve.a * point.x + curve.b, curve.p);
  return lhs == rhs;
}

void validate_curve(const CurveParams& curve) {
  if (curve.p < 3 || mpz_probab_prime_p(curve.p.get_mpz_t(), 30) == 0) {
    throw InvalidArgument("curve " + curve.name + ": p is not an odd prime");
  }
  const BigInt disc = mod(4 * curve.a * curve.a * curve.a + 27 * curve.b * curve.b, curve.p);
  if (disc == 0) {
    throw InvalidArgument("curve " + curve.name + " is singular (4a^3 + 27b^2 = 0 mod p)");
  }
  if (curve.g.infinity || !is_on_curve(curve.g, curve)) {
    throw InvalidArgument("curve " + curve.name + ": generator is not on the curve");
  }
  if (curve.n < 2 || !ec_scalar_mul(curve.n, curve.g, curve).infinity) {
    throw InvalidArgument("curve " + curve.name + ": n*G is not the point at infinity");
  }
}

CurvePoint ec_add(const CurvePoint& p, const CurvePoint& q, const CurveParams& curve) {
  require_on_curve(p, curve);
  require_on_curve(q, curve);
  return add_unchecked(p, q, curve);
}

CurvePoint ec_negate(const CurvePoint& p, const CurveParams& curve) {
  require_on_curve(p, curve);
  if (p.infinity) return p;
  return CurvePoint{p.x, mod(-p.y, curve.p), false};
}

CurvePoint ec_scalar_mul(const BigInt& k, const CurvePoint& p, const CurveParams& curve) {
  if (k < 0) throw InvalidArgument("scalar must be non-negative");
  require_on_curve(p, curve);
  CurvePoint acc = CurvePoint::at_infinity();
  const std::size_t bits = mpz_sizeinbase(k.get_mpz_t(), 2);
  for (std::size_t i = bits; i-- > 0;) {
    acc = add_unchecked(acc, acc, curve);
    if (mpz_tstbit(k.get_mpz_t(), i)) acc = add_unchecked(acc, p, curve);
  }
  return acc;
}

// ---------------------------------------------------------------------------

Curve::Curve(CurveParams params) : params_(std::move(params)) {
  validate_curve(params_);
  field_bytes_ = (mpz_sizeinbase(params_.p.get_mpz_t(), 2) + 7) / 8;

  const std::size_t bits = mpz_sizeinbase(params_.n.get_mpz_t(), 2);
  const std::size_t windows = (bits + kCombBits - 1) / kCombBits;
  comb_.resize(windows);
  CurvePoint base = params_.g;
  for (std::size_t i = 0; i < windows; ++i) {
    auto& row = comb_[i];
    row.reserve((1u << kCombBits) - 1);
    CurvePoint acc = CurvePoint::at_infinity();
    for (unsigned v = 1; v < (1u << kCombBits); ++v) {
      acc = add_unchecked(acc, base, params_);
      row.push_back(acc);
    }
    base = add_unchecked(row.back(), base, params_);  // 2^kCombBits * base
  }
}

void Curve::double_in_place(Jacobian& pt) const {
  if (pt.infinity) return;
  const BigInt& p = params_.p;
  if (pt.y == 0) {
    pt.infinity = true;
    return;
  }
  BigInt yy = pt.y * pt.y;
  mod_in_place(yy, p);
  BigInt s = 4 * pt.x * yy;
  mod_in_place(s, p);
  BigInt zz = pt.z * pt.z;
  mod_in_place(zz, p);
  BigInt m = 3 * pt.x * pt.x + params_.a * zz * zz;
  mod_in_place(m, p);
  BigInt x3 = m * m - 2 * s;
  mod_in_place(x3, p);
  BigInt y3 = m * (s - x3) - 8 * yy * yy;
  mod_in_place(y3, p);
  BigInt z3 = 2 * pt.y * pt.z;
  mod_in_place(z3, p);
  pt.x = std::move(x3);
  pt.y = std::move(y3);
  pt.z = std::move(z3);
}

void Curve::add_affine(Jacobian& acc, const CurvePoint& q) const {
  if (q.infinity) return;
  if (acc.infinity) {
    acc.x = q.x;
    acc.y = q.y;
    acc.z = 1;
    acc.infinity = false;
    return;
  }
  const BigInt& p = params_.p;
  BigInt z1z1 = acc.z * acc.z;
  mod_in_place(z1z1, p);
  BigInt u2 = q.x * z1z1;
  mod_in_place(u2, p);
  BigInt s2 = q.y * acc.z;
  mod_in_place(s2, p);
  s2 *= z1z1;
  mod_in_place(s2, p);
  BigInt h = u2 - acc.x;
  mod_in_place(h, p);
  BigInt r = s2 - acc.y;
  mod_in_place(r, p);
  if (h == 0) {
    if (r == 0) {
      double_in_place(acc);
    } else {
      acc.infinity = true;
    }
    return;
  }
  BigInt hh = h * h;
  mod_in_place(hh, p);
  BigInt hhh = hh * h;
  mod_in_place(hhh, p);
  BigInt v = acc.x * hh;
  mod_in_place(v, p);
  BigInt x3 = r * r - hhh - 2 * v;
  mod_in_place(x3, p);
  BigInt y3 = r * (v - x3) - acc.y * hhh;
  mod_in_place(y3, p);
  BigInt z3 = acc.z * h;
  mod_in_place(z3, p);
  acc.x = std::move(x3);
  acc.y = std::move(y3);
  acc.z = std::move(z3);
}

CurvePoint Curve::to_affine(const Jacobian& pt) const {
  if (pt.infinity) return CurvePoint::at_infinity();
  const BigInt zinv = inverse(pt.z, params_.p);
  const BigInt zinv2 = mod(zinv * zinv, params_.p);
  return CurvePoint{mod(pt.x * zinv2, params_.p), mod(pt.y * zinv2 * zinv, params_.p), false};
}

Curve::Jacobian Curve::comb(const BigInt& k) const {
  const BigInt e = mod(k, params_.n);
  Jacobian acc;
  for (std::size_t i = 0; i < comb_.size(); ++i) {
    unsigned v = 0;
    for (unsigned bit = 0; bit < kCombBits; ++bit) {
      if (mpz_tstbit(e.get_mpz_t(), i * kCombBits + bit)) v |= 1u << bit;
    }
    if (v != 0) add_affine(acc, comb_[i][v - 1]);
  }
  return acc;
}

CurvePoint Curve::mul_base(const BigInt& k) const { return to_affine(comb(k)); }

bool Curve::mul_base_equals(const BigInt& k, const CurvePoint& q) const {
  const Jacobian j = comb(k);
  if (j.infinity || q.infinity) return j.infinity && q.infinity;
  const BigInt& p = params_.p;
  const BigInt zz = mod(j.z * j.z, p);
  if (mod(q.x * zz, p) != j.x) return false;
  return mod(q.y * zz * j.z, p) == j.y;
}

Bytes Curve::encode_point(const CurvePoint& point) const {
  if (point.infinity) throw InvalidArgument("the point at infinity has no uncompressed encoding");
  Bytes out(encoded_point_bytes(), 0);
  out[0] = 0x04;
  auto put = [&](const BigInt& v, std::size_t offset) {
    std::size_t count = 0;
    Bytes tmp(field_bytes_);
    mpz_export(tmp.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
    std::copy_n(tmp.begin(), count, out.begin() + static_cast<std::ptrdiff_t>(offset + field_bytes_ - count));
  };
  put(point.x, 1);
  put(point.y, 1 + field_bytes_);
  return out;
}

CurvePoint Curve::decode_point(std::span<const std::uint8_t> data) const {
  if (data.size() != encoded_point_bytes() || data[0] != 0x04) {
    throw PointNotOnCurve("malformed point encoding (" + std::to_string(data.size()) +
                          " bytes, expected " + std::to_string(encoded_point_bytes()) + ")");
  }
  CurvePoint pt;
  mpz_import(pt.x.get_mpz_t(), field_bytes_, 1, 1, 1, 0, data.data() + 1);
  mpz_import(pt.y.get_mpz_t(), field_bytes_, 1, 1, 1, 0, data.data() + 1 + field_bytes_);
  require_on_curve(pt, params_);
  return pt;
}

BigInt Curve::random_scalar(std::mt19937_64& rng) const {
  const std::size_t nbytes = (mpz_sizeinbase(params_.n.get_mpz_t(), 2) + 64 + 7) / 8;
  Bytes buf(nbytes);
  for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
  BigInt v;
  mpz_import(v.get_mpz_t(), buf.size(), 1, 1, 1, 0, buf.data());
  return mod(v, params_.n - 1) + 1;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Curve> toy_curve() {
  static const auto curve = std::make_shared<const Curve>(
      CurveParams{"toy-f17", 17, 2, 2, CurvePoint{5, 1, false}, 19});
  return curve;
}

std::shared_ptr<const Curve> p256_curve() {
  static const auto curve = std::make_shared<const Curve>(parse_curve(R"(
name=P-256
p=ffffffff00000001000000000000000000000000ffffffffffffffffffffffff
a=ffffffff00000001000000000000000000000000fffffffffffffffffffffffc
b=5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b
gx=6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296
gy=4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5
n=ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551
)"));
  return curve;
}

CurveParams parse_curve(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::map<std::string, std::string> fields;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("curve line " + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (!fields.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ParseError("curve field '" + key + "' given twice");
    }
  }
  auto hex = [&](const char* key) {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError(std::string("curve file lacks '") + key + "='");
    BigInt v;
    if (it->second.empty() || v.set_str(it->second, 16) != 0) {
      throw ParseError(std::string("curve field '") + key + "' is not hex");
    }
    return v;
  };
  CurveParams params;
  params.name = fields.contains("name") ? fields["name"] : "custom";
  params.p = hex("p");
  params.a = hex("a");
  params.b = hex("b");
  params.g = CurvePoint{hex("gx"), hex("gy"), false};
  params.n = hex("n");
  return params;
}

CurveParams load_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open curve file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_curve(buf.str());
}

}  // namespace stegolab
