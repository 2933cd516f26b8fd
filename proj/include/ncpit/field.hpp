#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ncpit/error.hpp"

namespace ncpit {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline constexpr u64 kMersenne61 = (u64{1} << 61) - 1;

namespace detail {

inline u64 mulmod_plain(u64 a, u64 b, u64 m) { return static_cast<u64>(u128(a) * b % m); }

inline u64 powmod_plain(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_plain(r, a, m);
    a = mulmod_plain(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

// Deterministic Miller-Rabin; this base set is exact for all 64-bit n.
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % q == 0) return n == q;
  }
  u64 d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (u64 a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
    u64 x = detail::powmod_plain(a % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = detail::mulmod_plain(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Prime field F_p. Elements are raw residues in [0, p).
class Field {
 public:
  Field() : p_(kMersenne61) {}
  explicit Field(u64 p) : p_(p) {
    if (p < 2 || !is_prime_u64(p)) throw Error(Errc::NotPrime, std::to_string(p) + " is not prime");
  }

  u64 modulus() const { return p_; }
  bool operator==(const Field& o) const { return p_ == o.p_; }

  u64 reduce(u64 a) const { return a % p_; }
  u64 from_int(long long v) const {
    if (v >= 0) return static_cast<u64>(v) % p_;
    return neg((static_cast<u64>(-(v + 1)) + 1) % p_);
  }
  u64 add(u64 a, u64 b) const {
    u64 s = a + b;
    return (s >= p_ || s < a) ? s - p_ : s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + (p_ - b); }
  u64 neg(u64 a) const { return a == 0 ? 0 : p_ - a; }
  u64 mul(u64 a, u64 b) const {
    u128 t = u128(a) * b;
    if (p_ == kMersenne61) {
      u64 lo = static_cast<u64>(t & kMersenne61);
      u64 hi = static_cast<u64>(t >> 61);
      u64 s = lo + hi;
      return s >= kMersenne61 ? s - kMersenne61 : s;
    }
    return static_cast<u64>(t % p_);
  }
  // a + b*c
  u64 fma(u64 a, u64 b, u64 c) const { return add(a, mul(b, c)); }
  u64 pow(u64 a, u64 e) const {
    u64 r = 1 % p_;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  u64 inv(u64 a) const {
    if (a % p_ == 0) throw Error(Errc::DivisionByZero, "inverse of zero");
    return pow(a, p_ - 2);
  }
  u64 div(u64 a, u64 b) const { return mul(a, inv(b)); }

 private:
  u64 p_;
};

inline Field make_prime_field(u64 p) { return Field(p); }

// Value type carrying its field, for callers who want operator syntax.
class FieldElement {
 public:
  FieldElement(Field f, u64 v) : f_(f), v_(f.reduce(v)) {}
  u64 value() const { return v_; }
  const Field& field() const { return f_; }

  FieldElement operator+(const FieldElement& o) const { return {f_, f_.add(v_, same(o))}; }
  FieldElement operator-(const FieldElement& o) const { return {f_, f_.sub(v_, same(o))}; }
  FieldElement operator*(const FieldElement& o) const { return {f_, f_.mul(v_, same(o))}; }
  FieldElement operator/(const FieldElement& o) const { return {f_, f_.div(v_, same(o))}; }
  FieldElement operator-() const { return {f_, f_.neg(v_)}; }
  FieldElement pow(u64 e) const { return {f_, f_.pow(v_, e)}; }
  FieldElement inv() const { return {f_, f_.inv(v_)}; }
  bool operator==(const FieldElement& o) const { return f_ == o.f_ && v_ == o.v_; }

 private:
  u64 same(const FieldElement& o) const {
    if (!(f_ == o.f_)) throw Error(Errc::VarSetMismatch, "elements from different fields");
    return o.v_;
  }
  Field f_;
  u64 v_;
};

enum class FieldOp { Add, Sub, Mul, Div, Pow, Inv };

inline FieldElement arithmetic(const FieldElement& a, const FieldElement& b, FieldOp op) {
  switch (op) {
    case FieldOp::Add: return a + b;
    case FieldOp::Sub: return a - b;
    case FieldOp::Mul: return a * b;
    case FieldOp::Div: return a / b;
    case FieldOp::Pow: return a.pow(b.value());
    case FieldOp::Inv: return a.inv();
  }
  return a;
}

// splitmix64 stream. split(label) derives an independent child stream.
class SeededRng {
 public:
  explicit SeededRng(u64 seed = 0) : state_(seed) {}

  u64 next() {
    u64 z = (state_ += 0x9e3779b97f4a7c15ull);
    return mix(z);
  }
  // uniform in [0, bound) by rejection
  u64 below(u64 bound) {
    if (bound <= 1) return 0;
    u64 limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
      u64 v = next();
      if (v < limit) return v % bound;
    }
  }
  int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<u64>(hi - lo + 1))); }
  bool coin() { return next() >> 63; }

  SeededRng split(std::string_view label) const {
    u64 h = 0xcbf29ce484222325ull;
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return SeededRng(mix(state_ ^ mix(h)));
  }
  SeededRng split(u64 index) const { return split("#" + std::to_string(index)); }

 private:
  static u64 mix(u64 z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  u64 state_;
};

inline u64 sample_uniform(const Field& f, SeededRng& rng) { return rng.below(f.modulus()); }

inline u64 sample_nonzero(const Field& f, SeededRng& rng) { return 1 + rng.below(f.modulus() - 1); }

}  // namespace ncpit
