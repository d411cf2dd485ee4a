#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "mlindex/errors.hpp"
#include "mlindex/rng.hpp"

namespace mlindex {

// Packed canonical element of GF(p^l): sum of rep[i]*p^i with rep[i] in [0,p).
// For l = 1 this is just the residue.
using Fq = uint64_t;

namespace detail {

inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline uint64_t powmod_u64(uint64_t a, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return r;
}

inline bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;
  for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace detail

inline uint64_t next_prime_above(uint64_t n) {
  uint64_t c = n + 1;
  if (c <= 2) return 2;
  if (c % 2 == 0) ++c;
  while (!detail::is_prime_u64(c)) c += 2;
  return c;
}

class FieldCtx;
using FieldPtr = std::shared_ptr<const FieldCtx>;

// Description of GF(p^l). Immutable after construction; safe to share across
// threads. All element arithmetic routes through this object.
class FieldCtx {
 public:
  static FieldPtr make(uint64_t p, uint64_t l,
                       std::optional<std::vector<uint64_t>> min_poly = std::nullopt);

  uint64_t p() const { return p_; }
  uint64_t l() const { return l_; }
  uint64_t q() const { return q_; }
  const mpz_class& q_big() const { return q_big_; }
  // Low-degree coefficients (c_0..c_{l-1}) of the monic minimal polynomial;
  // empty when l = 1.
  const std::vector<uint64_t>& min_poly() const { return min_poly_; }

  Fq zero() const { return 0; }
  Fq one() const { return 1 % q_; }

  Fq from_int(int64_t v) const {
    int64_t r = v % static_cast<int64_t>(p_);
    if (r < 0) r += static_cast<int64_t>(p_);
    return static_cast<uint64_t>(r);
  }

  std::vector<uint64_t> rep(Fq a) const {
    std::vector<uint64_t> out(l_);
    for (uint64_t i = 0; i < l_; ++i) {
      out[i] = a % p_;
      a /= p_;
    }
    return out;
  }

  Fq from_rep(const std::vector<uint64_t>& rep) const {
    if (rep.size() != l_) fail(Errc::BadInput, "element coefficient list has wrong length");
    Fq a = 0;
    for (size_t i = rep.size(); i-- > 0;) {
      if (rep[i] >= p_) fail(Errc::BadInput, "element coefficient out of range");
      a = a * p_ + rep[i];
    }
    return a;
  }

  Fq add(Fq a, Fq b) const {
    if (l_ == 1) {
      Fq s = a + b;
      return s >= p_ ? s - p_ : s;
    }
    Fq out = 0, mult = 1;
    for (uint64_t i = 0; i < l_; ++i) {
      uint64_t s = a % p_ + b % p_;
      if (s >= p_) s -= p_;
      out += s * mult;
      mult *= p_;
      a /= p_;
      b /= p_;
    }
    return out;
  }

  Fq neg(Fq a) const {
    if (l_ == 1) return a == 0 ? 0 : p_ - a;
    Fq out = 0, mult = 1;
    for (uint64_t i = 0; i < l_; ++i) {
      uint64_t d = a % p_;
      out += (d == 0 ? 0 : p_ - d) * mult;
      mult *= p_;
      a /= p_;
    }
    return out;
  }

  Fq sub(Fq a, Fq b) const { return add(a, neg(b)); }

  Fq mul(Fq a, Fq b) const {
    if (l_ == 1) return detail::mulmod_u64(a, b, p_);
    if (a == 0 || b == 0) return 0;
    uint64_t da[kMaxExt], db[kMaxExt], prod[2 * kMaxExt];
    decode(a, da);
    decode(b, db);
    const size_t n = l_;
    for (size_t i = 0; i < 2 * n; ++i) prod[i] = 0;
    for (size_t i = 0; i < n; ++i) {
      if (da[i] == 0) continue;
      for (size_t j = 0; j < n; ++j)
        prod[i + j] = (prod[i + j] + detail::mulmod_u64(da[i], db[j], p_)) % p_;
    }
    // reduce modulo the monic minimal polynomial
    for (size_t deg = 2 * n - 2; deg >= n; --deg) {
      uint64_t c = prod[deg];
      if (c == 0) continue;
      prod[deg] = 0;
      for (size_t j = 0; j < n; ++j) {
        uint64_t t = detail::mulmod_u64(c, min_poly_[j], p_);
        uint64_t& slot = prod[deg - n + j];
        slot = (slot + p_ - t) % p_;
      }
    }
    return encode(prod);
  }

  Fq pow(Fq a, uint64_t e) const {
    Fq r = one(), base = a;
    while (e) {
      if (e & 1) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }

  Fq inv(Fq a) const {
    if (a == 0) fail(Errc::DivisionByZero, "inverse of zero");
    if (l_ == 1) return detail::powmod_u64(a, p_ - 2, p_);
    return pow(a, q_ - 2);
  }

  Fq sample_uniform(RngStream& rng) const { return rng.bounded(q_); }

  // Element #k in the canonical enumeration 0, 1, ..., q-1.
  Fq element(uint64_t k) const { return k % q_; }

 private:
  static constexpr size_t kMaxExt = 32;

  FieldCtx(uint64_t p, uint64_t l, std::vector<uint64_t> min_poly)
      : p_(p), l_(l), min_poly_(std::move(min_poly)) {
    q_ = 1;
    for (uint64_t i = 0; i < l_; ++i) q_ *= p_;
    q_big_ = 1;
    mpz_ui_pow_ui(q_big_.get_mpz_t(), static_cast<unsigned long>(p_),
                  static_cast<unsigned long>(l_));
  }

  void decode(Fq a, uint64_t* out) const {
    for (uint64_t i = 0; i < l_; ++i) {
      out[i] = a % p_;
      a /= p_;
    }
  }

  Fq encode(const uint64_t* digits) const {
    Fq a = 0;
    for (size_t i = l_; i-- > 0;) a = a * p_ + digits[i];
    return a;
  }

  uint64_t p_, l_, q_;
  std::vector<uint64_t> min_poly_;  // low l coefficients of the monic min poly
  mpz_class q_big_;
};

namespace detail {

// Remainder of monic-or-not division in GF(p)[x]; poly coefficients low-first.
inline std::vector<uint64_t> poly_mod(std::vector<uint64_t> a, const std::vector<uint64_t>& b,
                                      uint64_t p) {
  while (!a.empty() && a.back() == 0) a.pop_back();
  std::vector<uint64_t> bb = b;
  while (!bb.empty() && bb.back() == 0) bb.pop_back();
  const size_t db = bb.size() - 1;
  uint64_t lead_inv = powmod_u64(bb.back(), p - 2, p);
  while (a.size() > db) {
    uint64_t c = mulmod_u64(a.back(), lead_inv, p);
    size_t shift = a.size() - 1 - db;
    if (c != 0) {
      for (size_t j = 0; j < bb.size(); ++j) {
        uint64_t t = mulmod_u64(c, bb[j], p);
        a[shift + j] = (a[shift + j] + p - t) % p;
      }
    }
    a.pop_back();
    while (!a.empty() && a.back() == 0) a.pop_back();
  }
  return a;
}

// Trial division against every monic polynomial of degree <= deg(f)/2.
inline bool poly_irreducible(const std::vector<uint64_t>& f, uint64_t p) {
  const size_t l = f.size() - 1;
  if (l == 0) return false;
  if (l == 1) return true;
  if (f[0] == 0) return false;  // divisible by x
  for (size_t d = 1; d <= l / 2; ++d) {
    uint64_t count = 1;
    for (size_t i = 0; i < d; ++i) count *= p;
    std::vector<uint64_t> g(d + 1);
    g[d] = 1;
    for (uint64_t k = 0; k < count; ++k) {
      uint64_t kk = k;
      for (size_t i = 0; i < d; ++i) {
        g[i] = kk % p;
        kk /= p;
      }
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

}  // namespace detail

inline FieldPtr FieldCtx::make(uint64_t p, uint64_t l,
                               std::optional<std::vector<uint64_t>> min_poly) {
  if (!detail::is_prime_u64(p)) fail(Errc::NonPrime, "p = " + std::to_string(p) + " is not prime");
  if (l < 1 || l > kMaxExt) fail(Errc::BadInput, "extension degree out of range");
  // keep q comfortably inside uint64 arithmetic
  long double qf = 1.0L;
  for (uint64_t i = 0; i < l; ++i) qf *= static_cast<long double>(p);
  if (qf > 4.6e18L) fail(Errc::BadInput, "field order too large");

  std::vector<uint64_t> low;
  if (l == 1) {
    if (min_poly && !min_poly->empty()) fail(Errc::BadInput, "min_poly given for prime field");
  } else if (min_poly) {
    if (min_poly->size() != l + 1 || min_poly->back() != 1)
      fail(Errc::BadInput, "min_poly must be monic of degree l");
    std::vector<uint64_t> f = *min_poly;
    for (auto& c : f) c %= p;
    if (f.back() != 1) fail(Errc::BadInput, "min_poly must be monic of degree l");
    if (!detail::poly_irreducible(f, p)) fail(Errc::Reducible, "min_poly is reducible");
    low.assign(f.begin(), f.end() - 1);
  } else {
    // deterministic search: candidates ordered by sum c_i * p^i ascending
    uint64_t count = 1;
    for (uint64_t i = 0; i < l; ++i) count *= p;
    std::vector<uint64_t> f(l + 1);
    f[l] = 1;
    bool found = false;
    for (uint64_t k = 0; k < count; ++k) {
      uint64_t kk = k;
      for (uint64_t i = 0; i < l; ++i) {
        f[i] = kk % p;
        kk /= p;
      }
      if (detail::poly_irreducible(f, p)) {
        found = true;
        break;
      }
    }
    if (!found) fail(Errc::BadInput, "no irreducible polynomial found");  // unreachable
    low.assign(f.begin(), f.end() - 1);
  }
  return FieldPtr(new FieldCtx(p, l, std::move(low)));
}

inline FieldPtr field_make(uint64_t p, uint64_t l,
                           std::optional<std::vector<uint64_t>> min_poly = std::nullopt) {
  return FieldCtx::make(p, l, std::move(min_poly));
}

}  // namespace mlindex
