#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "mlindex/randbeta.hpp"

namespace mlindex {

inline mpz_class binom_mpz(uint64_t n, uint64_t k) {
  mpz_class r;
  if (k > n) return 0;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

inline mpz_class pow_mpz(const mpz_class& base, uint64_t e) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(e));
  return r;
}

inline mpz_class ceil_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

// Strict upper bounds implied by the completeness index (finite field q, or
// q = 0 meaning an infinite ground field).
struct CompletenessBounds {
  std::optional<mpz_class> gr_strict_upper;      // infinite fields
  std::optional<mpz_class> ar_strict_upper;      // finite fields
  std::optional<mpz_class> height_strict_upper;  // symmetric kind
  mpz_class lower;                               // beta itself (symmetric chain)
};

inline CompletenessBounds completeness_rank_bounds(uint64_t beta, uint32_t d, MapKind kind,
                                                   uint64_t q /* 0 = infinite */) {
  CompletenessBounds out;
  out.lower = beta;
  mpz_class base;
  switch (kind) {
    case MapKind::general: base = pow_mpz(mpz_class(beta + 1), d); break;
    case MapKind::alternating: base = binom_mpz(beta + 1, d); break;
    case MapKind::symmetric: base = binom_mpz(beta + d, d); break;
  }
  if (kind == MapKind::symmetric) {
    out.height_strict_upper = base;  // beta_S <= height < C(beta_S + d, d)
    out.gr_strict_upper = base;      // same bracket for GR over infinite fields
    return out;
  }
  if (q == 0) {
    out.gr_strict_upper = base;
  } else {
    out.ar_strict_upper =
        mpz_class(d) + base + ceil_div(base * (d - 1), mpz_class(q) - 1);
  }
  return out;
}

struct IsotropyCheck {
  bool holds = false;
  bool pr_lower_defined = false;
  mpz_class implied_pr_lower;  // smallest PR compatible with (m, alpha)
};

// Verifies m <= PR * f(alpha) + g(alpha) for the kind's isotropy bound and
// returns the partition-rank lower bound it implies.
inline IsotropyCheck isotropy_check(uint64_t m, uint32_t d, const mpz_class& pr_upper,
                                    uint64_t alpha, MapKind kind) {
  mpz_class factor, offset;
  switch (kind) {
    case MapKind::general:
      factor = pow_mpz(mpz_class(alpha + 1), d - 1);
      offset = alpha + 1;
      break;
    case MapKind::alternating:
      factor = binom_mpz(alpha, d - 1);
      offset = alpha;
      break;
    case MapKind::symmetric:
      factor = binom_mpz(alpha + d - 1, d - 1);
      offset = alpha;
      break;
  }
  IsotropyCheck out;
  out.holds = mpz_class(m) <= pr_upper * factor + offset;
  mpz_class need = mpz_class(m) - offset;
  if (need <= 0) {
    out.pr_lower_defined = true;
    out.implied_pr_lower = 0;
  } else if (factor > 0) {
    out.pr_lower_defined = true;
    out.implied_pr_lower = ceil_div(need, factor);
  }
  return out;
}

struct RamseyLower {
  mpq_class exact;   // C(s-1,d)/(s-1) * (C(t,d) - 1) + s
  mpz_class floor;
  bool is_integral = false;
};

inline RamseyLower ramsey_lambda_lower(uint32_t d, uint64_t s, uint64_t t) {
  if (s < 2) fail(Errc::InfeasibleRange, "lower-bound formula needs s >= 2");
  if (d < 1) fail(Errc::InfeasibleRange, "need d >= 1");
  RamseyLower out;
  mpq_class frac(binom_mpz(s - 1, d), mpz_class(s - 1));
  frac.canonicalize();
  out.exact = frac * mpq_class(binom_mpz(t, d) - 1) + mpq_class(mpz_class(s));
  out.exact.canonicalize();
  mpz_fdiv_q(out.floor.get_mpz_t(), out.exact.get_num().get_mpz_t(),
             out.exact.get_den().get_mpz_t());
  out.is_integral = (out.exact.get_den() == 1);
  return out;
}

struct AdjustmentMin {
  std::vector<uint64_t> z;
  mpz_class product;
};

// Closed-form minimizer of z_1...z_N subject to sum z_i = c, z_i in [1, q]:
// a block of q's, then ones, then the remainder in the last slot.
inline AdjustmentMin adjustment_min(uint64_t N, uint64_t q, uint64_t c) {
  if (N < 1 || q < 1) fail(Errc::InfeasibleRange, "need N >= 1 and q >= 1");
  if (!(N <= c && c <= q * N)) fail(Errc::InfeasibleRange, "need N <= c <= qN");
  AdjustmentMin out;
  out.z.assign(N, 1);
  if (q == 1) {
    out.product = 1;
    return out;
  }
  uint64_t t = std::min<uint64_t>((c - N) / (q - 1), N - 1);
  uint64_t rem = c - N + 1 - (q - 1) * t;
  for (uint64_t i = 0; i < t; ++i) out.z[i] = q;
  out.z[N - 1] = rem;
  out.product = 1;
  for (uint64_t v : out.z) out.product *= static_cast<unsigned long>(v);
  return out;
}

struct NonzeroPointsBound {
  mpz_class max_zeros;  // q^N - q^(N - ceil(deg/(q-1))), clamped at q^N - 1
  bool clamped = false;
};

inline NonzeroPointsBound nonzero_points_bound(uint64_t q, uint32_t N, uint64_t deg) {
  if (q < 2) fail(Errc::InfeasibleRange, "need a field order q >= 2");
  NonzeroPointsBound out;
  mpz_class qN = pow_mpz(mpz_class(q), N);
  uint64_t e = (deg + q - 2) / (q - 1);  // ceil(deg/(q-1))
  if (e > N) {
    out.max_zeros = qN - 1;
    out.clamped = true;
  } else {
    out.max_zeros = qN - pow_mpz(mpz_class(q), N - e);
  }
  return out;
}

struct GrobnerDegreeBound {
  mpz_class value;  // 2 * ((d^C(h+d,d) + d) / 2)^(2^(n-h-1))
  bool beats_dube = false;  // the paper's comparison condition 2^h > C(h+d,d)
};

inline GrobnerDegreeBound grobner_degree_bound(uint64_t h, uint64_t d, uint64_t n,
                                               uint64_t bit_cap = 1'000'000) {
  if (n < h + 1) fail(Errc::InfeasibleRange, "need n >= h + 1");
  if (d < 1) fail(Errc::InfeasibleRange, "need d >= 1");
  mpz_class C = binom_mpz(h + d, d);
  if (n - h - 1 >= 63) fail(Errc::ExponentOverflow, "tower exponent exceeds 2^63");
  uint64_t outer = 1ULL << (n - h - 1);
  // estimate bit size before committing: log2(inner) * outer
  double log2_inner;
  if (C > 64) {
    double bits_dC = C.get_d() * std::log2(static_cast<double>(d == 1 ? 2 : d));
    log2_inner = bits_dC;  // d^C dominates
  } else {
    mpz_class inner_probe = pow_mpz(mpz_class(d), C.get_ui());
    log2_inner = mpz_sizeinbase(inner_probe.get_mpz_t(), 2);
  }
  if (log2_inner * static_cast<double>(outer) > static_cast<double>(bit_cap))
    fail(Errc::ExponentOverflow, "result exceeds the bit cap");

  mpz_class inner = pow_mpz(mpz_class(d), C.get_ui()) + d;
  inner /= 2;  // d^C + d is always even
  GrobnerDegreeBound out;
  out.value = 2 * pow_mpz(inner, outer);
  out.beats_dube = pow_mpz(mpz_class(2), h) > C;
  return out;
}

// Exact check of beta_hat <= AR / (1 - log_q k):
// beta(1 - log_q k) <= T - log_q z  <=>  z * q^beta <= k^beta * q^T.
inline bool chain_upper_holds(uint64_t beta_hat, const ARValue& ar, uint64_t k) {
  mpz_class lhs = ar.zero_count * pow_mpz(ar.ctx->q_big(), beta_hat);
  mpz_class rhs = pow_mpz(mpz_class(k), beta_hat) * pow_mpz(ar.ctx->q_big(), ar.total_dim);
  return lhs <= rhs;
}

struct BracketSet {
  BracketReport subrank;
  BracketReport geometric_rank;
  BracketReport analytic_rank;
  IndexReport beta_base;            // randomized run over the input field
  std::optional<IndexReport> beta_lifted;  // randomized run over the lifted field
  uint64_t lifted_q = 0;
};

// Probabilistic bracketing of subrank and geometric rank through the
// completeness index: lower bounds from certified witnesses, upper bounds
// from the completeness-index theorem combined with GR <= AR/(1 - log_q k),
// k = d+1 the tensor order. The GR path lifts the field (geometric rank is
// invariant under extension); the subrank and AR paths stay on the input
// field.
inline BracketSet bracket_report(const MultiMap& F, const RandConfig& cfg,
                                 uint64_t lift_threshold_factor = 2) {
  BracketSet out;
  const uint32_t d = F.d();
  const uint64_t k = d + 1;
  uint64_t N = F.codim();
  for (uint32_t n : F.dims()) N += n;

  out.beta_base = beta_randomized(F, cfg);
  uint64_t q = F.ctx()->q();

  auto theorem_bound = [&](uint64_t beta, uint64_t field_q) {
    return completeness_rank_bounds(beta, d, F.kind(), field_q);
  };

  // subrank: beta <= Q always (certified witness), Q <= GR <= upper
  out.subrank.quantity = "subrank";
  out.subrank.lower.known = true;
  out.subrank.lower.value = static_cast<double>(out.beta_base.value);
  out.subrank.lower.exact_int = static_cast<long>(out.beta_base.value);
  out.subrank.lower.is_exact_int = true;
  out.subrank.lower.provenance = "certified completeness-index witness";
  out.subrank.guards.push_back(std::string("q>2dN:") +
                               (out.beta_base.q_guard_ok ? "ok" : "failed"));

  if (F.is_zero()) {
    for (auto* br : {&out.subrank, &out.geometric_rank, &out.analytic_rank}) {
      br->lower.known = true;
      br->lower.value = 0;
      br->lower.exact_int = 0;
      br->lower.is_exact_int = true;
      br->upper.known = true;
      br->upper.value = 0;
      br->upper.exact_int = 0;
      br->upper.is_exact_int = true;
      br->upper.provenance = "zero tensor";
    }
    out.subrank.quantity = "subrank";
    out.geometric_rank.quantity = "geometric_rank";
    out.analytic_rank.quantity = "analytic_rank";
    return out;
  }

  // GR path: lift so that the lifted order clears both the corollary's
  // hypothesis and the 2dN sampling guarantee.
  out.geometric_rank.quantity = "geometric_rank";
  uint64_t threshold = std::max<uint64_t>(k * N, lift_threshold_factor * d * N);
  const MultiMap* gr_map = &F;
  std::optional<MultiMap> lifted;
  FieldPtr lifted_ctx;
  if (q > threshold) {
    out.lifted_q = q;
    out.geometric_rank.guards.push_back("lift:not_needed");
  } else if (F.ctx()->l() == 1) {
    uint64_t l = 1;
    unsigned __int128 ql = F.ctx()->p();
    while (ql <= threshold) {
      ql *= F.ctx()->p();
      ++l;
    }
    lifted_ctx = field_make(F.ctx()->p(), l);
    // prime-subfield coefficients embed with identical packed values
    lifted.emplace(lifted_ctx, F.kind(), F.d(), F.dims(), F.codim(), F.coeffs());
    gr_map = &*lifted;
    out.lifted_q = lifted_ctx->q();
    out.geometric_rank.guards.push_back("lift:GF(" + std::to_string(F.ctx()->p()) + "^" +
                                        std::to_string(l) + ")");
  } else {
    out.geometric_rank.guards.push_back("lift:unsupported_from_extension_field");
  }

  const IndexReport& gr_beta = [&]() -> const IndexReport& {
    if (gr_map == &F) return out.beta_base;
    out.beta_lifted = beta_randomized(*gr_map, cfg);
    return *out.beta_lifted;
  }();

  out.geometric_rank.lower.known = true;
  out.geometric_rank.lower.value = static_cast<double>(gr_beta.value);
  out.geometric_rank.lower.exact_int = static_cast<long>(gr_beta.value);
  out.geometric_rank.lower.is_exact_int = true;
  out.geometric_rank.lower.provenance = "beta <= Q <= GR (extension-invariant)";

  uint64_t gr_q = out.lifted_q ? out.lifted_q : q;
  if (gr_q > k) {
    auto cb = theorem_bound(gr_beta.value, gr_q);
    mpz_class A = cb.ar_strict_upper ? *cb.ar_strict_upper : *cb.gr_strict_upper;
    double denom = 1.0 - std::log(static_cast<double>(k)) / std::log(static_cast<double>(gr_q));
    out.geometric_rank.upper.known = true;
    out.geometric_rank.upper.value = A.get_d() / denom;
    out.geometric_rank.upper.exact_int = A;
    out.geometric_rank.upper.is_exact_int = false;  // the ratio is irrational
    out.geometric_rank.upper.provenance =
        "AR-bound " + A.get_str() + " divided by (1 - log_q k), k = " + std::to_string(k);
    out.geometric_rank.guards.push_back("q>k:ok");
  } else {
    out.geometric_rank.guards.push_back("q>k:failed");
  }

  // subrank upper bound rides the GR upper bound
  out.subrank.upper = out.geometric_rank.upper;

  // AR bracket over the input field
  out.analytic_rank.quantity = "analytic_rank";
  out.analytic_rank.guards.push_back(std::string("q>2dN:") +
                                     (out.beta_base.q_guard_ok ? "ok" : "failed"));
  auto cb = theorem_bound(out.beta_base.value, q);
  if (cb.ar_strict_upper) {
    out.analytic_rank.upper.known = true;
    out.analytic_rank.upper.value = cb.ar_strict_upper->get_d();
    out.analytic_rank.upper.exact_int = *cb.ar_strict_upper;
    out.analytic_rank.upper.is_exact_int = true;
    out.analytic_rank.upper.provenance = "strict completeness-index bound";
  }
  if (q > k) {
    double denom = 1.0 - std::log(static_cast<double>(k)) / std::log(static_cast<double>(q));
    out.analytic_rank.lower.known = true;
    out.analytic_rank.lower.value = static_cast<double>(out.beta_base.value) * denom;
    out.analytic_rank.lower.provenance = "beta * (1 - log_q k) <= GR * (1 - log_q k) <= AR";
  }
  return out;
}

}  // namespace mlindex
