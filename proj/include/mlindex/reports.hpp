#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mlindex/multimap.hpp"

namespace mlindex {

// Cap on enumeration size for the exhaustive oracles.
struct BudgetGuard {
  uint64_t max_candidates = 10'000'000;
};

// Live counter charged as enumeration nodes are visited; throws once the
// guard is exhausted, reporting the level that overflowed.
class Charge {
 public:
  Charge(const BudgetGuard& guard, int64_t level) : limit_(guard.max_candidates), level_(level) {}

  void spend(uint64_t n = 1) {
    spent_ += n;
    if (spent_ > limit_)
      throw BudgetError("enumeration exceeded " + std::to_string(limit_) + " candidates", level_);
  }

  uint64_t spent() const { return spent_; }
  void set_level(int64_t level) { level_ = level; }

 private:
  uint64_t spent_ = 0;
  uint64_t limit_;
  int64_t level_;
};

// Computed index value (alpha or beta flavor) with optional witness bases.
struct IndexReport {
  std::string index;  // alpha | alpha_lambda | alpha_s | beta | beta_lambda | beta_s
  int64_t value = 0;
  std::vector<SubspaceBasis> witness;  // one basis per mode; single entry for
                                       // alternating/symmetric kinds
  std::vector<std::string> flags;
  uint64_t visited = 0;

  // randomized-run metadata (unused by the exhaustive oracles)
  double epsilon = 0.0;
  uint64_t k_per_level = 0;
  bool q_guard_ok = true;
  uint64_t seed = 0;

  bool has_witness() const { return !witness.empty(); }
};

// Exact analytic rank value AR = total_dim - log_q(zero_count).
struct ARValue {
  uint32_t total_dim = 0;
  mpz_class zero_count = 0;
  FieldPtr ctx;

  double value() const {
    double lz = std::log(zero_count.get_d());
    double lq = std::log(static_cast<double>(ctx->q()));
    return static_cast<double>(total_dim) - lz / lq;
  }

  // AR < bound, exactly: total_dim - log_q z < B  <=>  z > q^(total_dim - B).
  bool less_than(int64_t bound) const {
    if (bound > static_cast<int64_t>(total_dim)) return true;  // z >= 1 > q^(negative)
    mpz_class rhs;
    mpz_pow_ui(rhs.get_mpz_t(), ctx->q_big().get_mpz_t(),
               static_cast<unsigned long>(total_dim - bound));
    return zero_count > rhs;
  }

  // AR >= bound (integer), exactly.
  bool at_least(int64_t bound) const { return !less_than(bound); }
};

struct BoundSide {
  bool known = false;
  double value = 0.0;         // numeric rendering (may be irrational bounds)
  mpz_class exact_int = 0;    // exact integer payload when integral
  bool is_exact_int = false;
  std::string provenance;
};

// Lower/upper bracket for subrank, geometric rank, analytic rank or height.
struct BracketReport {
  std::string quantity;  // subrank | geometric_rank | analytic_rank | height
  BoundSide lower, upper;
  std::vector<std::string> guards;  // hypothesis flags, e.g. "q>2dN:ok"
};

}  // namespace mlindex
