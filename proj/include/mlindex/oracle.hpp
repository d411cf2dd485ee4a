#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mlindex/generators.hpp"
#include "mlindex/reports.hpp"

namespace mlindex {

inline mpz_class gaussian_binomial(uint32_t n, uint32_t k, const mpz_class& q) {
  if (k > n) return 0;
  mpz_class num = 1, den = 1;
  // [n choose k]_q = prod_{i=0}^{k-1} (q^{n-i} - 1) / (q^{i+1} - 1)
  for (uint32_t i = 0; i < k; ++i) {
    mpz_class t;
    mpz_pow_ui(t.get_mpz_t(), q.get_mpz_t(), n - i);
    num *= t - 1;
    mpz_pow_ui(t.get_mpz_t(), q.get_mpz_t(), i + 1);
    den *= t - 1;
  }
  return num / den;
}

// Enumerates the s-dimensional subspaces of GF(q)^n exactly once, as reduced
// row echelon bases: pivot-column combinations in lex order, free entries in
// odometer order (all-zero pattern first).
class SubspaceEnumerator {
 public:
  SubspaceEnumerator(FieldPtr ctx, uint32_t n, uint32_t s)
      : ctx_(std::move(ctx)), n_(n), s_(s) {
    if (s_ > n_) {
      done_ = true;
      return;
    }
    pivots_.resize(s_);
    for (uint32_t i = 0; i < s_; ++i) pivots_[i] = i;
    init_free_positions();
  }

  // Writes the next basis (s rows of length n) and returns true, or returns
  // false when exhausted.
  bool next(std::vector<std::vector<Fq>>& out) {
    if (done_) return false;
    emit(out);
    advance();
    return true;
  }

 private:
  void init_free_positions() {
    free_pos_.clear();
    std::vector<bool> is_pivot(n_, false);
    for (uint32_t p : pivots_) is_pivot[p] = true;
    for (uint32_t i = 0; i < s_; ++i)
      for (uint32_t c = pivots_[i] + 1; c < n_; ++c)
        if (!is_pivot[c]) free_pos_.push_back({i, c});
    free_vals_.assign(free_pos_.size(), 0);
  }

  void emit(std::vector<std::vector<Fq>>& out) const {
    out.assign(s_, std::vector<Fq>(n_, 0));
    for (uint32_t i = 0; i < s_; ++i) out[i][pivots_[i]] = ctx_->one();
    for (size_t k = 0; k < free_pos_.size(); ++k)
      out[free_pos_[k].first][free_pos_[k].second] = ctx_->element(free_vals_[k]);
  }

  void advance() {
    const uint64_t q = ctx_->q();
    for (size_t k = free_vals_.size(); k-- > 0;) {
      if (++free_vals_[k] < q) return;
      free_vals_[k] = 0;
    }
    // next pivot combination in lex order
    int i = static_cast<int>(s_) - 1;
    while (i >= 0 && pivots_[i] == n_ - s_ + i) --i;
    if (i < 0) {
      done_ = true;
      return;
    }
    ++pivots_[i];
    for (uint32_t j = i + 1; j < s_; ++j) pivots_[j] = pivots_[j - 1] + 1;
    init_free_positions();
  }

  FieldPtr ctx_;
  uint32_t n_, s_;
  std::vector<uint32_t> pivots_;
  std::vector<std::pair<uint32_t, uint32_t>> free_pos_;
  std::vector<uint64_t> free_vals_;
  bool done_ = false;
};

// Rank of the flattening V_1 (x) ... (x) V_d -> W, i.e. of the coefficient
// matrix. Upper-bounds dim span F(...) in every kind, which caps the indices.
inline size_t flattening_rank(const MultiMap& F) {
  const uint64_t T = F.store_size();
  if (T == 0) return 0;
  FqMatrix m(F.ctx(), F.codim(), T);
  for (uint32_t j = 0; j < F.codim(); ++j)
    for (uint64_t t = 0; t < T; ++t) m.at(j, t) = F.coeff(j, t);
  return rank(m);
}

inline size_t kernel_dim_of_flattening(const MultiMap& F) {
  uint64_t T = F.store_size();
  return static_cast<size_t>(T) - flattening_rank(F);
}

namespace detail {

// ---------------------------------------------------------------------------
// Interpolation grids.
//
// A maximal minor of the level-s evaluation matrix is multihomogeneous: in
// the coordinates of one sample vector ("block") it is a form of exact degree
// D = (number of rows through that block). A multidegree-(D,...,D) form
// vanishes identically iff it vanishes on a product of per-block point sets
// that are unisolvent for degree-D forms. We use the dehomogenized principal
// lattice {(t_{a_1},...,t_{a_{n-1}}, 1) : a_i >= 0, sum a_i <= D} with
// distinct nodes t_0,...,t_D, which needs q > D. Scanning the product grid
// therefore decides exactly whether a full-rank sample point exists, and the
// maximizing point is itself a witness.
// ---------------------------------------------------------------------------

inline void lattice_points_rec(uint32_t coords, uint32_t budget, std::vector<uint32_t>& cur,
                               std::vector<std::vector<uint32_t>>& out) {
  if (cur.size() == coords) {
    out.push_back(cur);
    return;
  }
  for (uint32_t a = 0; a <= budget; ++a) {
    cur.push_back(a);
    lattice_points_rec(coords, budget - a, cur, out);
    cur.pop_back();
  }
}

// All points of the degree-D principal lattice in n-1 coordinates, ordered by
// total degree then lex; mapped to vectors (t_{a_1},...,t_{a_{n-1}}, 1).
inline std::vector<std::vector<Fq>> lattice_vectors(const FieldCtx& F, uint32_t n, uint32_t D) {
  std::vector<std::vector<uint32_t>> idx;
  if (n == 0) return {};
  {
    std::vector<uint32_t> cur;
    lattice_points_rec(n - 1, D, cur, idx);
  }
  std::stable_sort(idx.begin(), idx.end(), [](const auto& a, const auto& b) {
    uint64_t sa = 0, sb = 0;
    for (uint32_t x : a) sa += x;
    for (uint32_t x : b) sb += x;
    return sa < sb;
  });
  std::vector<std::vector<Fq>> out;
  out.reserve(idx.size());
  for (const auto& a : idx) {
    std::vector<Fq> v(n);
    for (uint32_t i = 0; i + 1 < n; ++i) v[i] = F.element(a[i]);
    v[n - 1] = F.one();
    out.push_back(std::move(v));
  }
  return out;
}

// All q^n vectors of GF(q)^n in code order (small-q exhaustive fallback).
inline std::vector<std::vector<Fq>> all_vectors(const FieldCtx& F, uint32_t n) {
  uint64_t total = 1;
  for (uint32_t i = 0; i < n; ++i) total *= F.q();
  std::vector<std::vector<Fq>> out;
  out.reserve(total);
  for (uint64_t code = 0; code < total; ++code) {
    std::vector<Fq> v(n);
    uint64_t c = code;
    for (uint32_t i = 0; i < n; ++i) {
      v[i] = F.element(c % F.q());
      c /= F.q();
    }
    out.push_back(std::move(v));
  }
  return out;
}

// Degree of one sample-vector block in a maximal minor of the level-s
// evaluation matrix (= number of rows through the block, counted with
// multiplicity for the symmetric kind).
inline uint32_t block_degree(MapKind kind, uint32_t d, uint32_t s) {
  switch (kind) {
    case MapKind::general: {
      uint32_t r = 1;
      for (uint32_t i = 0; i + 1 < d; ++i) r *= s;
      return r;
    }
    case MapKind::alternating:
      return s == 0 ? 0 : static_cast<uint32_t>(binom_u64(s - 1, d - 1));
    case MapKind::symmetric: {
      uint32_t total = 0;
      for (const auto& t : nondecreasing_tuples(s, d))
        total += static_cast<uint32_t>(std::count(t.begin(), t.end(), 0u));
      return total;
    }
  }
  return 0;
}

// Coefficients reordered to [domain tuple][codim] for fast mode contraction.
inline std::vector<Fq> base_tensor(const MultiMap& F) {
  const uint64_t T = F.store_size();
  std::vector<Fq> base(T * F.codim());
  for (uint32_t j = 0; j < F.codim(); ++j)
    for (uint64_t t = 0; t < T; ++t) base[t * F.codim() + j] = F.coeff(j, t);
  return base;
}

// Level-s scan for general-kind maps over per-mode point sets: decides
// whether some choice of s sample vectors per mode makes all s^d evaluation
// rows linearly independent. Runs mode-major with cached contractions and
// prunes on any dependence among completed layers.
class GeneralLevelScan {
 public:
  GeneralLevelScan(const MultiMap& F, uint32_t s,
                   std::vector<std::vector<std::vector<Fq>>> points, Charge& charge)
      : F_(F), s_(s), points_(std::move(points)), charge_(charge) {
    d_ = F.d();
    codim_ = F.codim();
    rest_.resize(d_ + 1);
    rest_[d_] = codim_;
    for (int i = static_cast<int>(d_) - 1; i >= 0; --i) rest_[i] = rest_[i + 1] * F.dims()[i];
    layers_.resize(d_ + 1);
    layers_[0] = base_tensor(F);
    uint64_t prefixes = 1;
    for (uint32_t i = 1; i <= d_; ++i) {
      prefixes *= s_;
      layers_[i].assign(prefixes * rest_[i], 0);
    }
    vecs_.assign(d_, std::vector<std::vector<Fq>>(s_));
  }

  std::optional<std::vector<std::vector<std::vector<Fq>>>> run() {
    RowSpan span(F_.ctx(), codim_);
    if (recurse(0, 0, span)) return vecs_;
    return std::nullopt;
  }

 private:
  // Contract layer (mode-1, prefix p) with v into layer (mode, p*s + slot).
  void contract(uint32_t mode, uint32_t slot, const std::vector<Fq>& v) {
    const FieldCtx& K = *F_.ctx();
    const uint64_t out_sz = rest_[mode];
    const uint32_t n = F_.dims()[mode - 1];
    uint64_t prefixes = 1;
    for (uint32_t i = 1; i < mode; ++i) prefixes *= s_;
    for (uint64_t p = 0; p < prefixes; ++p) {
      const Fq* src = layers_[mode - 1].data() + p * rest_[mode - 1];
      Fq* dst = layers_[mode].data() + (p * s_ + slot) * out_sz;
      for (uint64_t k = 0; k < out_sz; ++k) dst[k] = 0;
      for (uint32_t a = 0; a < n; ++a) {
        Fq c = v[a];
        if (c == 0) continue;
        const Fq* blk = src + a * out_sz;
        for (uint64_t k = 0; k < out_sz; ++k)
          if (blk[k] != 0) dst[k] = K.add(dst[k], K.mul(c, blk[k]));
      }
    }
  }

  // Assign slots of every mode in order; the last mode feeds completed rows
  // into the eliminator. `span` carries rows completed so far.
  bool recurse(uint32_t mode, uint32_t slot, RowSpan& span) {
    if (mode == d_) return span.rank() == tuple_count(MapKind::general, d_, s_);
    const bool last_mode = (mode + 1 == d_);
    for (const auto& v : points_[mode]) {
      charge_.spend();
      vecs_[mode][slot] = v;
      contract(mode + 1, slot, v);
      if (last_mode) {
        RowSpan child = span;
        uint64_t prefixes = 1;
        for (uint32_t i = 0; i + 1 < d_; ++i) prefixes *= s_;
        bool ok = true;
        for (uint64_t p = 0; p < prefixes && ok; ++p)
          ok = child.add(layers_[d_].data() + (p * s_ + slot) * codim_);
        if (!ok) continue;
        if (slot + 1 == s_) {
          if (child.rank() == tuple_count(MapKind::general, d_, s_)) return true;
          continue;
        }
        if (recurse(mode, slot + 1, child)) return true;
      } else {
        if (slot + 1 == s_) {
          if (!layer_independent(mode + 1)) continue;
          if (recurse(mode + 1, 0, span)) return true;
        } else {
          if (recurse(mode, slot + 1, span)) return true;
        }
      }
    }
    return false;
  }

  // Any linear dependence among completed mode-layers propagates to the final
  // rows (grouped by suffix tuple), so dependent layers cannot extend to a
  // full-rank point.
  bool layer_independent(uint32_t mode) {
    uint64_t prefixes = 1;
    for (uint32_t i = 0; i < mode; ++i) prefixes *= s_;
    RowSpan rs(F_.ctx(), rest_[mode]);
    for (uint64_t p = 0; p < prefixes; ++p)
      if (!rs.add(layers_[mode].data() + p * rest_[mode])) return false;
    return true;
  }

  const MultiMap& F_;
  uint32_t s_, d_, codim_;
  std::vector<std::vector<std::vector<Fq>>> points_;
  Charge& charge_;
  std::vector<uint64_t> rest_;
  std::vector<std::vector<Fq>> layers_;
  std::vector<std::vector<std::vector<Fq>>> vecs_;
};

// Level-s scan for alternating/symmetric maps over a single point set: slot j
// completes the canonical tuples whose maximum entry is j.
class SingleModeLevelScan {
 public:
  SingleModeLevelScan(const MultiMap& F, uint32_t s, std::vector<std::vector<Fq>> points,
                      Charge& charge)
      : F_(F), s_(s), points_(std::move(points)), charge_(charge) {
    all_tuples_ = F.kind() == MapKind::alternating ? increasing_tuples(s, F.d())
                                                   : nondecreasing_tuples(s, F.d());
    rows_by_max_.assign(s_, {});
    for (const auto& t : all_tuples_) rows_by_max_[t.back()].push_back(t);
    vecs_.resize(s_);
  }

  std::optional<std::vector<std::vector<Fq>>> run() {
    RowSpan span(F_.ctx(), F_.codim());
    if (recurse(0, span)) return vecs_;
    return std::nullopt;
  }

 private:
  bool recurse(uint32_t slot, RowSpan& span) {
    if (slot == s_) return span.rank() == all_tuples_.size();
    std::vector<std::vector<Fq>> args(F_.d());
    std::vector<Fq> out;
    for (const auto& v : points_) {
      charge_.spend();
      vecs_[slot] = v;
      RowSpan child = span;
      bool ok = true;
      for (const auto& t : rows_by_max_[slot]) {
        for (uint32_t b = 0; b < F_.d(); ++b) args[b] = vecs_[t[b]];
        F_.evaluate(args, out);
        if (!child.add(out)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      if (recurse(slot + 1, child)) return true;
    }
    return false;
  }

  const MultiMap& F_;
  uint32_t s_;
  std::vector<std::vector<Fq>> points_;
  Charge& charge_;
  std::vector<std::vector<uint32_t>> all_tuples_;
  std::vector<std::vector<std::vector<uint32_t>>> rows_by_max_;
  std::vector<std::vector<Fq>> vecs_;
};

// Structured witness candidates tried before any exhaustive scan: the digit
// bases behind the identity-family closed form, coordinate windows, the
// diagonal/circulant pair behind the matrix-multiplication closed form, and a
// fixed-seed random pool. Any hit is certified by a full-rank recheck, so
// these are sound shortcuts regardless of the map.
inline std::vector<std::vector<std::vector<std::vector<Fq>>>> witness_candidates(
    const MultiMap& F, uint32_t s, uint32_t random_pool) {
  const FieldCtx& K = *F.ctx();
  const uint32_t d = F.d();
  const size_t modes = F.kind() == MapKind::general ? d : 1;
  std::vector<std::vector<std::vector<std::vector<Fq>>>> out;

  auto mode_dim = [&](size_t i) { return F.dims()[F.kind() == MapKind::general ? i : 0]; };

  // digit indicator vectors v_t[k] = [digit_i(k, base s) == t]
  {
    std::vector<std::vector<std::vector<Fq>>> cand(modes);
    bool usable = true;
    for (size_t i = 0; i < modes && usable; ++i) {
      uint32_t n = mode_dim(i);
      uint64_t shift = 1;
      for (size_t k = 0; k < i; ++k) shift *= s;
      cand[i].assign(s, std::vector<Fq>(n, 0));
      for (uint32_t k = 0; k < n; ++k) cand[i][(k / shift) % s][k] = K.one();
      for (uint32_t t = 0; t < s && usable; ++t) {
        bool nonzero = false;
        for (Fq x : cand[i][t]) nonzero |= (x != 0);
        usable = nonzero;
      }
    }
    if (usable) out.push_back(std::move(cand));
  }

  // coordinate windows e_{c}, ..., e_{c+s-1}
  for (uint32_t c = 0; c < 4; ++c) {
    std::vector<std::vector<std::vector<Fq>>> cand(modes);
    bool usable = true;
    for (size_t i = 0; i < modes && usable; ++i) {
      uint32_t n = mode_dim(i);
      if (c + s > n) {
        usable = false;
        break;
      }
      cand[i].assign(s, std::vector<Fq>(n, 0));
      for (uint32_t t = 0; t < s; ++t) cand[i][t][c + t] = K.one();
    }
    if (usable) out.push_back(std::move(cand));
  }

  // diagonal x circulant pair for square-shaped bilinear maps
  if (F.kind() == MapKind::general && d == 2) {
    uint32_t n0 = F.dims()[0], n1 = F.dims()[1];
    uint32_t m = static_cast<uint32_t>(std::sqrt(static_cast<double>(n0)) + 0.5);
    if (m * m == n0 && n0 == n1 && s <= m) {
      std::vector<std::vector<std::vector<Fq>>> cand(2);
      cand[0].assign(s, std::vector<Fq>(n0, 0));
      cand[1].assign(s, std::vector<Fq>(n1, 0));
      for (uint32_t t = 0; t < s; ++t) {
        cand[0][t][t * m + t] = K.one();  // E_{tt}
        for (uint32_t a = 0; a < m; ++a) cand[1][t][a * m + (a + t) % m] = K.one();  // C_t
      }
      out.push_back(std::move(cand));
    }
  }

  // fixed-seed random pool; deterministic function of the instance shape
  uint64_t shape_mix = splitmix64(0x77177e55u ^ (uint64_t(d) << 32) ^ s);
  for (uint32_t i = 0; i < modes; ++i) shape_mix = splitmix64(shape_mix ^ mode_dim(i));
  for (uint32_t trial = 0; trial < random_pool; ++trial) {
    RngStream rng = RngStream::derive(shape_mix, {trial});
    std::vector<std::vector<std::vector<Fq>>> cand(modes);
    for (size_t i = 0; i < modes; ++i) {
      cand[i].assign(s, std::vector<Fq>(mode_dim(i)));
      for (auto& v : cand[i])
        for (auto& x : v) x = K.sample_uniform(rng);
    }
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace detail

// Decision of "beta >= s" (kind-appropriate index) with an explicit witness:
// structured candidates first, then the exact interpolation-grid scan when
// q exceeds the block degree, then the exhaustive vector grid for small q.
// Returns the witness families, std::nullopt when refuted.
inline std::optional<std::vector<std::vector<std::vector<Fq>>>> beta_level_decide(
    const MultiMap& F, uint32_t s, Charge& charge, std::vector<std::string>* flags = nullptr) {
  const FieldCtx& K = *F.ctx();
  const uint32_t d = F.d();
  if (s == 0 || s > *std::min_element(F.dims().begin(), F.dims().end())) return std::nullopt;
  const uint64_t rows = tuple_count(F.kind(), d, s);
  if (rows == 0) {
    // Definition 3.1(b) is vacuous below the arity for alternating maps.
    if (flags) flags->push_back("vacuous_level");
    size_t modes = F.kind() == MapKind::general ? d : 1;
    std::vector<std::vector<std::vector<Fq>>> witness(modes);
    for (size_t i = 0; i < modes; ++i) {
      uint32_t n = F.dims()[F.kind() == MapKind::general ? i : 0];
      witness[i].assign(s, std::vector<Fq>(n, 0));
      for (uint32_t t = 0; t < s; ++t) witness[i][t][t] = K.one();
    }
    return witness;
  }
  if (rows > F.codim()) return std::nullopt;  // rank can never reach the row count

  for (auto& cand : detail::witness_candidates(F, s, 200)) {
    charge.spend();
    if (has_full_row_rank(evaluation_matrix(F, cand))) {
      if (flags) flags->push_back("witness_via_candidates");
      return cand;
    }
  }

  const uint32_t D = detail::block_degree(F.kind(), d, s);
  const bool lattice_ok = K.q() > D;
  if (!lattice_ok) {
    // The interpolation argument needs D+1 distinct nodes; for small q fall
    // back to the full vector grid when a per-mode point list is materializable.
    for (uint32_t i = 0; i < (F.kind() == MapKind::general ? d : 1u); ++i) {
      long double per_mode = 1.0L;
      uint32_t n = F.dims()[F.kind() == MapKind::general ? i : 0];
      for (uint32_t c = 0; c < n; ++c) per_mode *= static_cast<long double>(K.q());
      if (per_mode > 4e6L) throw BudgetError("small-field level decision out of reach", s);
    }
  }

  auto points_for_mode = [&](uint32_t n) {
    return lattice_ok ? detail::lattice_vectors(K, n, D) : detail::all_vectors(K, n);
  };
  const char* flag = lattice_ok ? "witness_via_grid" : "witness_via_small_q_grid";

  if (F.kind() == MapKind::general) {
    std::vector<std::vector<std::vector<Fq>>> points(d);
    for (uint32_t i = 0; i < d; ++i) points[i] = points_for_mode(F.dims()[i]);
    detail::GeneralLevelScan scan(F, s, std::move(points), charge);
    if (auto w = scan.run()) {
      if (flags) flags->push_back(flag);
      return w;
    }
    return std::nullopt;
  }
  detail::SingleModeLevelScan scan(F, s, points_for_mode(F.dims()[0]), charge);
  if (auto w = scan.run()) {
    if (flags) flags->push_back(flag);
    return std::vector<std::vector<std::vector<Fq>>>{*w};
  }
  return std::nullopt;
}

inline const char* beta_name(MapKind kind) {
  switch (kind) {
    case MapKind::general: return "beta";
    case MapKind::alternating: return "beta_lambda";
    case MapKind::symmetric: return "beta_s";
  }
  return "beta";
}

inline const char* alpha_name(MapKind kind) {
  switch (kind) {
    case MapKind::general: return "alpha";
    case MapKind::alternating: return "alpha_lambda";
    case MapKind::symmetric: return "alpha_s";
  }
  return "alpha";
}

// Exact completeness index with witness bases. Scans levels downward from the
// span cap (Lemma "basic properties"(b)); the first certified level is beta.
inline IndexReport beta_brute(const MultiMap& F, const BudgetGuard& guard = {}) {
  IndexReport rep;
  rep.index = beta_name(F.kind());
  uint32_t min_dim = *std::min_element(F.dims().begin(), F.dims().end());
  if (F.is_zero() || min_dim == 0) {
    rep.value = 0;
    rep.flags.push_back("zero_map");
    return rep;
  }
  const size_t span_cap = flattening_rank(F);
  uint32_t cap = 0;
  for (uint32_t s = 1; s <= min_dim; ++s)
    if (tuple_count(F.kind(), F.d(), s) <= span_cap || tuple_count(F.kind(), F.d(), s) == 0)
      cap = s;
  Charge charge(guard, cap);
  for (uint32_t s = cap; s >= 1; --s) {
    charge.set_level(s);
    std::vector<std::string> flags;
    auto w = beta_level_decide(F, s, charge, &flags);
    if (w) {
      rep.value = s;
      for (auto& f : flags) rep.flags.push_back(f);
      size_t modes = F.kind() == MapKind::general ? F.d() : 1;
      for (size_t i = 0; i < modes; ++i) {
        uint32_t n = F.dims()[F.kind() == MapKind::general ? i : 0];
        rep.witness.emplace_back(F.ctx(), n, (*w)[i]);
      }
      break;
    }
  }
  rep.visited = charge.spent();
  return rep;
}

// Exact isotropy index: enumerate RREF subspaces in every mode but the last,
// which is solved exactly as the kernel of the stacked constraint matrix.
inline IndexReport alpha_brute(const MultiMap& F, const BudgetGuard& guard = {}) {
  IndexReport rep;
  rep.index = alpha_name(F.kind());
  const FieldCtx& K = *F.ctx();
  const uint32_t d = F.d();
  uint32_t min_dim = *std::min_element(F.dims().begin(), F.dims().end());
  Charge charge(guard, min_dim);

  if (F.kind() != MapKind::general) {
    const uint32_t n = F.dims()[0];
    for (uint32_t s = min_dim; s >= 1; --s) {
      charge.set_level(s);
      auto tuples = F.kind() == MapKind::alternating ? increasing_tuples(s, d)
                                                     : nondecreasing_tuples(s, d);
      SubspaceEnumerator en(F.ctx(), n, s);
      std::vector<std::vector<Fq>> basis;
      std::vector<std::vector<Fq>> args(d);
      std::vector<Fq> out;
      while (en.next(basis)) {
        charge.spend();
        bool vanishes = true;
        for (const auto& t : tuples) {
          for (uint32_t b = 0; b < d; ++b) args[b] = basis[t[b]];
          F.evaluate(args, out);
          for (Fq v : out)
            if (v != 0) {
              vanishes = false;
              break;
            }
          if (!vanishes) break;
        }
        if (vanishes) {
          rep.value = s;
          rep.witness.emplace_back(F.ctx(), n, basis);
          rep.visited = charge.spent();
          return rep;
        }
      }
    }
    rep.value = 0;
    rep.visited = charge.spent();
    return rep;
  }

  // general kind
  std::vector<uint64_t> rest(d + 1);
  rest[d] = F.codim();
  for (int i = static_cast<int>(d) - 1; i >= 0; --i) rest[i] = rest[i + 1] * F.dims()[i];
  const std::vector<Fq> base = detail::base_tensor(F);

  for (uint32_t s = min_dim; s >= 1; --s) {
    charge.set_level(s);
    // layers_[i]: contraction over first i modes, prefix tuples in [s]^i
    std::vector<std::vector<Fq>> layers(d);
    layers[0] = base;
    uint64_t prefixes = 1;
    for (uint32_t i = 1; i < d; ++i) {
      prefixes *= s;
      layers[i].assign(prefixes * rest[i], 0);
    }

    std::vector<SubspaceBasis> witness;
    std::vector<std::vector<std::vector<Fq>>> chosen(d > 0 ? d - 1 : 0);

    auto contract_basis = [&](uint32_t mode, const std::vector<std::vector<Fq>>& basis) {
      const uint64_t out_sz = rest[mode];
      const uint32_t n = F.dims()[mode - 1];
      uint64_t pref = 1;
      for (uint32_t i = 1; i < mode; ++i) pref *= s;
      for (uint64_t p = 0; p < pref; ++p) {
        const Fq* src = layers[mode - 1].data() + p * rest[mode - 1];
        for (uint32_t t = 0; t < s; ++t) {
          Fq* dst = layers[mode].data() + (p * s + t) * out_sz;
          for (uint64_t k = 0; k < out_sz; ++k) dst[k] = 0;
          for (uint32_t a = 0; a < n; ++a) {
            Fq c = basis[t][a];
            if (c == 0) continue;
            const Fq* blk = src + a * out_sz;
            for (uint64_t k = 0; k < out_sz; ++k)
              if (blk[k] != 0) dst[k] = K.add(dst[k], K.mul(c, blk[k]));
          }
        }
      }
    };

    // kernel of the stacked constraints on the last mode
    auto solve_last_mode = [&]() -> std::optional<std::vector<std::vector<Fq>>> {
      const uint32_t n_last = F.dims()[d - 1];
      uint64_t pref = 1;
      for (uint32_t i = 0; i + 1 < d; ++i) pref *= s;
      FqMatrix m(F.ctx(), pref * F.codim(), n_last);
      for (uint64_t p = 0; p < pref; ++p) {
        const Fq* src = layers[d - 1].data() + p * rest[d - 1];
        for (uint32_t j = 0; j < F.codim(); ++j)
          for (uint32_t a = 0; a < n_last; ++a)
            m.at(p * F.codim() + j, a) = src[a * F.codim() + j];
      }
      if (rank(m, n_last - s + 1) > n_last - s) return std::nullopt;
      auto kb = kernel_basis(m);
      kb.resize(s);
      return kb;
    };

    std::function<bool(uint32_t)> rec = [&](uint32_t mode) -> bool {
      if (mode + 1 == d) {
        charge.spend();
        if (auto kb = solve_last_mode()) {
          witness.clear();
          for (uint32_t i = 0; i + 1 < d; ++i)
            witness.emplace_back(F.ctx(), F.dims()[i], chosen[i]);
          witness.emplace_back(F.ctx(), F.dims()[d - 1], *kb);
          return true;
        }
        return false;
      }
      if (s > F.dims()[mode]) return false;
      SubspaceEnumerator en(F.ctx(), F.dims()[mode], s);
      std::vector<std::vector<Fq>> basis;
      while (en.next(basis)) {
        charge.spend();
        chosen[mode] = basis;
        contract_basis(mode + 1, basis);
        if (rec(mode + 1)) return true;
      }
      return false;
    };

    bool found = false;
    if (d == 1) {
      // alpha of a linear map: largest s with an s-dim subspace of the kernel
      FqMatrix m(F.ctx(), F.codim(), F.dims()[0]);
      for (uint32_t j = 0; j < F.codim(); ++j)
        for (uint32_t a = 0; a < F.dims()[0]; ++a) m.at(j, a) = F.coeff(j, a);
      auto kb = kernel_basis(m);
      if (kb.size() >= s) {
        kb.resize(s);
        witness.emplace_back(F.ctx(), F.dims()[0], kb);
        found = true;
      }
    } else {
      found = rec(0);
    }
    if (found) {
      rep.value = s;
      rep.witness = std::move(witness);
      rep.visited = charge.spent();
      return rep;
    }
  }
  rep.value = 0;
  rep.visited = charge.spent();
  return rep;
}

// Exact analytic rank of T_F, contracting the d domain modes: counts the
// zeros of F over the full domain.
inline ARValue analytic_rank_exact(const MultiMap& F, const BudgetGuard& guard = {}) {
  const FieldCtx& K = *F.ctx();
  const uint32_t d = F.d();
  uint32_t total_dim = 0;
  long double size = 1.0L;
  for (uint32_t n : F.dims()) {
    total_dim += n;
    for (uint32_t i = 0; i < n; ++i) size *= static_cast<long double>(K.q());
  }
  if (size > static_cast<long double>(guard.max_candidates))
    throw BudgetError("domain too large for exact analytic rank", -1);

  std::vector<uint64_t> rest(d + 1);
  rest[d] = F.codim();
  for (int i = static_cast<int>(d) - 1; i >= 0; --i) rest[i] = rest[i + 1] * F.dims()[i];

  std::vector<std::vector<Fq>> layers(d + 1);
  layers[0] = detail::base_tensor(F);
  for (uint32_t i = 1; i <= d; ++i) layers[i].assign(rest[i], 0);

  mpz_class zero_count = 0;
  std::vector<std::vector<std::vector<Fq>>> mode_vectors(d);
  for (uint32_t i = 0; i < d; ++i) mode_vectors[i] = detail::all_vectors(K, F.dims()[i]);

  // number of full assignments of modes > i
  auto tail_count = [&](uint32_t mode) {
    mpz_class t = 1;
    for (uint32_t i = mode; i < d; ++i) {
      mpz_class m;
      mpz_pow_ui(m.get_mpz_t(), K.q_big().get_mpz_t(), F.dims()[i]);
      t *= m;
    }
    return t;
  };

  std::function<void(uint32_t)> rec = [&](uint32_t mode) {
    // all-zero partial contraction: every continuation evaluates to zero
    bool all_zero = true;
    for (Fq x : layers[mode])
      if (x != 0) {
        all_zero = false;
        break;
      }
    if (all_zero) {
      zero_count += tail_count(mode);
      return;
    }
    if (mode == d) return;  // nonzero leaf
    const uint32_t n = F.dims()[mode];
    const uint64_t out_sz = rest[mode + 1];
    for (const auto& v : mode_vectors[mode]) {
      const Fq* src = layers[mode].data();
      Fq* dst = layers[mode + 1].data();
      for (uint64_t k = 0; k < out_sz; ++k) dst[k] = 0;
      for (uint32_t a = 0; a < n; ++a) {
        Fq c = v[a];
        if (c == 0) continue;
        const Fq* blk = src + a * out_sz;
        for (uint64_t k = 0; k < out_sz; ++k)
          if (blk[k] != 0) dst[k] = K.add(dst[k], K.mul(c, blk[k]));
      }
      rec(mode + 1);
    }
  };
  rec(0);

  ARValue ar;
  ar.total_dim = total_dim;
  ar.zero_count = zero_count;
  ar.ctx = F.ctx();
  return ar;
}

// Witness for I_r being a restriction of T_F: maps g_i on the domain modes
// are enumerated; the codomain map is solved per diagonal row as a linear
// system. Returns the maps (g_1..g_d, g_{d+1}) row-major, or nullopt.
struct SubrankWitness {
  std::vector<FqMatrix> domain_maps;  // r x n_i
  FqMatrix codomain_map;              // r x codim
  SubrankWitness() : codomain_map(nullptr, 0, 0) {}
};

inline std::optional<SubrankWitness> subrank_witness(const MultiMap& F, uint32_t r,
                                                     const BudgetGuard& guard = {}) {
  if (r == 0) return SubrankWitness{};
  const FieldCtx& K = *F.ctx();
  const uint32_t d = F.d();
  Charge charge(guard, r);

  std::vector<uint64_t> rest(d + 1);
  rest[d] = F.codim();
  for (int i = static_cast<int>(d) - 1; i >= 0; --i) rest[i] = rest[i + 1] * F.dims()[i];

  std::vector<std::vector<Fq>> layers(d + 1);
  layers[0] = detail::base_tensor(F);
  uint64_t prefixes = 1;
  for (uint32_t i = 1; i <= d; ++i) {
    prefixes *= r;
    layers[i].assign(prefixes * rest[i], 0);
  }

  std::vector<std::vector<std::vector<Fq>>> chosen(d);
  std::vector<std::vector<Fq>> pool_scratch;

  auto contract_rows = [&](uint32_t mode, const std::vector<std::vector<Fq>>& rows) {
    const uint64_t out_sz = rest[mode];
    const uint32_t n = F.dims()[mode - 1];
    uint64_t pref = 1;
    for (uint32_t i = 1; i < mode; ++i) pref *= r;
    for (uint64_t p = 0; p < pref; ++p) {
      const Fq* src = layers[mode - 1].data() + p * rest[mode - 1];
      for (uint32_t t = 0; t < r; ++t) {
        Fq* dst = layers[mode].data() + (p * r + t) * out_sz;
        for (uint64_t k = 0; k < out_sz; ++k) dst[k] = 0;
        for (uint32_t a = 0; a < n; ++a) {
          Fq c = rows[t][a];
          if (c == 0) continue;
          const Fq* blk = src + a * out_sz;
          for (uint64_t k = 0; k < out_sz; ++k)
            if (blk[k] != 0) dst[k] = K.add(dst[k], K.mul(c, blk[k]));
        }
      }
    }
  };

  // Solve X (r x codim) with X * S[a-vec] = e_rho when a-vec is diagonal rho,
  // 0 otherwise: r independent linear systems over the codomain.
  auto solve_codomain = [&]() -> std::optional<FqMatrix> {
    uint64_t pref = 1;
    for (uint32_t i = 0; i < d; ++i) pref *= r;
    FqMatrix X(F.ctx(), r, F.codim());
    for (uint32_t rho = 0; rho < r; ++rho) {
      // augmented system: columns S[a], target [a == diag(rho)]
      FqMatrix aug(F.ctx(), pref, F.codim() + 1);
      for (uint64_t p = 0; p < pref; ++p) {
        const Fq* src = layers[d].data() + p * F.codim();
        for (uint32_t j = 0; j < F.codim(); ++j) aug.at(p, j) = src[j];
        uint64_t pp = p;
        bool diag = true;
        uint32_t first = 0;
        for (uint32_t i = 0; i < d; ++i) {
          uint32_t digit = static_cast<uint32_t>(pp % r);
          pp /= r;
          if (i == 0) first = digit;
          diag &= (digit == first);
        }
        aug.at(p, F.codim()) = (diag && first == rho) ? K.one() : 0;
      }
      auto pivots = rref_in_place(aug);
      // inconsistent iff a pivot lands in the target column
      for (size_t c : pivots)
        if (c == F.codim()) return std::nullopt;
      for (uint32_t j = 0; j < F.codim(); ++j) X.at(rho, j) = 0;
      for (size_t i = 0; i < pivots.size(); ++i) X.at(rho, pivots[i]) = aug.at(i, F.codim());
    }
    return X;
  };

  std::function<bool(uint32_t)> rec = [&](uint32_t mode) -> bool {
    if (mode == d) {
      charge.spend();
      return solve_codomain().has_value();
    }
    const uint32_t n = F.dims()[mode];
    uint64_t total = 1;
    for (uint32_t i = 0; i < r * n; ++i) total *= K.q();
    std::vector<std::vector<Fq>> rows(r, std::vector<Fq>(n, 0));
    for (uint64_t code = 0; code < total; ++code) {
      charge.spend();
      uint64_t c = code;
      for (uint32_t t = 0; t < r; ++t)
        for (uint32_t a = 0; a < n; ++a) {
          rows[t][a] = K.element(c % K.q());
          c /= K.q();
        }
      chosen[mode] = rows;
      contract_rows(mode + 1, rows);
      if (rec(mode + 1)) return true;
    }
    return false;
  };

  if (!rec(0)) return std::nullopt;

  SubrankWitness w;
  for (uint32_t i = 0; i < d; ++i) {
    FqMatrix g(F.ctx(), r, F.dims()[i]);
    for (uint32_t t = 0; t < r; ++t)
      for (uint32_t a = 0; a < F.dims()[i]; ++a) g.at(t, a) = chosen[i][t][a];
    w.domain_maps.push_back(std::move(g));
  }
  w.codomain_map = *solve_codomain();
  return w;
}

// Largest r with a subrank witness (exhaustive; exact within budget).
inline uint32_t subrank_brute(const MultiMap& F, const BudgetGuard& guard = {}) {
  uint32_t cap = std::min<uint32_t>(*std::min_element(F.dims().begin(), F.dims().end()),
                                    F.codim());
  uint32_t best = 0;
  for (uint32_t r = 1; r <= cap; ++r) {
    if (subrank_witness(F, r, guard))
      best = r;
    else
      break;
  }
  return best;
}

// Partition-rank-one detection: some bipartition of the d+1 tensor modes
// flattens T_F to a rank-<=1 matrix.
struct PrOneFactoring {
  std::vector<uint32_t> part_a;  // mode indices (0..d-1 domain, d codomain)
  std::vector<uint32_t> part_b;
  std::vector<Fq> factor_a, factor_b;  // flattened factors, T = a (x) b
};

inline std::optional<PrOneFactoring> pr_one_test(const MultiMap& F, bool* zero_tensor = nullptr) {
  if (F.kind() != MapKind::general) fail(Errc::KindMismatch, "pr_one_test expects a general store");
  const FieldCtx& K = *F.ctx();
  const uint32_t k = F.d() + 1;  // tensor order
  if (zero_tensor) *zero_tensor = false;
  if (F.is_zero()) {
    if (zero_tensor) *zero_tensor = true;
    return std::nullopt;
  }
  std::vector<uint32_t> axis_dims(F.dims());
  axis_dims.push_back(F.codim());

  const uint64_t total = F.store_size() * F.codim();
  for (uint32_t mask = 1; mask < (1u << k) - 1; ++mask) {
    if (!(mask & 1)) continue;  // canonical side contains axis 0
    uint64_t ra = 1, rb = 1;
    for (uint32_t i = 0; i < k; ++i) (mask >> i & 1 ? ra : rb) *= axis_dims[i];
    FqMatrix m(F.ctx(), ra, rb);
    std::vector<uint32_t> idx(k, 0);
    for (uint64_t flat = 0; flat < total; ++flat) {
      // axis order: domain modes then codomain; domain row-major, j slowest in
      // the store means we decode from the combined layout
      uint64_t rowi = 0, coli = 0;
      for (uint32_t i = 0; i < k; ++i) {
        if (mask >> i & 1)
          rowi = rowi * axis_dims[i] + idx[i];
        else
          coli = coli * axis_dims[i] + idx[i];
      }
      uint64_t tuple = 0;
      for (uint32_t i = 0; i < F.d(); ++i) tuple = tuple * F.dims()[i] + idx[i];
      m.at(rowi, coli) = F.coeff(idx[k - 1], tuple);
      for (int i = static_cast<int>(k) - 1; i >= 0; --i) {
        if (++idx[i] < axis_dims[i]) break;
        idx[i] = 0;
      }
    }
    if (rank(m, 2) <= 1) {
      PrOneFactoring f;
      for (uint32_t i = 0; i < k; ++i) (mask >> i & 1 ? f.part_a : f.part_b).push_back(i);
      // extract factors from the first nonzero entry
      uint64_t r0 = 0, c0 = 0;
      bool found = false;
      for (uint64_t rr = 0; rr < m.rows() && !found; ++rr)
        for (uint64_t cc = 0; cc < m.cols() && !found; ++cc)
          if (m.at(rr, cc) != 0) {
            r0 = rr;
            c0 = cc;
            found = true;
          }
      Fq pivot_inv = K.inv(m.at(r0, c0));
      for (uint64_t rr = 0; rr < m.rows(); ++rr) f.factor_a.push_back(m.at(rr, c0));
      for (uint64_t cc = 0; cc < m.cols(); ++cc)
        f.factor_b.push_back(K.mul(m.at(r0, cc), pivot_inv));
      return f;
    }
  }
  return std::nullopt;
}

}  // namespace mlindex
