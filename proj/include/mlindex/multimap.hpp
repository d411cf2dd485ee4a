#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mlindex/matrix.hpp"

namespace mlindex {

enum class MapKind { general, alternating, symmetric };

inline const char* kind_name(MapKind k) {
  switch (k) {
    case MapKind::general: return "general";
    case MapKind::alternating: return "alternating";
    case MapKind::symmetric: return "symmetric";
  }
  return "?";
}

inline MapKind kind_from_name(const std::string& s) {
  if (s == "general") return MapKind::general;
  if (s == "alternating") return MapKind::alternating;
  if (s == "symmetric") return MapKind::symmetric;
  fail(Errc::BadInput, "unknown kind '" + s + "'");
}

inline uint64_t binom_u64(uint64_t n, uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  uint64_t r = 1;
  for (uint64_t i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Canonical index tuples of length d with entries in [0, n): strictly
// increasing for the alternating store, non-decreasing for the symmetric one,
// in lexicographic order.
inline std::vector<std::vector<uint32_t>> increasing_tuples(uint32_t n, uint32_t d) {
  std::vector<std::vector<uint32_t>> out;
  if (d > n) return out;
  std::vector<uint32_t> t(d);
  std::iota(t.begin(), t.end(), 0);
  while (true) {
    out.push_back(t);
    int i = static_cast<int>(d) - 1;
    while (i >= 0 && t[i] == n - d + i) --i;
    if (i < 0) break;
    ++t[i];
    for (uint32_t j = i + 1; j < d; ++j) t[j] = t[j - 1] + 1;
  }
  return out;
}

inline std::vector<std::vector<uint32_t>> nondecreasing_tuples(uint32_t n, uint32_t d) {
  std::vector<std::vector<uint32_t>> out;
  if (n == 0) return out;
  std::vector<uint32_t> t(d, 0);
  while (true) {
    out.push_back(t);
    int i = static_cast<int>(d) - 1;
    while (i >= 0 && t[i] == n - 1) --i;
    if (i < 0) break;
    ++t[i];
    for (uint32_t j = i + 1; j < d; ++j) t[j] = t[i];
  }
  return out;
}

// Number of canonical tuples over [0, s) at a given symmetry kind.
inline uint64_t tuple_count(MapKind kind, uint32_t d, uint64_t s) {
  switch (kind) {
    case MapKind::general: {
      uint64_t r = 1;
      for (uint32_t i = 0; i < d; ++i) r *= s;
      return r;
    }
    case MapKind::alternating: return binom_u64(s, d);
    case MapKind::symmetric: return s == 0 ? 0 : binom_u64(s + d - 1, d);
  }
  return 0;
}

// List of linearly independent vectors spanning a subspace of GF(q)^n.
class SubspaceBasis {
 public:
  SubspaceBasis(FieldPtr ctx, uint32_t ambient_dim, std::vector<std::vector<Fq>> vectors)
      : ctx_(std::move(ctx)), ambient_(ambient_dim), vectors_(std::move(vectors)) {
    for (const auto& v : vectors_)
      if (v.size() != ambient_) fail(Errc::DimMismatch, "basis vector has wrong length");
    if (!vectors_.empty()) {
      FqMatrix m(ctx_, vectors_.size(), ambient_);
      for (size_t i = 0; i < vectors_.size(); ++i)
        for (uint32_t j = 0; j < ambient_; ++j) m.at(i, j) = vectors_[i][j];
      if (rank(m) != vectors_.size()) fail(Errc::DependentBasis, "basis vectors are dependent");
    }
  }

  const FieldPtr& ctx() const { return ctx_; }
  uint32_t ambient_dim() const { return ambient_; }
  uint32_t dim() const { return static_cast<uint32_t>(vectors_.size()); }
  const std::vector<std::vector<Fq>>& vectors() const { return vectors_; }

  static SubspaceBasis standard(FieldPtr ctx, uint32_t ambient_dim) {
    std::vector<std::vector<Fq>> v(ambient_dim, std::vector<Fq>(ambient_dim, 0));
    for (uint32_t i = 0; i < ambient_dim; ++i) v[i][i] = ctx->one();
    return SubspaceBasis(std::move(ctx), ambient_dim, std::move(v));
  }

 private:
  FieldPtr ctx_;
  uint32_t ambient_;
  std::vector<std::vector<Fq>> vectors_;
};

// A d-multilinear map F: V_1 x ... x V_d -> W as a coefficient store.
//
// Store layout: codomain index j slowest, then the canonical domain tuple.
// general     - full hypercube over dims, row-major (last mode fastest)
// alternating - strictly increasing tuples i_1 < ... < i_d, lex order
// symmetric   - non-decreasing tuples i_1 <= ... <= i_d, lex order
//
// The alternating store coefficient on tuple I is F(e_{I_1},...,e_{I_d});
// expansion carries determinant signs, which makes the map alternating (not
// merely antisymmetric) in every characteristic. The symmetric store likewise
// holds F on basis tuples and expands through monomial symmetrization.
class MultiMap {
 public:
  MultiMap(FieldPtr ctx, MapKind kind, uint32_t d, std::vector<uint32_t> dims, uint32_t codim,
           std::vector<Fq> coeffs)
      : ctx_(std::move(ctx)), kind_(kind), d_(d), dims_(std::move(dims)), codim_(codim),
        coeffs_(std::move(coeffs)) {
    if (d_ < 1) fail(Errc::BadInput, "arity must be >= 1");
    if (dims_.size() != d_) fail(Errc::DimMismatch, "dims length != d");
    if (kind_ != MapKind::general)
      for (uint32_t n : dims_)
        if (n != dims_[0]) fail(Errc::DimMismatch, "alternating/symmetric maps need equal dims");
    if (coeffs_.size() != codim_ * store_size())
      fail(Errc::DimMismatch, "coefficient store has wrong length");
    if (kind_ != MapKind::general) tuples_ = canonical_store_tuples();
  }

  static MultiMap zero(FieldPtr ctx, MapKind kind, uint32_t d, std::vector<uint32_t> dims,
                       uint32_t codim) {
    uint64_t sz = MultiMap::store_size_for(kind, d, dims);
    return MultiMap(std::move(ctx), kind, d, std::move(dims), codim,
                    std::vector<Fq>(codim * sz, 0));
  }

  const FieldPtr& ctx() const { return ctx_; }
  MapKind kind() const { return kind_; }
  uint32_t d() const { return d_; }
  const std::vector<uint32_t>& dims() const { return dims_; }
  uint32_t codim() const { return codim_; }
  const std::vector<Fq>& coeffs() const { return coeffs_; }
  std::vector<Fq>& coeffs() { return coeffs_; }

  uint64_t store_size() const { return store_size_for(kind_, d_, dims_); }

  static uint64_t store_size_for(MapKind kind, uint32_t d, const std::vector<uint32_t>& dims) {
    if (kind == MapKind::general) {
      uint64_t sz = 1;
      for (uint32_t n : dims) sz *= n;
      return sz;
    }
    uint32_t n = dims.empty() ? 0 : dims[0];
    return kind == MapKind::alternating ? binom_u64(n, d)
                                        : (n == 0 ? 0 : binom_u64(n + d - 1, d));
  }

  Fq coeff(uint32_t j, uint64_t tuple_index) const { return coeffs_[j * store_size() + tuple_index]; }
  Fq& coeff(uint32_t j, uint64_t tuple_index) { return coeffs_[j * store_size() + tuple_index]; }

  // Canonical tuple list for alternating/symmetric stores (entries in [0,n)).
  const std::vector<std::vector<uint32_t>>& store_tuples() const { return tuples_; }

  bool is_zero() const {
    for (Fq c : coeffs_)
      if (c != 0) return false;
    return true;
  }

  // F(args[0], ..., args[d-1]) written into out (length codim).
  void evaluate(const std::vector<std::vector<Fq>>& args, std::vector<Fq>& out) const {
    if (args.size() != d_) fail(Errc::DimMismatch, "wrong number of arguments");
    for (uint32_t i = 0; i < d_; ++i)
      if (args[i].size() != dims_[i]) fail(Errc::DimMismatch, "argument has wrong length");
    const FieldCtx& F = *ctx_;
    out.assign(codim_, 0);
    const uint64_t T = store_size();
    if (T == 0) return;

    if (kind_ == MapKind::general) {
      std::vector<uint32_t> idx(d_, 0);
      for (uint64_t t = 0; t < T; ++t) {
        Fq prod = F.one();
        for (uint32_t i = 0; i < d_; ++i) {
          prod = F.mul(prod, args[i][idx[i]]);
          if (prod == 0) break;
        }
        if (prod != 0)
          for (uint32_t j = 0; j < codim_; ++j) {
            Fq c = coeffs_[j * T + t];
            if (c != 0) out[j] = F.add(out[j], F.mul(c, prod));
          }
        for (int i = static_cast<int>(d_) - 1; i >= 0; --i) {
          if (++idx[i] < dims_[i]) break;
          idx[i] = 0;
        }
      }
      return;
    }

    if (kind_ == MapKind::alternating) {
      std::vector<Fq> minor(d_ * d_);
      for (uint64_t t = 0; t < T; ++t) {
        const auto& I = tuples_[t];
        for (uint32_t a = 0; a < d_; ++a)
          for (uint32_t b = 0; b < d_; ++b) minor[a * d_ + b] = args[b][I[a]];
        Fq det = small_det(minor.data(), d_);
        if (det == 0) continue;
        for (uint32_t j = 0; j < codim_; ++j) {
          Fq c = coeffs_[j * T + t];
          if (c != 0) out[j] = F.add(out[j], F.mul(c, det));
        }
      }
      return;
    }

    // symmetric: monomial symmetrization over distinct arrangements
    std::vector<uint32_t> perm;
    for (uint64_t t = 0; t < T; ++t) {
      const auto& I = tuples_[t];
      perm = I;
      Fq msum = 0;
      do {
        Fq prod = F.one();
        for (uint32_t b = 0; b < d_; ++b) {
          prod = F.mul(prod, args[b][perm[b]]);
          if (prod == 0) break;
        }
        if (prod != 0) msum = F.add(msum, prod);
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (msum == 0) continue;
      for (uint32_t j = 0; j < codim_; ++j) {
        Fq c = coeffs_[j * T + t];
        if (c != 0) out[j] = F.add(out[j], F.mul(c, msum));
      }
    }
  }

  std::vector<Fq> evaluate(const std::vector<std::vector<Fq>>& args) const {
    std::vector<Fq> out;
    evaluate(args, out);
    return out;
  }

 private:
  std::vector<std::vector<uint32_t>> canonical_store_tuples() const {
    uint32_t n = dims_.empty() ? 0 : dims_[0];
    return kind_ == MapKind::alternating ? increasing_tuples(n, d_) : nondecreasing_tuples(n, d_);
  }

  Fq small_det(Fq* m, uint32_t n) const {
    const FieldCtx& F = *ctx_;
    if (n == 1) return m[0];
    if (n == 2) return F.sub(F.mul(m[0], m[3]), F.mul(m[1], m[2]));
    Fq det = F.one();
    for (uint32_t c = 0; c < n; ++c) {
      uint32_t p = c;
      while (p < n && m[p * n + c] == 0) ++p;
      if (p == n) return 0;
      if (p != c) {
        for (uint32_t k = 0; k < n; ++k) std::swap(m[c * n + k], m[p * n + k]);
        det = F.neg(det);
      }
      det = F.mul(det, m[c * n + c]);
      Fq inv = F.inv(m[c * n + c]);
      for (uint32_t r = c + 1; r < n; ++r) {
        if (m[r * n + c] == 0) continue;
        Fq f = F.mul(m[r * n + c], inv);
        for (uint32_t k = c; k < n; ++k) m[r * n + k] = F.sub(m[r * n + k], F.mul(f, m[c * n + k]));
      }
    }
    return det;
  }

  FieldPtr ctx_;
  MapKind kind_;
  uint32_t d_;
  std::vector<uint32_t> dims_;
  uint32_t codim_;
  std::vector<Fq> coeffs_;
  std::vector<std::vector<uint32_t>> tuples_;  // alt/sym store tuples
};

inline bool same_field(const FieldCtx& a, const FieldCtx& b) {
  return a.p() == b.p() && a.l() == b.l() && a.min_poly() == b.min_poly();
}

// Evaluation matrix on basis tuples: rows are the canonical tuples over [0,s)
// for F's kind (general: all of [s]^d in row-major order), columns index W.
// Row t equals F(vecs[0][t_1], ..., vecs[d-1][t_d]); for single-space kinds
// vecs has one entry. This is the witness matrix M of the randomized level
// test and the evaluation matrix of the brute-force completeness search.
inline FqMatrix evaluation_matrix(const MultiMap& F, const std::vector<std::vector<std::vector<Fq>>>& vecs) {
  const uint32_t d = F.d();
  size_t modes = F.kind() == MapKind::general ? d : 1;
  if (vecs.size() != modes) fail(Errc::DimMismatch, "wrong number of vector families");
  uint32_t s = static_cast<uint32_t>(vecs[0].size());
  for (const auto& fam : vecs)
    if (fam.size() != s) fail(Errc::DimMismatch, "vector families must have equal size");

  std::vector<std::vector<uint32_t>> tuples;
  if (F.kind() == MapKind::general) {
    uint64_t count = tuple_count(MapKind::general, d, s);
    tuples.reserve(count);
    std::vector<uint32_t> t(d, 0);
    for (uint64_t k = 0; k < count; ++k) {
      tuples.push_back(t);
      for (int i = static_cast<int>(d) - 1; i >= 0; --i) {
        if (++t[i] < s) break;
        t[i] = 0;
      }
    }
  } else if (F.kind() == MapKind::alternating) {
    tuples = increasing_tuples(s, d);
  } else {
    tuples = nondecreasing_tuples(s, d);
  }

  FqMatrix m(F.ctx(), tuples.size(), F.codim());
  std::vector<std::vector<Fq>> args(d);
  std::vector<Fq> out;
  for (size_t r = 0; r < tuples.size(); ++r) {
    for (uint32_t i = 0; i < d; ++i) args[i] = vecs[F.kind() == MapKind::general ? i : 0][tuples[r][i]];
    F.evaluate(args, out);
    for (uint32_t j = 0; j < F.codim(); ++j) m.at(r, j) = out[j];
  }
  return m;
}

// Restriction of F to the given subspaces. For alternating/symmetric maps a
// single basis is used for every slot. evaluate commutes with the coordinate
// change by construction: the new store holds F on restricted basis tuples.
inline MultiMap restrict_map(const MultiMap& F, const std::vector<SubspaceBasis>& bases) {
  const uint32_t d = F.d();
  if (F.kind() == MapKind::general) {
    if (bases.size() != d) fail(Errc::DimMismatch, "need one basis per mode");
  } else {
    if (bases.size() != 1 && bases.size() != d)
      fail(Errc::DimMismatch, "need a single basis for alternating/symmetric restriction");
    if (bases.size() == d)
      for (uint32_t i = 1; i < d; ++i)
        if (bases[i].vectors() != bases[0].vectors())
          fail(Errc::DimMismatch, "alternating/symmetric restriction needs identical bases");
  }
  for (uint32_t i = 0; i < bases.size(); ++i)
    if (bases[i].ambient_dim() != F.dims()[i])
      fail(Errc::DimMismatch, "basis ambient dimension mismatch");

  std::vector<uint32_t> new_dims(d);
  for (uint32_t i = 0; i < d; ++i)
    new_dims[i] = (F.kind() == MapKind::general ? bases[i] : bases[0]).dim();

  MultiMap G = MultiMap::zero(F.ctx(), F.kind(), d, new_dims, F.codim());
  const uint64_t T = G.store_size();
  if (T == 0) return G;

  std::vector<std::vector<uint32_t>> tuples;
  if (F.kind() == MapKind::general) {
    std::vector<uint32_t> t(d, 0);
    for (uint64_t k = 0; k < T; ++k) {
      tuples.push_back(t);
      for (int i = static_cast<int>(d) - 1; i >= 0; --i) {
        if (++t[i] < new_dims[i]) break;
        t[i] = 0;
      }
    }
  } else {
    tuples = G.store_tuples();
  }

  std::vector<std::vector<Fq>> args(d);
  std::vector<Fq> out;
  for (uint64_t t = 0; t < T; ++t) {
    for (uint32_t i = 0; i < d; ++i) {
      const SubspaceBasis& b = F.kind() == MapKind::general ? bases[i] : bases[0];
      args[i] = b.vectors()[tuples[t][i]];
    }
    F.evaluate(args, out);
    for (uint32_t j = 0; j < F.codim(); ++j) G.coeff(j, t) = out[j];
  }
  return G;
}

// F + F' acting on the direct sums of the domains and codomains.
inline MultiMap direct_sum(const MultiMap& A, const MultiMap& B) {
  if (!same_field(*A.ctx(), *B.ctx())) fail(Errc::KindMismatch, "direct sum needs matching fields");
  if (A.d() != B.d()) fail(Errc::ArityMismatch, "direct sum needs equal arity");
  if (A.kind() != B.kind()) fail(Errc::KindMismatch, "direct sum needs equal kind");
  const uint32_t d = A.d();
  std::vector<uint32_t> dims(d);
  for (uint32_t i = 0; i < d; ++i) dims[i] = A.dims()[i] + B.dims()[i];
  MultiMap S = MultiMap::zero(A.ctx(), A.kind(), d, dims, A.codim() + B.codim());

  auto embed = [&](const MultiMap& part, bool second) {
    const uint64_t T = part.store_size();
    uint32_t joff = second ? A.codim() : 0;
    if (part.kind() == MapKind::general) {
      std::vector<uint32_t> t(d, 0);
      for (uint64_t k = 0; k < T; ++k) {
        // index of the embedded tuple in the combined row-major store
        uint64_t idx = 0;
        for (uint32_t i = 0; i < d; ++i) {
          uint32_t off = second ? A.dims()[i] : 0;
          idx = idx * dims[i] + (t[i] + off);
        }
        for (uint32_t j = 0; j < part.codim(); ++j) S.coeff(joff + j, idx) = part.coeff(j, k);
        for (int i = static_cast<int>(d) - 1; i >= 0; --i) {
          if (++t[i] < part.dims()[i]) break;
          t[i] = 0;
        }
      }
    } else {
      const auto& part_tuples = part.store_tuples();
      const auto& sum_tuples = S.store_tuples();
      uint32_t off = second ? A.dims()[0] : 0;
      for (uint64_t k = 0; k < part_tuples.size(); ++k) {
        std::vector<uint32_t> shifted = part_tuples[k];
        for (auto& x : shifted) x += off;
        auto it = std::lower_bound(sum_tuples.begin(), sum_tuples.end(), shifted);
        uint64_t idx = static_cast<uint64_t>(it - sum_tuples.begin());
        for (uint32_t j = 0; j < part.codim(); ++j) S.coeff(joff + j, idx) = part.coeff(j, k);
      }
    }
  };
  embed(A, false);
  embed(B, true);
  return S;
}

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> notes;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate(const MultiMap& F, uint64_t sample_seed = 0) {
  ValidationReport rep;
  if (F.kind() != MapKind::general) {
    for (uint32_t n : F.dims())
      if (n != F.dims()[0]) rep.violations.push_back("unequal dims for symmetric kind store");
  }
  if (F.coeffs().size() != F.codim() * F.store_size())
    rep.violations.push_back("CountMismatch: store length");
  for (Fq c : F.coeffs())
    if (c >= F.ctx()->q()) {
      rep.violations.push_back("coefficient not reduced");
      break;
    }
  if (F.kind() == MapKind::alternating && F.d() > F.dims()[0]) {
    rep.notes.push_back("no strictly increasing tuple exists; map is identically zero");
  }
  if (!rep.violations.empty()) return rep;

  if (F.kind() == MapKind::alternating && F.store_size() > 0) {
    const uint32_t n = F.dims()[0];
    const uint64_t q = F.ctx()->q();
    bool exhaustive = n <= 4 && q <= 3 && F.d() <= 3;
    auto check_equal_args = [&](const std::vector<std::vector<Fq>>& args) {
      std::vector<Fq> out;
      F.evaluate(args, out);
      for (Fq v : out)
        if (v != 0) rep.violations.push_back("alternating map does not vanish on equal arguments");
    };
    if (exhaustive) {
      uint64_t total = 1;
      for (uint32_t i = 0; i + 1 < F.d(); ++i)
        for (uint32_t c = 0; c < n; ++c) total *= q;
      std::vector<std::vector<Fq>> args(F.d(), std::vector<Fq>(n, 0));
      for (uint64_t code = 0; code < total && rep.violations.empty(); ++code) {
        uint64_t cc = code;
        for (uint32_t i = 0; i + 1 < F.d(); ++i)
          for (uint32_t c = 0; c < n; ++c) {
            args[i][c] = F.ctx()->element(cc % q);
            cc /= q;
          }
        for (uint32_t dup = 0; dup + 1 < F.d(); ++dup) {
          args[F.d() - 1] = args[dup];
          check_equal_args(args);
        }
      }
    } else {
      RngStream rng = RngStream::derive(sample_seed, {0xa17e});
      for (int trial = 0; trial < 32 && rep.violations.empty(); ++trial) {
        std::vector<std::vector<Fq>> args(F.d(), std::vector<Fq>(n));
        for (auto& v : args)
          for (auto& x : v) x = F.ctx()->sample_uniform(rng);
        args[F.d() - 1] = args[0];
        check_equal_args(args);
      }
    }
  }
  return rep;
}

// A homogeneous degree-d monomial as a non-decreasing list of variable
// indices; a polynomial is a list of (coefficient, monomial) terms.
struct SparsePoly {
  std::vector<std::pair<Fq, std::vector<uint32_t>>> terms;
};

inline uint64_t multinomial_count(const std::vector<uint32_t>& tuple) {
  // number of distinct arrangements d! / prod(mult!)
  uint64_t num = 1;
  for (uint64_t k = 2; k <= tuple.size(); ++k) num *= k;
  uint64_t denom = 1, run = 1;
  for (size_t i = 1; i <= tuple.size(); ++i) {
    if (i < tuple.size() && tuple[i] == tuple[i - 1]) {
      ++run;
    } else {
      for (uint64_t k = 2; k <= run; ++k) denom *= k;
      run = 1;
    }
  }
  return num / denom;
}

// Symmetric multilinear map with diagonal F(x,...,x) reproducing the inputs
// exactly; valid when char > d.
inline MultiMap polarize(const std::vector<SparsePoly>& polys, uint32_t num_vars, FieldPtr ctx) {
  if (polys.empty()) fail(Errc::BadInput, "no polynomials given");
  uint32_t d = 0;
  bool d_set = false;
  for (const auto& p : polys)
    for (const auto& [c, mono] : p.terms) {
      if (!d_set) {
        d = static_cast<uint32_t>(mono.size());
        d_set = true;
      }
      if (mono.size() != d) fail(Errc::NotHomogeneous, "terms of unequal degree");
      for (size_t i = 0; i + 1 < mono.size(); ++i)
        if (mono[i] > mono[i + 1]) fail(Errc::BadInput, "monomial indices must be non-decreasing");
      for (uint32_t v : mono)
        if (v >= num_vars) fail(Errc::BadInput, "variable index out of range");
    }
  if (!d_set) fail(Errc::AllZero, "all polynomials are zero");
  if (ctx->p() <= d) fail(Errc::SmallCharacteristic, "polarization needs char > degree");

  std::vector<uint32_t> dims(d, num_vars);
  MultiMap F = MultiMap::zero(ctx, MapKind::symmetric, d, dims, static_cast<uint32_t>(polys.size()));
  const auto& tuples = F.store_tuples();
  for (uint32_t j = 0; j < polys.size(); ++j) {
    for (const auto& [c, mono] : polys[j].terms) {
      auto it = std::lower_bound(tuples.begin(), tuples.end(), mono);
      if (it == tuples.end() || *it != mono) fail(Errc::BadInput, "monomial not in store");
      uint64_t idx = static_cast<uint64_t>(it - tuples.begin());
      Fq inv_arr = ctx->inv(ctx->from_int(static_cast<int64_t>(multinomial_count(mono) % ctx->p())));
      F.coeff(j, idx) = ctx->add(F.coeff(j, idx), ctx->mul(c, inv_arr));
    }
  }
  return F;
}

// Diagonal evaluation P(F_j)(x) = F_j(x,...,x) as sparse polynomials; inverse
// of polarize on its image.
inline std::vector<SparsePoly> diagonal_polynomials(const MultiMap& F) {
  if (F.kind() != MapKind::symmetric) fail(Errc::KindMismatch, "diagonal of a symmetric map");
  std::vector<SparsePoly> out(F.codim());
  const auto& tuples = F.store_tuples();
  for (uint32_t j = 0; j < F.codim(); ++j)
    for (uint64_t t = 0; t < tuples.size(); ++t) {
      Fq c = F.coeff(j, t);
      if (c == 0) continue;
      Fq a = F.ctx()->mul(
          c, F.ctx()->from_int(static_cast<int64_t>(multinomial_count(tuples[t]) % F.ctx()->p())));
      if (a != 0) out[j].terms.push_back({a, tuples[t]});
    }
  return out;
}

}  // namespace mlindex
