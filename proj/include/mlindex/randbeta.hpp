#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "mlindex/oracle.hpp"
#include "mlindex/parallel.hpp"

namespace mlindex {

// Sampled witness matrix for the level test: rows indexed by the canonical
// tuples over [c+1] for the map's kind, row s holding
// F(w_{1,L_s(1)}, ..., w_{d,L_s(d)}). Full row rank certifies beta >= c+1.
struct WitnessMatrix {
  uint32_t level = 0;                // c
  FqMatrix matrix;                   // |tupleSet| x codim
  std::vector<std::vector<std::vector<Fq>>> sample_vectors;  // per mode, c+1 vectors

  WitnessMatrix() : matrix(nullptr, 0, 0) {}

  bool full_row_rank() const { return has_full_row_rank(matrix); }
};

struct RandConfig {
  double epsilon = 0.05;             // total error budget in (0,1)
  uint64_t seed = 0;
  std::optional<uint64_t> samples_override;  // k
  std::optional<uint32_t> max_level;
  unsigned threads = 1;

  void check() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail(Errc::BadInput, "epsilon must lie in (0,1)");
  }
};

inline WitnessMatrix witness_matrix(const MultiMap& F,
                                    std::vector<std::vector<std::vector<Fq>>> sample_vectors,
                                    uint32_t c) {
  size_t modes = F.kind() == MapKind::general ? F.d() : 1;
  if (sample_vectors.size() != modes) fail(Errc::DimMismatch, "wrong number of vector families");
  for (size_t i = 0; i < modes; ++i) {
    if (sample_vectors[i].size() != c + 1)
      fail(Errc::DimMismatch, "need c+1 sample vectors per mode");
    for (const auto& v : sample_vectors[i])
      if (v.size() != F.dims()[F.kind() == MapKind::general ? i : 0])
        fail(Errc::DimMismatch, "sample vector has wrong length");
  }
  WitnessMatrix w;
  w.level = c;
  w.matrix = evaluation_matrix(F, sample_vectors);
  w.sample_vectors = std::move(sample_vectors);
  return w;
}

namespace detail {

inline std::vector<std::vector<std::vector<Fq>>> sample_family(const MultiMap& F, uint32_t c,
                                                               RngStream& rng) {
  size_t modes = F.kind() == MapKind::general ? F.d() : 1;
  std::vector<std::vector<std::vector<Fq>>> fam(modes);
  for (size_t i = 0; i < modes; ++i) {
    uint32_t n = F.dims()[F.kind() == MapKind::general ? i : 0];
    fam[i].assign(c + 1, std::vector<Fq>(n));
    for (auto& v : fam[i])
      for (auto& x : v) x = F.ctx()->sample_uniform(rng);
  }
  return fam;
}

}  // namespace detail

// Up to k independent sample families at level c; returns the first witness
// matrix with full row rank (ties broken by trial index, so the result does
// not depend on the worker count). One-sided: a returned witness is always
// valid; absence may be a false negative.
inline std::optional<WitnessMatrix> test_level(const MultiMap& F, uint32_t c, uint64_t k,
                                               uint64_t seed, unsigned threads = 1) {
  if (k < 1) fail(Errc::BadInput, "need k >= 1 trials");
  const uint64_t rows = tuple_count(F.kind(), F.d(), c + 1);
  if (rows > F.codim()) return std::nullopt;  // rank can never reach the row count
  if (rows == 0) {
    // vacuous level (alternating, c+1 < d): the empty matrix has full row rank
    RngStream rng = RngStream::derive(seed, {0xbe7aULL, c, 0});
    return witness_matrix(F, detail::sample_family(F, c, rng), c);
  }

  std::vector<char> hit(k, 0);
  std::vector<WitnessMatrix> results(k);
  parallel_for(k, threads, [&](size_t trial) {
    RngStream rng = RngStream::derive(seed, {0xbe7aULL, c, trial});
    auto fam = detail::sample_family(F, c, rng);
    WitnessMatrix w = witness_matrix(F, std::move(fam), c);
    if (w.full_row_rank()) {
      hit[trial] = 1;
      results[trial] = std::move(w);
    }
  });
  for (uint64_t t = 0; t < k; ++t)
    if (hit[t]) return std::move(results[t]);
  return std::nullopt;
}

// The probabilistic completeness-index algorithm: ascending level scan with
// k = ceil(log2(m / epsilon)) samples per level, so that a per-sample failure
// probability of 1/2 union-bounds to epsilon across the at most m levels.
// When q > 2dN the reported value satisfies beta_hat <= beta always and
// beta_hat = beta with probability >= 1 - epsilon; otherwise the witness is
// still sound but the completeness guarantee is withdrawn and flagged.
inline IndexReport beta_randomized(const MultiMap& F, const RandConfig& cfg) {
  cfg.check();
  IndexReport rep;
  rep.index = beta_name(F.kind());
  rep.epsilon = cfg.epsilon;
  rep.seed = cfg.seed;

  const uint32_t d = F.d();
  uint64_t N = F.codim();
  for (uint32_t n : F.dims()) N += n;
  rep.q_guard_ok = F.ctx()->q() > 2 * static_cast<uint64_t>(d) * N;
  if (!rep.q_guard_ok) rep.flags.push_back("q_guard_failed");

  uint32_t min_dim = *std::min_element(F.dims().begin(), F.dims().end());
  uint32_t m = 0;
  for (uint32_t s = 1; s <= min_dim; ++s) {
    uint64_t rows = tuple_count(F.kind(), d, s);
    if (rows == 0 || rows <= F.codim()) m = s;
  }
  if (cfg.max_level) m = std::min(m, *cfg.max_level);

  if (F.is_zero() || m == 0) {
    rep.value = 0;
    rep.flags.push_back(F.is_zero() ? "zero_map" : "degenerate_shape");
    rep.k_per_level = 0;
    return rep;
  }

  uint64_t k = cfg.samples_override
                   ? *cfg.samples_override
                   : static_cast<uint64_t>(
                         std::ceil(std::log2(static_cast<double>(m) / cfg.epsilon)));
  if (k < 1) k = 1;
  rep.k_per_level = k;

  std::optional<WitnessMatrix> best;
  for (uint32_t c = 0; c < m; ++c) {
    uint64_t rows = tuple_count(F.kind(), d, c + 1);
    if (rows == 0) {
      rep.flags.push_back("vacuous_level_" + std::to_string(c + 1));
      rep.value = c + 1;
      continue;
    }
    auto w = test_level(F, c, k, cfg.seed, cfg.threads);
    if (!w) break;
    rep.value = c + 1;
    best = std::move(w);
  }

  if (best) {
    // unconditional soundness: recheck the witness from scratch
    WitnessMatrix check = witness_matrix(F, best->sample_vectors, best->level);
    if (!check.full_row_rank()) fail(Errc::BadInput, "witness recheck failed");
    size_t modes = F.kind() == MapKind::general ? d : 1;
    for (size_t i = 0; i < modes; ++i) {
      uint32_t n = F.dims()[F.kind() == MapKind::general ? i : 0];
      rep.witness.emplace_back(F.ctx(), n, best->sample_vectors[i]);
    }
  }
  return rep;
}

}  // namespace mlindex
