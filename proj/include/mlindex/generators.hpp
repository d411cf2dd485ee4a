#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "mlindex/multimap.hpp"

namespace mlindex {

struct GraphSpec {
  uint32_t vertex_count = 0;
  std::vector<std::pair<uint32_t, uint32_t>> edges;  // unordered pairs, 0-based

  GraphSpec() = default;
  GraphSpec(uint32_t n, std::vector<std::pair<uint32_t, uint32_t>> e)
      : vertex_count(n), edges(std::move(e)) {
    std::set<std::pair<uint32_t, uint32_t>> seen;
    for (auto& [a, b] : edges) {
      if (a >= vertex_count || b >= vertex_count) fail(Errc::BadInput, "edge endpoint out of range");
      if (a == b) fail(Errc::BadInput, "self-loop");
      if (a > b) std::swap(a, b);
      if (!seen.insert({a, b}).second) fail(Errc::BadInput, "duplicate edge");
    }
  }
};

// I_{r,d}: coordinatewise products GF(q)^r x ... x GF(q)^r -> GF(q)^r.
inline MultiMap gen_identity(uint32_t r, uint32_t d, FieldPtr ctx) {
  if (r < 1 || d < 1) fail(Errc::BadInput, "identity map needs r >= 1, d >= 1");
  std::vector<uint32_t> dims(d, r);
  MultiMap F = MultiMap::zero(std::move(ctx), MapKind::general, d, dims, r);
  for (uint32_t j = 0; j < r; ++j) {
    uint64_t idx = 0;
    for (uint32_t i = 0; i < d; ++i) idx = idx * r + j;
    F.coeff(j, idx) = F.ctx()->one();
  }
  return F;
}

// Matrix multiplication GF(q)^{n x n} x GF(q)^{n x n} -> GF(q)^{n x n}.
// Matrices flatten row-major: entry (i,j) sits at index i*n + j.
inline MultiMap gen_matmul(uint32_t n, FieldPtr ctx) {
  if (n < 1) fail(Errc::BadInput, "matmul needs n >= 1");
  const uint32_t nn = n * n;
  MultiMap F = MultiMap::zero(std::move(ctx), MapKind::general, 2, {nn, nn}, nn);
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < n; ++j)
      for (uint32_t k = 0; k < n; ++k) {
        uint64_t idx = static_cast<uint64_t>(i * n + k) * nn + (k * n + j);
        F.coeff(i * n + j, idx) = F.ctx()->one();
      }
  return F;
}

// Tutte map of a graph: alternating bilinear GF(q)^{|V|} x GF(q)^{|V|} ->
// GF(q)^{|E|}, edge {i<j} contributing u_i v_j - u_j v_i.
inline MultiMap gen_tutte(const GraphSpec& g, FieldPtr ctx) {
  if (g.edges.empty()) fail(Errc::EmptyEdgeSet, "graph has no edges");
  std::vector<uint32_t> dims(2, g.vertex_count);
  MultiMap F = MultiMap::zero(std::move(ctx), MapKind::alternating, 2, dims,
                              static_cast<uint32_t>(g.edges.size()));
  const auto& tuples = F.store_tuples();
  for (uint32_t e = 0; e < g.edges.size(); ++e) {
    std::vector<uint32_t> key{g.edges[e].first, g.edges[e].second};
    auto it = std::lower_bound(tuples.begin(), tuples.end(), key);
    F.coeff(e, static_cast<uint64_t>(it - tuples.begin())) = F.ctx()->one();
  }
  return F;
}

// Multiplication of the group algebra GF(q)[G] for the abelian group
// G = Z_{m_1} x ... x Z_{m_k}; basis indexed by group elements in mixed-radix
// order. Requires gcd(|G|, char) = 1.
inline MultiMap gen_group_algebra(const std::vector<uint32_t>& cyclic_orders, FieldPtr ctx) {
  if (cyclic_orders.empty()) fail(Errc::BadInput, "no cyclic factors");
  uint64_t order = 1;
  for (uint32_t m : cyclic_orders) {
    if (m < 1) fail(Errc::BadInput, "cyclic order must be >= 1");
    order *= m;
  }
  if (order % ctx->p() == 0) fail(Errc::CharDividesOrder, "characteristic divides group order");
  const uint32_t n = static_cast<uint32_t>(order);
  MultiMap F = MultiMap::zero(std::move(ctx), MapKind::general, 2, {n, n}, n);
  // mixed-radix componentwise addition, last factor fastest
  auto add_indices = [&](uint32_t a, uint32_t b) {
    std::vector<uint32_t> da(cyclic_orders.size()), db(cyclic_orders.size());
    uint32_t aa = a, bb = b;
    for (size_t i = cyclic_orders.size(); i-- > 0;) {
      da[i] = aa % cyclic_orders[i];
      aa /= cyclic_orders[i];
      db[i] = bb % cyclic_orders[i];
      bb /= cyclic_orders[i];
    }
    uint32_t out = 0;
    for (size_t i = 0; i < cyclic_orders.size(); ++i)
      out = out * cyclic_orders[i] + (da[i] + db[i]) % cyclic_orders[i];
    return out;
  };
  for (uint32_t a = 0; a < n; ++a)
    for (uint32_t b = 0; b < n; ++b)
      F.coeff(add_indices(a, b), static_cast<uint64_t>(a) * n + b) = F.ctx()->one();
  return F;
}

// Uniform random coefficients; deterministic given the stream.
inline MultiMap gen_random(const std::vector<uint32_t>& dims, uint32_t codim, MapKind kind,
                           FieldPtr ctx, RngStream& rng) {
  MultiMap F = MultiMap::zero(ctx, kind, static_cast<uint32_t>(dims.size()), dims, codim);
  for (auto& c : F.coeffs()) c = ctx->sample_uniform(rng);
  return F;
}

}  // namespace mlindex
