#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mlindex/field.hpp"

namespace mlindex {

// Dense matrix over a FieldCtx. Value type; operations are pure.
class FqMatrix {
 public:
  FqMatrix(FieldPtr ctx, size_t rows, size_t cols)
      : ctx_(std::move(ctx)), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  static FqMatrix identity(FieldPtr ctx, size_t n) {
    FqMatrix m(ctx, n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = ctx->one();
    return m;
  }

  const FieldPtr& ctx() const { return ctx_; }
  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  Fq& at(size_t r, size_t c) { return data_[r * cols_ + c]; }
  Fq at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  Fq* row(size_t r) { return data_.data() + r * cols_; }
  const Fq* row(size_t r) const { return data_.data() + r * cols_; }

  const std::vector<Fq>& data() const { return data_; }
  std::vector<Fq>& data() { return data_; }

  bool operator==(const FqMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  FieldPtr ctx_;
  size_t rows_, cols_;
  std::vector<Fq> data_;
};

namespace detail {

// Bit-packed elimination over GF(2); 64 columns per word.
inline size_t rank_gf2(const FqMatrix& m, size_t stop_at) {
  const size_t words = (m.cols() + 63) / 64;
  std::vector<uint64_t> rows(m.rows() * words, 0);
  for (size_t r = 0; r < m.rows(); ++r)
    for (size_t c = 0; c < m.cols(); ++c)
      if (m.at(r, c)) rows[r * words + c / 64] |= 1ULL << (c % 64);

  size_t rank = 0;
  for (size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    const size_t w = c / 64;
    const uint64_t bit = 1ULL << (c % 64);
    size_t pivot = rank;
    while (pivot < m.rows() && !(rows[pivot * words + w] & bit)) ++pivot;
    if (pivot == m.rows()) continue;
    for (size_t k = 0; k < words; ++k)
      std::swap(rows[rank * words + k], rows[pivot * words + k]);
    for (size_t r = rank + 1; r < m.rows(); ++r) {
      if (rows[r * words + w] & bit)
        for (size_t k = 0; k < words; ++k) rows[r * words + k] ^= rows[rank * words + k];
    }
    ++rank;
    if (rank >= stop_at) return rank;
  }
  return rank;
}

}  // namespace detail

// Row reduction to reduced row echelon form; returns pivot column list.
inline std::vector<size_t> rref_in_place(FqMatrix& m) {
  const FieldCtx& F = *m.ctx();
  std::vector<size_t> pivots;
  size_t r = 0;
  for (size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    size_t p = r;
    while (p < m.rows() && m.at(p, c) == 0) ++p;
    if (p == m.rows()) continue;
    if (p != r)
      for (size_t k = 0; k < m.cols(); ++k) std::swap(m.at(r, k), m.at(p, k));
    Fq piv_inv = F.inv(m.at(r, c));
    for (size_t k = c; k < m.cols(); ++k) m.at(r, k) = F.mul(m.at(r, k), piv_inv);
    for (size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m.at(i, c) == 0) continue;
      Fq f = m.at(i, c);
      for (size_t k = c; k < m.cols(); ++k)
        m.at(i, k) = F.sub(m.at(i, k), F.mul(f, m.at(r, k)));
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

// Rank by Gaussian elimination. Stops early once `stop_at` pivots are found;
// the randomized level test only asks whether rank reaches the row count.
inline size_t rank(const FqMatrix& m, size_t stop_at = SIZE_MAX) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  const FieldCtx& F = *m.ctx();
  if (F.q() == 2) return detail::rank_gf2(m, stop_at);
  FqMatrix a = m;
  size_t rank = 0;
  for (size_t c = 0; c < a.cols() && rank < a.rows(); ++c) {
    size_t p = rank;
    while (p < a.rows() && a.at(p, c) == 0) ++p;
    if (p == a.rows()) continue;
    if (p != rank)
      for (size_t k = c; k < a.cols(); ++k) std::swap(a.at(rank, k), a.at(p, k));
    Fq inv = F.inv(a.at(rank, c));
    for (size_t r = rank + 1; r < a.rows(); ++r) {
      if (a.at(r, c) == 0) continue;
      Fq f = F.mul(a.at(r, c), inv);
      a.at(r, c) = 0;
      for (size_t k = c + 1; k < a.cols(); ++k)
        a.at(r, k) = F.sub(a.at(r, k), F.mul(f, a.at(rank, k)));
    }
    ++rank;
    if (rank >= stop_at) return rank;
  }
  return rank;
}

inline bool has_full_row_rank(const FqMatrix& m) {
  if (m.rows() == 0) return true;
  if (m.rows() > m.cols()) return false;
  return rank(m, m.rows()) == m.rows();
}

// Basis of the right null space {v : Mv = 0}; size = cols - rank.
inline std::vector<std::vector<Fq>> kernel_basis(const FqMatrix& m) {
  const FieldCtx& F = *m.ctx();
  FqMatrix a = m;
  std::vector<size_t> pivots = rref_in_place(a);
  std::vector<bool> is_pivot(m.cols(), false);
  for (size_t c : pivots) is_pivot[c] = true;
  std::vector<std::vector<Fq>> basis;
  for (size_t c = 0; c < m.cols(); ++c) {
    if (is_pivot[c]) continue;
    std::vector<Fq> v(m.cols(), 0);
    v[c] = F.one();
    for (size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = F.neg(a.at(i, c));
    basis.push_back(std::move(v));
  }
  return basis;
}

// Incremental row-space tracker: feeds rows one at a time and reports whether
// each enlarged the span. Used by the enumeration oracles to prune early.
class RowSpan {
 public:
  RowSpan(FieldPtr ctx, size_t cols) : ctx_(std::move(ctx)), cols_(cols) {}

  size_t rank() const { return rows_.size(); }
  size_t cols() const { return cols_; }

  // Returns true (and absorbs the row) if `row` is outside the current span.
  bool add(const Fq* row) {
    const FieldCtx& F = *ctx_;
    std::vector<Fq> v(row, row + cols_);
    for (size_t i = 0; i < rows_.size(); ++i) {
      Fq c = v[pivot_cols_[i]];
      if (c == 0) continue;
      const auto& r = rows_[i];
      for (size_t k = 0; k < cols_; ++k) v[k] = F.sub(v[k], F.mul(c, r[k]));
    }
    size_t pc = cols_;
    for (size_t k = 0; k < cols_; ++k)
      if (v[k] != 0) {
        pc = k;
        break;
      }
    if (pc == cols_) return false;
    Fq inv = F.inv(v[pc]);
    for (size_t k = 0; k < cols_; ++k) v[k] = F.mul(v[k], inv);
    rows_.push_back(std::move(v));
    pivot_cols_.push_back(pc);
    return true;
  }

  bool add(const std::vector<Fq>& row) { return add(row.data()); }

  // Deep copy for checkpoint/rollback along recursive enumerations.
  RowSpan snapshot() const { return *this; }

 private:
  FieldPtr ctx_;
  size_t cols_;
  std::vector<std::vector<Fq>> rows_;
  std::vector<size_t> pivot_cols_;
};

}  // namespace mlindex
