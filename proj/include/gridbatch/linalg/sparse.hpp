#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gridbatch::linalg {

using Index = std::int32_t;

/// Coordinate-format real sparse matrix. Duplicate (row, col) pairs are
/// allowed until canonicalize() sums them.
struct SparseCoo {
    Index rows = 0;
    Index cols = 0;
    std::vector<Index> row_idx;
    std::vector<Index> col_idx;
    std::vector<double> vals;

    SparseCoo() = default;
    SparseCoo(Index m, Index n) : rows(m), cols(n) {}

    std::size_t nnz() const noexcept { return vals.size(); }
    void push(Index r, Index c, double v);
    /// Throws DimensionError if the arrays disagree or an index is out of range.
    void validate() const;
};

/// Sum duplicates and sort row-major. Entries that sum to exactly zero are
/// dropped when drop_zeros is set.
SparseCoo canonicalize(const SparseCoo& a, bool drop_zeros = false);

/// Compressed sparse row storage; column indices sorted within each row.
struct SparseCsr {
    Index rows = 0;
    Index cols = 0;
    std::vector<Index> row_ptr;  // rows + 1 entries
    std::vector<Index> col_idx;
    std::vector<double> vals;

    std::size_t nnz() const noexcept { return vals.size(); }
    /// Entry (r, c) or 0 when not stored.
    double at(Index r, Index c) const;
};

SparseCsr coo_to_csr(const SparseCoo& a);

/// y = A x, each row accumulated left to right.
std::vector<double> spmv(const SparseCsr& a, std::span<const double> x);
void spmv(const SparseCsr& a, std::span<const double> x, std::span<double> y);

/// Row-major dense copy, for tests and small diagnostics.
std::vector<double> to_dense(const SparseCsr& a);
std::vector<double> to_dense(const SparseCoo& a);

}  // namespace gridbatch::linalg
