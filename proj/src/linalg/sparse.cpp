#include "gridbatch/linalg/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gridbatch/error.hpp"

namespace gridbatch::linalg {

void SparseCoo::push(Index r, Index c, double v) {
    row_idx.push_back(r);
    col_idx.push_back(c);
    vals.push_back(v);
}

void SparseCoo::validate() const {
    if (row_idx.size() != vals.size() || col_idx.size() != vals.size()) {
        throw DimensionError("coo: index and value arrays differ in length");
    }
    if (rows < 0 || cols < 0) {
        throw DimensionError("coo: negative shape");
    }
    for (std::size_t k = 0; k < vals.size(); ++k) {
        if (row_idx[k] < 0 || row_idx[k] >= rows || col_idx[k] < 0 || col_idx[k] >= cols) {
            throw DimensionError("coo: entry (" + std::to_string(row_idx[k]) + ", " + std::to_string(col_idx[k]) +
                                 ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        }
    }
}

SparseCoo canonicalize(const SparseCoo& a, bool drop_zeros) {
    a.validate();
    std::vector<std::size_t> order(a.nnz());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // stable so that duplicates are summed in insertion order
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return a.row_idx[l] != a.row_idx[r] ? a.row_idx[l] < a.row_idx[r] : a.col_idx[l] < a.col_idx[r];
    });

    SparseCoo out(a.rows, a.cols);
    out.row_idx.reserve(a.nnz());
    out.col_idx.reserve(a.nnz());
    out.vals.reserve(a.nnz());
    for (std::size_t k = 0; k < order.size();) {
        const Index r = a.row_idx[order[k]];
        const Index c = a.col_idx[order[k]];
        double sum = 0.0;
        for (; k < order.size() && a.row_idx[order[k]] == r && a.col_idx[order[k]] == c; ++k) {
            sum += a.vals[order[k]];
        }
        if (drop_zeros && sum == 0.0) {
            continue;
        }
        out.push(r, c, sum);
    }
    return out;
}

double SparseCsr::at(Index r, Index c) const {
    const auto first = col_idx.begin() + row_ptr[r];
    const auto last = col_idx.begin() + row_ptr[r + 1];
    const auto it = std::lower_bound(first, last, c);
    return (it != last && *it == c) ? vals[static_cast<std::size_t>(it - col_idx.begin())] : 0.0;
}

SparseCsr coo_to_csr(const SparseCoo& a) {
    const SparseCoo c = canonicalize(a);
    SparseCsr out;
    out.rows = c.rows;
    out.cols = c.cols;
    out.row_ptr.assign(static_cast<std::size_t>(c.rows) + 1, 0);
    for (Index r : c.row_idx) {
        ++out.row_ptr[static_cast<std::size_t>(r) + 1];
    }
    std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());
    out.col_idx = c.col_idx;
    out.vals = c.vals;
    return out;
}

void spmv(const SparseCsr& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != static_cast<std::size_t>(a.cols) || y.size() != static_cast<std::size_t>(a.rows)) {
        throw DimensionError("spmv: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " matrix with x of " +
                             std::to_string(x.size()) + " and y of " + std::to_string(y.size()));
    }
    for (Index r = 0; r < a.rows; ++r) {
        double acc = 0.0;
        for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            acc += a.vals[k] * x[a.col_idx[k]];
        }
        y[r] = acc;
    }
}

std::vector<double> spmv(const SparseCsr& a, std::span<const double> x) {
    std::vector<double> y(static_cast<std::size_t>(a.rows));
    spmv(a, x, y);
    return y;
}

std::vector<double> to_dense(const SparseCsr& a) {
    std::vector<double> d(static_cast<std::size_t>(a.rows) * a.cols, 0.0);
    for (Index r = 0; r < a.rows; ++r) {
        for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            d[static_cast<std::size_t>(r) * a.cols + a.col_idx[k]] += a.vals[k];
        }
    }
    return d;
}

std::vector<double> to_dense(const SparseCoo& a) {
    a.validate();
    std::vector<double> d(static_cast<std::size_t>(a.rows) * a.cols, 0.0);
    for (std::size_t k = 0; k < a.nnz(); ++k) {
        d[static_cast<std::size_t>(a.row_idx[k]) * a.cols + a.col_idx[k]] += a.vals[k];
    }
    return d;
}

}  // namespace gridbatch::linalg
