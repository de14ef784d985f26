#include "gridbatch/linalg/block_factor.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "gridbatch/error.hpp"

namespace gridbatch::linalg {

namespace {

constexpr double kPivotTolerance = 1e-13;

using DenseLu = Eigen::PartialPivLU<Eigen::MatrixXd>;
using SparseMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using SparseLu = Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>>;

}  // namespace

struct BlockFactor::Impl {
    std::variant<DenseLu, std::unique_ptr<SparseLu>> lu;
};

BlockFactor factorize_regularized(const SparseCoo& a, double epsilon, FactorKind kind) {
    if (a.rows != a.cols) {
        throw DimensionError("factorize_regularized: matrix is " + std::to_string(a.rows) + "x" + std::to_string(a.cols));
    }
    const SparseCoo c = canonicalize(a);
    const Index n = c.rows;
    if (kind == FactorKind::Auto) {
        kind = n <= kAutoDenseLimit ? FactorKind::Dense : FactorKind::Sparse;
    }

    double scale = std::abs(epsilon);
    auto impl = std::make_shared<BlockFactor::Impl>();

    if (kind == FactorKind::Dense) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t k = 0; k < c.nnz(); ++k) {
            m(c.row_idx[k], c.col_idx[k]) += c.vals[k];
        }
        m.diagonal().array() += epsilon;
        if (n > 0) {
            scale = std::max(scale, m.cwiseAbs().maxCoeff());
        }
        DenseLu lu(m);
        const Eigen::MatrixXd& packed = lu.matrixLU();
        for (Index i = 0; i < n; ++i) {
            const double pivot = std::abs(packed(i, i));
            if (!(pivot > kPivotTolerance * scale)) {
                throw NumericalError("factorize_regularized: pivot " + std::to_string(i) + " is " +
                                     std::to_string(pivot) + " (singular block)");
            }
        }
        impl->lu = std::move(lu);
    } else {
        std::vector<Eigen::Triplet<double, int>> trips;
        trips.reserve(c.nnz() + static_cast<std::size_t>(n));
        for (std::size_t k = 0; k < c.nnz(); ++k) {
            trips.emplace_back(c.row_idx[k], c.col_idx[k], c.vals[k]);
            scale = std::max(scale, std::abs(c.vals[k]));
        }
        for (Index i = 0; i < n; ++i) {
            trips.emplace_back(i, i, epsilon);
        }
        SparseMat m(n, n);
        m.setFromTriplets(trips.begin(), trips.end());
        m.makeCompressed();
        auto lu = std::make_unique<SparseLu>();
        lu->setPivotThreshold(1.0);
        lu->compute(m);
        if (lu->info() != Eigen::Success) {
            throw NumericalError("factorize_regularized: sparse LU failed (" + lu->lastErrorMessage() + ")");
        }
        // Pivots are not exposed by SparseLU; a near-singular factor shows up
        // as a large back-substitution residual on a probe vector instead.
        if (n > 0) {
            const Eigen::VectorXd b = m * Eigen::VectorXd::Ones(n);
            const Eigen::VectorXd x = lu->solve(b);
            const double rel = (m * x - b).norm() / std::max(b.norm(), scale);
            if (!x.allFinite() || !(rel < 1e-6)) {
                throw NumericalError("factorize_regularized: probe residual " + std::to_string(rel) +
                                     " (singular block)");
            }
        }
        impl->lu = std::move(lu);
    }

    BlockFactor f;
    f.impl_ = std::move(impl);
    f.dim_ = n;
    f.epsilon_ = epsilon;
    f.kind_ = kind;
    return f;
}

void BlockFactor::solve_in_place(std::span<double> x) const {
    if (x.size() != static_cast<std::size_t>(dim_)) {
        throw DimensionError("BlockFactor: rhs of " + std::to_string(x.size()) + " for dim " + std::to_string(dim_));
    }
    if (dim_ == 0) {
        return;
    }
    // Aligned copies keep Eigen's kernel split independent of the caller's buffer.
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(x.data(), dim_);
    Eigen::VectorXd v;
    if (const auto* dense = std::get_if<DenseLu>(&impl_->lu)) {
        v = dense->solve(b);
    } else {
        v = std::get<std::unique_ptr<SparseLu>>(impl_->lu)->solve(b);
    }
    std::copy(v.data(), v.data() + dim_, x.begin());
}

std::vector<double> BlockFactor::solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

}  // namespace gridbatch::linalg
