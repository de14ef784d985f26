#pragma once

#include <memory>
#include <span>
#include <vector>

#include "gridbatch/linalg/sparse.hpp"

namespace gridbatch::linalg {

enum class FactorKind {
    Dense,   ///< partial-pivot LU of the densified block
    Sparse,  ///< supernodal sparse LU with COLAMD ordering
    Auto,    ///< Dense up to kAutoDenseLimit rows, Sparse above
};

inline constexpr Index kAutoDenseLimit = 1000;

/// Reusable factorization of (A + epsilon I). Immutable after construction and
/// cheap to copy; copies share the factor, so one instance can serve every
/// scenario worker concurrently.
class BlockFactor {
  public:
    BlockFactor() = default;

    Index dim() const noexcept { return dim_; }
    double epsilon() const noexcept { return epsilon_; }
    FactorKind kind() const noexcept { return kind_; }

    /// x <- (A + eps I)^{-1} x
    void solve_in_place(std::span<double> x) const;
    std::vector<double> solve(std::span<const double> b) const;

    friend BlockFactor factorize_regularized(const SparseCoo& a, double epsilon, FactorKind kind);

  private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    Index dim_ = 0;
    double epsilon_ = 0.0;
    FactorKind kind_ = FactorKind::Dense;
};

/// Factor A + epsilon I once. Throws DimensionError for non-square input and
/// NumericalError when a pivot falls below 1e-13 of the largest entry.
BlockFactor factorize_regularized(const SparseCoo& a, double epsilon, FactorKind kind = FactorKind::Auto);

}  // namespace gridbatch::linalg
