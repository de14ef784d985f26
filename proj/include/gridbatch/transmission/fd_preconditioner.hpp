#pragma once

#include <memory>
#include <span>
#include <vector>

#include "gridbatch/linalg/block_factor.hpp"
#include "gridbatch/linalg/sparse.hpp"
#include "gridbatch/network/partition.hpp"
#include "gridbatch/transmission/polar_state.hpp"

namespace gridbatch::transmission {

/// Network-level part of the fast-decoupled preconditioner: factors of
/// B' + eps I and B'' + eps I and the coupling block G_qtheta.
struct FdFactors {
    linalg::BlockFactor bprime;
    linalg::BlockFactor bdprime;
    linalg::SparseCsr g_qtheta;
    double epsilon = 0.0;
};

/// Throws NumericalError if a regularized block is singular.
std::shared_ptr<const FdFactors> factorize_fd_blocks(const network::PartitionedYViews& views, double epsilon,
                                                     linalg::FactorKind kind = linalg::FactorKind::Auto);

/// Block lower-triangular left preconditioner
///
///   M = [ diag(V_theta)(B' + eps I)   0                      ]
///       [ G_qtheta                    diag(V_q)(B'' + eps I) ]
///
/// The factors are shared; only the voltage scalings belong to one iterate.
struct FdPreconditioner {
    std::shared_ptr<const FdFactors> factors;
    std::vector<double> v_theta;
    std::vector<double> v_q;
};

/// Throws NumericalError for a non-positive or non-finite magnitude and
/// DimensionError when the factors do not match the partition.
FdPreconditioner build_preconditioner(std::shared_ptr<const FdFactors> factors, const PolarState& s,
                                      const BusPartition& part);

/// z = M^{-1} r by forward block substitution:
/// z_theta = (B' + eps I)^{-1} diag(V_theta)^{-1} r_theta,
/// z_q = (B'' + eps I)^{-1} diag(V_q)^{-1} (r_q - G_qtheta z_theta).
void apply_preconditioner(const FdPreconditioner& p, std::span<const double> r, std::span<double> z);
std::vector<double> apply_preconditioner(const FdPreconditioner& p, std::span<const double> r);

}  // namespace gridbatch::transmission
