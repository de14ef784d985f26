#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gridbatch/linalg/block_factor.hpp"
#include "gridbatch/linalg/gmres.hpp"
#include "gridbatch/network/partition.hpp"
#include "gridbatch/network/ybus.hpp"
#include "gridbatch/transmission/fd_preconditioner.hpp"
#include "gridbatch/transmission/polar_state.hpp"

namespace gridbatch::transmission {

enum class PrecondKind { FastDecoupled, None };

struct NewtonOptions {
    double tol_mismatch = 1e-8;  ///< infinity norm of F, p.u.
    int max_newton = 20;
    double epsilon = 1e-6;  ///< regularization of B' and B''
    linalg::GmresOptions gmres{};
    bool flat_start = true;
    PrecondKind precond = PrecondKind::FastDecoupled;
};

/// Throws std::invalid_argument when an option is out of range.
void validate(const NewtonOptions& opts);

struct NewtonResult {
    PolarState state;
    bool converged = false;
    int iterations = 0;  ///< Newton updates applied
    double final_mismatch_inf = 0.0;
    std::vector<int> per_iteration_gmres;
    std::string diagnostic;  ///< empty on a clean solve
};

/// Everything about a network that does not depend on the scenario. Built
/// once, immutable, shared read-only by all scenario workers.
struct TransmissionModel {
    TransmissionNetwork net;
    network::AdmittanceMatrix ybus;
    network::YbusCsr ycsr;
    BusPartition part;
    network::PartitionedYViews views;
    std::shared_ptr<const FdFactors> fd;
};

std::shared_ptr<const TransmissionModel> build_transmission_model(TransmissionNetwork net, double epsilon = 1e-6,
                                                                  linalg::FactorKind kind = linalg::FactorKind::Auto);

/// Newton-Raphson with left-preconditioned GMRES on J dx = -F. Never throws
/// for non-convergence: the result carries converged=false and a diagnostic.
/// `initial` is used when opts.flat_start is false.
NewtonResult newton_solve(const TransmissionModel& model, const TransmissionScenario& sc, const NewtonOptions& opts = {},
                          const PolarState* initial = nullptr);

/// Reference solver: the same iteration with the dense H/N/M/L Jacobian
/// assembled from trigonometric sums and solved by partial-pivot LU. Only
/// tol_mismatch, max_newton, flat_start are used. Throws NumericalError on a
/// singular Jacobian.
NewtonResult dense_newton_oracle(const TransmissionModel& model, const TransmissionScenario& sc,
                                 const NewtonOptions& opts = {}, const PolarState* initial = nullptr);

}  // namespace gridbatch::transmission
