#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gridbatch::linalg {

/// out = Op(in); in and out never alias and have the operator dimension.
using LinearMap = std::function<void(std::span<const double> in, std::span<double> out)>;

struct GmresOptions {
    double tol = 1e-8;   ///< relative target on the preconditioned residual
    int restart = 60;    ///< Krylov vectors per cycle
    int max_outer = 10;  ///< restart cycles
};

enum class GmresStatus {
    Converged,
    MaxIterations,
    Breakdown,  ///< Arnoldi produced a null vector before the target was met
    NonFinite,  ///< NaN/Inf from the operator or the preconditioner
};

const char* to_string(GmresStatus s) noexcept;

struct GmresStats {
    int iterations = 0;  ///< total inner (Arnoldi) steps over all cycles
    int cycles = 0;
    double final_relres = 0.0;  ///< ||M^{-1}(b - A x)|| / ||M^{-1} b||, recomputed at exit
    bool converged = false;
    GmresStatus status = GmresStatus::MaxIterations;
    /// Givens residual estimate after every inner step, relative to ||M^{-1} b||.
    std::vector<double> residual_history;
};

struct GmresResult {
    std::vector<double> x;
    GmresStats stats;
};

/// Restarted GMRES with left preconditioning, zero initial guess, modified
/// Gram-Schmidt Arnoldi and Givens-rotation least squares. Solves
/// M^{-1} A x = M^{-1} b; converged means the recomputed preconditioned
/// residual satisfies ||M^{-1}(b - A x)|| <= tol ||M^{-1} b||.
GmresResult gmres(const LinearMap& apply_operator, const LinearMap& apply_precond, std::span<const double> rhs,
                  const GmresOptions& opts = {});

/// Identity preconditioner.
LinearMap identity_map();

}  // namespace gridbatch::linalg
