#include "gridbatch/transmission/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "gridbatch/error.hpp"
#include "gridbatch/transmission/power_equations.hpp"

namespace gridbatch::transmission {

namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) {
            return std::numeric_limits<double>::infinity();
        }
        m = std::max(m, std::abs(x));
    }
    return m;
}

void append(std::string& diag, const std::string& msg) {
    if (!diag.empty()) {
        diag += "; ";
    }
    diag += msg;
}

}  // namespace

void validate(const NewtonOptions& opts) {
    if (!(opts.tol_mismatch > 0.0)) {
        throw std::invalid_argument(fmt::format("tol_mismatch must be positive, got {}", opts.tol_mismatch));
    }
    if (opts.max_newton < 1) {
        throw std::invalid_argument(fmt::format("max_newton must be at least 1, got {}", opts.max_newton));
    }
    if (!(opts.epsilon >= 0.0)) {
        throw std::invalid_argument(fmt::format("epsilon must be non-negative, got {}", opts.epsilon));
    }
    if (!(opts.gmres.tol > 0.0) || opts.gmres.restart < 1 || opts.gmres.max_outer < 1) {
        throw std::invalid_argument("gmres options: tol > 0, restart >= 1 and max_outer >= 1 required");
    }
}

std::shared_ptr<const TransmissionModel> build_transmission_model(TransmissionNetwork net, double epsilon,
                                                                  linalg::FactorKind kind) {
    network::validate(net);
    auto m = std::make_shared<TransmissionModel>();
    m->net = std::move(net);
    m->ybus = network::build_ybus(m->net);
    m->ycsr = network::to_csr(m->ybus);
    m->part = network::partition_buses(m->net);
    m->views = network::extract_partitioned_views(m->ybus, m->part);
    m->fd = factorize_fd_blocks(m->views, epsilon, kind);
    return m;
}

NewtonResult newton_solve(const TransmissionModel& model, const TransmissionScenario& sc, const NewtonOptions& opts,
                          const PolarState* initial) {
    validate(opts);
    const BusPartition& part = model.part;
    const auto m = static_cast<std::size_t>(part.n_state());

    std::shared_ptr<const FdFactors> fd = model.fd;
    if (opts.precond == PrecondKind::FastDecoupled && fd->epsilon != opts.epsilon) {
        fd = factorize_fd_blocks(model.views, opts.epsilon, fd->bprime.kind());
    }

    NewtonResult res;
    res.state = (opts.flat_start || initial == nullptr) ? flat_start(model.net, part) : *initial;
    std::vector<double> f = mismatch(res.state, sc, model.ycsr, part);
    std::vector<double> x = pack(res.state, part);
    std::vector<double> rhs(m);

    for (;;) {
        res.final_mismatch_inf = inf_norm(f);
        if (!std::isfinite(res.final_mismatch_inf)) {
            append(res.diagnostic, fmt::format("non-finite mismatch after {} iterations", res.iterations));
            break;
        }
        if (res.final_mismatch_inf <= opts.tol_mismatch) {
            res.converged = true;
            break;
        }
        if (res.iterations >= opts.max_newton) {
            append(res.diagnostic, fmt::format("no convergence in {} iterations (|F|inf = {})", opts.max_newton,
                                               res.final_mismatch_inf));
            break;
        }

        const JacobianOperator jac(res.state, model.ycsr, part);
        linalg::LinearMap precond;
        FdPreconditioner fdp;
        if (opts.precond == PrecondKind::FastDecoupled) {
            try {
                fdp = build_preconditioner(fd, res.state, part);
            } catch (const NumericalError& e) {
                append(res.diagnostic, e.what());
                break;
            }
            precond = [&fdp](std::span<const double> in, std::span<double> out) { apply_preconditioner(fdp, in, out); };
        } else {
            precond = linalg::identity_map();
        }
        for (std::size_t k = 0; k < m; ++k) {
            rhs[k] = -f[k];
        }
        const linalg::GmresResult step = linalg::gmres(
            [&jac](std::span<const double> in, std::span<double> out) { jac.apply(in, out); }, precond, rhs,
            opts.gmres);
        res.per_iteration_gmres.push_back(step.stats.iterations);
        if (step.stats.status == linalg::GmresStatus::NonFinite) {
            append(res.diagnostic, fmt::format("gmres non_finite at newton iteration {}", res.iterations + 1));
            break;
        }
        if (step.stats.status != linalg::GmresStatus::Converged) {
            append(res.diagnostic, fmt::format("gmres {} at newton iteration {} (relres {})",
                                               linalg::to_string(step.stats.status), res.iterations + 1,
                                               step.stats.final_relres));
        }

        for (std::size_t k = 0; k < m; ++k) {
            x[k] += step.x[k];
        }
        unpack(x, part, res.state);
        ++res.iterations;
        const bool collapsed = std::any_of(part.q_block.begin(), part.q_block.end(), [&](Index i) {
            const double v = res.state.vmag[static_cast<std::size_t>(i)];
            return !(v > 0.0) || !std::isfinite(v);
        });
        f = mismatch(res.state, sc, model.ycsr, part);
        if (collapsed) {
            res.final_mismatch_inf = inf_norm(f);
            append(res.diagnostic, fmt::format("voltage collapse at newton iteration {}", res.iterations));
            break;
        }
    }
    return res;
}

}  // namespace gridbatch::transmission
