#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "gridbatch/error.hpp"
#include "gridbatch/transmission/newton.hpp"

namespace gridbatch::transmission {

namespace {

// P_i = V_i sum_j V_j (G_ij cos t_ij + B_ij sin t_ij), Q_i = V_i sum_j V_j (G_ij sin t_ij - B_ij cos t_ij).
void trig_injections(const network::YbusCsr& y, const PolarState& s, std::vector<double>& p, std::vector<double>& q) {
    p.assign(static_cast<std::size_t>(y.n), 0.0);
    q.assign(static_cast<std::size_t>(y.n), 0.0);
    for (Index i = 0; i < y.n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        double pi = 0.0;
        double qi = 0.0;
        for (Index k = y.row_ptr[i]; k < y.row_ptr[i + 1]; ++k) {
            const auto j = static_cast<std::size_t>(y.col_idx[k]);
            const double t = s.theta[ui] - s.theta[j];
            const double c = std::cos(t);
            const double sn = std::sin(t);
            pi += s.vmag[j] * (y.g[k] * c + y.b[k] * sn);
            qi += s.vmag[j] * (y.g[k] * sn - y.b[k] * c);
        }
        p[ui] = s.vmag[ui] * pi;
        q[ui] = s.vmag[ui] * qi;
    }
}

}  // namespace

NewtonResult dense_newton_oracle(const TransmissionModel& model, const TransmissionScenario& sc,
                                 const NewtonOptions& opts, const PolarState* initial) {
    validate(opts);
    const BusPartition& part = model.part;
    const network::YbusCsr& y = model.ycsr;
    const Index nt = part.n_theta();
    const Index m = part.n_state();
    if (sc.p_spec.size() != part.theta_block.size() || sc.q_spec.size() != part.q_block.size()) {
        throw DimensionError("dense oracle: scenario does not match the bus partition");
    }

    NewtonResult res;
    res.state = (opts.flat_start || initial == nullptr) ? flat_start(model.net, part) : *initial;
    std::vector<double> p;
    std::vector<double> q;
    Eigen::VectorXd f(m);
    Eigen::MatrixXd jac(m, m);

    for (;;) {
        trig_injections(y, res.state, p, q);
        for (Index k = 0; k < nt; ++k) {
            f(k) = p[static_cast<std::size_t>(part.theta_block[static_cast<std::size_t>(k)])] -
                   sc.p_spec[static_cast<std::size_t>(k)];
        }
        for (Index k = 0; k < part.n_q(); ++k) {
            f(nt + k) = q[static_cast<std::size_t>(part.q_block[static_cast<std::size_t>(k)])] -
                        sc.q_spec[static_cast<std::size_t>(k)];
        }
        res.final_mismatch_inf = f.allFinite() ? f.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
        if (!std::isfinite(res.final_mismatch_inf)) {
            res.diagnostic = "non-finite mismatch";
            break;
        }
        if (res.final_mismatch_inf <= opts.tol_mismatch) {
            res.converged = true;
            break;
        }
        if (res.iterations >= opts.max_newton) {
            res.diagnostic = fmt::format("no convergence in {} iterations", opts.max_newton);
            break;
        }

        // Rows: P over theta_block then Q over q_block; columns: theta over
        // theta_block then |V| over q_block.
        jac.setZero();
        for (Index i = 0; i < y.n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const Index rp = part.theta_pos[ui];
            if (rp < 0) {
                continue;
            }
            const Index rq = part.q_pos[ui];
            const double vi = res.state.vmag[ui];
            for (Index k = y.row_ptr[i]; k < y.row_ptr[i + 1]; ++k) {
                const auto j = static_cast<std::size_t>(y.col_idx[k]);
                const double g = y.g[k];
                const double b = y.b[k];
                if (j == ui) {
                    jac(rp, rp) += -q[ui] - b * vi * vi;  // H_ii
                    if (rq >= 0) {
                        jac(rp, nt + rq) += p[ui] / vi + g * vi;  // N_ii
                        jac(nt + rq, rp) += p[ui] - g * vi * vi;  // M_ii
                        jac(nt + rq, nt + rq) += q[ui] / vi - b * vi;  // L_ii
                    }
                    continue;
                }
                const double t = res.state.theta[ui] - res.state.theta[j];
                const double c = std::cos(t);
                const double sn = std::sin(t);
                const double vj = res.state.vmag[j];
                const Index cp = part.theta_pos[j];
                const Index cq = part.q_pos[j];
                if (cp >= 0) {
                    jac(rp, cp) += vi * vj * (g * sn - b * c);  // H_ij
                    if (rq >= 0) {
                        jac(nt + rq, cp) += -vi * vj * (g * c + b * sn);  // M_ij
                    }
                }
                if (cq >= 0) {
                    jac(rp, nt + cq) += vi * (g * c + b * sn);  // N_ij
                    if (rq >= 0) {
                        jac(nt + rq, nt + cq) += vi * (g * sn - b * c);  // L_ij
                    }
                }
            }
        }

        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        const double scale = jac.cwiseAbs().maxCoeff();
        const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
        if (m > 0 && !(piv.minCoeff() > 1e-13 * scale)) {
            throw NumericalError(fmt::format("dense oracle: singular Jacobian at iteration {} (min pivot {})",
                                             res.iterations + 1, piv.minCoeff()));
        }
        const Eigen::VectorXd dx = lu.solve(-f);
        for (Index k = 0; k < nt; ++k) {
            res.state.theta[static_cast<std::size_t>(part.theta_block[static_cast<std::size_t>(k)])] += dx(k);
        }
        for (Index k = 0; k < part.n_q(); ++k) {
            res.state.vmag[static_cast<std::size_t>(part.q_block[static_cast<std::size_t>(k)])] += dx(nt + k);
        }
        ++res.iterations;
    }
    return res;
}

}  // namespace gridbatch::transmission
