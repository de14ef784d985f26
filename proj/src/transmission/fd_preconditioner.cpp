#include "gridbatch/transmission/fd_preconditioner.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::transmission {

std::shared_ptr<const FdFactors> factorize_fd_blocks(const network::PartitionedYViews& views, double epsilon,
                                                     linalg::FactorKind kind) {
    auto f = std::make_shared<FdFactors>();
    f->bprime = linalg::factorize_regularized(views.b_prime, epsilon, kind);
    f->bdprime = linalg::factorize_regularized(views.b_dprime, epsilon, kind);
    f->g_qtheta = linalg::coo_to_csr(views.g_qtheta);
    f->epsilon = epsilon;
    return f;
}

FdPreconditioner build_preconditioner(std::shared_ptr<const FdFactors> factors, const PolarState& s,
                                      const BusPartition& part) {
    if (!factors || factors->bprime.dim() != part.n_theta() || factors->bdprime.dim() != part.n_q()) {
        throw DimensionError("build_preconditioner: factors do not match the bus partition");
    }
    FdPreconditioner p;
    p.factors = std::move(factors);
    auto take = [&](const std::vector<Index>& block, std::vector<double>& out) {
        out.reserve(block.size());
        for (Index i : block) {
            const double v = s.vmag.at(static_cast<std::size_t>(i));
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw NumericalError(fmt::format("preconditioner: |V| = {} at bus position {}", v, i));
            }
            out.push_back(v);
        }
    };
    take(part.theta_block, p.v_theta);
    take(part.q_block, p.v_q);
    return p;
}

void apply_preconditioner(const FdPreconditioner& p, std::span<const double> r, std::span<double> z) {
    const std::size_t nt = p.v_theta.size();
    const std::size_t nq = p.v_q.size();
    if (r.size() != nt + nq || z.size() != nt + nq) {
        throw DimensionError(fmt::format("preconditioner: residual of {} and output of {} for {}+{}", r.size(),
                                         z.size(), nt, nq));
    }
    for (std::size_t k = 0; k < nt; ++k) {
        z[k] = r[k] / p.v_theta[k];
    }
    const std::span<double> zt = z.first(nt);
    p.factors->bprime.solve_in_place(zt);

    const linalg::SparseCsr& g = p.factors->g_qtheta;
    for (std::size_t k = 0; k < nq; ++k) {
        double acc = 0.0;
        for (Index e = g.row_ptr[k]; e < g.row_ptr[k + 1]; ++e) {
            acc += g.vals[static_cast<std::size_t>(e)] * zt[static_cast<std::size_t>(g.col_idx[e])];
        }
        z[nt + k] = (r[nt + k] - acc) / p.v_q[k];
    }
    p.factors->bdprime.solve_in_place(z.subspan(nt));
}

std::vector<double> apply_preconditioner(const FdPreconditioner& p, std::span<const double> r) {
    std::vector<double> z(r.size());
    apply_preconditioner(p, r, z);
    return z;
}

}  // namespace gridbatch::transmission
