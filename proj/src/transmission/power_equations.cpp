#include "gridbatch/transmission/power_equations.hpp"

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::transmission {

namespace {

using cd = std::complex<double>;

std::vector<cd> complex_voltage(const PolarState& s) {
    std::vector<cd> u(s.vmag.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = std::polar(s.vmag[i], s.theta[i]);
    }
    return u;
}

cd row_product(const YbusCsr& y, Index r, const std::vector<cd>& u) {
    cd acc = 0.0;
    for (Index k = y.row_ptr[r]; k < y.row_ptr[r + 1]; ++k) {
        acc += cd(y.g[k], y.b[k]) * u[static_cast<std::size_t>(y.col_idx[k])];
    }
    return acc;
}

void check_dims(const PolarState& s, const YbusCsr& y) {
    if (s.theta.size() != static_cast<std::size_t>(y.n) || s.vmag.size() != static_cast<std::size_t>(y.n)) {
        throw DimensionError(fmt::format("state of {}/{} buses for Y_bus of {}", s.theta.size(), s.vmag.size(), y.n));
    }
}

}  // namespace

Injections calc_injections(const PolarState& s, const YbusCsr& y) {
    check_dims(s, y);
    const std::vector<cd> u = complex_voltage(s);
    Injections inj;
    inj.p.resize(u.size());
    inj.q.resize(u.size());
    for (Index r = 0; r < y.n; ++r) {
        const cd sr = u[static_cast<std::size_t>(r)] * std::conj(row_product(y, r, u));
        inj.p[static_cast<std::size_t>(r)] = sr.real();
        inj.q[static_cast<std::size_t>(r)] = sr.imag();
    }
    return inj;
}

Injections calc_injections(const PolarState& s, const AdmittanceMatrix& y) { return calc_injections(s, network::to_csr(y)); }

std::vector<double> mismatch(const PolarState& s, const TransmissionScenario& sc, const YbusCsr& y,
                             const BusPartition& part) {
    if (sc.p_spec.size() != part.theta_block.size() || sc.q_spec.size() != part.q_block.size()) {
        throw DimensionError(fmt::format("scenario of {}+{} for partition of {}+{}", sc.p_spec.size(), sc.q_spec.size(),
                                         part.theta_block.size(), part.q_block.size()));
    }
    check_dims(s, y);
    const std::vector<cd> u = complex_voltage(s);
    std::vector<double> f(static_cast<std::size_t>(part.n_state()));
    const std::size_t nt = part.theta_block.size();
    for (std::size_t k = 0; k < nt; ++k) {
        const Index r = part.theta_block[k];
        const cd sr = u[static_cast<std::size_t>(r)] * std::conj(row_product(y, r, u));
        f[k] = sr.real() - sc.p_spec[k];
        const Index qk = part.q_pos[static_cast<std::size_t>(r)];
        if (qk >= 0) {
            f[nt + static_cast<std::size_t>(qk)] = sr.imag() - sc.q_spec[static_cast<std::size_t>(qk)];
        }
    }
    return f;
}

JacobianOperator::JacobianOperator(const PolarState& s, const YbusCsr& y, const BusPartition& part)
    : y_(&y), part_(&part), u_(complex_voltage(s)) {
    check_dims(s, y);
    conj_i_.resize(u_.size());
    inv_v_.resize(u_.size());
    for (Index r = 0; r < y.n; ++r) {
        conj_i_[static_cast<std::size_t>(r)] = std::conj(row_product(y, r, u_));
        inv_v_[static_cast<std::size_t>(r)] = 1.0 / s.vmag[static_cast<std::size_t>(r)];
    }
    du_.assign(u_.size(), 0.0);
}

void JacobianOperator::apply(std::span<const double> dx, std::span<double> out) const {
    const auto m = static_cast<std::size_t>(part_->n_state());
    if (dx.size() != m || out.size() != m) {
        throw DimensionError(fmt::format("jvp: direction of {} and output of {} for state of {}", dx.size(), out.size(), m));
    }
    const BusPartition& p = *part_;
    const std::size_t nt = p.theta_block.size();
    for (std::size_t k = 0; k < nt; ++k) {
        const auto i = static_cast<std::size_t>(p.theta_block[k]);
        du_[i] = u_[i] * cd(0.0, dx[k]);
    }
    for (std::size_t k = 0; k < p.q_block.size(); ++k) {
        const auto i = static_cast<std::size_t>(p.q_block[k]);
        du_[i] += u_[i] * (dx[nt + k] * inv_v_[i]);
    }
    const YbusCsr& y = *y_;
    for (std::size_t k = 0; k < nt; ++k) {
        const Index r = p.theta_block[k];
        const auto i = static_cast<std::size_t>(r);
        const cd ds = du_[i] * conj_i_[i] + u_[i] * std::conj(row_product(y, r, du_));
        out[k] = ds.real();
        const Index qk = p.q_pos[i];
        if (qk >= 0) {
            out[nt + static_cast<std::size_t>(qk)] = ds.imag();
        }
    }
}

std::vector<double> jacobian_vector_product(const PolarState& s, const YbusCsr& y, const BusPartition& part,
                                            std::span<const double> dx) {
    std::vector<double> out(static_cast<std::size_t>(part.n_state()));
    JacobianOperator(s, y, part).apply(dx, out);
    return out;
}

}  // namespace gridbatch::transmission
