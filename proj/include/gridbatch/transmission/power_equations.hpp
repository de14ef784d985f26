#pragma once

#include <complex>
#include <span>
#include <vector>

#include "gridbatch/network/ybus.hpp"
#include "gridbatch/transmission/polar_state.hpp"

namespace gridbatch::transmission {

using network::AdmittanceMatrix;
using network::YbusCsr;

/// Net injections over all buses, generation positive.
struct Injections {
    std::vector<double> p;
    std::vector<double> q;
};

/// P_i + jQ_i = U_i conj(sum_j Y_ij U_j) with U = |V| e^{j theta}.
Injections calc_injections(const PolarState& s, const YbusCsr& y);
Injections calc_injections(const PolarState& s, const AdmittanceMatrix& y);

/// F = [P_calc(theta_block) - p_spec; Q_calc(q_block) - q_spec].
std::vector<double> mismatch(const PolarState& s, const TransmissionScenario& sc, const YbusCsr& y,
                             const BusPartition& part);

/// Matrix-free Jacobian of the mismatch map, linearized at one state.
///
/// With U_i = V_i e^{j theta_i}, I = Y U and a direction dx = [d theta_Theta; dV_Q]
/// (zero on fixed entries), the directional derivative of S_i = U_i conj(I_i) is
///
///   dU_i = U_i (dV_i / V_i + j d theta_i)
///   dS_i = dU_i conj(I_i) + U_i conj((Y dU)_i)
///
/// and dF = [Re dS over theta_block; Im dS over q_block]. This is the H/N/M/L
/// block product written without forming the blocks; one complex sparse
/// product per application.
class JacobianOperator {
  public:
    JacobianOperator(const PolarState& s, const YbusCsr& y, const BusPartition& part);

    Index dim() const noexcept { return part_->n_state(); }
    /// out = J dx. Not thread-safe: uses internal scratch space.
    void apply(std::span<const double> dx, std::span<double> out) const;

  private:
    const YbusCsr* y_;
    const BusPartition* part_;
    std::vector<std::complex<double>> u_;
    std::vector<std::complex<double>> conj_i_;
    std::vector<double> inv_v_;
    mutable std::vector<std::complex<double>> du_;
};

std::vector<double> jacobian_vector_product(const PolarState& s, const YbusCsr& y, const BusPartition& part,
                                            std::span<const double> dx);

}  // namespace gridbatch::transmission
