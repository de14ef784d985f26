#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridbatch/distribution/three_phase_network.hpp"
#include "gridbatch/distribution/ybus3.hpp"

namespace gridbatch::distribution {

/// How the iteration applies Z.
enum class ZApply {
    /// Columns of Z at load-carrying positions, precomputed by factorized
    /// solves; Z i then costs n x (number of loaded positions).
    LoadColumns,
    /// One factorized solve with Y_NN per application.
    Factorized,
};

/// Reduced model over the non-slack node-phases ("positions").
struct ZBusModel {
    Index n_nodes = 0;                 ///< all node-phases
    std::vector<Index> nonslack;       ///< position -> node
    std::vector<Index> position;       ///< node -> position, -1 for slack
    std::vector<std::string> node_ids; ///< by node
    std::vector<Index> slack_nodes;
    std::vector<cd> v_slack;
    std::vector<cd> v0;  ///< no-load voltages by position

    std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXcd>> lu;  ///< of Y_NN
    ComplexSparse y_ns;                                                 ///< positions x slack phases

    // Load incidence; *_load index into ThreePhaseNetwork::loads.
    std::vector<Index> wye_pos;
    std::vector<std::size_t> wye_load;
    std::vector<std::array<Index, 2>> delta_pos;
    std::vector<std::size_t> delta_load;
    std::vector<cd> load_base;  ///< s_base of every network load

    // Z restricted to loaded positions, column-major n x |loaded|.
    std::vector<Index> loaded;       ///< ascending positions with a load
    std::vector<Index> loaded_slot;  ///< position -> column, -1 otherwise
    std::vector<cd> z_cols;

    Index dim() const noexcept { return static_cast<Index>(nonslack.size()); }

    /// out = Y_NN^{-1} w by the stored factorization.
    void z_apply(std::span<const cd> w, std::span<cd> out) const;
};

/// Factorize Y_NN once and form v0 = -Y_NN^{-1} Y_NS v_slack. Throws
/// NetworkError when Y_NN is singular (e.g. an isolated node-phase).
ZBusModel reduce_zbus(const ComplexSparse& y, const std::vector<SlackPhase>& slack);

/// Record load incidence and the load columns of Z. Throws NetworkError for
/// a load on a slack phase.
void attach_loads(ZBusModel& model, const std::vector<LoadSpec>& loads);

/// Y-bus, reduction and loads in one step.
std::shared_ptr<const ZBusModel> build_zbus_model(const ThreePhaseNetwork& net);

/// Complex p.u. powers aligned with ZBusModel::wye_pos / delta_pos.
struct DistributionScenario {
    std::vector<cd> wye_powers;
    std::vector<cd> delta_powers;
};

DistributionScenario base_scenario(const ZBusModel& model);
/// Every load scaled by multipliers[load index]. Throws DimensionError.
DistributionScenario scaled_scenario(const ZBusModel& model, std::span<const double> multipliers);

inline constexpr double kVoltageFloor = 1e-6;

/// Load currents by position: wye -conj(s / v_p); delta on (p, q) with
/// i_line = conj(s / (v_p - v_q)) adds -i_line at p and +i_line at q.
/// Throws NumericalError naming the node-phase when a voltage (or a
/// line-to-line voltage) is at or below kVoltageFloor.
void current_injection(std::span<const cd> v, const DistributionScenario& sc, const ZBusModel& model,
                       std::span<cd> out);
std::vector<cd> current_injection(std::span<const cd> v, const DistributionScenario& sc, const ZBusModel& model);

struct FixedPointOptions {
    double tol = 1e-9;  ///< on the change of sum |v|
    int max_iter = 100;
    ZApply apply = ZApply::LoadColumns;
};

struct FixedPointResult {
    std::vector<cd> v;  ///< by position
    bool converged = false;
    int iterations = 0;
    double final_delta = 0.0;
    double residual_inf = 0.0;  ///< |v - (Z i(v) + v0)|inf at exit
    std::string diagnostic;
};

/// v <- Z i(v) + v0 from v = v0 until |sum|v_new| - sum|v|| <= tol.
FixedPointResult zbus_iterate(const ZBusModel& model, const DistributionScenario& sc, const FixedPointOptions& opts = {});

/// zbus_iterate on every scenario; element i is bitwise equal to the
/// sequential result for any worker count.
std::vector<FixedPointResult> batch_zbus_solve(const ZBusModel& model, const std::vector<DistributionScenario>& scenarios,
                                               int workers, const FixedPointOptions& opts = {});

}  // namespace gridbatch::distribution
