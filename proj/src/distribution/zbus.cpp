#include "gridbatch/distribution/zbus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gridbatch/batch/parallel.hpp"
#include "gridbatch/error.hpp"

namespace gridbatch::distribution {

namespace {

constexpr double kSingularPivot = 1e-15;

void check_scenario(const ZBusModel& m, const DistributionScenario& sc) {
    if (sc.wye_powers.size() != m.wye_pos.size() || sc.delta_powers.size() != m.delta_pos.size()) {
        throw DimensionError(fmt::format("scenario of {} wye + {} delta powers for a model with {} + {} loads",
                                         sc.wye_powers.size(), sc.delta_powers.size(), m.wye_pos.size(),
                                         m.delta_pos.size()));
    }
}

// out = Z i + v0 in the requested mode.
void fixed_point_map(const ZBusModel& m, ZApply mode, std::span<const cd> i, std::span<cd> out) {
    const auto n = static_cast<std::size_t>(m.dim());
    if (mode == ZApply::Factorized) {
        m.z_apply(i, out);
        for (std::size_t r = 0; r < n; ++r) {
            out[r] += m.v0[r];
        }
        return;
    }
    std::copy(m.v0.begin(), m.v0.end(), out.begin());
    auto* o = reinterpret_cast<double*>(out.data());
    for (std::size_t s = 0; s < m.loaded.size(); ++s) {
        const cd c = i[static_cast<std::size_t>(m.loaded[s])];
        const double cr = c.real();
        const double ci = c.imag();
        const auto* z = reinterpret_cast<const double*>(m.z_cols.data() + s * n);
        for (std::size_t r = 0; r < n; ++r) {
            const double zr = z[2 * r];
            const double zi = z[2 * r + 1];
            o[2 * r] += zr * cr - zi * ci;
            o[2 * r + 1] += zr * ci + zi * cr;
        }
    }
}

}  // namespace

void ZBusModel::z_apply(std::span<const cd> w, std::span<cd> out) const {
    const auto n = static_cast<std::size_t>(dim());
    if (w.size() != n || out.size() != n) {
        throw DimensionError(fmt::format("z_apply: vectors of {} and {} for dimension {}", w.size(), out.size(), n));
    }
    // Aligned temporaries keep Eigen's kernel split independent of caller buffers.
    const Eigen::VectorXcd rhs = Eigen::Map<const Eigen::VectorXcd>(w.data(), dim());
    const Eigen::VectorXcd x = lu->solve(rhs);
    std::copy(x.data(), x.data() + n, out.begin());
}

ZBusModel reduce_zbus(const ComplexSparse& y, const std::vector<SlackPhase>& slack) {
    if (y.rows() != y.cols()) {
        throw DimensionError("reduce_zbus: Y is not square");
    }
    ZBusModel m;
    m.n_nodes = static_cast<Index>(y.rows());
    m.position.assign(static_cast<std::size_t>(m.n_nodes), 0);
    std::vector<Index> slack_slot(static_cast<std::size_t>(m.n_nodes), -1);
    for (const SlackPhase& s : slack) {
        if (s.node < 0 || s.node >= m.n_nodes) {
            throw DimensionError(fmt::format("reduce_zbus: slack node {} outside Y of {}", s.node, m.n_nodes));
        }
        slack_slot[static_cast<std::size_t>(s.node)] = static_cast<Index>(m.slack_nodes.size());
        m.slack_nodes.push_back(s.node);
        m.v_slack.push_back(s.v);
    }
    if (m.slack_nodes.empty()) {
        throw NetworkError("reduce_zbus: no slack phase");
    }
    for (Index k = 0; k < m.n_nodes; ++k) {
        if (slack_slot[static_cast<std::size_t>(k)] >= 0) {
            m.position[static_cast<std::size_t>(k)] = -1;
        } else {
            m.position[static_cast<std::size_t>(k)] = static_cast<Index>(m.nonslack.size());
            m.nonslack.push_back(k);
        }
    }
    const Index n = m.dim();
    const auto ns = static_cast<Index>(m.slack_nodes.size());

    Eigen::MatrixXcd ynn = Eigen::MatrixXcd::Zero(n, n);
    std::vector<Eigen::Triplet<cd, int>> yns;
    for (Index r = 0; r < m.n_nodes; ++r) {
        const Index pr = m.position[static_cast<std::size_t>(r)];
        if (pr < 0) {
            continue;
        }
        for (ComplexSparse::InnerIterator it(y, r); it; ++it) {
            const Index pc = m.position[static_cast<std::size_t>(it.col())];
            if (pc >= 0) {
                ynn(pr, pc) += it.value();
            } else {
                yns.emplace_back(pr, slack_slot[static_cast<std::size_t>(it.col())], it.value());
            }
        }
    }
    m.y_ns = ComplexSparse(n, ns);
    m.y_ns.setFromTriplets(yns.begin(), yns.end());
    m.y_ns.makeCompressed();

    const double scale = n > 0 ? ynn.cwiseAbs().maxCoeff() : 0.0;
    auto lu = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXcd>>(ynn);
    for (Index k = 0; k < n; ++k) {
        const double piv = std::abs(lu->matrixLU()(k, k));
        if (!(piv > kSingularPivot * scale)) {
            throw NetworkError(fmt::format("reduce_zbus: Y_NN is singular (pivot {} of {}); is a node-phase isolated?",
                                           piv, scale));
        }
    }
    m.lu = std::move(lu);

    Eigen::VectorXcd vs(ns);
    for (Index k = 0; k < ns; ++k) {
        vs(k) = m.v_slack[static_cast<std::size_t>(k)];
    }
    const Eigen::VectorXcd rhs = -(m.y_ns * vs);
    const Eigen::VectorXcd v0 = m.lu->solve(rhs);
    if (!v0.allFinite()) {
        throw NetworkError("reduce_zbus: non-finite no-load voltage");
    }
    m.v0.assign(v0.data(), v0.data() + n);
    return m;
}

void attach_loads(ZBusModel& m, const std::vector<LoadSpec>& loads) {
    auto pos_of = [&](Index node, const LoadSpec& l) {
        if (node < 0 || node >= m.n_nodes) {
            throw DimensionError(fmt::format("load {}: node {} outside the model", l.name, node));
        }
        const Index p = m.position[static_cast<std::size_t>(node)];
        if (p < 0) {
            throw NetworkError(fmt::format("load {} is attached to a slack phase", l.name));
        }
        return p;
    };
    m.wye_pos.clear();
    m.wye_load.clear();
    m.delta_pos.clear();
    m.delta_load.clear();
    m.load_base.clear();
    std::vector<bool> used(static_cast<std::size_t>(m.dim()), false);
    for (std::size_t k = 0; k < loads.size(); ++k) {
        const LoadSpec& l = loads[k];
        m.load_base.push_back(l.s_base);
        if (l.kind == LoadKind::Wye) {
            const Index p = pos_of(l.a, l);
            m.wye_pos.push_back(p);
            m.wye_load.push_back(k);
            used[static_cast<std::size_t>(p)] = true;
        } else {
            const Index p = pos_of(l.a, l);
            const Index q = pos_of(l.b, l);
            m.delta_pos.push_back({p, q});
            m.delta_load.push_back(k);
            used[static_cast<std::size_t>(p)] = true;
            used[static_cast<std::size_t>(q)] = true;
        }
    }
    m.loaded.clear();
    m.loaded_slot.assign(static_cast<std::size_t>(m.dim()), -1);
    for (Index p = 0; p < m.dim(); ++p) {
        if (used[static_cast<std::size_t>(p)]) {
            m.loaded_slot[static_cast<std::size_t>(p)] = static_cast<Index>(m.loaded.size());
            m.loaded.push_back(p);
        }
    }
    const Index n = m.dim();
    const auto nl = static_cast<Index>(m.loaded.size());
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, nl);
    for (Index s = 0; s < nl; ++s) {
        e(m.loaded[static_cast<std::size_t>(s)], s) = 1.0;
    }
    const Eigen::MatrixXcd cols = m.lu->solve(e);
    m.z_cols.assign(cols.data(), cols.data() + static_cast<std::size_t>(n) * nl);
}

std::shared_ptr<const ZBusModel> build_zbus_model(const ThreePhaseNetwork& net) {
    auto m = std::make_shared<ZBusModel>(reduce_zbus(build_three_phase_ybus(net), net.slack));
    attach_loads(*m, net.loads);
    m->node_ids.reserve(net.nodes.size());
    for (const NodePhase& np : net.nodes) {
        m->node_ids.push_back(np.id);
    }
    return m;
}

DistributionScenario base_scenario(const ZBusModel& model) {
    const std::vector<double> ones(model.load_base.size(), 1.0);
    return scaled_scenario(model, ones);
}

DistributionScenario scaled_scenario(const ZBusModel& model, std::span<const double> multipliers) {
    if (multipliers.size() != model.load_base.size()) {
        throw DimensionError(
            fmt::format("{} multipliers for {} loads", multipliers.size(), model.load_base.size()));
    }
    DistributionScenario sc;
    sc.wye_powers.reserve(model.wye_load.size());
    sc.delta_powers.reserve(model.delta_load.size());
    for (std::size_t k : model.wye_load) {
        sc.wye_powers.push_back(multipliers[k] * model.load_base[k]);
    }
    for (std::size_t k : model.delta_load) {
        sc.delta_powers.push_back(multipliers[k] * model.load_base[k]);
    }
    return sc;
}

void current_injection(std::span<const cd> v, const DistributionScenario& sc, const ZBusModel& model,
                       std::span<cd> out) {
    check_scenario(model, sc);
    const auto n = static_cast<std::size_t>(model.dim());
    if (v.size() != n || out.size() != n) {
        throw DimensionError(fmt::format("current_injection: vectors of {} and {} for dimension {}", v.size(),
                                         out.size(), n));
    }
    std::fill(out.begin(), out.end(), cd(0.0));
    auto node_id = [&](Index p) {
        const Index node = model.nonslack[static_cast<std::size_t>(p)];
        return model.node_ids.empty() ? fmt::format("#{}", node) : model.node_ids[static_cast<std::size_t>(node)];
    };
    for (std::size_t k = 0; k < model.wye_pos.size(); ++k) {
        const auto p = static_cast<std::size_t>(model.wye_pos[k]);
        if (!(std::abs(v[p]) > kVoltageFloor)) {
            throw NumericalError(fmt::format("voltage at {} fell to {} p.u.", node_id(model.wye_pos[k]), std::abs(v[p])));
        }
        out[p] -= std::conj(sc.wye_powers[k] / v[p]);
    }
    for (std::size_t k = 0; k < model.delta_pos.size(); ++k) {
        const auto p = static_cast<std::size_t>(model.delta_pos[k][0]);
        const auto q = static_cast<std::size_t>(model.delta_pos[k][1]);
        const cd vpq = v[p] - v[q];
        if (!(std::abs(vpq) > kVoltageFloor)) {
            throw NumericalError(fmt::format("line voltage {}-{} fell to {} p.u.", node_id(model.delta_pos[k][0]),
                                             node_id(model.delta_pos[k][1]), std::abs(vpq)));
        }
        const cd il = std::conj(sc.delta_powers[k] / vpq);
        out[p] -= il;
        out[q] += il;
    }
}

std::vector<cd> current_injection(std::span<const cd> v, const DistributionScenario& sc, const ZBusModel& model) {
    std::vector<cd> out(static_cast<std::size_t>(model.dim()));
    current_injection(v, sc, model, out);
    return out;
}

FixedPointResult zbus_iterate(const ZBusModel& model, const DistributionScenario& sc, const FixedPointOptions& opts) {
    check_scenario(model, sc);
    if (!(opts.tol > 0.0) || opts.max_iter < 1) {
        throw std::invalid_argument("zbus_iterate: tol > 0 and max_iter >= 1 required");
    }
    const auto n = static_cast<std::size_t>(model.dim());
    auto magnitude_sum = [](const std::vector<cd>& v) {
        double s = 0.0;
        for (const cd& x : v) {
            s += std::abs(x);
        }
        return s;
    };

    FixedPointResult res;
    res.v = model.v0;
    std::vector<cd> cur(n);
    std::vector<cd> next(n);
    double sum_prev = magnitude_sum(res.v);
    for (int k = 1; k <= opts.max_iter; ++k) {
        try {
            current_injection(res.v, sc, model, cur);
        } catch (const NumericalError& e) {
            res.diagnostic = fmt::format("iteration {}: {}", k, e.what());
            break;
        }
        fixed_point_map(model, opts.apply, cur, next);
        const double sum = magnitude_sum(next);
        res.final_delta = std::abs(sum - sum_prev);
        res.v.swap(next);
        res.iterations = k;
        sum_prev = sum;
        if (!std::isfinite(res.final_delta)) {
            res.diagnostic = fmt::format("iteration {}: non-finite voltages", k);
            break;
        }
        if (res.final_delta <= opts.tol) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged && res.diagnostic.empty()) {
        res.diagnostic = fmt::format("no convergence in {} iterations (delta {})", opts.max_iter, res.final_delta);
    }

    try {
        current_injection(res.v, sc, model, cur);
        fixed_point_map(model, opts.apply, cur, next);
        res.residual_inf = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            res.residual_inf = std::max(res.residual_inf, std::abs(res.v[r] - next[r]));
        }
        if (!std::isfinite(res.residual_inf)) {
            res.residual_inf = std::numeric_limits<double>::infinity();
        }
    } catch (const NumericalError&) {
        res.residual_inf = std::numeric_limits<double>::infinity();
    }
    if (res.converged && !std::isfinite(res.residual_inf)) {
        res.converged = false;
        res.diagnostic = "non-finite fixed-point residual";
    }
    return res;
}

std::vector<FixedPointResult> batch_zbus_solve(const ZBusModel& model, const std::vector<DistributionScenario>& scenarios,
                                               int workers, const FixedPointOptions& opts) {
    std::vector<FixedPointResult> out(scenarios.size());
    batch::parallel_for(scenarios.size(), workers, [&](std::size_t i) {
        try {
            out[i] = zbus_iterate(model, scenarios[i], opts);
        } catch (const std::exception& e) {
            out[i] = FixedPointResult{};
            out[i].diagnostic = e.what();
            out[i].residual_inf = std::numeric_limits<double>::infinity();
        }
    });
    return out;
}

}  // namespace gridbatch::distribution
