#include "gridbatch/batch/run_batch.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "gridbatch/batch/parallel.hpp"

namespace gridbatch::batch {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kDeg = 180.0 / std::numbers::pi;

}  // namespace

BatchReport run_batch(const ScenarioSolver& solver, std::size_t count, const RunOptions& opts) {
    BatchReport rep;
    rep.records.resize(count);
    if (opts.keep_solutions) {
        rep.vm.resize(count);
        rep.va_deg.resize(count);
    }
    const auto t0 = Clock::now();
    parallel_for(count, opts.workers, [&](std::size_t i) {
        const auto ts = Clock::now();
        ScenarioRecord& rec = rep.records[i];
        rec.index = i;
        try {
            ScenarioOutcome out = solver(i);
            rec.converged = out.converged;
            rec.iterations = out.iterations;
            rec.residual = out.residual;
            rec.diagnostic = std::move(out.diagnostic);
            if (opts.keep_solutions) {
                rep.vm[i] = std::move(out.vm);
                rep.va_deg[i] = std::move(out.va_deg);
            }
        } catch (const std::exception& e) {
            rec.converged = false;
            rec.residual = std::numeric_limits<double>::infinity();
            rec.diagnostic = e.what();
        }
        rec.wall_time = seconds_since(ts);
    });
    rep.aggregate.total_wall_time = seconds_since(t0);
    rep.aggregate.count = count;
    rep.aggregate.worker_count = std::max(1, opts.workers);
    for (const ScenarioRecord& r : rep.records) {
        rep.aggregate.n_converged += r.converged ? 1 : 0;
    }
    rep.aggregate.throughput =
        rep.aggregate.total_wall_time > 0.0 ? static_cast<double>(count) / rep.aggregate.total_wall_time : 0.0;
    return rep;
}

ScenarioSolver make_transmission_solver(std::shared_ptr<const transmission::TransmissionModel> model,
                                        const ScenarioSpec& spec, const transmission::NewtonOptions& opts,
                                        bool keep_solutions) {
    validate(spec);
    transmission::validate(opts);
    auto elements = std::make_shared<const std::vector<network::Index>>(transmission_load_elements(model->net));
    return [model = std::move(model), elements, spec, opts, keep_solutions](std::size_t index) {
        std::vector<double> mult(elements->size());
        scenario_multipliers(spec.seed, index, spec.spread, mult);
        const auto sc = apply_multipliers(*model, *elements, mult);
        transmission::NewtonResult r = transmission::newton_solve(*model, sc, opts);
        ScenarioOutcome out;
        out.converged = r.converged;
        out.iterations = r.iterations;
        out.residual = r.final_mismatch_inf;
        out.diagnostic = std::move(r.diagnostic);
        if (keep_solutions) {
            out.vm = r.state.vmag;
            out.va_deg.resize(r.state.theta.size());
            for (std::size_t k = 0; k < r.state.theta.size(); ++k) {
                out.va_deg[k] = r.state.theta[k] * kDeg;
            }
        }
        return out;
    };
}

ScenarioSolver make_distribution_solver(std::shared_ptr<const distribution::ZBusModel> model, const ScenarioSpec& spec,
                                        const distribution::FixedPointOptions& opts, bool keep_solutions) {
    validate(spec);
    return [model = std::move(model), spec, opts, keep_solutions](std::size_t index) {
        std::vector<double> mult(model->load_base.size());
        scenario_multipliers(spec.seed, index, spec.spread, mult);
        const auto sc = apply_multipliers(*model, mult);
        distribution::FixedPointResult r = distribution::zbus_iterate(*model, sc, opts);
        ScenarioOutcome out;
        out.converged = r.converged;
        out.iterations = r.iterations;
        out.residual = r.residual_inf;
        out.diagnostic = std::move(r.diagnostic);
        if (keep_solutions) {
            const auto n = static_cast<std::size_t>(model->n_nodes);
            out.vm.resize(n);
            out.va_deg.resize(n);
            for (std::size_t node = 0; node < n; ++node) {
                const network::Index p = model->position[node];
                distribution::cd v;
                if (p >= 0) {
                    v = r.v[static_cast<std::size_t>(p)];
                } else {
                    for (std::size_t s = 0; s < model->slack_nodes.size(); ++s) {
                        if (static_cast<std::size_t>(model->slack_nodes[s]) == node) {
                            v = model->v_slack[s];
                        }
                    }
                }
                out.vm[node] = std::abs(v);
                out.va_deg[node] = std::arg(v) * kDeg;
            }
        }
        return out;
    };
}

std::vector<std::string> transmission_element_ids(const transmission::TransmissionModel& model) {
    std::vector<std::string> ids;
    ids.reserve(model.net.buses.size());
    for (const auto& b : model.net.buses) {
        ids.push_back(std::to_string(b.id));
    }
    return ids;
}

std::vector<std::string> distribution_element_ids(const distribution::ZBusModel& model) {
    if (!model.node_ids.empty()) {
        return model.node_ids;
    }
    std::vector<std::string> ids;
    for (network::Index k = 0; k < model.n_nodes; ++k) {
        ids.push_back("#" + std::to_string(k));
    }
    return ids;
}

}  // namespace gridbatch::batch
