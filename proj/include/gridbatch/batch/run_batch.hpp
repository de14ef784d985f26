#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gridbatch/batch/scenarios.hpp"
#include "gridbatch/distribution/zbus.hpp"
#include "gridbatch/transmission/newton.hpp"

namespace gridbatch::batch {

/// What a solver reports for one scenario. vm/va are filled only when the
/// solver was asked to keep solutions.
struct ScenarioOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    std::string diagnostic;
    std::vector<double> vm;
    std::vector<double> va_deg;
};

/// Solves scenario `index`; must be safe to call concurrently.
using ScenarioSolver = std::function<ScenarioOutcome(std::size_t index)>;

struct ScenarioRecord {
    std::size_t index = 0;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    std::string diagnostic;
    double wall_time = 0.0;  ///< seconds
};

struct BatchAggregate {
    std::size_t count = 0;
    std::size_t n_converged = 0;
    double total_wall_time = 0.0;  ///< seconds
    double throughput = 0.0;       ///< scenarios per second
    int worker_count = 1;
};

struct BatchReport {
    std::vector<ScenarioRecord> records;
    BatchAggregate aggregate;
    std::vector<std::string> element_ids;       ///< labels of vm/va entries
    std::vector<std::vector<double>> vm;        ///< per scenario, when kept
    std::vector<std::vector<double>> va_deg;
};

struct RunOptions {
    int workers = 1;
    bool keep_solutions = false;
};

/// Solve scenarios 0..count-1 on a worker pool. Results land in preallocated
/// slots by index; a throwing scenario is recorded as not converged with the
/// message as diagnostic. Numeric fields do not depend on the worker count.
BatchReport run_batch(const ScenarioSolver& solver, std::size_t count, const RunOptions& opts);

/// Scenario i uses multipliers load_multiplier(spec.seed, i, e, spread) for
/// each load element e. Residual is the final mismatch infinity norm.
ScenarioSolver make_transmission_solver(std::shared_ptr<const transmission::TransmissionModel> model,
                                        const ScenarioSpec& spec, const transmission::NewtonOptions& opts,
                                        bool keep_solutions);

/// As above over the distribution loads. Residual is the fixed-point residual.
ScenarioSolver make_distribution_solver(std::shared_ptr<const distribution::ZBusModel> model, const ScenarioSpec& spec,
                                        const distribution::FixedPointOptions& opts, bool keep_solutions);

/// Labels matching ScenarioOutcome::vm for each solver kind.
std::vector<std::string> transmission_element_ids(const transmission::TransmissionModel& model);
std::vector<std::string> distribution_element_ids(const distribution::ZBusModel& model);

}  // namespace gridbatch::batch
