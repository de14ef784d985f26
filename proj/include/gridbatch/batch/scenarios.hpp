#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gridbatch/distribution/zbus.hpp"
#include "gridbatch/transmission/newton.hpp"

namespace gridbatch::batch {

enum class Target { Transmission, Distribution };

struct ScenarioSpec {
    std::size_t count = 1;
    std::uint64_t seed = 0;
    double spread = 0.2;  ///< multipliers lie in [1 - spread, 1 + spread]
    Target target = Target::Transmission;
};

/// Throws std::invalid_argument unless count >= 1 and 0 <= spread < 1.
void validate(const ScenarioSpec& spec);

/// Uniform multiplier on [1 - spread, 1 + spread] that depends only on
/// (seed, scenario, element): splitmix64 applied to the chained key, top 53
/// bits as a fraction. spread = 0 gives exactly 1.0.
double load_multiplier(std::uint64_t seed, std::uint64_t scenario, std::uint64_t element, double spread) noexcept;

/// Multipliers of one scenario for n elements.
void scenario_multipliers(std::uint64_t seed, std::uint64_t scenario, double spread, std::span<double> out) noexcept;

/// spec.count rows of n_elements multipliers.
std::vector<std::vector<double>> generate_load_multipliers(const ScenarioSpec& spec, std::size_t n_elements);

/// Bus positions whose load (Pd or Qd) is nonzero; one multiplier each.
std::vector<network::Index> transmission_load_elements(const network::TransmissionNetwork& net);

/// Scale the load of every element bus by its multiplier; generation is kept.
/// Throws DimensionError on a length mismatch.
transmission::TransmissionScenario apply_multipliers(const transmission::TransmissionModel& model,
                                                     std::span<const network::Index> elements,
                                                     std::span<const double> multipliers);

/// One multiplier per network load (ThreePhaseNetwork::loads order).
distribution::DistributionScenario apply_multipliers(const distribution::ZBusModel& model,
                                                     std::span<const double> multipliers);

}  // namespace gridbatch::batch
