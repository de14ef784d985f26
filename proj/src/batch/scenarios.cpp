#include "gridbatch/batch/scenarios.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::batch {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

void validate(const ScenarioSpec& spec) {
    if (spec.count < 1) {
        throw std::invalid_argument("scenario count must be at least 1");
    }
    if (!(spec.spread >= 0.0 && spec.spread < 1.0)) {
        throw std::invalid_argument(fmt::format("spread must lie in [0, 1), got {}", spec.spread));
    }
}

double load_multiplier(std::uint64_t seed, std::uint64_t scenario, std::uint64_t element, double spread) noexcept {
    const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ scenario) ^ element);
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return (1.0 - spread) + (2.0 * spread) * u;
}

void scenario_multipliers(std::uint64_t seed, std::uint64_t scenario, double spread, std::span<double> out) noexcept {
    for (std::size_t e = 0; e < out.size(); ++e) {
        out[e] = load_multiplier(seed, scenario, e, spread);
    }
}

std::vector<std::vector<double>> generate_load_multipliers(const ScenarioSpec& spec, std::size_t n_elements) {
    validate(spec);
    std::vector<std::vector<double>> out(spec.count, std::vector<double>(n_elements));
    for (std::size_t s = 0; s < spec.count; ++s) {
        scenario_multipliers(spec.seed, s, spec.spread, out[s]);
    }
    return out;
}

std::vector<network::Index> transmission_load_elements(const network::TransmissionNetwork& net) {
    std::vector<network::Index> out;
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        if (net.buses[i].p_load != 0.0 || net.buses[i].q_load != 0.0) {
            out.push_back(static_cast<network::Index>(i));
        }
    }
    return out;
}

transmission::TransmissionScenario apply_multipliers(const transmission::TransmissionModel& model,
                                                     std::span<const network::Index> elements,
                                                     std::span<const double> multipliers) {
    if (elements.size() != multipliers.size()) {
        throw DimensionError(fmt::format("{} multipliers for {} load elements", multipliers.size(), elements.size()));
    }
    std::vector<double> scale(model.net.buses.size(), 1.0);
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const network::Index b = elements[k];
        if (b < 0 || static_cast<std::size_t>(b) >= scale.size()) {
            throw DimensionError(fmt::format("load element bus position {} out of range", b));
        }
        scale[static_cast<std::size_t>(b)] = multipliers[k];
    }
    return transmission::scaled_scenario(model.net, model.part, scale);
}

distribution::DistributionScenario apply_multipliers(const distribution::ZBusModel& model,
                                                     std::span<const double> multipliers) {
    return distribution::scaled_scenario(model, multipliers);
}

}  // namespace gridbatch::batch
