#include "gridbatch/transmission/polar_state.hpp"

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::transmission {

PolarState flat_start(const TransmissionNetwork& net, const BusPartition& part) {
    const std::size_t n = net.buses.size();
    const double theta0 = net.buses[static_cast<std::size_t>(part.slack.at(0))].theta_set;
    PolarState s;
    s.theta.assign(n, theta0);
    s.vmag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.vmag[i] = net.buses[i].kind == network::BusKind::PQ ? 1.0 : net.buses[i].v_set;
    }
    return s;
}

std::vector<double> pack(const PolarState& s, const BusPartition& part) {
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(part.n_state()));
    for (Index i : part.theta_block) {
        x.push_back(s.theta[static_cast<std::size_t>(i)]);
    }
    for (Index i : part.q_block) {
        x.push_back(s.vmag[static_cast<std::size_t>(i)]);
    }
    return x;
}

void unpack(std::span<const double> x, const BusPartition& part, PolarState& s) {
    if (x.size() != static_cast<std::size_t>(part.n_state())) {
        throw DimensionError(fmt::format("unpack: state of {} for partition of {}", x.size(), part.n_state()));
    }
    const auto nt = static_cast<std::size_t>(part.n_theta());
    for (std::size_t k = 0; k < nt; ++k) {
        s.theta[static_cast<std::size_t>(part.theta_block[k])] = x[k];
    }
    for (std::size_t k = 0; k < part.q_block.size(); ++k) {
        s.vmag[static_cast<std::size_t>(part.q_block[k])] = x[nt + k];
    }
}

TransmissionScenario base_scenario(const TransmissionNetwork& net, const BusPartition& part) {
    const std::vector<double> ones(net.buses.size(), 1.0);
    return scaled_scenario(net, part, ones);
}

TransmissionScenario scaled_scenario(const TransmissionNetwork& net, const BusPartition& part,
                                     std::span<const double> load_scale) {
    if (load_scale.size() != net.buses.size()) {
        throw DimensionError(fmt::format("load scale of {} for {} buses", load_scale.size(), net.buses.size()));
    }
    TransmissionScenario sc;
    sc.p_spec.reserve(part.theta_block.size());
    sc.q_spec.reserve(part.q_block.size());
    for (Index i : part.theta_block) {
        const auto& b = net.buses[static_cast<std::size_t>(i)];
        sc.p_spec.push_back(b.p_gen - load_scale[static_cast<std::size_t>(i)] * b.p_load);
    }
    for (Index i : part.q_block) {
        const auto& b = net.buses[static_cast<std::size_t>(i)];
        sc.q_spec.push_back(b.q_gen - load_scale[static_cast<std::size_t>(i)] * b.q_load);
    }
    return sc;
}

}  // namespace gridbatch::transmission
