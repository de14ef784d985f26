#pragma once

#include <span>
#include <vector>

#include "gridbatch/network/partition.hpp"
#include "gridbatch/network/transmission_network.hpp"

namespace gridbatch::transmission {

using network::BusPartition;
using network::Index;
using network::TransmissionNetwork;

/// Angles (rad) and magnitudes (p.u.) over all buses, bus order.
struct PolarState {
    std::vector<double> theta;
    std::vector<double> vmag;

    bool operator==(const PolarState&) const = default;
};

/// theta = slack angle everywhere, |V| = set-point on slack/PV and 1.0 on PQ.
PolarState flat_start(const TransmissionNetwork& net, const BusPartition& part);

/// x = [theta over theta_block; vmag over q_block].
std::vector<double> pack(const PolarState& s, const BusPartition& part);
/// Writes the free entries of s from x; fixed entries are left untouched.
void unpack(std::span<const double> x, const BusPartition& part, PolarState& s);

/// Specified net injections: p over theta_block, q over q_block.
struct TransmissionScenario {
    std::vector<double> p_spec;
    std::vector<double> q_spec;
};

TransmissionScenario base_scenario(const TransmissionNetwork& net, const BusPartition& part);

/// Net injections with every bus load scaled by load_scale[bus] (bus order);
/// generation is untouched. Throws DimensionError on a size mismatch.
TransmissionScenario scaled_scenario(const TransmissionNetwork& net, const BusPartition& part,
                                     std::span<const double> load_scale);

}  // namespace gridbatch::transmission
