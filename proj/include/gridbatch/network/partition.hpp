#pragma once

#include <vector>

#include "gridbatch/linalg/sparse.hpp"
#include "gridbatch/network/transmission_network.hpp"
#include "gridbatch/network/ybus.hpp"

namespace gridbatch::network {

/// Bus positions (indices into TransmissionNetwork::buses) split by kind.
/// theta_block = pv then pq; q_block = pq. theta_pos/q_pos map a bus
/// position to its offset in the block, or -1.
struct BusPartition {
    std::vector<Index> slack;
    std::vector<Index> pv;
    std::vector<Index> pq;
    std::vector<Index> theta_block;
    std::vector<Index> q_block;
    std::vector<Index> theta_pos;
    std::vector<Index> q_pos;

    Index n_bus() const noexcept { return static_cast<Index>(theta_pos.size()); }
    Index n_theta() const noexcept { return static_cast<Index>(theta_block.size()); }
    Index n_q() const noexcept { return static_cast<Index>(q_block.size()); }
    Index n_state() const noexcept { return n_theta() + n_q(); }
};

/// Throws NetworkError unless exactly one bus is Slack.
BusPartition partition_buses(const TransmissionNetwork& net);

/// B' = -Im(Y)[theta, theta], B'' = -Im(Y)[q, q], G_qtheta = -Re(Y)[q, theta].
struct PartitionedYViews {
    linalg::SparseCoo b_prime;
    linalg::SparseCoo b_dprime;
    linalg::SparseCoo g_qtheta;
};

/// Throws DimensionError when the partition does not fit y.
PartitionedYViews extract_partitioned_views(const AdmittanceMatrix& y, const BusPartition& part);

}  // namespace gridbatch::network
