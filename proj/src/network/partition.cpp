#include "gridbatch/network/partition.hpp"

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::network {

BusPartition partition_buses(const TransmissionNetwork& net) {
    BusPartition p;
    const auto n = static_cast<Index>(net.buses.size());
    for (Index i = 0; i < n; ++i) {
        switch (net.buses[static_cast<std::size_t>(i)].kind) {
            case BusKind::Slack: p.slack.push_back(i); break;
            case BusKind::PV: p.pv.push_back(i); break;
            case BusKind::PQ: p.pq.push_back(i); break;
        }
    }
    if (p.slack.size() != 1) {
        throw NetworkError(fmt::format("expected exactly one slack bus, found {}", p.slack.size()));
    }
    p.theta_block = p.pv;
    p.theta_block.insert(p.theta_block.end(), p.pq.begin(), p.pq.end());
    p.q_block = p.pq;
    p.theta_pos.assign(static_cast<std::size_t>(n), -1);
    p.q_pos.assign(static_cast<std::size_t>(n), -1);
    for (Index k = 0; k < p.n_theta(); ++k) {
        p.theta_pos[static_cast<std::size_t>(p.theta_block[static_cast<std::size_t>(k)])] = k;
    }
    for (Index k = 0; k < p.n_q(); ++k) {
        p.q_pos[static_cast<std::size_t>(p.q_block[static_cast<std::size_t>(k)])] = k;
    }
    return p;
}

PartitionedYViews extract_partitioned_views(const AdmittanceMatrix& y, const BusPartition& part) {
    if (part.n_bus() != y.n) {
        throw DimensionError(fmt::format("partition covers {} buses, Y_bus has {}", part.n_bus(), y.n));
    }
    for (const auto* block : {&part.theta_block, &part.q_block}) {
        for (Index i : *block) {
            if (i < 0 || i >= y.n) {
                throw DimensionError(fmt::format("partition index {} outside Y_bus of {} buses", i, y.n));
            }
        }
    }
    PartitionedYViews v;
    v.b_prime = linalg::SparseCoo(part.n_theta(), part.n_theta());
    v.b_dprime = linalg::SparseCoo(part.n_q(), part.n_q());
    v.g_qtheta = linalg::SparseCoo(part.n_q(), part.n_theta());
    for (std::size_t k = 0; k < y.b.nnz(); ++k) {
        const auto r = static_cast<std::size_t>(y.b.row_idx[k]);
        const auto c = static_cast<std::size_t>(y.b.col_idx[k]);
        if (part.theta_pos[r] >= 0 && part.theta_pos[c] >= 0) {
            v.b_prime.push(part.theta_pos[r], part.theta_pos[c], -y.b.vals[k]);
        }
        if (part.q_pos[r] >= 0 && part.q_pos[c] >= 0) {
            v.b_dprime.push(part.q_pos[r], part.q_pos[c], -y.b.vals[k]);
        }
    }
    for (std::size_t k = 0; k < y.g.nnz(); ++k) {
        const auto r = static_cast<std::size_t>(y.g.row_idx[k]);
        const auto c = static_cast<std::size_t>(y.g.col_idx[k]);
        if (part.q_pos[r] >= 0 && part.theta_pos[c] >= 0) {
            v.g_qtheta.push(part.q_pos[r], part.theta_pos[c], -y.g.vals[k]);
        }
    }
    v.b_prime = linalg::canonicalize(v.b_prime);
    v.b_dprime = linalg::canonicalize(v.b_dprime);
    v.g_qtheta = linalg::canonicalize(v.g_qtheta);
    return v;
}

}  // namespace gridbatch::network
