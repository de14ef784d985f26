#include "gridbatch/network/transmission_network.hpp"

#include <deque>

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::network {

const char* to_string(BusKind k) noexcept {
    switch (k) {
        case BusKind::Slack: return "slack";
        case BusKind::PV: return "pv";
        case BusKind::PQ: return "pq";
    }
    return "unknown";
}

std::unordered_map<int, std::size_t> bus_index(const TransmissionNetwork& net) {
    std::unordered_map<int, std::size_t> idx;
    idx.reserve(net.buses.size());
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        if (!idx.emplace(net.buses[i].id, i).second) {
            throw NetworkError(fmt::format("duplicate bus id {}", net.buses[i].id));
        }
    }
    return idx;
}

void validate(const TransmissionNetwork& net) {
    if (net.buses.empty()) {
        throw NetworkError("network has no buses");
    }
    if (!(net.base_mva > 0.0)) {
        throw NetworkError(fmt::format("base MVA must be positive, got {}", net.base_mva));
    }
    const auto idx = bus_index(net);

    std::size_t slack = net.buses.size();
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        const BusRecord& b = net.buses[i];
        if (b.kind == BusKind::Slack) {
            if (slack != net.buses.size()) {
                throw NetworkError(
                    fmt::format("multiple slack buses ({} and {})", net.buses[slack].id, b.id));
            }
            slack = i;
        }
        if (b.kind != BusKind::PQ && !(b.v_set > 0.0)) {
            throw NetworkError(fmt::format("bus {}: voltage set-point must be positive, got {}", b.id, b.v_set));
        }
    }
    if (slack == net.buses.size()) {
        throw NetworkError("no slack bus");
    }

    std::vector<std::vector<std::size_t>> adj(net.buses.size());
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const BranchRecord& br = net.branches[k];
        const auto f = idx.find(br.from);
        const auto t = idx.find(br.to);
        if (f == idx.end() || t == idx.end()) {
            throw NetworkError(fmt::format("branch {} references unknown bus {}", k + 1,
                                           f == idx.end() ? br.from : br.to));
        }
        if (!(br.tap > 0.0)) {
            throw NetworkError(fmt::format("branch {} ({}-{}): tap must be positive, got {}", k + 1, br.from, br.to, br.tap));
        }
        if (br.status) {
            if (br.r == 0.0 && br.x == 0.0) {
                throw NetworkError(fmt::format("branch {} ({}-{}): zero series impedance", k + 1, br.from, br.to));
            }
            adj[f->second].push_back(t->second);
            adj[t->second].push_back(f->second);
        }
    }

    std::vector<bool> seen(net.buses.size(), false);
    std::deque<std::size_t> queue{slack};
    seen[slack] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                queue.push_back(v);
            }
        }
    }
    if (reached != net.buses.size()) {
        for (std::size_t i = 0; i < net.buses.size(); ++i) {
            if (!seen[i]) {
                throw NetworkError(fmt::format("bus {} is not connected to the slack bus ({} of {} buses islanded)",
                                               net.buses[i].id, net.buses.size() - reached, net.buses.size()));
            }
        }
    }
}

}  // namespace gridbatch::network
