#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridbatch::network {

enum class BusKind { Slack, PV, PQ };

const char* to_string(BusKind k) noexcept;

/// One bus, per-unit on the system base. Net injections are generation minus load.
struct BusRecord {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double v_set = 1.0;      // Slack and PV
    double theta_set = 0.0;  // radians, Slack
    double p_load = 0.0;
    double q_load = 0.0;
    double p_gen = 0.0;
    double q_gen = 0.0;
    double gs = 0.0;
    double bs = 0.0;

    double p_inj() const noexcept { return p_gen - p_load; }
    double q_inj() const noexcept { return q_gen - q_load; }

    bool operator==(const BusRecord&) const = default;
};

/// Standard pi-model branch. Tap 1.0 means nominal; shift is in radians.
struct BranchRecord {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
    double b_ch = 0.0;
    double tap = 1.0;
    double shift = 0.0;
    bool status = true;

    bool operator==(const BranchRecord&) const = default;
};

struct TransmissionNetwork {
    std::string name;
    double base_mva = 100.0;
    std::vector<BusRecord> buses;
    std::vector<BranchRecord> branches;

    std::size_t bus_count() const noexcept { return buses.size(); }

    bool operator==(const TransmissionNetwork&) const = default;
};

/// Bus id -> position in net.buses. Throws NetworkError on duplicate ids.
std::unordered_map<int, std::size_t> bus_index(const TransmissionNetwork& net);

/// Structural checks shared by every loader: unique ids, known branch ends,
/// positive set-points and taps, no zero-impedance in-service branch, exactly
/// one slack bus and every bus reachable from it. Throws NetworkError.
void validate(const TransmissionNetwork& net);

}  // namespace gridbatch::network
