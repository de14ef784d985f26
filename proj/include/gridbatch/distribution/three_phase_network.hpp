#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridbatch/linalg/sparse.hpp"

namespace gridbatch::distribution {

using linalg::Index;
using cd = std::complex<double>;

enum class Phase { A, B, C };

const char* to_string(Phase p) noexcept;

struct NodePhase {
    std::string id;  ///< unique, conventionally "bus.k"
    std::string bus;
    Phase phase = Phase::A;
    double v_base_kv = 1.0;
};

/// Dense complex matrix, row-major.
struct CMatrix {
    Index rows = 0;
    Index cols = 0;
    std::vector<cd> data;

    bool empty() const noexcept { return data.empty(); }
    cd operator()(Index r, Index c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// Series element between equally sized node lists, optional shunts at each end.
struct LineBlock {
    std::string name;
    std::vector<Index> from;
    std::vector<Index> to;
    CMatrix y_series;
    CMatrix y_shunt_from;  ///< empty when absent
    CMatrix y_shunt_to;
};

/// Primitive admittance added as-is over a node list (sources, transformers, capacitors).
struct PrimitiveBlock {
    std::string name;
    std::vector<Index> nodes;
    CMatrix y;
};

enum class LoadKind { Wye, Delta };

/// Constant-power load, consumption positive, p.u. Wye loads use `a` only;
/// delta loads connect a -> b on one bus.
struct LoadSpec {
    std::string name;
    LoadKind kind = LoadKind::Wye;
    Index a = -1;
    Index b = -1;
    cd s_base;
};

struct SlackPhase {
    Index node = -1;
    cd v;
};

struct ThreePhaseNetwork {
    std::string name;
    double s_base_mva = 1.0;
    std::vector<NodePhase> nodes;
    std::vector<SlackPhase> slack;
    std::vector<LineBlock> lines;
    std::vector<PrimitiveBlock> elements;
    std::vector<LoadSpec> loads;
    std::unordered_map<std::string, Index> node_index;
};

inline constexpr std::string_view kDistributionSchema = "gridbatch.distribution/1";

/// Parse schema gridbatch.distribution/1 (see README). Throws ParseError
/// naming the JSON path for schema violations, dangling node references,
/// asymmetric series blocks, duplicate ids and malformed loads.
ThreePhaseNetwork parse_distribution_json(std::string_view text);

/// Canonical re-serialization; parse_distribution_json inverts it exactly.
std::string distribution_to_json(const ThreePhaseNetwork& net);

}  // namespace gridbatch::distribution
