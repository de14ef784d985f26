#include "gridbatch/distribution/three_phase_network.hpp"

#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include <json.hpp>

#include "gridbatch/error.hpp"

namespace gridbatch::distribution {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) {
        throw ParseError(fmt::format("{}: expected an object", path));
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(fmt::format("{}.{}: missing", path, key));
    }
    return *it;
}

const json& typed(const json& obj, const char* key, const std::string& path, json::value_t t, const char* what) {
    const json& v = field(obj, key, path);
    const bool ok = t == json::value_t::number_float ? v.is_number() : v.type() == t;
    if (!ok) {
        throw ParseError(fmt::format("{}.{}: expected {}", path, key, what));
    }
    return v;
}

std::string str(const json& obj, const char* key, const std::string& path) {
    return typed(obj, key, path, json::value_t::string, "a string").get<std::string>();
}

double num(const json& obj, const char* key, const std::string& path) {
    return typed(obj, key, path, json::value_t::number_float, "a number").get<double>();
}

const json& arr(const json& obj, const char* key, const std::string& path) {
    return typed(obj, key, path, json::value_t::array, "an array");
}

cd complex_pair(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ParseError(fmt::format("{}: expected [re, im]", path));
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

CMatrix cmatrix(const json& obj, const char* key, const std::string& parent, Index dim) {
    const std::string path = fmt::format("{}.{}", parent, key);
    const json& m = field(obj, key, parent);
    const json& re = arr(m, "re", path);
    const json& im = arr(m, "im", path);
    CMatrix out;
    out.rows = dim;
    out.cols = dim;
    out.data.resize(static_cast<std::size_t>(dim) * dim);
    for (const auto* part : {&re, &im}) {
        const bool is_re = part == &re;
        if (part->size() != static_cast<std::size_t>(dim)) {
            throw ParseError(fmt::format("{}.{}: expected {} rows, got {}", path, is_re ? "re" : "im", dim, part->size()));
        }
        for (Index r = 0; r < dim; ++r) {
            const json& row = (*part)[static_cast<std::size_t>(r)];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(dim)) {
                throw ParseError(fmt::format("{}.{}[{}]: expected {} numbers", path, is_re ? "re" : "im", r, dim));
            }
            for (Index c = 0; c < dim; ++c) {
                const json& x = row[static_cast<std::size_t>(c)];
                if (!x.is_number()) {
                    throw ParseError(fmt::format("{}.{}[{}][{}]: expected a number", path, is_re ? "re" : "im", r, c));
                }
                cd& slot = out.data[static_cast<std::size_t>(r) * dim + c];
                slot = is_re ? cd(x.get<double>(), slot.imag()) : cd(slot.real(), x.get<double>());
            }
        }
    }
    return out;
}

json to_json(const CMatrix& m) {
    json re = json::array();
    json im = json::array();
    for (Index r = 0; r < m.rows; ++r) {
        json rr = json::array();
        json ri = json::array();
        for (Index c = 0; c < m.cols; ++c) {
            rr.push_back(m(r, c).real());
            ri.push_back(m(r, c).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    return {{"re", std::move(re)}, {"im", std::move(im)}};
}

Phase phase_from(const std::string& s, const std::string& path) {
    if (s == "a") {
        return Phase::A;
    }
    if (s == "b") {
        return Phase::B;
    }
    if (s == "c") {
        return Phase::C;
    }
    throw ParseError(fmt::format("{}: unknown phase '{}' (expected a, b or c)", path, s));
}

}  // namespace

const char* to_string(Phase p) noexcept {
    switch (p) {
        case Phase::A: return "a";
        case Phase::B: return "b";
        case Phase::C: return "c";
    }
    return "?";
}

ThreePhaseNetwork parse_distribution_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("$: invalid JSON ({})", e.what()));
    }
    if (str(j, "schema", "$") != kDistributionSchema) {
        throw ParseError(fmt::format("$.schema: expected \"{}\"", kDistributionSchema));
    }
    ThreePhaseNetwork net;
    net.name = str(j, "name", "$");
    net.s_base_mva = num(j, "s_base_mva", "$");
    if (!(net.s_base_mva > 0.0)) {
        throw ParseError("$.s_base_mva: must be positive");
    }

    const json& nodes = arr(j, "nodes", "$");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string path = fmt::format("$.nodes[{}]", i);
        NodePhase np;
        np.id = str(nodes[i], "id", path);
        np.bus = str(nodes[i], "bus", path);
        np.phase = phase_from(str(nodes[i], "phase", path), path + ".phase");
        np.v_base_kv = num(nodes[i], "v_base_kv", path);
        if (!(np.v_base_kv > 0.0)) {
            throw ParseError(path + ".v_base_kv: must be positive");
        }
        if (!net.node_index.emplace(np.id, static_cast<Index>(net.nodes.size())).second) {
            throw ParseError(fmt::format("{}.id: duplicate node '{}'", path, np.id));
        }
        net.nodes.push_back(std::move(np));
    }

    auto node_ref = [&](const json& v, const std::string& path) -> Index {
        if (!v.is_string()) {
            throw ParseError(path + ": expected a node id string");
        }
        const auto it = net.node_index.find(v.get<std::string>());
        if (it == net.node_index.end()) {
            throw ParseError(fmt::format("{}: unknown node '{}'", path, v.get<std::string>()));
        }
        return it->second;
    };
    auto node_list = [&](const json& obj, const char* key, const std::string& parent) {
        const json& a = arr(obj, key, parent);
        if (a.empty()) {
            throw ParseError(fmt::format("{}.{}: must not be empty", parent, key));
        }
        std::vector<Index> out;
        std::unordered_set<Index> seen;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const std::string p = fmt::format("{}.{}[{}]", parent, key, k);
            const Index n = node_ref(a[k], p);
            if (!seen.insert(n).second) {
                throw ParseError(fmt::format("{}: node listed twice", p));
            }
            out.push_back(n);
        }
        return out;
    };

    const json& slack = arr(j, "slack", "$");
    if (slack.empty()) {
        throw ParseError("$.slack: at least one slack phase is required");
    }
    std::unordered_set<Index> slack_seen;
    for (std::size_t i = 0; i < slack.size(); ++i) {
        const std::string path = fmt::format("$.slack[{}]", i);
        SlackPhase sp;
        sp.node = node_ref(field(slack[i], "node", path), path + ".node");
        sp.v = complex_pair(field(slack[i], "v", path), path + ".v");
        if (!slack_seen.insert(sp.node).second) {
            throw ParseError(fmt::format("{}.node: slack phase listed twice", path));
        }
        net.slack.push_back(sp);
    }

    const json& lines = arr(j, "lines", "$");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string path = fmt::format("$.lines[{}]", i);
        const json& l = lines[i];
        LineBlock lb;
        lb.name = str(l, "name", path);
        lb.from = node_list(l, "from", path);
        lb.to = node_list(l, "to", path);
        if (lb.from.size() != lb.to.size()) {
            throw ParseError(fmt::format("{}: from has {} nodes, to has {}", path, lb.from.size(), lb.to.size()));
        }
        const auto dim = static_cast<Index>(lb.from.size());
        lb.y_series = cmatrix(l, "y_series", path, dim);
        double scale = 0.0;
        for (const cd& v : lb.y_series.data) {
            scale = std::max(scale, std::abs(v));
        }
        for (Index r = 0; r < dim; ++r) {
            for (Index c = r + 1; c < dim; ++c) {
                if (std::abs(lb.y_series(r, c) - lb.y_series(c, r)) > 1e-9 * scale) {
                    throw ParseError(fmt::format("{}.y_series: not symmetric at ({}, {})", path, r, c));
                }
            }
        }
        if (l.contains("y_shunt_from")) {
            lb.y_shunt_from = cmatrix(l, "y_shunt_from", path, dim);
        }
        if (l.contains("y_shunt_to")) {
            lb.y_shunt_to = cmatrix(l, "y_shunt_to", path, dim);
        }
        net.lines.push_back(std::move(lb));
    }

    const json& elements = arr(j, "elements", "$");
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const std::string path = fmt::format("$.elements[{}]", i);
        PrimitiveBlock pb;
        pb.name = str(elements[i], "name", path);
        pb.nodes = node_list(elements[i], "nodes", path);
        pb.y = cmatrix(elements[i], "y", path, static_cast<Index>(pb.nodes.size()));
        net.elements.push_back(std::move(pb));
    }

    const json& loads = arr(j, "loads", "$");
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const std::string path = fmt::format("$.loads[{}]", i);
        const json& l = loads[i];
        LoadSpec ls;
        ls.name = str(l, "name", path);
        const std::string kind = str(l, "kind", path);
        const json& ln = arr(l, "nodes", path);
        if (kind == "wye") {
            ls.kind = LoadKind::Wye;
            if (ln.size() != 1) {
                throw ParseError(path + ".nodes: a wye load attaches to exactly one node");
            }
            ls.a = node_ref(ln[0], path + ".nodes[0]");
        } else if (kind == "delta") {
            ls.kind = LoadKind::Delta;
            if (ln.size() != 2) {
                throw ParseError(path + ".nodes: a delta load attaches to exactly two nodes");
            }
            ls.a = node_ref(ln[0], path + ".nodes[0]");
            ls.b = node_ref(ln[1], path + ".nodes[1]");
            const NodePhase& na = net.nodes[static_cast<std::size_t>(ls.a)];
            const NodePhase& nb = net.nodes[static_cast<std::size_t>(ls.b)];
            if (na.bus != nb.bus || na.phase == nb.phase) {
                throw ParseError(path + ".nodes: delta phases must be distinct phases of one bus");
            }
        } else {
            throw ParseError(fmt::format("{}.kind: unknown load kind '{}'", path, kind));
        }
        ls.s_base = complex_pair(field(l, "s", path), path + ".s");
        if (!std::isfinite(ls.s_base.real()) || !std::isfinite(ls.s_base.imag())) {
            throw ParseError(path + ".s: must be finite");
        }
        net.loads.push_back(std::move(ls));
    }
    return net;
}

std::string distribution_to_json(const ThreePhaseNetwork& net) {
    json j;
    j["schema"] = std::string(kDistributionSchema);
    j["name"] = net.name;
    j["s_base_mva"] = net.s_base_mva;
    auto id = [&](Index n) { return net.nodes[static_cast<std::size_t>(n)].id; };
    auto ids = [&](const std::vector<Index>& v) {
        json a = json::array();
        for (Index n : v) {
            a.push_back(id(n));
        }
        return a;
    };
    json nodes = json::array();
    for (const NodePhase& n : net.nodes) {
        nodes.push_back({{"id", n.id}, {"bus", n.bus}, {"phase", to_string(n.phase)}, {"v_base_kv", n.v_base_kv}});
    }
    json slack = json::array();
    for (const SlackPhase& s : net.slack) {
        slack.push_back({{"node", id(s.node)}, {"v", {s.v.real(), s.v.imag()}}});
    }
    json lines = json::array();
    for (const LineBlock& l : net.lines) {
        json o = {{"name", l.name}, {"from", ids(l.from)}, {"to", ids(l.to)}, {"y_series", to_json(l.y_series)}};
        if (!l.y_shunt_from.empty()) {
            o["y_shunt_from"] = to_json(l.y_shunt_from);
        }
        if (!l.y_shunt_to.empty()) {
            o["y_shunt_to"] = to_json(l.y_shunt_to);
        }
        lines.push_back(std::move(o));
    }
    json elements = json::array();
    for (const PrimitiveBlock& e : net.elements) {
        elements.push_back({{"name", e.name}, {"nodes", ids(e.nodes)}, {"y", to_json(e.y)}});
    }
    json loads = json::array();
    for (const LoadSpec& l : net.loads) {
        json nodes_of = json::array({id(l.a)});
        if (l.kind == LoadKind::Delta) {
            nodes_of.push_back(id(l.b));
        }
        loads.push_back({{"name", l.name},
                         {"kind", l.kind == LoadKind::Wye ? "wye" : "delta"},
                         {"nodes", std::move(nodes_of)},
                         {"s", {l.s_base.real(), l.s_base.imag()}}});
    }
    j["nodes"] = std::move(nodes);
    j["slack"] = std::move(slack);
    j["lines"] = std::move(lines);
    j["elements"] = std::move(elements);
    j["loads"] = std::move(loads);
    return j.dump(1) + "\n";
}

}  // namespace gridbatch::distribution
