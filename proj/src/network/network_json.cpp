#include "gridbatch/network/network_json.hpp"

#include <fmt/format.h>

#include <json.hpp>

#include "gridbatch/error.hpp"

namespace gridbatch::network {

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

double number(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number()) {
        throw ParseError(fmt::format("{}.{}: expected a number", path, key));
    }
    return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number_integer()) {
        throw ParseError(fmt::format("{}.{}: expected an integer", path, key));
    }
    return v.get<int>();
}

const json& array(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_array()) {
        throw ParseError(fmt::format("{}.{}: expected an array", path, key));
    }
    return v;
}

BusKind kind_from(const std::string& s, const std::string& path) {
    if (s == "slack") {
        return BusKind::Slack;
    }
    if (s == "pv") {
        return BusKind::PV;
    }
    if (s == "pq") {
        return BusKind::PQ;
    }
    throw ParseError(fmt::format("{}: unknown bus kind '{}'", path, s));
}

}  // namespace

std::string network_to_json(const TransmissionNetwork& net) {
    json j;
    j["schema"] = std::string(kTransmissionSchema);
    j["name"] = net.name;
    j["base_mva"] = net.base_mva;
    json buses = json::array();
    for (const BusRecord& b : net.buses) {
        buses.push_back({{"id", b.id},
                         {"kind", to_string(b.kind)},
                         {"v_set", b.v_set},
                         {"theta_set", b.theta_set},
                         {"p_load", b.p_load},
                         {"q_load", b.q_load},
                         {"p_gen", b.p_gen},
                         {"q_gen", b.q_gen},
                         {"gs", b.gs},
                         {"bs", b.bs}});
    }
    json branches = json::array();
    for (const BranchRecord& br : net.branches) {
        branches.push_back({{"from", br.from},
                            {"to", br.to},
                            {"r", br.r},
                            {"x", br.x},
                            {"b_ch", br.b_ch},
                            {"tap", br.tap},
                            {"shift", br.shift},
                            {"status", br.status}});
    }
    j["buses"] = std::move(buses);
    j["branches"] = std::move(branches);
    return j.dump(1) + "\n";
}

TransmissionNetwork network_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("$: invalid JSON ({})", e.what()));
    }
    const json& schema = field(j, "schema", "$");
    if (!schema.is_string() || schema.get<std::string>() != kTransmissionSchema) {
        throw ParseError(fmt::format("$.schema: expected \"{}\"", kTransmissionSchema));
    }
    TransmissionNetwork net;
    if (const auto it = j.find("name"); it != j.end()) {
        if (!it->is_string()) {
            throw ParseError("$.name: expected a string");
        }
        net.name = it->get<std::string>();
    }
    net.base_mva = number(j, "base_mva", "$");

    const json& buses = array(j, "buses", "$");
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const std::string path = fmt::format("$.buses[{}]", i);
        const json& b = buses[i];
        BusRecord rec;
        rec.id = integer(b, "id", path);
        const json& k = field(b, "kind", path);
        if (!k.is_string()) {
            throw ParseError(path + ".kind: expected a string");
        }
        rec.kind = kind_from(k.get<std::string>(), path + ".kind");
        rec.v_set = number(b, "v_set", path);
        rec.theta_set = number(b, "theta_set", path);
        rec.p_load = number(b, "p_load", path);
        rec.q_load = number(b, "q_load", path);
        rec.p_gen = number(b, "p_gen", path);
        rec.q_gen = number(b, "q_gen", path);
        rec.gs = number(b, "gs", path);
        rec.bs = number(b, "bs", path);
        net.buses.push_back(rec);
    }

    const json& branches = array(j, "branches", "$");
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const std::string path = fmt::format("$.branches[{}]", i);
        const json& b = branches[i];
        BranchRecord rec;
        rec.from = integer(b, "from", path);
        rec.to = integer(b, "to", path);
        rec.r = number(b, "r", path);
        rec.x = number(b, "x", path);
        rec.b_ch = number(b, "b_ch", path);
        rec.tap = number(b, "tap", path);
        rec.shift = number(b, "shift", path);
        const json& st = field(b, "status", path);
        if (!st.is_boolean()) {
            throw ParseError(path + ".status: expected a boolean");
        }
        rec.status = st.get<bool>();
        net.branches.push_back(rec);
    }

    validate(net);
    return net;
}

}  // namespace gridbatch::network
