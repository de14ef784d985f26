#include "gridbatch/network/matpower.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <unordered_map>

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::network {

namespace {

struct Row {
    int line = 0;
    std::vector<double> vals;
};

struct Matrix {
    int line = 0;
    std::vector<Row> rows;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Drop a trailing % comment, ignoring % inside single-quoted strings.
std::string_view strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\'') {
            quoted = !quoted;
        } else if (s[i] == '%' && !quoted) {
            return s.substr(0, i);
        }
    }
    return s;
}

double parse_number(std::string_view tok, int line) {
    if (!tok.empty() && tok.front() == '+') {
        tok.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError(fmt::format("malformed number '{}'", tok), line);
    }
    return v;
}

void parse_row_text(std::string_view text, int line, Matrix& m) {
    Row row{line, {}};
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',' || text[i] == '\r')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != ',' && text[i] != '\r') {
            ++i;
        }
        if (i > start) {
            row.vals.push_back(parse_number(text.substr(start, i - start), line));
        }
    }
    if (!row.vals.empty()) {
        m.rows.push_back(std::move(row));
    }
}

struct Scan {
    std::string name;
    std::optional<double> base_mva;
    int base_line = 0;
    std::map<std::string, Matrix> matrices;
};

Scan scan(std::string_view text, std::vector<std::string>* warnings) {
    Scan out;
    auto warn = [&](std::string msg) {
        if (warnings != nullptr) {
            warnings->push_back(std::move(msg));
        }
    };

    Matrix* open = nullptr;
    std::string skipping;  // name of a skipped bracketed block
    char skip_close = 0;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string_view line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }

        if (!skipping.empty()) {
            if (line.find(skip_close) != std::string_view::npos) {
                skipping.clear();
            }
            continue;
        }

        if (open != nullptr) {
            const auto close = line.find(']');
            const std::string_view body = close == std::string_view::npos ? line : line.substr(0, close);
            std::size_t s = 0;
            while (s <= body.size()) {
                const auto semi = body.find(';', s);
                parse_row_text(body.substr(s, semi == std::string_view::npos ? std::string_view::npos : semi - s),
                               line_no, *open);
                if (semi == std::string_view::npos) {
                    break;
                }
                s = semi + 1;
            }
            if (close != std::string_view::npos) {
                open = nullptr;
            }
            continue;
        }

        if (line.starts_with("function")) {
            const auto eq = line.find('=');
            if (eq != std::string_view::npos) {
                out.name = std::string(trim(line.substr(eq + 1)));
            }
            continue;
        }
        if (line.starts_with("mpc.")) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ParseError(fmt::format("expected assignment in '{}'", line), line_no);
            }
            const std::string field(trim(line.substr(4, eq - 4)));
            std::string_view rhs = trim(line.substr(eq + 1));
            if (!rhs.empty() && rhs.front() == '[') {
                if (field != "bus" && field != "gen" && field != "branch") {
                    warn(fmt::format("line {}: ignoring unsupported field mpc.{}", line_no, field));
                    if (rhs.find(']') == std::string_view::npos) {
                        skipping = field;
                        skip_close = ']';
                    }
                    continue;
                }
                if (out.matrices.contains(field)) {
                    throw ParseError(fmt::format("mpc.{} defined twice", field), line_no);
                }
                Matrix& m = out.matrices[field];
                m.line = line_no;
                rhs.remove_prefix(1);
                const auto close = rhs.find(']');
                open = &m;
                const std::string_view body = close == std::string_view::npos ? rhs : rhs.substr(0, close);
                std::size_t s = 0;
                while (s <= body.size()) {
                    const auto semi = body.find(';', s);
                    parse_row_text(body.substr(s, semi == std::string_view::npos ? std::string_view::npos : semi - s),
                                   line_no, m);
                    if (semi == std::string_view::npos) {
                        break;
                    }
                    s = semi + 1;
                }
                if (close != std::string_view::npos) {
                    open = nullptr;
                }
                continue;
            }
            if (!rhs.empty() && rhs.front() == '{') {
                warn(fmt::format("line {}: ignoring unsupported field mpc.{}", line_no, field));
                if (rhs.find('}') == std::string_view::npos) {
                    skipping = field;
                    skip_close = '}';
                }
                continue;
            }
            if (field == "baseMVA") {
                if (!rhs.empty() && rhs.back() == ';') {
                    rhs.remove_suffix(1);
                }
                out.base_mva = parse_number(trim(rhs), line_no);
                out.base_line = line_no;
            } else if (field != "version") {
                warn(fmt::format("line {}: ignoring unsupported field mpc.{}", line_no, field));
            }
            continue;
        }
        throw ParseError(fmt::format("unexpected statement '{}'", line), line_no);
    }
    if (open != nullptr) {
        throw ParseError("unterminated matrix (missing ']')", line_no);
    }
    return out;
}

void require_columns(const Row& r, std::size_t n, const char* what) {
    if (r.vals.size() < n) {
        throw ParseError(fmt::format("{} row has {} columns, expected at least {}", what, r.vals.size(), n), r.line);
    }
}

int as_id(double v, int line, const char* what) {
    if (v != std::floor(v) || v < 1 || v > 2.0e9) {
        throw ParseError(fmt::format("{} '{}' is not a positive integer", what, v), line);
    }
    return static_cast<int>(v);
}

}  // namespace

TransmissionNetwork parse_matpower_case(std::string_view text, std::vector<std::string>* warnings) {
    Scan sc = scan(text, warnings);
    auto warn = [&](std::string msg) {
        if (warnings != nullptr) {
            warnings->push_back(std::move(msg));
        }
    };
    if (!sc.base_mva) {
        throw ParseError("missing mpc.baseMVA");
    }
    if (!(*sc.base_mva > 0.0)) {
        throw ParseError(fmt::format("baseMVA must be positive, got {}", *sc.base_mva), sc.base_line);
    }
    if (!sc.matrices.contains("bus")) {
        throw ParseError("missing mpc.bus");
    }
    if (!sc.matrices.contains("branch")) {
        throw ParseError("missing mpc.branch");
    }
    const double base = *sc.base_mva;
    constexpr double deg = std::numbers::pi / 180.0;

    TransmissionNetwork net;
    net.name = sc.name;
    net.base_mva = base;

    std::unordered_map<int, std::size_t> idx;
    std::vector<int> type_line;
    for (const Row& r : sc.matrices["bus"].rows) {
        require_columns(r, 13, "bus");
        BusRecord b;
        b.id = as_id(r.vals[0], r.line, "bus id");
        const double type = r.vals[1];
        if (type == 1) {
            b.kind = BusKind::PQ;
        } else if (type == 2) {
            b.kind = BusKind::PV;
        } else if (type == 3) {
            b.kind = BusKind::Slack;
        } else if (type == 4) {
            throw ParseError(fmt::format("bus {}: isolated bus type 4 is not supported", b.id), r.line);
        } else {
            throw ParseError(fmt::format("bus {}: unknown bus type {}", b.id, type), r.line);
        }
        b.p_load = r.vals[2] / base;
        b.q_load = r.vals[3] / base;
        b.gs = r.vals[4] / base;
        b.bs = r.vals[5] / base;
        b.v_set = r.vals[7];
        b.theta_set = b.kind == BusKind::Slack ? r.vals[8] * deg : 0.0;
        if (!idx.emplace(b.id, net.buses.size()).second) {
            throw ParseError(fmt::format("duplicate bus id {}", b.id), r.line);
        }
        net.buses.push_back(b);
        type_line.push_back(r.line);
    }

    std::vector<bool> has_gen(net.buses.size(), false);
    if (const auto it = sc.matrices.find("gen"); it != sc.matrices.end()) {
        for (const Row& r : it->second.rows) {
            require_columns(r, 8, "gen");
            const int id = as_id(r.vals[0], r.line, "gen bus");
            const auto b = idx.find(id);
            if (b == idx.end()) {
                throw ParseError(fmt::format("generator references unknown bus {}", id), r.line);
            }
            if (!(r.vals[7] > 0)) {
                continue;
            }
            BusRecord& bus = net.buses[b->second];
            bus.p_gen += r.vals[1] / base;
            bus.q_gen += r.vals[2] / base;
            const double vg = r.vals[5];
            if (bus.kind != BusKind::PQ) {
                if (!has_gen[b->second]) {
                    bus.v_set = vg;
                } else if (std::abs(bus.v_set - vg) > 1e-9) {
                    throw ParseError(
                        fmt::format("bus {}: conflicting generator voltage set-points {} and {}", id, bus.v_set, vg),
                        r.line);
                }
            }
            has_gen[b->second] = true;
        }
    } else {
        warn("no mpc.gen matrix; slack and PV set-points taken from the bus Vm column");
    }

    std::size_t slack_count = 0;
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        BusRecord& b = net.buses[i];
        if (b.kind == BusKind::PV && !has_gen[i]) {
            warn(fmt::format("bus {}: PV bus without in-service generator treated as PQ", b.id));
            b.kind = BusKind::PQ;
        }
        if (b.kind == BusKind::Slack) {
            ++slack_count;
            if (!has_gen[i] && sc.matrices.contains("gen")) {
                warn(fmt::format("bus {}: slack bus without in-service generator; using bus Vm", b.id));
            }
        }
        if (b.kind == BusKind::PQ) {
            b.v_set = 1.0;
        }
        if (b.kind != BusKind::PQ && !(b.v_set > 0.0)) {
            throw ParseError(fmt::format("bus {}: voltage set-point must be positive, got {}", b.id, b.v_set),
                             type_line[i]);
        }
    }
    if (slack_count == 0) {
        throw ParseError("no slack bus (type 3)", sc.matrices["bus"].line);
    }
    if (slack_count > 1) {
        throw ParseError(fmt::format("{} slack buses; exactly one is supported", slack_count), sc.matrices["bus"].line);
    }

    for (const Row& r : sc.matrices["branch"].rows) {
        require_columns(r, 11, "branch");
        BranchRecord br;
        br.from = as_id(r.vals[0], r.line, "branch from-bus");
        br.to = as_id(r.vals[1], r.line, "branch to-bus");
        for (int id : {br.from, br.to}) {
            if (!idx.contains(id)) {
                throw ParseError(fmt::format("branch references unknown bus {}", id), r.line);
            }
        }
        br.r = r.vals[2];
        br.x = r.vals[3];
        br.b_ch = r.vals[4];
        br.tap = r.vals[8] == 0.0 ? 1.0 : r.vals[8];
        br.shift = r.vals[9] * deg;
        br.status = r.vals[10] > 0;
        if (!(br.tap > 0.0)) {
            throw ParseError(fmt::format("branch {}-{}: tap ratio must be positive, got {}", br.from, br.to, br.tap),
                             r.line);
        }
        net.branches.push_back(br);
    }

    validate(net);
    return net;
}

}  // namespace gridbatch::network
