#include "gridbatch/distribution/reference_csv.hpp"

#include <charconv>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::distribution {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

double number(std::string_view s, std::string_view column, int line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError(fmt::format("bad {} value '{}'", column, s), line);
    }
    return v;
}

}  // namespace

std::vector<ReferenceVoltage> parse_reference_csv(std::string_view text) {
    std::vector<ReferenceVoltage> out;
    std::unordered_set<std::string> seen;
    bool header = false;
    int line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        const std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) {
            continue;
        }
        const auto f = split(line);
        if (!header) {
            if (f.size() != 3 || f[0] != "node" || f[1] != "vmag_pu" || f[2] != "vang_deg") {
                throw ParseError("expected header node,vmag_pu,vang_deg", line_no);
            }
            header = true;
            continue;
        }
        if (f.size() != 3 || f[0].empty()) {
            throw ParseError(fmt::format("expected 3 fields, got {}", f.size()), line_no);
        }
        ReferenceVoltage r{std::string(f[0]), number(f[1], "vmag_pu", line_no), number(f[2], "vang_deg", line_no)};
        if (!seen.insert(r.node).second) {
            throw ParseError(fmt::format("duplicate node '{}'", r.node), line_no);
        }
        out.push_back(std::move(r));
    }
    if (!header) {
        throw ParseError("empty reference file");
    }
    return out;
}

}  // namespace gridbatch::distribution
