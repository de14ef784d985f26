#include "gridbatch/batch/report_io.hpp"

#include <cmath>

#include <fmt/format.h>

#include <json.hpp>

namespace gridbatch::batch {

namespace {

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string csv_number(double v) { return std::isfinite(v) ? fmt::format("{}", v) : std::string(); }

}  // namespace

void write_report_json(std::ostream& os, const BatchReport& rep, const ReportMeta& meta) {
    json j;
    j["schema"] = std::string(kReportSchema);
    j["kind"] = meta.kind;
    j["case"] = meta.case_name;
    j["seed"] = meta.seed;
    j["spread"] = meta.spread;
    j["count"] = rep.aggregate.count;
    j["aggregate"] = {{"n_converged", rep.aggregate.n_converged}, {"count", rep.aggregate.count}};
    json scen = json::array();
    json wall = json::array();
    for (const ScenarioRecord& r : rep.records) {
        scen.push_back({{"index", r.index},
                        {"converged", r.converged},
                        {"iterations", r.iterations},
                        {"residual", finite_or_null(r.residual)},
                        {"diagnostic", r.diagnostic}});
        wall.push_back(r.wall_time);
    }
    j["scenarios"] = std::move(scen);
    if (!rep.vm.empty()) {
        j["elements"] = rep.element_ids;
        json sol = json::array();
        for (std::size_t i = 0; i < rep.vm.size(); ++i) {
            json vm = json::array();
            json va = json::array();
            for (double x : rep.vm[i]) {
                vm.push_back(finite_or_null(x));
            }
            for (double x : rep.va_deg[i]) {
                va.push_back(finite_or_null(x));
            }
            sol.push_back({{"index", i}, {"vm", std::move(vm)}, {"va_deg", std::move(va)}});
        }
        j["solutions"] = std::move(sol);
    }
    j["timing"] = {{"worker_count", rep.aggregate.worker_count},
                   {"total_wall_time", rep.aggregate.total_wall_time},
                   {"throughput", rep.aggregate.throughput},
                   {"scenario_wall_time", std::move(wall)}};
    os << j.dump(1) << '\n';
}

void write_report_csv(std::ostream& os, const BatchReport& rep) {
    os << "index,converged,iterations,residual,diagnostic,wall_time\n";
    for (const ScenarioRecord& r : rep.records) {
        os << fmt::format("{},{},{},{},{},{}\n", r.index, r.converged ? 1 : 0, r.iterations, csv_number(r.residual),
                          csv_field(r.diagnostic), r.wall_time);
    }
}

void write_solutions_csv(std::ostream& os, const BatchReport& rep) {
    os << "index,element,vm,va_deg\n";
    for (std::size_t i = 0; i < rep.vm.size(); ++i) {
        for (std::size_t k = 0; k < rep.vm[i].size(); ++k) {
            const std::string& id = k < rep.element_ids.size() ? rep.element_ids[k] : std::to_string(k);
            os << fmt::format("{},{},{},{}\n", i, csv_field(id), csv_number(rep.vm[i][k]), csv_number(rep.va_deg[i][k]));
        }
    }
}

}  // namespace gridbatch::batch
