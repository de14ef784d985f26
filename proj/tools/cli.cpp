#include "gridbatch/cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "gridbatch/batch/report_io.hpp"
#include "gridbatch/batch/run_batch.hpp"
#include "gridbatch/distribution/reference_csv.hpp"
#include "gridbatch/error.hpp"
#include "gridbatch/network/matpower.hpp"
#include "gridbatch/network/network_json.hpp"

namespace gridbatch::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Failure that maps to a stable code and exit status.
class CliError : public std::runtime_error {
  public:
    CliError(std::string code, const std::string& what, int exit_code = kExitInput)
        : std::runtime_error(what), code_(std::move(code)), exit_(exit_code) {}
    const std::string& code() const noexcept { return code_; }
    int exit_code() const noexcept { return exit_; }

  private:
    std::string code_;
    int exit_;
};

enum class Kind { Tx, Dist };

const char* kind_name(Kind k) { return k == Kind::Tx ? "tx" : "dist"; }

struct Options {
    std::string case_path;
    std::string kind;
    std::size_t batch = 1;
    std::uint64_t seed = 0;
    double spread = 0.2;
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<double> gmres_tol;
    std::optional<int> restart;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::string out;
    std::string format = "json";
    std::string precond = "fd";
    bool summary_only = false;
    bool quiet = false;
    bool verbose = false;
    // verify
    bool oracle = false;
    std::string reference;
    std::optional<double> threshold;
    // bench
    std::vector<std::size_t> sizes{1, 8, 64, 256, 1024};
    std::vector<int> worker_counts;
};

struct LoadedCase {
    Kind kind = Kind::Tx;
    std::string name;
    std::shared_ptr<const transmission::TransmissionModel> tx;
    std::shared_ptr<const distribution::ZBusModel> dist;
    std::vector<std::string> warnings;
};

std::string read_file(const std::string& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        throw CliError("E_IO", fmt::format("cannot read '{}': no such file", path));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CliError("E_IO", fmt::format("cannot open '{}'", path));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string json_schema_of(const std::string& text, const std::string& path) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw CliError("E_PARSE", fmt::format("{}: invalid JSON: {}", path, e.what()));
    }
    if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string()) {
        throw CliError("E_SCHEMA", fmt::format("{}: $.schema: missing or not a string", path));
    }
    return j["schema"].get<std::string>();
}

Kind detect_kind(const Options& o, const std::string& text) {
    const std::string ext = fs::path(o.case_path).extension().string();
    std::optional<Kind> from_content;
    if (ext == ".m") {
        from_content = Kind::Tx;
    } else {
        const std::string schema = json_schema_of(text, o.case_path);
        if (schema == network::kTransmissionSchema) {
            from_content = Kind::Tx;
        } else if (schema == distribution::kDistributionSchema) {
            from_content = Kind::Dist;
        } else {
            throw CliError("E_SCHEMA", fmt::format("{}: $.schema: unsupported schema '{}'", o.case_path, schema));
        }
    }
    if (!o.kind.empty()) {
        const Kind asked = o.kind == "tx" ? Kind::Tx : Kind::Dist;
        if (asked != *from_content) {
            throw CliError("E_CONFIG", fmt::format("--kind {} does not match '{}', which holds a {} case", o.kind,
                                                   o.case_path, kind_name(*from_content)));
        }
    }
    return *from_content;
}

/// Runs `fn`, translating library exceptions into CliError.
template <typename Fn>
auto guarded(const std::string& path, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const CliError&) {
        throw;
    } catch (const ParseError& e) {
        const std::string what = e.what();
        throw CliError(what.rfind("$", 0) == 0 ? "E_SCHEMA" : "E_PARSE", fmt::format("{}: {}", path, what));
    } catch (const NetworkError& e) {
        throw CliError("E_NETWORK", fmt::format("{}: {}", path, e.what()));
    } catch (const NumericalError& e) {
        throw CliError("E_NUMERIC", fmt::format("{}: {}", path, e.what()), kExitNumeric);
    } catch (const json::exception& e) {
        throw CliError("E_PARSE", fmt::format("{}: {}", path, e.what()));
    } catch (const std::invalid_argument& e) {
        throw CliError("E_CONFIG", e.what());
    }
}

LoadedCase load_case(const Options& o) {
    const std::string text = read_file(o.case_path);
    LoadedCase lc;
    lc.kind = detect_kind(o, text);
    guarded(o.case_path, [&] {
        if (lc.kind == Kind::Tx) {
            network::TransmissionNetwork net = fs::path(o.case_path).extension() == ".m"
                                                   ? network::parse_matpower_case(text, &lc.warnings)
                                                   : network::network_from_json(text);
            lc.name = net.name;
            lc.tx = transmission::build_transmission_model(std::move(net));
        } else {
            const distribution::ThreePhaseNetwork net = distribution::parse_distribution_json(text);
            lc.name = net.name;
            lc.dist = distribution::build_zbus_model(net);
        }
        return 0;
    });
    if (lc.name.empty()) {
        lc.name = fs::path(o.case_path).stem().string();
    }
    return lc;
}

transmission::NewtonOptions newton_options(const Options& o) {
    transmission::NewtonOptions n;
    if (o.tol) {
        n.tol_mismatch = *o.tol;
    }
    if (o.max_iter) {
        n.max_newton = *o.max_iter;
    }
    if (o.gmres_tol) {
        n.gmres.tol = *o.gmres_tol;
    }
    if (o.restart) {
        n.gmres.restart = *o.restart;
    }
    n.precond = o.precond == "none" ? transmission::PrecondKind::None : transmission::PrecondKind::FastDecoupled;
    guarded("options", [&] {
        transmission::validate(n);
        return 0;
    });
    return n;
}

distribution::FixedPointOptions fixed_point_options(const Options& o) {
    distribution::FixedPointOptions f;
    if (o.tol) {
        f.tol = *o.tol;
    }
    if (o.max_iter) {
        f.max_iter = *o.max_iter;
    }
    return f;
}

batch::ScenarioSpec scenario_spec(const Options& o, Kind kind, std::size_t count) {
    batch::ScenarioSpec s;
    s.count = count;
    s.seed = o.seed;
    s.spread = o.spread;
    s.target = kind == Kind::Tx ? batch::Target::Transmission : batch::Target::Distribution;
    guarded("options", [&] {
        batch::validate(s);
        return 0;
    });
    return s;
}

batch::ScenarioSolver make_solver(const LoadedCase& lc, const Options& o, const batch::ScenarioSpec& spec,
                                  bool keep) {
    if (lc.kind == Kind::Tx) {
        return batch::make_transmission_solver(lc.tx, spec, newton_options(o), keep);
    }
    return batch::make_distribution_solver(lc.dist, spec, fixed_point_options(o), keep);
}

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
    if (path.empty() || path == "-") {
        write(out);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw CliError("E_IO", fmt::format("cannot write '{}'", path));
    }
    write(f);
    f.flush();
    if (!f) {
        throw CliError("E_IO", fmt::format("error writing '{}'", path));
    }
}

std::string solutions_path(const std::string& out) {
    fs::path p(out);
    return (p.parent_path() / (p.stem().string() + "_solutions.csv")).string();
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
    const LoadedCase lc = load_case(o);
    for (const std::string& w : lc.warnings) {
        err << "warning: " << w << '\n';
    }
    const batch::ScenarioSpec spec = scenario_spec(o, lc.kind, o.batch);
    const bool keep = !o.summary_only;
    batch::BatchReport rep = batch::run_batch(make_solver(lc, o, spec, keep), spec.count, {o.workers, keep});
    rep.element_ids = lc.kind == Kind::Tx ? batch::transmission_element_ids(*lc.tx)
                                          : batch::distribution_element_ids(*lc.dist);

    if (o.format == "csv") {
        emit(o.out, out, [&](std::ostream& os) { batch::write_report_csv(os, rep); });
        if (keep) {
            if (o.out.empty() || o.out == "-") {
                err << "warning: per-scenario solutions need --out with --format csv; not written\n";
            } else {
                emit(solutions_path(o.out), out, [&](std::ostream& os) { batch::write_solutions_csv(os, rep); });
            }
        }
    } else {
        const batch::ReportMeta meta{kind_name(lc.kind), lc.name, o.seed, o.spread};
        emit(o.out, out, [&](std::ostream& os) { batch::write_report_json(os, rep, meta); });
    }

    const auto& a = rep.aggregate;
    if (!o.quiet) {
        err << fmt::format("{}: {}/{} scenarios converged, {:.3f} s on {} workers ({:.1f} scenarios/s)\n", lc.name,
                           a.n_converged, a.count, a.total_wall_time, a.worker_count, a.throughput);
    }
    if (a.n_converged != a.count) {
        for (const auto& r : rep.records) {
            if (!r.converged) {
                err << fmt::format("error[E_NUMERIC]: scenario {} did not converge: {}\n", r.index, r.diagnostic);
                break;
            }
        }
        return kExitNumeric;
    }
    return kExitOk;
}

struct VerifyRow {
    std::string label;
    std::string detail;
    double deviation = 0.0;
};

struct VerifyOutcome {
    std::string mode;
    double threshold = 0.0;
    std::vector<VerifyRow> rows;
    std::vector<std::string> failures;  ///< non-converged solves
    double max_dev = 0.0;
};

VerifyOutcome verify_tx_oracle(const LoadedCase& lc, const Options& o) {
    VerifyOutcome v{"oracle", o.threshold.value_or(1e-10), {}, {}, 0.0};
    const auto& model = *lc.tx;
    const transmission::NewtonOptions opts = newton_options(o);
    const auto elements = batch::transmission_load_elements(model.net);
    std::vector<double> mult(elements.size());
    for (std::size_t s = 0; s <= o.batch; ++s) {
        transmission::TransmissionScenario sc;
        std::string label = "base";
        if (s == 0) {
            sc = transmission::base_scenario(model.net, model.part);
        } else {
            batch::scenario_multipliers(o.seed, s - 1, o.spread, mult);
            sc = batch::apply_multipliers(model, elements, mult);
            label = std::to_string(s - 1);
        }
        const auto r = transmission::newton_solve(model, sc, opts);
        const auto ref = guarded(o.case_path, [&] { return transmission::dense_newton_oracle(model, sc, opts); });
        if (!r.converged || !ref.converged) {
            v.failures.push_back(fmt::format("scenario {}: newton {} / oracle {}{}", label,
                                             r.converged ? "converged" : "diverged",
                                             ref.converged ? "converged" : "diverged",
                                             r.diagnostic.empty() ? "" : " (" + r.diagnostic + ")"));
            continue;
        }
        double dev = 0.0;
        for (std::size_t k = 0; k < r.state.vmag.size(); ++k) {
            dev = std::max({dev, std::abs(r.state.vmag[k] - ref.state.vmag[k]),
                            std::abs(r.state.theta[k] - ref.state.theta[k])});
        }
        v.rows.push_back({label, fmt::format("iterations {} / {}", r.iterations, ref.iterations), dev});
        v.max_dev = std::max(v.max_dev, dev);
    }
    return v;
}

VerifyOutcome verify_dist_oracle(const LoadedCase& lc, const Options& o) {
    VerifyOutcome v{"oracle", o.threshold.value_or(1e-8), {}, {}, 0.0};
    const auto& model = *lc.dist;
    distribution::FixedPointOptions cols = fixed_point_options(o);
    distribution::FixedPointOptions direct = cols;
    direct.apply = distribution::ZApply::Factorized;
    std::vector<double> mult(model.load_base.size());
    for (std::size_t s = 0; s <= o.batch; ++s) {
        distribution::DistributionScenario sc;
        std::string label = "base";
        if (s == 0) {
            sc = distribution::base_scenario(model);
        } else {
            batch::scenario_multipliers(o.seed, s - 1, o.spread, mult);
            sc = batch::apply_multipliers(model, mult);
            label = std::to_string(s - 1);
        }
        const auto a = distribution::zbus_iterate(model, sc, cols);
        const auto b = distribution::zbus_iterate(model, sc, direct);
        if (!a.converged || !b.converged) {
            v.failures.push_back(fmt::format("scenario {}: {}", label, !a.converged ? a.diagnostic : b.diagnostic));
            continue;
        }
        double dev = 0.0;
        for (std::size_t k = 0; k < a.v.size(); ++k) {
            dev = std::max(dev, std::abs(a.v[k] - b.v[k]));
        }
        v.rows.push_back({label, fmt::format("iterations {} / {}", a.iterations, b.iterations), dev});
        v.max_dev = std::max(v.max_dev, dev);
    }
    return v;
}

std::string default_reference(const std::string& case_path) {
    const fs::path p(case_path);
    return (p.parent_path() / (p.stem().string() + "_reference.csv")).string();
}

VerifyOutcome verify_dist_reference(const LoadedCase& lc, const Options& o) {
    const std::string ref_path = o.reference.empty() ? default_reference(o.case_path) : o.reference;
    const auto refs = guarded(ref_path, [&] { return distribution::parse_reference_csv(read_file(ref_path)); });
    const auto& model = *lc.dist;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < model.node_ids.size(); ++k) {
        index.emplace(model.node_ids[k], k);
    }
    for (const auto& r : refs) {
        if (!index.contains(r.node)) {
            throw CliError("E_PARSE", fmt::format("{}: node '{}' is not in {}", ref_path, r.node, lc.name));
        }
    }
    VerifyOutcome v{"reference", o.threshold.value_or(1e-3), {}, {}, 0.0};
    const auto res = distribution::zbus_iterate(model, distribution::base_scenario(model), fixed_point_options(o));
    if (!res.converged) {
        v.failures.push_back("base: " + res.diagnostic);
        return v;
    }
    for (const auto& r : refs) {
        const std::size_t node = index.at(r.node);
        const distribution::Index p = model.position[node];
        distribution::cd volt;
        if (p >= 0) {
            volt = res.v[static_cast<std::size_t>(p)];
        } else {
            for (std::size_t s = 0; s < model.slack_nodes.size(); ++s) {
                if (static_cast<std::size_t>(model.slack_nodes[s]) == node) {
                    volt = model.v_slack[s];
                }
            }
        }
        const double vm = std::abs(volt);
        const double dev = std::abs(vm - r.vmag_pu);
        v.rows.push_back({r.node, fmt::format("vm {:.6f} ref {:.6f} angle {:.4f} ref {:.4f}", vm, r.vmag_pu,
                                              std::arg(volt) * 180.0 / std::numbers::pi, r.vang_deg),
                          dev});
        v.max_dev = std::max(v.max_dev, dev);
    }
    return v;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
    const LoadedCase lc = load_case(o);
    if (lc.kind == Kind::Tx && !o.reference.empty()) {
        throw CliError("E_CONFIG", "--reference applies to distribution cases; transmission cases verify against "
                                   "the dense oracle");
    }
    VerifyOutcome v;
    if (lc.kind == Kind::Tx) {
        v = verify_tx_oracle(lc, o);
    } else if (o.oracle) {
        v = verify_dist_oracle(lc, o);
    } else {
        v = verify_dist_reference(lc, o);
    }
    const bool pass = v.failures.empty() && !v.rows.empty() && v.max_dev <= v.threshold;

    if (o.format == "json") {
        json j;
        j["case"] = lc.name;
        j["kind"] = kind_name(lc.kind);
        j["mode"] = v.mode;
        j["threshold"] = v.threshold;
        j["max_deviation"] = v.max_dev;
        j["pass"] = pass;
        j["failures"] = v.failures;
        json rows = json::array();
        for (const auto& r : v.rows) {
            rows.push_back({{"label", r.label}, {"detail", r.detail}, {"deviation", r.deviation}});
        }
        j["rows"] = std::move(rows);
        emit(o.out, out, [&](std::ostream& os) { os << j.dump(1) << '\n'; });
    } else {
        std::vector<VerifyRow> shown = v.rows;
        std::stable_sort(shown.begin(), shown.end(),
                         [](const VerifyRow& a, const VerifyRow& b) { return a.deviation > b.deviation; });
        if (!o.verbose && shown.size() > 10) {
            shown.resize(10);
        }
        emit(o.out, out, [&](std::ostream& os) {
            os << fmt::format("{} ({}) against {}\n", lc.name, kind_name(lc.kind), v.mode);
            os << fmt::format("{:<16} {:>12}  {}\n", "item", "deviation", "detail");
            for (const auto& r : shown) {
                os << fmt::format("{:<16} {:>12.3e}  {}\n", r.label, r.deviation, r.detail);
            }
            if (shown.size() < v.rows.size()) {
                os << fmt::format("... {} more rows (--verbose shows all)\n", v.rows.size() - shown.size());
            }
            os << fmt::format("max deviation {:.3e} threshold {:.1e}: {}\n", v.max_dev, v.threshold,
                              pass ? "PASS" : "FAIL");
        });
    }
    for (const auto& f : v.failures) {
        err << "error[E_NUMERIC]: " << f << '\n';
    }
    if (v.failures.empty() && !pass) {
        err << fmt::format("error[E_NUMERIC]: max deviation {:.3e} exceeds threshold {:.1e}\n", v.max_dev,
                           v.threshold);
    }
    return pass ? kExitOk : kExitNumeric;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
    const LoadedCase lc = load_case(o);
    std::vector<int> workers = o.worker_counts;
    if (workers.empty()) {
        const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        for (int w = 1; w < hw; w *= 2) {
            workers.push_back(w);
        }
        workers.push_back(hw);
    }
    bool all_converged = true;
    std::ostringstream table;
    table << "case,kind,batch,workers,n_converged,total_wall_time,per_scenario_time,throughput\n";
    for (const std::size_t size : o.sizes) {
        const batch::ScenarioSpec spec = scenario_spec(o, lc.kind, size);
        const batch::ScenarioSolver solver = make_solver(lc, o, spec, false);
        for (const int w : workers) {
            batch::run_batch(solver, size, {w, false});
            const batch::BatchReport rep = batch::run_batch(solver, size, {w, false});
            const auto& a = rep.aggregate;
            all_converged = all_converged && a.n_converged == a.count;
            table << fmt::format("{},{},{},{},{},{},{},{}\n", lc.name, kind_name(lc.kind), size, w, a.n_converged,
                                 a.total_wall_time, a.total_wall_time / static_cast<double>(size), a.throughput);
            if (!o.quiet) {
                err << fmt::format("batch {:>6} workers {:>3}: {:.4f} s, {:.1f} scenarios/s\n", size, w,
                                   a.total_wall_time, a.throughput);
            }
        }
    }
    emit(o.out, out, [&](std::ostream& os) { os << table.str(); });
    if (!all_converged) {
        err << "error[E_NUMERIC]: some scenarios did not converge\n";
        return kExitNumeric;
    }
    return kExitOk;
}

int cmd_convert(const Options& o, std::ostream& out, std::ostream& err) {
    const std::string text = read_file(o.case_path);
    const Kind kind = detect_kind(o, text);
    std::vector<std::string> warnings;
    const std::string converted = guarded(o.case_path, [&] {
        if (kind == Kind::Dist) {
            return distribution::distribution_to_json(distribution::parse_distribution_json(text));
        }
        if (fs::path(o.case_path).extension() == ".m") {
            return network::network_to_json(network::parse_matpower_case(text, &warnings));
        }
        return network::network_to_json(network::network_from_json(text));
    });
    for (const std::string& w : warnings) {
        err << "warning: " << w << '\n';
    }
    emit(o.out, out, [&](std::ostream& os) { os << converted; });
    return kExitOk;
}

void add_case_options(CLI::App* sub, Options& o) {
    sub->add_option("--case", o.case_path, "Network file: MATPOWER .m or gridbatch JSON")->required();
    sub->add_option("--kind", o.kind, "Network kind (default: from the file)")->check(CLI::IsMember({"tx", "dist"}));
}

void add_solver_options(CLI::App* sub, Options& o) {
    sub->add_option("--seed", o.seed, "Scenario seed");
    sub->add_option("--spread", o.spread, "Load multiplier half-range, in [0, 1)");
    sub->add_option("--tol", o.tol, "Mismatch (tx) or magnitude-sum change (dist) tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", o.max_iter, "Newton / fixed-point iteration limit")->check(CLI::PositiveNumber);
    sub->add_option("--gmres-tol", o.gmres_tol, "Relative GMRES tolerance (tx)")->check(CLI::PositiveNumber);
    sub->add_option("--restart", o.restart, "GMRES restart length (tx)")->check(CLI::PositiveNumber);
    sub->add_option("--precond", o.precond, "Preconditioner (tx)")->check(CLI::IsMember({"fd", "none"}));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Batched AC power flow for transmission and distribution networks", "gridbatch"};
    app.require_subcommand(1);

    CLI::App* solve = app.add_subcommand("solve", "Solve a seeded batch of load scenarios");
    add_case_options(solve, o);
    add_solver_options(solve, o);
    solve->add_option("--batch", o.batch, "Number of scenarios")->check(CLI::PositiveNumber);
    solve->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    solve->add_option("--out", o.out, "Output file (default: stdout)");
    solve->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    solve->add_flag("--summary-only", o.summary_only, "Omit per-scenario voltage solutions");
    solve->add_flag("-q,--quiet", o.quiet, "No summary line on stderr");

    CLI::App* verify = app.add_subcommand("verify", "Compare solutions with an oracle or a reference profile");
    add_case_options(verify, o);
    add_solver_options(verify, o);
    verify->add_flag("--oracle", o.oracle, "Oracle mode: dense Newton (tx, always on) or factorized Z vs load columns (dist)");
    verify->add_option("--reference", o.reference, "Reference CSV (dist; default <case>_reference.csv)");
    verify->add_option("--threshold", o.threshold, "Maximum accepted deviation")->check(CLI::NonNegativeNumber);
    verify->add_option("--batch", o.batch, "Seeded scenarios checked in addition to the base case (oracle mode)");
    verify->add_option("--out", o.out, "Output file (default: stdout)");
    verify->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    verify->add_flag("-v,--verbose", o.verbose, "List every compared item");

    CLI::App* bench = app.add_subcommand("bench", "Throughput sweep over batch sizes and worker counts (CSV)");
    add_case_options(bench, o);
    add_solver_options(bench, o);
    bench->add_option("--sizes", o.sizes, "Batch sizes")->delimiter(',')->check(CLI::PositiveNumber);
    bench->add_option("--workers", o.worker_counts, "Worker counts (default: 1, 2, 4, ... up to the core count)")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    bench->add_option("--out", o.out, "Output file (default: stdout)");
    bench->add_flag("-q,--quiet", o.quiet, "No progress lines on stderr");

    CLI::App* convert = app.add_subcommand("convert", "Rewrite a network as canonical gridbatch JSON");
    add_case_options(convert, o);
    convert->add_option("--out", o.out, "Output file (default: stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err);
        }
        err << "error[E_CONFIG]: " << e.what() << '\n';
        return kExitInput;
    }
    if (verify->parsed() && !verify->count("--format")) {
        o.format = "text";
    }
    if (verify->parsed() && !verify->count("--batch")) {
        o.batch = 0;
    }

    try {
        if (solve->parsed()) {
            return cmd_solve(o, out, err);
        }
        if (verify->parsed()) {
            return cmd_verify(o, out, err);
        }
        if (bench->parsed()) {
            return cmd_bench(o, out, err);
        }
        return cmd_convert(o, out, err);
    } catch (const CliError& e) {
        err << "error[" << e.code() << "]: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::invalid_argument& e) {
        err << "error[E_CONFIG]: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error[E_INTERNAL]: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace gridbatch::cli
