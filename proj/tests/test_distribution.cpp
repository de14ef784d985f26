#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "gridbatch/distribution/reference_csv.hpp"
#include "gridbatch/distribution/zbus.hpp"
#include "gridbatch/error.hpp"
#include "oracles.hpp"

using namespace gridbatch;
using namespace gridbatch::distribution;
using nlohmann::json;

namespace {

json cmat(std::initializer_list<std::initializer_list<cd>> rows) {
    json re = json::array();
    json im = json::array();
    for (const auto& row : rows) {
        json r = json::array();
        json i = json::array();
        for (const cd& v : row) {
            r.push_back(v.real());
            i.push_back(v.imag());
        }
        re.push_back(r);
        im.push_back(i);
    }
    return {{"re", re}, {"im", im}};
}

json node(const std::string& bus, const std::string& phase) {
    return {{"id", bus + "." + std::to_string(phase[0] - 'a' + 1)}, {"bus", bus}, {"phase", phase}, {"v_base_kv", 1.0}};
}

/// Slack s.1 -- line y -- n.1, optional wye load s at n.1.
json two_node(cd y, cd s, cd v_slack = 1.0) {
    return {{"schema", "gridbatch.distribution/1"},
            {"name", "two"},
            {"s_base_mva", 1.0},
            {"nodes", {node("s", "a"), node("n", "a")}},
            {"slack", {{{"node", "s.1"}, {"v", {v_slack.real(), v_slack.imag()}}}}},
            {"lines", {{{"name", "l"}, {"from", {"s.1"}}, {"to", {"n.1"}}, {"y_series", cmat({{y}})}}}},
            {"elements", json::array()},
            {"loads", {{{"name", "ld"}, {"kind", "wye"}, {"nodes", {"n.1"}}, {"s", {s.real(), s.imag()}}}}}};
}

ThreePhaseNetwork parse(const json& j) { return parse_distribution_json(j.dump()); }

const ThreePhaseNetwork& ieee13() {
    static const ThreePhaseNetwork net = parse_distribution_json(oracle::read_data("distribution/ieee13.json"));
    return net;
}

const ThreePhaseNetwork& ieee123() {
    static const ThreePhaseNetwork net = parse_distribution_json(oracle::read_data("distribution/ieee123.json"));
    return net;
}

oracle::Dense<cd> dense_of(const ComplexSparse& y) {
    oracle::Dense<cd> d(static_cast<int>(y.rows()));
    for (int r = 0; r < y.outerSize(); ++r) {
        for (ComplexSparse::InnerIterator it(y, r); it; ++it) {
            d(r, static_cast<int>(it.col())) = it.value();
        }
    }
    return d;
}

double max_abs(const oracle::Dense<cd>& m) {
    double s = 0.0;
    for (const cd& v : m.a) {
        s = std::max(s, std::abs(v));
    }
    return s;
}

}  // namespace

TEST_CASE("single-phase line gives [[y, -y], [-y, y]]") {
    const cd y(2.0, -5.0);
    const auto d = dense_of(build_three_phase_ybus(parse(two_node(y, 0.0))));
    CHECK(d(0, 0) == y);
    CHECK(d(0, 1) == -y);
    CHECK(d(1, 0) == -y);
    CHECK(d(1, 1) == y);
}

TEST_CASE("three-phase y-bus matches the dense stamping builder") {
    for (const ThreePhaseNetwork* net : {&ieee13(), &ieee123()}) {
        const auto lib = dense_of(build_three_phase_ybus(*net));
        const auto ref = oracle::ybus3(*net);
        double dev = 0.0;
        for (std::size_t k = 0; k < ref.a.size(); ++k) {
            dev = std::max(dev, std::abs(lib.a[k] - ref.a[k]));
        }
        CHECK(dev <= 1e-12 * max_abs(ref));
    }
}

TEST_CASE("distribution json errors name the path") {
    json j = two_node(1.0, 0.1);
    SUBCASE("unknown node") {
        j["lines"][0]["to"][0] = "x.1";
        try {
            parse(j);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("$.lines[0].to[0]") != std::string::npos);
        }
    }
    SUBCASE("wrong schema") {
        j["schema"] = "gridbatch.distribution/0";
        CHECK_THROWS_AS(parse(j), ParseError);
    }
    SUBCASE("duplicate node") {
        j["nodes"][1]["id"] = "s.1";
        CHECK_THROWS_AS(parse(j), ParseError);
    }
    SUBCASE("asymmetric series block") {
        j["nodes"].push_back(node("s", "b"));
        j["nodes"].push_back(node("n", "b"));
        j["lines"][0]["from"] = {"s.1", "s.2"};
        j["lines"][0]["to"] = {"n.1", "n.2"};
        j["lines"][0]["y_series"] = cmat({{1.0, 0.1}, {0.2, 1.0}});
        CHECK_THROWS_AS(parse(j), ParseError);
    }
    SUBCASE("delta across buses") {
        j["loads"][0] = {{"name", "d"}, {"kind", "delta"}, {"nodes", {"s.1", "n.1"}}, {"s", {0.1, 0.0}}};
        CHECK_THROWS_AS(parse(j), ParseError);
    }
    SUBCASE("bad load kind") {
        j["loads"][0]["kind"] = "zip";
        CHECK_THROWS_AS(parse(j), ParseError);
    }
}

TEST_CASE("distribution json round trip") {
    const std::string text = distribution_to_json(ieee13());
    const ThreePhaseNetwork back = parse_distribution_json(text);
    CHECK(distribution_to_json(back) == text);
    CHECK(back.nodes.size() == ieee13().nodes.size());
    CHECK(back.loads.size() == ieee13().loads.size());
}

TEST_CASE("scalar reduction: z = 1/y_nn and v0 = -y_ns v_s / y_nn") {
    const cd y(3.0, -4.0);
    const cd vs = std::polar(1.05, 0.1);
    const auto model = build_zbus_model(parse(two_node(y, 0.0, vs)));
    REQUIRE(model->dim() == 1);
    CHECK(std::abs(model->v0[0] - (y * vs / y)) < 1e-15);
    const std::vector<cd> w{cd(0.3, 0.7)};
    std::vector<cd> out(1);
    model->z_apply(w, out);
    CHECK(std::abs(out[0] - w[0] / y) < 1e-15);
}

TEST_CASE("z_apply inverts Y_NN") {
    const ThreePhaseNetwork& net = ieee13();
    const auto model = build_zbus_model(net);
    const auto y = oracle::ybus3(net);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    const auto n = static_cast<std::size_t>(model->dim());
    double ynorm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            row += std::abs(y(model->nonslack[r], model->nonslack[c]));
        }
        ynorm = std::max(ynorm, row);
    }
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<cd> b(n);
        for (cd& v : b) {
            v = cd(g(rng), g(rng));
        }
        std::vector<cd> x(n);
        model->z_apply(b, x);
        double xnorm = 0.0;
        double res = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            xnorm = std::max(xnorm, std::abs(x[r]));
            cd yx = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                yx += y(model->nonslack[r], model->nonslack[c]) * x[c];
            }
            res = std::max(res, std::abs(yx - b[r]));
        }
        CHECK(res <= 1e-12 * ynorm * xnorm);
    }
}

TEST_CASE("no-load voltages equal a dense solve of Y_NN v0 = -Y_NS v_s") {
    const ThreePhaseNetwork& net = ieee13();
    const auto model = build_zbus_model(net);
    const auto y = oracle::ybus3(net);
    const int n = model->dim();
    oracle::Dense<cd> ynn(n);
    std::vector<cd> rhs(n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            ynn(r, c) = y(model->nonslack[r], model->nonslack[c]);
        }
        for (std::size_t s = 0; s < model->slack_nodes.size(); ++s) {
            rhs[r] -= y(model->nonslack[r], model->slack_nodes[s]) * model->v_slack[s];
        }
    }
    const auto v0 = oracle::solve(ynn, rhs);
    double dev = 0.0;
    for (int k = 0; k < n; ++k) {
        dev = std::max(dev, std::abs(v0[k] - model->v0[k]));
    }
    CHECK(dev < 1e-9);
}

TEST_CASE("an isolated node-phase makes Y_NN singular") {
    json j = two_node(1.0, 0.0);
    j["nodes"].push_back(node("iso", "a"));
    CHECK_THROWS_AS(build_zbus_model(parse(j)), NetworkError);
}

TEST_CASE("a load on the slack phase is rejected") {
    json j = two_node(1.0, 0.0);
    j["loads"][0]["nodes"][0] = "s.1";
    CHECK_THROWS_AS(build_zbus_model(parse(j)), NetworkError);
}

TEST_CASE("wye current injection is -conj(s / v)") {
    const auto model = build_zbus_model(parse(two_node(1.0, 0.0)));
    DistributionScenario sc{{cd(1.0, 0.0)}, {}};
    const auto i = current_injection(std::vector<cd>{1.0}, sc, *model);
    CHECK(i[0] == cd(-1.0, 0.0));
    sc.wye_powers[0] = 0.0;
    CHECK(current_injection(std::vector<cd>{cd(0.9, 0.1)}, sc, *model)[0] == cd(0.0, 0.0));
    sc.wye_powers[0] = 1.0;
    CHECK_THROWS_AS(current_injection(std::vector<cd>{cd(1e-7, 0.0)}, sc, *model), NumericalError);
}

TEST_CASE("delta current injection and conservation") {
    json j = two_node(1.0, 0.0);
    for (const char* ph : {"b", "c"}) {
        j["nodes"].push_back(node("s", ph));
        j["nodes"].push_back(node("n", ph));
    }
    j["lines"][0]["from"] = {"s.1", "s.2", "s.3"};
    j["lines"][0]["to"] = {"n.1", "n.2", "n.3"};
    j["lines"][0]["y_series"] = cmat({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
    j["slack"].push_back({{"node", "s.2"}, {"v", {-0.5, -std::sqrt(3.0) / 2.0}}});
    j["slack"].push_back({{"node", "s.3"}, {"v", {-0.5, std::sqrt(3.0) / 2.0}}});
    j["loads"][0] = {{"name", "ab"}, {"kind", "delta"}, {"nodes", {"n.1", "n.2"}}, {"s", {0.1, 0.0}}};
    const auto model = build_zbus_model(parse(j));
    REQUIRE(model->dim() == 3);
    const cd va = std::polar(1.0, 0.0);
    const cd vb = std::polar(1.0, -2.0 * std::numbers::pi / 3.0);
    const cd vc = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    const DistributionScenario sc{{}, {cd(0.1, 0.0)}};
    const auto i = current_injection(std::vector<cd>{va, vb, vc}, sc, *model);
    const cd line = std::conj(cd(0.1, 0.0) / (va - vb));
    CHECK(std::abs(i[0] + line) < 1e-15);
    CHECK(std::abs(i[1] - line) < 1e-15);
    CHECK(i[2] == cd(0.0, 0.0));
    CHECK(i[0] + i[1] == cd(0.0, 0.0));
    CHECK_THROWS_AS(current_injection(std::vector<cd>{va, va, vc}, sc, *model), NumericalError);
}

TEST_CASE("zero load converges to v0 after one sweep") {
    const auto model = build_zbus_model(ieee13());
    const std::vector<double> zero(model->load_base.size(), 0.0);
    const FixedPointResult r = zbus_iterate(*model, scaled_scenario(*model, zero));
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.v == model->v0);
    CHECK(r.residual_inf == 0.0);
}

TEST_CASE("two-node fixed point matches the closed-form quadratic") {
    const cd z(0.02, 0.06);
    const cd s(0.8, 0.3);
    const auto model = build_zbus_model(parse(two_node(1.0 / z, s)));
    FixedPointOptions opts;
    opts.tol = 1e-14;
    const FixedPointResult r = zbus_iterate(*model, base_scenario(*model), opts);
    REQUIRE(r.converged);
    // |V|^4 + (2(RP + XQ) - V0^2)|V|^2 + |Z|^2|S|^2 = 0, upper root; then
    // V = (|V|^2 + conj(Z) S) / conj(V0).
    const double b = 2.0 * (z.real() * s.real() + z.imag() * s.imag()) - 1.0;
    const double c = std::norm(z) * std::norm(s);
    const double v2 = (-b + std::sqrt(b * b - 4.0 * c)) / 2.0;
    const cd v = (v2 + std::conj(z) * s) / 1.0;
    CHECK(std::abs(r.v[0] - v) < 1e-12);
}

TEST_CASE("load-column and factorized application agree") {
    const auto model = build_zbus_model(ieee123());
    const DistributionScenario sc = base_scenario(*model);
    FixedPointOptions direct;
    direct.apply = ZApply::Factorized;
    const FixedPointResult a = zbus_iterate(*model, sc);
    const FixedPointResult b = zbus_iterate(*model, sc, direct);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    double dev = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) {
        dev = std::max(dev, std::abs(a.v[k] - b.v[k]));
    }
    CHECK(dev < 1e-9);
    CHECK(a.residual_inf <= 1e-6);
}

TEST_CASE("overload ends with a diagnostic instead of an exception") {
    const auto model = build_zbus_model(ieee13());
    const std::vector<double> heavy(model->load_base.size(), 60.0);
    const FixedPointResult r = zbus_iterate(*model, scaled_scenario(*model, heavy));
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("batched fixed point equals the sequential loop bitwise") {
    const auto model = build_zbus_model(ieee13());
    std::vector<DistributionScenario> scs;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.8, 1.2);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> m(model->load_base.size());
        for (double& x : m) {
            x = u(rng);
        }
        scs.push_back(scaled_scenario(*model, m));
    }
    const auto seq = batch_zbus_solve(*model, scs, 1);
    const auto par = batch_zbus_solve(*model, scs, 3);
    REQUIRE(seq.size() == scs.size());
    for (std::size_t k = 0; k < scs.size(); ++k) {
        CHECK(seq[k].v == par[k].v);
        CHECK(seq[k].v == zbus_iterate(*model, scs[k]).v);
        CHECK(seq[k].iterations == par[k].iterations);
    }
    std::vector<DistributionScenario> same(5, base_scenario(*model));
    const auto rep = batch_zbus_solve(*model, same, 2);
    for (const auto& r : rep) {
        CHECK(r.v == rep[0].v);
    }
}

TEST_CASE("scenario size mismatch") {
    const auto model = build_zbus_model(ieee13());
    CHECK_THROWS_AS(scaled_scenario(*model, std::vector<double>(2)), DimensionError);
    CHECK_THROWS_AS(zbus_iterate(*model, DistributionScenario{}), DimensionError);
}

TEST_CASE("reference csv parsing") {
    const auto rows = parse_reference_csv("node,vmag_pu,vang_deg\n632.1,0.98,-2.5\r\n632.2,1.01,-121\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].node == "632.2");
    CHECK(rows[1].vang_deg == -121.0);
    CHECK_THROWS_AS(parse_reference_csv("bus,vm,va\n"), ParseError);
    CHECK_THROWS_AS(parse_reference_csv(""), ParseError);
    try {
        parse_reference_csv("node,vmag_pu,vang_deg\na,1,0\nb,x,0\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_reference_csv("node,vmag_pu,vang_deg\na,1,0\na,1,0\n"), ParseError);
    CHECK_THROWS_AS(parse_reference_csv("node,vmag_pu,vang_deg\na,1\n"), ParseError);
    CHECK_THROWS_AS(parse_reference_csv("node,vmag_pu,vang_deg\na,nan,0\n"), ParseError);
}
