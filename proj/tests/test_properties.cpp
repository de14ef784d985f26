#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "gridbatch/distribution/ybus3.hpp"
#include "gridbatch/distribution/zbus.hpp"
#include "gridbatch/network/ybus.hpp"
#include "gridbatch/transmission/newton.hpp"
#include "gridbatch/transmission/power_equations.hpp"
#include "oracles.hpp"

using namespace gridbatch;

namespace {

/// Random connected meshed network: a spanning tree plus extra chords, a few
/// PV buses and light loads.
network::TransmissionNetwork random_network(std::mt19937_64& rng, bool shifts) {
    std::uniform_int_distribution<int> size(4, 30);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = size(rng);
    network::TransmissionNetwork net;
    net.name = "random";
    for (int i = 0; i < n; ++i) {
        network::BusRecord b;
        b.id = 10 + 3 * i;
        b.kind = i == 0 ? network::BusKind::Slack : (u(rng) < 0.25 ? network::BusKind::PV : network::BusKind::PQ);
        if (b.kind != network::BusKind::PQ) {
            b.v_set = 0.98 + 0.06 * u(rng);
        }
        if (b.kind == network::BusKind::PV) {
            b.p_gen = 0.3 * u(rng);
        }
        if (b.kind == network::BusKind::PQ) {
            b.p_load = 0.2 * u(rng);
            b.q_load = 0.08 * u(rng);
        }
        b.bs = u(rng) < 0.2 ? 0.05 * u(rng) : 0.0;
        net.buses.push_back(b);
    }
    auto branch = [&](int f, int t) {
        network::BranchRecord br;
        br.from = net.buses[f].id;
        br.to = net.buses[t].id;
        br.r = 0.002 + 0.02 * u(rng);
        br.x = 0.02 + 0.1 * u(rng);
        br.b_ch = 0.05 * u(rng);
        if (u(rng) < 0.2) {
            br.tap = 0.95 + 0.1 * u(rng);
            br.shift = shifts ? 0.05 * (u(rng) - 0.5) : 0.0;
        }
        net.branches.push_back(br);
    };
    for (int i = 1; i < n; ++i) {
        branch(std::uniform_int_distribution<int>(0, i - 1)(rng), i);
    }
    for (int k = 0; k < n / 3; ++k) {
        const int f = std::uniform_int_distribution<int>(0, n - 1)(rng);
        const int t = std::uniform_int_distribution<int>(0, n - 1)(rng);
        if (f != t) {
            branch(f, t);
        }
    }
    network::validate(net);
    return net;
}

}  // namespace

TEST_CASE("property: y-bus equals the dense builder and is symmetric without shifters") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 40; ++trial) {
        const bool shifts = trial % 2 == 1;
        const auto net = random_network(rng, shifts);
        const auto y = network::build_ybus(net);
        const auto ref = oracle::ybus(net);
        const auto g = linalg::to_dense(y.g);
        const auto b = linalg::to_dense(y.b);
        const int n = ref.n;
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                const std::size_t k = static_cast<std::size_t>(r) * n + c;
                CHECK(std::abs(g[k] - ref(r, c).real()) < 1e-10);
                CHECK(std::abs(b[k] - ref(r, c).imag()) < 1e-10);
                if (!shifts) {
                    CHECK(g[k] == g[static_cast<std::size_t>(c) * n + r]);
                    CHECK(b[k] == b[static_cast<std::size_t>(c) * n + r]);
                }
            }
        }
    }
}

TEST_CASE("property: newton agrees with the dense oracle on random networks") {
    std::mt19937_64 rng(202);
    int solved = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto model = transmission::build_transmission_model(random_network(rng, true));
        const auto sc = transmission::base_scenario(model->net, model->part);
        const auto r = transmission::newton_solve(*model, sc);
        const auto o = transmission::dense_newton_oracle(*model, sc);
        CHECK(r.converged == o.converged);
        if (r.converged && o.converged) {
            ++solved;
            CHECK(oracle::max_abs_diff(r.state.vmag, o.state.vmag) < 1e-10);
            CHECK(oracle::max_abs_diff(r.state.theta, o.state.theta) < 1e-10);
        }
    }
    CHECK(solved >= 35);
}

TEST_CASE("property: jvp matches central differences and the preconditioner inverts M") {
    std::mt19937_64 rng(303);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 25; ++trial) {
        const auto model = transmission::build_transmission_model(random_network(rng, true));
        const auto y = oracle::ybus(model->net);
        transmission::PolarState s = transmission::flat_start(model->net, model->part);
        for (auto& t : s.theta) {
            t += 0.1 * g(rng);
        }
        for (auto i : model->part.q_block) {
            s.vmag[i] = 1.0 + 0.05 * g(rng);
        }
        const auto sc = transmission::base_scenario(model->net, model->part);
        const auto x = transmission::pack(s, model->part);
        std::vector<double> d(x.size());
        for (double& v : d) {
            v = g(rng);
        }
        const auto jv = transmission::jacobian_vector_product(s, model->ycsr, model->part, d);
        const double h = 1e-6;
        std::vector<double> xp = x;
        std::vector<double> xm = x;
        for (std::size_t k = 0; k < x.size(); ++k) {
            xp[k] += h * d[k];
            xm[k] -= h * d[k];
        }
        const auto fp = oracle::trig_mismatch(y, model->part, s.theta, s.vmag, xp, sc.p_spec, sc.q_spec);
        const auto fm = oracle::trig_mismatch(y, model->part, s.theta, s.vmag, xm, sc.p_spec, sc.q_spec);
        for (std::size_t k = 0; k < jv.size(); ++k) {
            const double fd = (fp[k] - fm[k]) / (2.0 * h);
            CHECK(std::abs(jv[k] - fd) <= 1e-6 * (1.0 + std::abs(fd)));
        }

        const auto p = transmission::build_preconditioner(model->fd, s, model->part);
        const auto z = transmission::apply_preconditioner(p, d);
        const auto ref = oracle::solve(oracle::fd_matrix(y, model->part, s.vmag, model->fd->epsilon), d);
        CHECK(oracle::max_abs_diff(z, ref) <= 1e-10 * oracle::norm_inf(ref));
    }
}

TEST_CASE("property: random single-phase feeders satisfy the fixed-point and Kirchhoff checks") {
    using distribution::cd;
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = std::uniform_int_distribution<int>(2, 25)(rng);
        nlohmann::json j;
        j["schema"] = "gridbatch.distribution/1";
        j["name"] = "feeder";
        j["s_base_mva"] = 1.0;
        j["elements"] = nlohmann::json::array();
        j["loads"] = nlohmann::json::array();
        j["lines"] = nlohmann::json::array();
        for (int i = 0; i < n; ++i) {
            const std::string bus = "b" + std::to_string(i);
            j["nodes"].push_back({{"id", bus + ".1"}, {"bus", bus}, {"phase", "a"}, {"v_base_kv", 1.0}});
        }
        j["slack"] = {{{"node", "b0.1"}, {"v", {1.0, 0.0}}}};
        for (int i = 1; i < n; ++i) {
            const int parent = std::uniform_int_distribution<int>(0, i - 1)(rng);
            const cd y = 1.0 / cd(0.002 + 0.01 * u(rng), 0.004 + 0.02 * u(rng));
            j["lines"].push_back({{"name", "l" + std::to_string(i)},
                                  {"from", {"b" + std::to_string(parent) + ".1"}},
                                  {"to", {"b" + std::to_string(i) + ".1"}},
                                  {"y_series", {{"re", {{y.real()}}}, {"im", {{y.imag()}}}}}});
            j["loads"].push_back({{"name", "d" + std::to_string(i)},
                                  {"kind", "wye"},
                                  {"nodes", {"b" + std::to_string(i) + ".1"}},
                                  {"s", {0.05 * u(rng), 0.02 * u(rng)}}});
        }
        const auto net = distribution::parse_distribution_json(j.dump());
        const auto model = distribution::build_zbus_model(net);
        const auto sc = distribution::base_scenario(*model);
        const auto r = distribution::zbus_iterate(*model, sc);
        REQUIRE(r.converged);
        CHECK(r.residual_inf <= 1e-6);

        const auto ydense = oracle::ybus3(net);
        const auto i = distribution::current_injection(r.v, sc, *model);
        for (int row = 0; row < model->dim(); ++row) {
            const int node = model->nonslack[row];
            cd net_current = ydense(node, model->slack_nodes[0]) * model->v_slack[0];
            for (int c = 0; c < model->dim(); ++c) {
                net_current += ydense(node, model->nonslack[c]) * r.v[c];
            }
            CHECK(std::abs(net_current - i[row]) <= 1e-8);
        }
    }
}
