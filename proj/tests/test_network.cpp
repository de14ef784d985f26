#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "gridbatch/error.hpp"
#include "gridbatch/network/matpower.hpp"
#include "gridbatch/network/network_json.hpp"
#include "gridbatch/network/partition.hpp"
#include "gridbatch/network/ybus.hpp"
#include "oracles.hpp"

using namespace gridbatch;
using namespace gridbatch::network;

namespace {

constexpr const char* kThreeBus = R"(function mpc = three
%% small test case
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1.02	5	230	1	1.1	0.9;
	2	2	50	10	0	19	1	1	0	230	1	1.1	0.9;
	3	1	90	30	2	-4	1	1	0	230	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	300	-300	1.02	100	1	250	10	0	0	0	0	0	0	0	0	0	0	0;
	2	60	0	300	-300	1.01	100	1	250	10	0	0	0	0	0	0	0	0	0	0	0;
	2	20	0	300	-300	1.01	100	1	250	10	0	0	0	0	0	0	0	0	0	0	0;
	2	99	0	300	-300	1.01	100	0	250	10	0	0	0	0	0	0	0	0	0	0	0;
];
mpc.branch = [
	1	2	0.01	0.1	0.02	250	250	250	0	0	1	-360	360;
	2	3	0.02	0.2	0.04	250	250	250	0.98	3	1	-360	360;
	1	3	0.03	0.3	0	250	250	250	0	0	0	-360	360;
];
mpc.gencost = [
	2	0	0	3	0.01	40	0;
];
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto p = s.find(from);
    REQUIRE(p != std::string::npos);
    return s.replace(p, from.size(), to);
}

}  // namespace

TEST_CASE("matpower case is read in per-unit with radians") {
    std::vector<std::string> warnings;
    const TransmissionNetwork net = parse_matpower_case(kThreeBus, &warnings);
    CHECK(net.name == "three");
    CHECK(net.base_mva == 100.0);
    REQUIRE(net.buses.size() == 3);
    CHECK(net.buses[0].kind == BusKind::Slack);
    CHECK(net.buses[0].v_set == 1.02);
    CHECK(net.buses[0].theta_set == doctest::Approx(5.0 * std::numbers::pi / 180.0));
    CHECK(net.buses[1].kind == BusKind::PV);
    CHECK(net.buses[1].p_load == doctest::Approx(0.5));
    CHECK(net.buses[1].q_load == doctest::Approx(0.1));
    CHECK(net.buses[1].p_gen == doctest::Approx(0.8));  // out-of-service unit ignored
    CHECK(net.buses[1].v_set == 1.01);
    CHECK(net.buses[1].bs == doctest::Approx(0.19));
    CHECK(net.buses[2].kind == BusKind::PQ);
    CHECK(net.buses[2].gs == doctest::Approx(0.02));
    CHECK(net.buses[2].bs == doctest::Approx(-0.04));
    REQUIRE(net.branches.size() == 3);
    CHECK(net.branches[0].tap == 1.0);
    CHECK(net.branches[1].tap == 0.98);
    CHECK(net.branches[1].shift == doctest::Approx(3.0 * std::numbers::pi / 180.0));
    CHECK_FALSE(net.branches[2].status);
    bool gencost_warned = false;
    for (const auto& w : warnings) {
        gencost_warned = gencost_warned || w.find("gencost") != std::string::npos;
    }
    CHECK(gencost_warned);
}

TEST_CASE("a PV bus without an in-service generator becomes PQ") {
    const std::string text = replace(kThreeBus, "\t2\t60\t0\t300\t-300\t1.01\t100\t1", "\t2\t60\t0\t300\t-300\t1.01\t100\t0");
    const std::string text2 = replace(text, "\t2\t20\t0\t300\t-300\t1.01\t100\t1", "\t2\t20\t0\t300\t-300\t1.01\t100\t0");
    std::vector<std::string> warnings;
    const TransmissionNetwork net = parse_matpower_case(text2, &warnings);
    CHECK(net.buses[1].kind == BusKind::PQ);
    CHECK(net.buses[1].v_set == 1.0);
    CHECK_FALSE(warnings.empty());
}

TEST_CASE("matpower parse errors carry the line number") {
    SUBCASE("short bus row") {
        const std::string bad = replace(kThreeBus, "1\t1.02\t5\t230\t1\t1.1\t0.9;", "1.02;");
        try {
            parse_matpower_case(bad);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 6);
        }
    }
    SUBCASE("isolated bus type") {
        CHECK_THROWS_AS(parse_matpower_case(replace(kThreeBus, "3\t1\t90", "3\t4\t90")), ParseError);
    }
    SUBCASE("two slack buses") {
        CHECK_THROWS_AS(parse_matpower_case(replace(kThreeBus, "3\t1\t90", "3\t3\t90")), ParseError);
    }
    SUBCASE("no slack bus") {
        CHECK_THROWS_AS(parse_matpower_case(replace(kThreeBus, "1\t3\t0", "1\t2\t0")), ParseError);
    }
    SUBCASE("branch to an unknown bus") {
        CHECK_THROWS_AS(parse_matpower_case(replace(kThreeBus, "1\t3\t0.03", "1\t7\t0.03")), ParseError);
    }
    SUBCASE("duplicate bus id") {
        CHECK_THROWS_AS(parse_matpower_case(replace(kThreeBus, "3\t1\t90", "2\t1\t90")), ParseError);
    }
    SUBCASE("non-numeric value") {
        CHECK_THROWS_AS(parse_matpower_case(replace(kThreeBus, "0.01\t0.1", "0.01\tx")), ParseError);
    }
    SUBCASE("conflicting generator set-points") {
        CHECK_THROWS_AS(parse_matpower_case(replace(kThreeBus, "2\t20\t0\t300\t-300\t1.01", "2\t20\t0\t300\t-300\t1.03")),
                        ParseError);
    }
}

TEST_CASE("structural validation") {
    TransmissionNetwork net = parse_matpower_case(kThreeBus);
    SUBCASE("island") {
        net.branches[0].status = false;
        net.branches[1].status = false;
        CHECK_THROWS_AS(validate(net), NetworkError);
    }
    SUBCASE("zero impedance") {
        net.branches[0].r = 0.0;
        net.branches[0].x = 0.0;
        CHECK_THROWS_AS(validate(net), NetworkError);
    }
    SUBCASE("non-positive tap") {
        net.branches[1].tap = 0.0;
        CHECK_THROWS_AS(validate(net), NetworkError);
    }
    SUBCASE("empty") {
        CHECK_THROWS_AS(validate(TransmissionNetwork{}), NetworkError);
    }
}

TEST_CASE("canonical json round trip reproduces the network") {
    for (const char* file : {"transmission/case118.m", "transmission/case1354pegase.m"}) {
        const TransmissionNetwork net = parse_matpower_case(oracle::read_data(file));
        const std::string text = network_to_json(net);
        const TransmissionNetwork back = network_from_json(text);
        CHECK(back == net);
        CHECK(network_to_json(back) == text);
    }
}

TEST_CASE("json errors name the offending path") {
    const TransmissionNetwork net = parse_matpower_case(kThreeBus);
    const std::string text = network_to_json(net);
    const std::string bad = replace(text, "\"kind\": \"pv\"", "\"kind\": \"swing\"");
    try {
        network_from_json(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("$.buses[1].kind") != std::string::npos);
    }
    CHECK_THROWS_AS(network_from_json("{\"schema\": \"other/1\"}"), ParseError);
    CHECK_THROWS_AS(network_from_json("{not json"), ParseError);
}

TEST_CASE("two-bus y-bus is [[y, -y], [-y, y]] plus charging") {
    TransmissionNetwork net;
    net.buses = {{1, BusKind::Slack}, {2, BusKind::PQ}};
    net.branches = {{1, 2, 0.0, 0.5, 0.2}};
    const AdmittanceMatrix y = build_ybus(net);
    const auto g = linalg::to_dense(y.g);
    const auto b = linalg::to_dense(y.b);
    CHECK(g == std::vector<double>(4, 0.0));
    CHECK(b[0] == doctest::Approx(-2.0 + 0.1));
    CHECK(b[1] == doctest::Approx(2.0));
    CHECK(b[2] == doctest::Approx(2.0));
    CHECK(b[3] == doctest::Approx(-2.0 + 0.1));
}

TEST_CASE("y-bus matches the dense pi-model builder") {
    for (const char* file : {"transmission/case118.m", "transmission/case1354pegase.m"}) {
        const TransmissionNetwork net = parse_matpower_case(oracle::read_data(file));
        const AdmittanceMatrix y = build_ybus(net);
        const auto ref = oracle::ybus(net);
        const auto g = linalg::to_dense(y.g);
        const auto b = linalg::to_dense(y.b);
        double dev = 0.0;
        double scale = 0.0;
        for (std::size_t k = 0; k < ref.a.size(); ++k) {
            dev = std::max({dev, std::abs(g[k] - ref.a[k].real()), std::abs(b[k] - ref.a[k].imag())});
            scale = std::max(scale, std::abs(ref.a[k]));
        }
        CHECK(dev <= 1e-12 * scale);
        const YbusCsr csr = to_csr(y);
        CHECK(csr.row_ptr.back() == static_cast<Index>(csr.col_idx.size()));
    }
}

TEST_CASE("phase shifter makes the y-bus non-symmetric") {
    const TransmissionNetwork net = parse_matpower_case(kThreeBus);
    const auto b = linalg::to_dense(build_ybus(net).b);
    CHECK(b[1 * 3 + 2] != doctest::Approx(b[2 * 3 + 1]));
}

TEST_CASE("partition orders pv before pq and maps offsets") {
    const TransmissionNetwork net = parse_matpower_case(kThreeBus);
    const BusPartition p = partition_buses(net);
    CHECK(p.slack == std::vector<Index>{0});
    CHECK(p.theta_block == std::vector<Index>{1, 2});
    CHECK(p.q_block == std::vector<Index>{2});
    CHECK(p.theta_pos == std::vector<Index>{-1, 0, 1});
    CHECK(p.q_pos == std::vector<Index>{-1, -1, 0});
    CHECK(p.n_state() == 3);

    const PartitionedYViews v = extract_partitioned_views(build_ybus(net), p);
    const auto y = oracle::ybus(net);
    const auto bp = linalg::to_dense(v.b_prime);
    CHECK(bp[0] == doctest::Approx(-y(1, 1).imag()));
    CHECK(bp[1] == doctest::Approx(-y(1, 2).imag()));
    CHECK(bp[2] == doctest::Approx(-y(2, 1).imag()));
    CHECK(linalg::to_dense(v.b_dprime)[0] == doctest::Approx(-y(2, 2).imag()));
    const auto gq = linalg::to_dense(v.g_qtheta);
    CHECK(gq[0] == doctest::Approx(-y(2, 1).real()));
    CHECK(gq[1] == doctest::Approx(-y(2, 2).real()));

    TransmissionNetwork two = net;
    two.buses[2].kind = BusKind::Slack;
    CHECK_THROWS_AS(partition_buses(two), NetworkError);
}
