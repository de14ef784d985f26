#include "gridbatch/distribution/ybus3.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::distribution {

namespace {

void check_finite(const CMatrix& m, const std::string& what) {
    for (const cd& v : m.data) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw NetworkError(fmt::format("{}: non-finite admittance entry", what));
        }
    }
}

}  // namespace

ComplexSparse build_three_phase_ybus(const ThreePhaseNetwork& net) {
    const auto n = static_cast<Index>(net.nodes.size());
    std::vector<Eigen::Triplet<cd, int>> trips;
    auto add_block = [&](const std::vector<Index>& rows, const std::vector<Index>& cols, const CMatrix& m, double sign) {
        for (Index r = 0; r < m.rows; ++r) {
            for (Index c = 0; c < m.cols; ++c) {
                const cd v = m(r, c);
                if (v != cd(0.0)) {
                    trips.emplace_back(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)], sign * v);
                }
            }
        }
    };

    for (const LineBlock& l : net.lines) {
        check_finite(l.y_series, l.name);
        Eigen::MatrixXcd ys(l.y_series.rows, l.y_series.cols);
        for (Index r = 0; r < ys.rows(); ++r) {
            for (Index c = 0; c < ys.cols(); ++c) {
                ys(r, c) = l.y_series(r, c);
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(ys);
        if (lu.rank() < ys.rows()) {
            throw NetworkError(fmt::format("{}: singular series admittance block", l.name));
        }
        add_block(l.from, l.from, l.y_series, 1.0);
        add_block(l.to, l.to, l.y_series, 1.0);
        add_block(l.from, l.to, l.y_series, -1.0);
        add_block(l.to, l.from, l.y_series, -1.0);
        if (!l.y_shunt_from.empty()) {
            check_finite(l.y_shunt_from, l.name);
            add_block(l.from, l.from, l.y_shunt_from, 1.0);
        }
        if (!l.y_shunt_to.empty()) {
            check_finite(l.y_shunt_to, l.name);
            add_block(l.to, l.to, l.y_shunt_to, 1.0);
        }
    }
    for (const PrimitiveBlock& e : net.elements) {
        check_finite(e.y, e.name);
        add_block(e.nodes, e.nodes, e.y, 1.0);
    }

    ComplexSparse y(n, n);
    y.setFromTriplets(trips.begin(), trips.end());
    y.makeCompressed();
    return y;
}

}  // namespace gridbatch::distribution
