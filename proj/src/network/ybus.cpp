#include "gridbatch/network/ybus.hpp"

#include <complex>

#include <fmt/format.h>

#include "gridbatch/error.hpp"

namespace gridbatch::network {

AdmittanceMatrix build_ybus(const TransmissionNetwork& net) {
    using cd = std::complex<double>;
    const auto idx = bus_index(net);
    const auto n = static_cast<Index>(net.buses.size());
    linalg::SparseCoo g(n, n);
    linalg::SparseCoo b(n, n);
    auto add = [&](Index r, Index c, cd v) {
        g.push(r, c, v.real());
        b.push(r, c, v.imag());
    };

    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const BranchRecord& br = net.branches[k];
        if (!br.status) {
            continue;
        }
        if (br.r == 0.0 && br.x == 0.0) {
            throw NetworkError(fmt::format("branch {} ({}-{}): zero series impedance", k + 1, br.from, br.to));
        }
        const auto f = static_cast<Index>(idx.at(br.from));
        const auto t = static_cast<Index>(idx.at(br.to));
        const cd ys = 1.0 / cd(br.r, br.x);
        const cd ych(0.0, br.b_ch / 2.0);
        const cd a = std::polar(br.tap, br.shift);
        add(f, f, (ys + ych) / (br.tap * br.tap));
        add(t, t, ys + ych);
        add(f, t, -ys / std::conj(a));
        add(t, f, -ys / a);
    }
    for (Index i = 0; i < n; ++i) {
        const BusRecord& bus = net.buses[static_cast<std::size_t>(i)];
        if (bus.gs != 0.0 || bus.bs != 0.0) {
            add(i, i, cd(bus.gs, bus.bs));
        }
    }

    AdmittanceMatrix y;
    y.n = n;
    y.g = linalg::canonicalize(g, true);
    y.b = linalg::canonicalize(b, true);
    return y;
}

YbusCsr to_csr(const AdmittanceMatrix& y) {
    // Merge the two canonical (row-major sorted) triplet lists.
    YbusCsr out;
    out.n = y.n;
    out.row_ptr.assign(static_cast<std::size_t>(y.n) + 1, 0);
    std::size_t i = 0;
    std::size_t j = 0;
    const auto& g = y.g;
    const auto& b = y.b;
    while (i < g.nnz() || j < b.nnz()) {
        bool take_g = j >= b.nnz();
        bool take_b = i >= g.nnz();
        if (!take_g && !take_b) {
            const auto kg = std::pair(g.row_idx[i], g.col_idx[i]);
            const auto kb = std::pair(b.row_idx[j], b.col_idx[j]);
            take_g = kg <= kb;
            take_b = kb <= kg;
        }
        const Index r = take_g ? g.row_idx[i] : b.row_idx[j];
        out.col_idx.push_back(take_g ? g.col_idx[i] : b.col_idx[j]);
        out.g.push_back(take_g ? g.vals[i++] : 0.0);
        out.b.push_back(take_b ? b.vals[j++] : 0.0);
        ++out.row_ptr[static_cast<std::size_t>(r) + 1];
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(y.n); ++r) {
        out.row_ptr[r + 1] += out.row_ptr[r];
    }
    return out;
}

}  // namespace gridbatch::network
