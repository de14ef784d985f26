#pragma once

#include <vector>

#include "gridbatch/linalg/sparse.hpp"
#include "gridbatch/network/transmission_network.hpp"

namespace gridbatch::network {

using linalg::Index;

/// Y_bus = G + jB, bus order as in TransmissionNetwork::buses. Both parts are
/// canonical (row-major, duplicates summed) with exact zeros removed.
struct AdmittanceMatrix {
    Index n = 0;
    linalg::SparseCoo g;
    linalg::SparseCoo b;
};

/// Pi-model assembly of in-service branches plus bus shunts. Throws
/// NetworkError for an in-service branch with r = x = 0.
AdmittanceMatrix build_ybus(const TransmissionNetwork& net);

/// G and B on the union of their patterns, row-compressed, for the solver
/// kernels. Missing entries of either part are stored as 0.
struct YbusCsr {
    Index n = 0;
    std::vector<Index> row_ptr;
    std::vector<Index> col_idx;
    std::vector<double> g;
    std::vector<double> b;
};

YbusCsr to_csr(const AdmittanceMatrix& y);

}  // namespace gridbatch::network
