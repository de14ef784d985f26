#pragma once

#include <Eigen/SparseCore>

#include "gridbatch/distribution/three_phase_network.hpp"

namespace gridbatch::distribution {

using ComplexSparse = Eigen::SparseMatrix<cd, Eigen::RowMajor, int>;

/// Y over all node-phases (network node order). Each line contributes
/// [[Ys + Ysh_from, -Ys], [-Ys, Ys + Ysh_to]]; primitive blocks are added as
/// given. Throws NetworkError for a non-finite entry or a singular series block.
ComplexSparse build_three_phase_ybus(const ThreePhaseNetwork& net);

}  // namespace gridbatch::distribution
