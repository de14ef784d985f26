#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gridbatch/error.hpp"
#include "gridbatch/linalg/block_factor.hpp"
#include "gridbatch/linalg/gmres.hpp"
#include "gridbatch/linalg/sparse.hpp"
#include "oracles.hpp"

using namespace gridbatch;
using namespace gridbatch::linalg;

namespace {

/// Random diagonally dominant sparse matrix with about `per_row` entries per row.
SparseCoo random_sparse(Index n, int per_row, std::mt19937_64& rng, bool symmetric = false) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_int_distribution<Index> col(0, n - 1);
    SparseCoo a(n, n);
    for (Index r = 0; r < n; ++r) {
        for (int k = 0; k < per_row; ++k) {
            const Index c = col(rng);
            const double v = val(rng);
            a.push(r, c, v);
            if (symmetric) {
                a.push(c, r, v);
            }
        }
        a.push(r, r, 2.0 * per_row + 1.0);
    }
    return a;
}

oracle::Dense<double> dense_of(const SparseCoo& a) {
    oracle::Dense<double> d(a.rows);
    d.a = to_dense(a);
    return d;
}

}  // namespace

TEST_CASE("canonicalize sums duplicates and sorts row-major") {
    SparseCoo a(3, 3);
    a.push(2, 1, 1.0);
    a.push(0, 2, 4.0);
    a.push(2, 1, 2.0);
    a.push(1, 1, 5.0);
    a.push(1, 1, -5.0);
    const SparseCoo c = canonicalize(a);
    REQUIRE(c.nnz() == 3);
    CHECK(c.row_idx == std::vector<Index>{0, 1, 2});
    CHECK(c.col_idx == std::vector<Index>{2, 1, 1});
    CHECK(c.vals == std::vector<double>{4.0, 0.0, 3.0});
    const SparseCoo dropped = canonicalize(a, true);
    CHECK(dropped.nnz() == 2);
}

TEST_CASE("coo validation rejects out-of-range and ragged input") {
    SparseCoo a(2, 2);
    a.push(0, 2, 1.0);
    CHECK_THROWS_AS(a.validate(), DimensionError);
    SparseCoo b(2, 2);
    b.row_idx = {0};
    CHECK_THROWS_AS(b.validate(), DimensionError);
}

TEST_CASE("csr conversion and spmv agree with the dense product") {
    std::mt19937_64 rng(7);
    const SparseCoo a = random_sparse(40, 4, rng);
    const SparseCsr csr = coo_to_csr(a);
    CHECK(csr.row_ptr.size() == 41);
    for (Index r = 0; r < csr.rows; ++r) {
        for (Index k = csr.row_ptr[r] + 1; k < csr.row_ptr[r + 1]; ++k) {
            CHECK(csr.col_idx[k - 1] < csr.col_idx[k]);
        }
    }
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(40);
    for (double& v : x) {
        v = u(rng);
    }
    const auto y = spmv(csr, x);
    const auto ref = oracle::matvec(dense_of(a), x);
    CHECK(oracle::max_abs_diff(y, ref) < 1e-13);
    CHECK(csr.at(0, 0) == doctest::Approx(dense_of(a)(0, 0)));
    CHECK_THROWS_AS(spmv(csr, std::vector<double>(39)), DimensionError);
}

TEST_CASE("regularized factorization solves (A + eps I) x = b") {
    std::mt19937_64 rng(11);
    for (FactorKind kind : {FactorKind::Dense, FactorKind::Sparse, FactorKind::Auto}) {
        const SparseCoo a = random_sparse(60, 3, rng, true);
        const double eps = 1e-3;
        const BlockFactor f = factorize_regularized(a, eps, kind);
        CHECK(f.dim() == 60);
        CHECK(f.epsilon() == eps);
        std::vector<double> b(60);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (double& v : b) {
            v = u(rng);
        }
        auto m = dense_of(a);
        for (int i = 0; i < m.n; ++i) {
            m(i, i) += eps;
        }
        const auto x = f.solve(b);
        CHECK(oracle::max_abs_diff(x, oracle::solve(m, b)) < 1e-12);
    }
}

TEST_CASE("factorization errors") {
    CHECK_THROWS_AS(factorize_regularized(SparseCoo(2, 3), 0.0), DimensionError);
    SparseCoo singular(2, 2);
    singular.push(0, 0, 1.0);
    singular.push(0, 1, 1.0);
    singular.push(1, 0, 1.0);
    singular.push(1, 1, 1.0);
    CHECK_THROWS_AS(factorize_regularized(singular, 0.0, FactorKind::Dense), NumericalError);
    CHECK_THROWS_AS(factorize_regularized(singular, 0.0, FactorKind::Sparse), NumericalError);
    CHECK_NOTHROW(factorize_regularized(singular, 1e-3, FactorKind::Dense));
}

TEST_CASE("gmres on the identity converges in one step") {
    const std::vector<double> b{1.0, -2.0, 3.0};
    const auto id = identity_map();
    const GmresResult r = gmres(id, id, b);
    CHECK(r.stats.converged);
    CHECK(r.stats.status == GmresStatus::Converged);
    CHECK(r.stats.iterations == 1);
    CHECK(oracle::max_abs_diff(r.x, b) < 1e-15);
}

TEST_CASE("gmres with the exact inverse as preconditioner needs one step") {
    std::mt19937_64 rng(3);
    const SparseCoo a = random_sparse(30, 4, rng);
    const SparseCsr csr = coo_to_csr(a);
    const BlockFactor f = factorize_regularized(a, 0.0, FactorKind::Dense);
    std::vector<double> b(30, 1.0);
    const GmresResult r = gmres([&](auto in, auto out) { spmv(csr, in, out); },
                                [&](auto in, auto out) {
                                    std::copy(in.begin(), in.end(), out.begin());
                                    f.solve_in_place(out);
                                },
                                b);
    CHECK(r.stats.converged);
    CHECK(r.stats.iterations == 1);
}

TEST_CASE("gmres solves a nonsymmetric system and its residual estimate is monotone") {
    std::mt19937_64 rng(5);
    const SparseCoo a = random_sparse(80, 5, rng);
    const SparseCsr csr = coo_to_csr(a);
    std::vector<double> b(80);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : b) {
        v = u(rng);
    }
    GmresOptions opts;
    opts.tol = 1e-12;
    const GmresResult r = gmres([&](auto in, auto out) { spmv(csr, in, out); }, identity_map(), b, opts);
    REQUIRE(r.stats.converged);
    CHECK(oracle::max_abs_diff(r.x, oracle::solve(dense_of(a), b)) < 1e-10);
    CHECK(r.stats.final_relres <= 1e-12);
    for (std::size_t k = 1; k < r.stats.residual_history.size(); ++k) {
        CHECK(r.stats.residual_history[k] <= r.stats.residual_history[k - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("gmres on a diagonal with k distinct values converges within k steps") {
    const std::vector<double> d{1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0};
    std::vector<double> b(d.size(), 1.0);
    const GmresResult r = gmres(
        [&](auto in, auto out) {
            for (std::size_t i = 0; i < d.size(); ++i) {
                out[i] = d[i] * in[i];
            }
        },
        identity_map(), b, {1e-13, 60, 1});
    CHECK(r.stats.converged);
    CHECK(r.stats.iterations <= 4);
}

TEST_CASE("gmres reports max iterations without throwing") {
    std::mt19937_64 rng(9);
    const SparseCoo a = random_sparse(100, 8, rng);
    const SparseCsr csr = coo_to_csr(a);
    std::vector<double> b(100, 1.0);
    const GmresResult r = gmres([&](auto in, auto out) { spmv(csr, in, out); }, identity_map(), b, {1e-14, 2, 2});
    CHECK_FALSE(r.stats.converged);
    CHECK(r.stats.status == GmresStatus::MaxIterations);
    CHECK(r.stats.iterations == 4);
    CHECK(r.stats.cycles == 2);
}

TEST_CASE("gmres flags non-finite operator output") {
    std::vector<double> b{1.0, 1.0};
    const GmresResult r = gmres(
        [](auto, auto out) {
            out[0] = std::numeric_limits<double>::quiet_NaN();
            out[1] = 0.0;
        },
        identity_map(), b);
    CHECK(r.stats.status == GmresStatus::NonFinite);
    CHECK_FALSE(r.stats.converged);
    CHECK(std::string(to_string(GmresStatus::NonFinite)) == "non_finite");
}

TEST_CASE("gmres with a zero right-hand side returns zero") {
    std::vector<double> b(4, 0.0);
    const auto id = identity_map();
    const GmresResult r = gmres(id, id, b);
    CHECK(r.stats.converged);
    CHECK(oracle::norm_inf(r.x) == 0.0);
}
