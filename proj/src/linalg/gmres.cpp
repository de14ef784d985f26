#include "gridbatch/linalg/gmres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gridbatch/error.hpp"

namespace gridbatch::linalg {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// Stable Givens pair (c, s) with c*a + s*b = r, -s*a + c*b = 0.
void givens(double a, double b, double& c, double& s) {
    if (b == 0.0) {
        c = 1.0;
        s = 0.0;
    } else if (std::abs(b) > std::abs(a)) {
        const double t = a / b;
        s = 1.0 / std::sqrt(1.0 + t * t);
        c = s * t;
    } else {
        const double t = b / a;
        c = 1.0 / std::sqrt(1.0 + t * t);
        s = c * t;
    }
}

}  // namespace

const char* to_string(GmresStatus s) noexcept {
    switch (s) {
        case GmresStatus::Converged: return "converged";
        case GmresStatus::MaxIterations: return "max_iterations";
        case GmresStatus::Breakdown: return "breakdown";
        case GmresStatus::NonFinite: return "non_finite";
    }
    return "unknown";
}

LinearMap identity_map() {
    return [](std::span<const double> in, std::span<double> out) { std::copy(in.begin(), in.end(), out.begin()); };
}

GmresResult gmres(const LinearMap& apply_operator, const LinearMap& apply_precond, std::span<const double> rhs,
                  const GmresOptions& opts) {
    if (!(opts.tol > 0.0) || opts.restart < 1 || opts.max_outer < 1) {
        throw std::invalid_argument("gmres: tol > 0, restart >= 1 and max_outer >= 1 required");
    }
    const std::size_t n = rhs.size();
    const auto m = static_cast<std::size_t>(opts.restart);

    GmresResult out;
    out.x.assign(n, 0.0);
    GmresStats& st = out.stats;

    if (!all_finite(rhs)) {
        st.status = GmresStatus::NonFinite;
        st.final_relres = std::numeric_limits<double>::quiet_NaN();
        return out;
    }

    std::vector<double> r(n);
    std::vector<double> tmp(n);
    apply_precond(rhs, r);
    const double beta0 = norm2(r);
    if (!std::isfinite(beta0)) {
        st.status = GmresStatus::NonFinite;
        st.final_relres = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    if (beta0 == 0.0) {
        st.converged = true;
        st.status = GmresStatus::Converged;
        return out;
    }
    const double target = opts.tol * beta0;

    // Krylov basis, Hessenberg columns (packed column-major, (m+1) x m), rotations.
    std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
    std::vector<double> h((m + 1) * m);
    std::vector<double> cs(m), sn(m), g(m + 1), y(m);
    auto H = [&](std::size_t i, std::size_t j) -> double& { return h[j * (m + 1) + i]; };

    double beta = beta0;
    for (int cycle = 0; cycle < opts.max_outer; ++cycle) {
        st.cycles = cycle + 1;
        for (std::size_t i = 0; i < n; ++i) {
            basis[0][i] = r[i] / beta;
        }
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        std::size_t k_used = 0;
        bool breakdown = false;
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<double>& w = basis[j + 1];
            apply_operator(basis[j], tmp);
            apply_precond(tmp, w);
            ++st.iterations;
            if (!all_finite(w)) {
                st.status = GmresStatus::NonFinite;
                st.final_relres = std::numeric_limits<double>::quiet_NaN();
                return out;
            }
            const double w_norm_in = norm2(w);
            for (std::size_t i = 0; i <= j; ++i) {
                const double hij = dot(w, basis[i]);
                H(i, j) = hij;
                for (std::size_t q = 0; q < n; ++q) {
                    w[q] -= hij * basis[i][q];
                }
            }
            const double h_next = norm2(w);
            H(j + 1, j) = h_next;

            for (std::size_t i = 0; i < j; ++i) {
                const double a = H(i, j);
                const double b = H(i + 1, j);
                H(i, j) = cs[i] * a + sn[i] * b;
                H(i + 1, j) = -sn[i] * a + cs[i] * b;
            }
            givens(H(j, j), H(j + 1, j), cs[j], sn[j]);
            H(j, j) = cs[j] * H(j, j) + sn[j] * H(j + 1, j);
            H(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];

            const double est = std::abs(g[j + 1]);
            st.residual_history.push_back(est / beta0);
            k_used = j + 1;

            if (!(h_next > std::numeric_limits<double>::epsilon() * w_norm_in)) {
                breakdown = true;
                break;
            }
            for (std::size_t q = 0; q < n; ++q) {
                w[q] /= h_next;
            }
            if (est <= target) {
                break;
            }
        }

        // Back substitution on the rotated upper-triangular system.
        for (std::size_t i = k_used; i-- > 0;) {
            double s = g[i];
            for (std::size_t q = i + 1; q < k_used; ++q) {
                s -= H(i, q) * y[q];
            }
            y[i] = s / H(i, i);
        }
        for (std::size_t i = 0; i < k_used; ++i) {
            for (std::size_t q = 0; q < n; ++q) {
                out.x[q] += y[i] * basis[i][q];
            }
        }

        // True preconditioned residual for the convergence decision.
        apply_operator(out.x, tmp);
        for (std::size_t q = 0; q < n; ++q) {
            tmp[q] = rhs[q] - tmp[q];
        }
        apply_precond(tmp, r);
        beta = norm2(r);
        st.final_relres = beta / beta0;
        if (!std::isfinite(beta)) {
            st.status = GmresStatus::NonFinite;
            return out;
        }
        if (beta <= target) {
            st.converged = true;
            st.status = GmresStatus::Converged;
            return out;
        }
        if (breakdown) {
            st.status = GmresStatus::Breakdown;
            return out;
        }
    }
    st.status = GmresStatus::MaxIterations;
    return out;
}

}  // namespace gridbatch::linalg
