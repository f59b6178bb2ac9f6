#pragma once

// Symmetric eigensolver: Householder reduction to tridiagonal form followed
// by implicit QR sweeps with a Wilkinson shift.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"

namespace binbci {

struct EigenDecomposition
{
    /// Ascending.
    std::vector<double> eigenvalues;
    /// Column k is the unit eigenvector of eigenvalues[k]. Its largest-magnitude
    /// component is positive.
    Matrix eigenvectors;
};

namespace detail {

/// Reduces the symmetric matrix `a` in place to tridiagonal form
/// T = Qᵀ A Q and returns Q. On exit diag/offdiag hold T.
inline Matrix householder_tridiagonalize(Matrix& a, std::vector<double>& diag, std::vector<double>& offdiag)
{
    const std::size_t n = a.rows();
    Matrix q = Matrix::identity(n);
    std::vector<double> v(n), p(n), w(n), qv(n);

    for (std::size_t k = 0; k + 2 < n; ++k) {
        double sigma = 0.0;
        for (std::size_t i = k + 2; i < n; ++i) {
            sigma += a(i, k) * a(i, k);
        }
        if (sigma == 0.0) {
            continue;
        }
        const double x0 = a(k + 1, k);
        const double norm = std::sqrt(x0 * x0 + sigma);
        // v = x + sign(x0) ||x|| e1 avoids cancellation.
        const double v0 = x0 >= 0.0 ? x0 + norm : x0 - norm;
        std::fill(v.begin(), v.end(), 0.0);
        v[k + 1] = v0;
        for (std::size_t i = k + 2; i < n; ++i) {
            v[i] = a(i, k);
        }
        const double vnorm2 = v0 * v0 + sigma;
        const double beta = 2.0 / vnorm2;

        // A <- (I - beta v vᵀ) A (I - beta v vᵀ) on the trailing block.
        for (std::size_t i = k; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) {
                acc += a(i, j) * v[j];
            }
            p[i] = beta * acc;
        }
        double pv = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            pv += p[i] * v[i];
        }
        const double half = 0.5 * beta * pv;
        for (std::size_t i = k; i < n; ++i) {
            w[i] = p[i] - half * v[i];
        }
        for (std::size_t i = k; i < n; ++i) {
            for (std::size_t j = k; j < n; ++j) {
                a(i, j) -= v[i] * w[j] + w[i] * v[j];
            }
        }
        a(k + 1, k) = a(k, k + 1) = x0 >= 0.0 ? -norm : norm;
        for (std::size_t i = k + 2; i < n; ++i) {
            a(i, k) = a(k, i) = 0.0;
        }

        // Q <- Q (I - beta v vᵀ)
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) {
                acc += q(i, j) * v[j];
            }
            qv[i] = beta * acc;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                q(i, j) -= qv[i] * v[j];
            }
        }
    }

    diag.assign(n, 0.0);
    offdiag.assign(n > 0 ? n - 1 : 0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = a(i, i);
        if (i + 1 < n) {
            offdiag[i] = 0.5 * (a(i + 1, i) + a(i, i + 1));
        }
    }
    return q;
}

/// One implicit symmetric QR sweep with Wilkinson shift on the unreduced
/// block [lo, hi] of the tridiagonal (diag, offdiag). Rotations accumulate
/// into the columns of q.
inline void implicit_qr_sweep(std::vector<double>& d, std::vector<double>& e, std::size_t lo, std::size_t hi,
                              Matrix& q)
{
    const double delta = 0.5 * (d[hi - 1] - d[hi]);
    const double eh = e[hi - 1];
    double mu = d[hi];
    if (delta == 0.0) {
        mu -= std::abs(eh);
    } else {
        const double denom = delta + std::copysign(std::hypot(delta, eh), delta);
        mu -= (eh / denom) * eh;
    }

    double x = d[lo] - mu;
    double z = e[lo];
    const std::size_t n = q.rows();
    for (std::size_t k = lo; k < hi; ++k) {
        const double r = std::hypot(x, z);
        if (r == 0.0) {
            break;
        }
        // G = [[c, s], [-s, c]] in the (k, k+1) plane, Gᵀ (x, z)ᵀ = (r, 0)ᵀ.
        const double c = x / r;
        const double s = -z / r;
        if (k > lo) {
            e[k - 1] = r;
        }
        const double dk = d[k];
        const double dk1 = d[k + 1];
        const double ek = e[k];
        const double cs = c * s;
        d[k] = c * c * dk - 2.0 * cs * ek + s * s * dk1;
        d[k + 1] = s * s * dk + 2.0 * cs * ek + c * c * dk1;
        e[k] = cs * (dk - dk1) + (c * c - s * s) * ek;
        if (k + 1 < hi) {
            z = -s * e[k + 1];
            e[k + 1] = c * e[k + 1];
        }
        x = e[k];

        for (std::size_t i = 0; i < n; ++i) {
            const double qk = q(i, k);
            const double qk1 = q(i, k + 1);
            q(i, k) = c * qk - s * qk1;
            q(i, k + 1) = s * qk + c * qk1;
        }
    }
}

} // namespace detail

/// Full eigendecomposition of a real symmetric matrix.
///
/// Deterministic: no randomisation, fixed sweep order, eigenvalues sorted
/// ascending with ties kept in order of appearance on the diagonal, and each
/// eigenvector's largest-magnitude component made positive. Throws
/// ConvergenceError when an eigenvalue fails to deflate within 30·n sweeps.
inline EigenDecomposition eigendecompose(const Matrix& input)
{
    detail::require(input.is_square(), "eigendecompose requires a square matrix");
    detail::require(all_finite(input), "eigendecompose requires finite entries");
    const std::size_t n = input.rows();
    const double scale = max_abs(input);
    if (n == 0) {
        return {};
    }
    if (scale == 0.0) {
        return {std::vector<double>(n, 0.0), Matrix::identity(n)};
    }
    detail::require(is_symmetric(input, 1e-12 * scale * static_cast<double>(n)),
                    "eigendecompose requires a symmetric matrix");

    Matrix a = symmetrized(input) * (1.0 / scale);
    std::vector<double> d, e;
    Matrix q = detail::householder_tridiagonalize(a, d, e);

    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();
    const std::size_t max_sweeps = 30 * n;
    std::size_t hi = n - 1;
    std::size_t sweeps = 0;
    while (hi > 0) {
        for (std::size_t i = 0; i < hi; ++i) {
            if (std::abs(e[i]) <= eps * (std::abs(d[i]) + std::abs(d[i + 1])) || std::abs(e[i]) < tiny) {
                e[i] = 0.0;
            }
        }
        while (hi > 0 && e[hi - 1] == 0.0) {
            --hi;
            sweeps = 0;
        }
        if (hi == 0) {
            break;
        }
        std::size_t lo = hi - 1;
        while (lo > 0 && e[lo - 1] != 0.0) {
            --lo;
        }
        detail::implicit_qr_sweep(d, e, lo, hi, q);
        if (++sweeps > max_sweeps) {
            throw ConvergenceError("eigensolver did not converge within " + std::to_string(max_sweeps) +
                                   " QR sweeps");
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.eigenvalues[k] = d[src] * scale;
        std::size_t pivot = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(q(i, src)) > std::abs(q(pivot, src))) {
                pivot = i;
            }
        }
        const double sign = q(pivot, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            out.eigenvectors(i, k) = sign * q(i, src);
        }
    }
    return out;
}

/// Q f(Λ) Qᵀ, symmetrised.
template <typename Fn>
Matrix apply_spectral(const EigenDecomposition& evd, Fn&& fn)
{
    const std::size_t n = evd.eigenvalues.size();
    Matrix out(n, n);
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) {
        f[k] = fn(evd.eigenvalues[k]);
    }
    const Matrix& q = evd.eigenvectors;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                acc += q(i, k) * f[k] * q(j, k);
            }
            out(i, j) = acc;
            out(j, i) = acc;
        }
    }
    return out;
}

} // namespace binbci
