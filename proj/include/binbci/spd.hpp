#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "eigen.hpp"
#include "error.hpp"
#include "matrix.hpp"

namespace binbci {

/// Symmetric positive-definite matrix stored as a packed lower triangle
/// (row-major: a00, a10, a11, a20, ...). Positive definiteness is certified
/// by a Cholesky factorisation whenever one is constructed.
class SpdMatrix
{
public:
    SpdMatrix() = default;

    /// Throws ValidationError if `m` is not symmetric or not positive definite.
    /// Roundoff-level asymmetry is removed by averaging with the transpose.
    static SpdMatrix from_matrix(const Matrix& m)
    {
        detail::require(m.is_square(), "SPD matrix must be square");
        detail::require(all_finite(m), "SPD matrix must be finite");
        detail::require(is_symmetric(m, 1e-10 * std::max(1.0, max_abs(m))), "SPD matrix must be symmetric");
        SpdMatrix out;
        out.n_ = m.rows();
        out.packed_.reserve(out.n_ * (out.n_ + 1) / 2);
        for (std::size_t i = 0; i < out.n_; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                out.packed_.push_back(0.5 * (m(i, j) + m(j, i)));
            }
        }
        out.certify();
        return out;
    }

    static SpdMatrix from_packed(std::size_t n, std::vector<double> packed)
    {
        detail::require(packed.size() == n * (n + 1) / 2, "packed SPD storage has wrong length");
        SpdMatrix out;
        out.n_ = n;
        out.packed_ = std::move(packed);
        for (double v : out.packed_) {
            detail::require(std::isfinite(v), "SPD matrix must be finite");
        }
        out.certify();
        return out;
    }

    std::size_t dim() const noexcept { return n_; }

    double operator()(std::size_t i, std::size_t j) const noexcept
    {
        if (j > i) {
            std::swap(i, j);
        }
        return packed_[i * (i + 1) / 2 + j];
    }

    std::span<const double> packed() const noexcept { return packed_; }

    Matrix dense() const
    {
        Matrix m(n_, n_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                m(i, j) = m(j, i) = (*this)(i, j);
            }
        }
        return m;
    }

    friend bool operator==(const SpdMatrix&, const SpdMatrix&) = default;

private:
    void certify() const
    {
        // Cholesky; only the success matters.
        std::vector<double> l(packed_.size(), 0.0);
        auto at = [](std::size_t i, std::size_t j) { return i * (i + 1) / 2 + j; };
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double acc = packed_[at(i, j)];
                for (std::size_t k = 0; k < j; ++k) {
                    acc -= l[at(i, k)] * l[at(j, k)];
                }
                if (i == j) {
                    if (!(acc > 0.0)) {
                        throw ValidationError("matrix is not positive definite");
                    }
                    l[at(i, i)] = std::sqrt(acc);
                } else {
                    l[at(i, j)] = acc / l[at(j, j)];
                }
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<double> packed_;
};

/// C = (X Xᵀ + alpha I) / (n_s - 1) for X of shape n_ch × n_s.
inline SpdMatrix covariance(const Matrix& x, double alpha = 0.1)
{
    detail::require(x.cols() >= 2, "covariance needs at least two samples");
    detail::require(alpha >= 0.0 && std::isfinite(alpha), "covariance regularisation must be nonnegative");
    const std::size_t n = x.rows();
    const double scale = 1.0 / static_cast<double>(x.cols() - 1);
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            auto xj = x.row(j);
            double acc = 0.0;
            for (std::size_t t = 0; t < xi.size(); ++t) {
                acc += xi[t] * xj[t];
            }
            if (i == j) {
                acc += alpha;
            }
            c(i, j) = c(j, i) = acc * scale;
        }
    }
    try {
        return SpdMatrix::from_matrix(c);
    } catch (const ValidationError&) {
        throw ValidationError("covariance is not positive definite (rank-deficient signal with alpha = 0?)");
    }
}

namespace detail {

inline EigenDecomposition positive_spectrum(const SpdMatrix& c)
{
    EigenDecomposition evd = eigendecompose(c.dense());
    for (double v : evd.eigenvalues) {
        if (!(v > 0.0)) {
            throw ValidationError("nonpositive eigenvalue in SPD matrix");
        }
    }
    return evd;
}

} // namespace detail

/// Matrix logarithm Q log(Λ) Qᵀ.
inline Matrix logm(const SpdMatrix& c)
{
    return apply_spectral(detail::positive_spectrum(c), [](double v) { return std::log(v); });
}

inline SpdMatrix sqrtm(const SpdMatrix& c)
{
    return SpdMatrix::from_matrix(apply_spectral(detail::positive_spectrum(c), [](double v) { return std::sqrt(v); }));
}

inline SpdMatrix inv_sqrtm(const SpdMatrix& c)
{
    return SpdMatrix::from_matrix(
        apply_spectral(detail::positive_spectrum(c), [](double v) { return 1.0 / std::sqrt(v); }));
}

/// Exponential of a symmetric matrix; always SPD.
inline SpdMatrix expm_symmetric(const Matrix& s)
{
    return SpdMatrix::from_matrix(apply_spectral(eigendecompose(s), [](double v) { return std::exp(v); }));
}

/// W C W for symmetric W, symmetrised.
inline Matrix congruence(const Matrix& w, const Matrix& c)
{
    return symmetrized(w * c * w);
}

struct GeometricMeanResult
{
    SpdMatrix mean;
    std::size_t iterations = 0;
    /// Frobenius norm of the mean tangent vector at `mean`.
    double tangent_norm = 0.0;
    /// False when max_iter was reached; `mean` is then the best iterate seen.
    bool converged = false;
};

/// Karcher mean under the affine-invariant metric by the fixed-point
/// iteration G <- G^½ expm(mean_i logm(G^-½ C_i G^-½)) G^½, started from
/// the arithmetic mean.
inline GeometricMeanResult geometric_mean(std::span<const SpdMatrix> covs, double tol = 1e-8,
                                          std::size_t max_iter = 50)
{
    detail::require(!covs.empty(), "geometric mean of an empty set");
    const std::size_t n = covs.front().dim();
    for (const auto& c : covs) {
        detail::require(c.dim() == n, "geometric mean inputs differ in dimension");
    }

    Matrix arithmetic(n, n);
    for (const auto& c : covs) {
        arithmetic += c.dense();
    }
    arithmetic *= 1.0 / static_cast<double>(covs.size());

    GeometricMeanResult best;
    best.tangent_norm = std::numeric_limits<double>::infinity();
    SpdMatrix g = SpdMatrix::from_matrix(arithmetic);
    for (std::size_t iter = 0; iter <= max_iter; ++iter) {
        const EigenDecomposition evd = detail::positive_spectrum(g);
        const Matrix g_half = apply_spectral(evd, [](double v) { return std::sqrt(v); });
        const Matrix g_inv_half = apply_spectral(evd, [](double v) { return 1.0 / std::sqrt(v); });

        Matrix tangent(n, n);
        for (const auto& c : covs) {
            tangent += logm(SpdMatrix::from_matrix(congruence(g_inv_half, c.dense())));
        }
        tangent *= 1.0 / static_cast<double>(covs.size());
        const double norm = frobenius_norm(tangent);

        if (norm < best.tangent_norm) {
            best.mean = g;
            best.tangent_norm = norm;
            best.iterations = iter;
        }
        if (norm <= tol) {
            best.converged = true;
            return best;
        }
        if (iter == max_iter) {
            break;
        }
        g = SpdMatrix::from_matrix(congruence(g_half, expm_symmetric(tangent).dense()));
    }
    best.iterations = max_iter;
    return best;
}

/// ℓ₂-norm preserving half vectorisation: row-major lower triangle with the
/// strictly-lower entries scaled by √2, so ‖v‖₂ = ‖S‖_F.
inline std::vector<double> half_vectorize(const Matrix& s)
{
    detail::require(s.is_square(), "half vectorisation requires a square matrix");
    const std::size_t n = s.rows();
    std::vector<double> v;
    v.reserve(n * (n + 1) / 2);
    const double root2 = std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            v.push_back(root2 * s(i, j));
        }
        v.push_back(s(i, i));
    }
    return v;
}

} // namespace binbci
