#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace binbci {

/// Dense row-major matrix of doubles.
class Matrix
{
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        detail::require(data_.size() == rows * cols, "matrix data size does not match shape");
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    static Matrix diagonal(std::span<const double> d)
    {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            m(i, i) = d[i];
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept
    {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    double operator()(std::size_t r, std::size_t c) const noexcept
    {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    Matrix transposed() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                t(c, r) = (*this)(r, c);
            }
        }
        return t;
    }

    Matrix& operator+=(const Matrix& o)
    {
        detail::require(rows_ == o.rows_ && cols_ == o.cols_, "matrix shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] += o.data_[i];
        }
        return *this;
    }

    Matrix& operator-=(const Matrix& o)
    {
        detail::require(rows_ == o.rows_ && cols_ == o.cols_, "matrix shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] -= o.data_[i];
        }
        return *this;
    }

    Matrix& operator*=(double s) noexcept
    {
        for (double& v : data_) {
            v *= s;
        }
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix multiply(const Matrix& a, const Matrix& b)
{
    detail::require(a.cols() == b.rows(), "matrix product shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                ci[j] += aik * bk[j];
            }
        }
    }
    return c;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) { return multiply(a, b); }

/// (M + Mᵀ) / 2
inline Matrix symmetrized(const Matrix& m)
{
    detail::require(m.is_square(), "symmetrize requires a square matrix");
    Matrix s(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        s(i, i) = m(i, i);
        for (std::size_t j = 0; j < i; ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

inline double frobenius_norm(const Matrix& m)
{
    double acc = 0.0;
    for (double v : m.data()) {
        acc += v * v;
    }
    return std::sqrt(acc);
}

inline double max_abs(const Matrix& m)
{
    double best = 0.0;
    for (double v : m.data()) {
        best = std::max(best, std::abs(v));
    }
    return best;
}

inline double trace(const Matrix& m)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) {
        acc += m(i, i);
    }
    return acc;
}

inline bool all_finite(const Matrix& m)
{
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

inline bool is_symmetric(const Matrix& m, double tol = 0.0)
{
    if (!m.is_square()) {
        return false;
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                return false;
            }
        }
    }
    return true;
}

} // namespace binbci
