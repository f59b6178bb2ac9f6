#pragma once

// Bias-free L2-regularised linear SVM (one-vs-rest, hinge loss, dual
// coordinate descent) and its binarisation into Hamming-distance prototypes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "binary_vector.hpp"
#include "error.hpp"
#include "parallel.hpp"

namespace binbci {

struct SvmTrainOptions
{
    double reg_c = 1.0;
    /// Stop when primal - dual <= gap_tolerance · max(1, primal).
    double gap_tolerance = 1e-4;
    std::size_t max_epochs = 1000;
    unsigned threads = 1;
};

struct SvmModel
{
    /// One unit-norm weight vector per class.
    std::vector<std::vector<double>> weights;
    double reg_c = 1.0;
    /// Epochs used by each one-vs-rest subproblem.
    std::vector<std::size_t> epochs;

    std::size_t n_cl() const noexcept { return weights.size(); }
    std::size_t d() const noexcept { return weights.empty() ? 0 : weights.front().size(); }
};

struct BinarizedSvm
{
    std::vector<BinaryVector> prototypes;

    std::size_t n_cl() const noexcept { return prototypes.size(); }
    std::size_t d() const noexcept { return prototypes.empty() ? 0 : prototypes.front().size(); }

    friend bool operator==(const BinarizedSvm&, const BinarizedSvm&) = default;
};

namespace detail {

class DenseRows
{
public:
    explicit DenseRows(std::span<const std::vector<double>> rows) : rows_(rows) {}

    std::size_t size() const noexcept { return rows_.size(); }
    std::size_t dim() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }

    double dot(std::size_t i, std::span<const double> w) const noexcept
    {
        const auto& x = rows_[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            acc += x[j] * w[j];
        }
        return acc;
    }

    void axpy(std::size_t i, double a, std::span<double> w) const noexcept
    {
        const auto& x = rows_[i];
        for (std::size_t j = 0; j < x.size(); ++j) {
            w[j] += a * x[j];
        }
    }

    double squared_norm(std::size_t i) const noexcept
    {
        double acc = 0.0;
        for (double v : rows_[i]) {
            acc += v * v;
        }
        return acc;
    }

private:
    std::span<const std::vector<double>> rows_;
};

/// Bipolar view (bit 1 -> +1, bit 0 -> -1) of packed binary rows.
class BipolarRows
{
public:
    explicit BipolarRows(std::span<const BinaryVector> rows) : rows_(rows) {}

    std::size_t size() const noexcept { return rows_.size(); }
    std::size_t dim() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }

    double dot(std::size_t i, std::span<const double> w) const noexcept
    {
        const auto words = rows_[i].words();
        const std::size_t d = rows_[i].size();
        double acc = 0.0;
        for (std::size_t k = 0; k < words.size(); ++k) {
            const std::uint64_t word = words[k];
            const std::size_t base = k * BinaryVector::word_bits;
            const std::size_t n = std::min<std::size_t>(BinaryVector::word_bits, d - base);
            for (std::size_t b = 0; b < n; ++b) {
                const double sign = static_cast<double>(static_cast<int>((word >> b) & 1u) * 2 - 1);
                acc += sign * w[base + b];
            }
        }
        return acc;
    }

    void axpy(std::size_t i, double a, std::span<double> w) const noexcept
    {
        const auto words = rows_[i].words();
        const std::size_t d = rows_[i].size();
        for (std::size_t k = 0; k < words.size(); ++k) {
            const std::uint64_t word = words[k];
            const std::size_t base = k * BinaryVector::word_bits;
            const std::size_t n = std::min<std::size_t>(BinaryVector::word_bits, d - base);
            for (std::size_t b = 0; b < n; ++b) {
                const double sign = static_cast<double>(static_cast<int>((word >> b) & 1u) * 2 - 1);
                w[base + b] += a * sign;
            }
        }
    }

    double squared_norm(std::size_t i) const noexcept { return static_cast<double>(rows_[i].size()); }

private:
    std::span<const BinaryVector> rows_;
};

struct BinarySolution
{
    std::vector<double> w;
    std::size_t epochs = 0;
};

/// Dual coordinate descent for min ½‖w‖² + C Σ max(0, 1 - y_i wᵀx_i), no
/// bias. Coordinates are visited in index order every epoch.
template <typename Rows>
BinarySolution solve_binary_svm(const Rows& rows, std::span<const double> y, const SvmTrainOptions& opt)
{
    const std::size_t n = rows.size();
    const double c = opt.reg_c;
    BinarySolution sol{std::vector<double>(rows.dim(), 0.0), 0};
    std::vector<double> alpha(n, 0.0);
    std::vector<double> q_diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        q_diag[i] = rows.squared_norm(i);
    }

    for (std::size_t epoch = 1; epoch <= opt.max_epochs; ++epoch) {
        sol.epochs = epoch;
        for (std::size_t i = 0; i < n; ++i) {
            if (q_diag[i] <= 0.0) {
                continue;
            }
            const double g = y[i] * rows.dot(i, sol.w) - 1.0;
            double pg = g;
            if (alpha[i] <= 0.0) {
                pg = std::min(g, 0.0);
            } else if (alpha[i] >= c) {
                pg = std::max(g, 0.0);
            }
            if (pg != 0.0) {
                const double old = alpha[i];
                alpha[i] = std::clamp(old - g / q_diag[i], 0.0, c);
                rows.axpy(i, (alpha[i] - old) * y[i], sol.w);
            }
        }

        double ww = 0.0;
        for (double v : sol.w) {
            ww += v * v;
        }
        double hinge = 0.0;
        double alpha_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            hinge += std::max(0.0, 1.0 - y[i] * rows.dot(i, sol.w));
            alpha_sum += alpha[i];
        }
        const double primal = 0.5 * ww + c * hinge;
        const double dual = alpha_sum - 0.5 * ww;
        if (primal - dual <= opt.gap_tolerance * std::max(1.0, primal)) {
            break;
        }
    }
    return sol;
}

template <typename Rows>
SvmModel train_one_vs_rest(const Rows& rows, std::span<const std::uint32_t> labels, std::size_t n_cl,
                           const SvmTrainOptions& opt)
{
    require(rows.size() == labels.size(), "feature and label counts differ");
    require(n_cl >= 2, "SVM training needs at least two classes");
    require(std::isfinite(opt.reg_c) && opt.reg_c > 0.0, "SVM regularisation C must be positive");
    require(rows.dim() >= 1, "SVM features must be nonempty");
    std::vector<std::size_t> counts(n_cl, 0);
    for (auto l : labels) {
        require(l < n_cl, "label " + std::to_string(l) + " out of range");
        ++counts[l];
    }
    for (std::size_t c = 0; c < n_cl; ++c) {
        require(counts[c] > 0, "class " + std::to_string(c) + " has no training example");
    }

    SvmModel model;
    model.reg_c = opt.reg_c;
    model.weights.resize(n_cl);
    model.epochs.resize(n_cl);
    parallel_for(n_cl, opt.threads, [&](std::size_t cls) {
        std::vector<double> y(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            y[i] = labels[i] == cls ? 1.0 : -1.0;
        }
        BinarySolution sol = solve_binary_svm(rows, y, opt);
        double norm = 0.0;
        for (double v : sol.w) {
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) {
            throw ValidationError("degenerate training set: zero weight vector for class " + std::to_string(cls));
        }
        for (double& v : sol.w) {
            v /= norm;
        }
        model.weights[cls] = std::move(sol.w);
        model.epochs[cls] = sol.epochs;
    });
    return model;
}

} // namespace detail

/// Trains on bipolar vectors given as ±1 reals. Throws if any entry is not ±1.
inline SvmModel train_linear_svm(std::span<const std::vector<double>> bipolar, std::span<const std::uint32_t> labels,
                                 std::size_t n_cl, const SvmTrainOptions& opt = {})
{
    for (const auto& x : bipolar) {
        for (double v : x) {
            detail::require(v == 1.0 || v == -1.0, "non-bipolar input: SVM features must be +1 or -1");
        }
    }
    return detail::train_one_vs_rest(detail::DenseRows(bipolar), labels, n_cl, opt);
}

/// Trains on packed binary vectors through their bipolar view.
inline SvmModel train_linear_svm(std::span<const BinaryVector> features, std::span<const std::uint32_t> labels,
                                 std::size_t n_cl, const SvmTrainOptions& opt = {})
{
    for (const auto& x : features) {
        detail::require(x.size() == features.front().size(), "binary features differ in dimension");
    }
    return detail::train_one_vs_rest(detail::BipolarRows(features), labels, n_cl, opt);
}

/// Real-valued features; the float reference classifier.
inline SvmModel train_linear_svm_real(std::span<const std::vector<double>> features,
                                      std::span<const std::uint32_t> labels, std::size_t n_cl,
                                      const SvmTrainOptions& opt = {})
{
    for (const auto& x : features) {
        detail::require(x.size() == features.front().size(), "features differ in dimension");
        for (double v : x) {
            detail::require(std::isfinite(v), "non-finite feature");
        }
    }
    return detail::train_one_vs_rest(detail::DenseRows(features), labels, n_cl, opt);
}

/// argmax_i ⟨w_i, f⟩, lowest index on ties.
inline std::uint32_t decide_float(const SvmModel& model, std::span<const double> f)
{
    detail::require(model.n_cl() > 0, "empty SVM model");
    if (f.size() != model.d()) {
        throw ValidationError("dimension mismatch: model has d=" + std::to_string(model.d()) + ", query has " +
                              std::to_string(f.size()));
    }
    std::uint32_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.n_cl(); ++c) {
        double s = 0.0;
        const auto& w = model.weights[c];
        for (std::size_t j = 0; j < f.size(); ++j) {
            s += w[j] * f[j];
        }
        if (s > best_score) {
            best_score = s;
            best = static_cast<std::uint32_t>(c);
        }
    }
    return best;
}

/// decide_float on the bipolar view of `e`.
inline std::uint32_t decide_float(const SvmModel& model, const BinaryVector& e)
{
    std::vector<double> f(e.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
        f[j] = e.bipolar(j);
    }
    return decide_float(model, f);
}

/// W_i = H(w_i) with H(0) = 1.
inline BinarizedSvm binarize(const SvmModel& model)
{
    BinarizedSvm out;
    out.prototypes.reserve(model.n_cl());
    for (const auto& w : model.weights) {
        out.prototypes.push_back(heaviside(w));
    }
    return out;
}

/// argmin_i d_h(W_i, e), lowest index on ties.
inline std::uint32_t decide_binary(const BinarizedSvm& model, const BinaryVector& e)
{
    detail::require(model.n_cl() > 0, "empty binarized model");
    if (e.size() != model.d()) {
        throw ValidationError("dimension mismatch: model has d=" + std::to_string(model.d()) + ", query has " +
                              std::to_string(e.size()));
    }
    std::uint32_t best = 0;
    std::size_t best_distance = std::numeric_limits<std::size_t>::max();
    for (std::size_t c = 0; c < model.n_cl(); ++c) {
        const std::size_t dist = hamming_raw(model.prototypes[c], e);
        if (dist < best_distance) {
            best_distance = dist;
            best = static_cast<std::uint32_t>(c);
        }
    }
    return best;
}

} // namespace binbci
