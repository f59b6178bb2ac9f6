#pragma once

// Binary key-value memory classifier: binary keys, one-hot values, cosine
// attention evaluated through Hamming distance, softabs sharpening and an
// attention-weighted readout of the values.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "binary_vector.hpp"
#include "error.hpp"
#include "matrix.hpp"

namespace binbci {

inline constexpr double default_softabs_beta = 10.0;

/// ε(α) = σ(β(α - ½)) + σ(β(-α - ½)), σ the logistic function. Even in α,
/// so strongly anticorrelated keys are rewarded like correlated ones while
/// orthogonal keys (α = 0) get the least weight.
inline double softabs(double alpha, double beta)
{
    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    return sigmoid(beta * (alpha - 0.5)) + sigmoid(beta * (-alpha - 0.5));
}

class KeyValueMemory
{
public:
    KeyValueMemory() = default;

    KeyValueMemory(std::vector<BinaryVector> keys, std::vector<std::uint32_t> labels, std::uint32_t n_cl, double beta)
        : keys_(std::move(keys)), labels_(std::move(labels)), n_cl_(n_cl), beta_(beta)
    {
        detail::require(!keys_.empty(), "support set is empty");
        detail::require(keys_.size() == labels_.size(), "key and label counts differ");
        detail::require(std::isfinite(beta_) && beta_ > 0.0, "softabs beta must be positive");
        for (const auto& k : keys_) {
            detail::require(k.size() == keys_.front().size(), "keys differ in dimension");
        }
        for (auto l : labels_) {
            detail::require(l < n_cl_, "label " + std::to_string(l) + " out of range for n_cl=" +
                                           std::to_string(n_cl_));
        }
    }

    std::size_t size() const noexcept { return keys_.size(); }
    std::size_t d() const noexcept { return keys_.empty() ? 0 : keys_.front().size(); }
    std::uint32_t n_cl() const noexcept { return n_cl_; }
    double beta() const noexcept { return beta_; }
    const std::vector<BinaryVector>& keys() const noexcept { return keys_; }
    /// Class index of each value row; row i of the value memory is one-hot at labels()[i].
    const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }

    /// The value memory Y as a dense keys × n_cl one-hot matrix.
    Matrix values() const
    {
        Matrix y(keys_.size(), n_cl_);
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            y(i, labels_[i]) = 1.0;
        }
        return y;
    }

    /// Adds shots, possibly of new classes, leaving existing entries untouched.
    void append(std::span<const BinaryVector> keys, std::span<const std::uint32_t> labels, std::uint32_t n_cl)
    {
        detail::require(keys.size() == labels.size(), "key and label counts differ");
        detail::require(n_cl >= n_cl_, "class count cannot shrink");
        for (const auto& k : keys) {
            detail::require(k.size() == d(), "dimension mismatch between new and stored keys");
        }
        for (auto l : labels) {
            detail::require(l < n_cl, "label " + std::to_string(l) + " out of range");
        }
        keys_.insert(keys_.end(), keys.begin(), keys.end());
        labels_.insert(labels_.end(), labels.begin(), labels.end());
        n_cl_ = n_cl;
    }

    friend bool operator==(const KeyValueMemory&, const KeyValueMemory&) = default;

private:
    std::vector<BinaryVector> keys_;
    std::vector<std::uint32_t> labels_;
    std::uint32_t n_cl_ = 0;
    double beta_ = default_softabs_beta;
};

/// Builds the memory from an encoded support set, replacing any previous content.
inline KeyValueMemory write_support(std::vector<BinaryVector> encoded, std::vector<std::uint32_t> labels,
                                    std::uint32_t n_cl, double beta = default_softabs_beta)
{
    return KeyValueMemory(std::move(encoded), std::move(labels), n_cl, beta);
}

struct AttentionVector
{
    std::vector<double> a;
};

/// Cosine similarities 1 - 2·d_h(q, E_i).
inline std::vector<double> similarities(const KeyValueMemory& mem, const BinaryVector& q)
{
    detail::require(mem.size() > 0, "memory is empty");
    std::vector<double> alpha;
    alpha.reserve(mem.size());
    for (const auto& key : mem.keys()) {
        alpha.push_back(cosine_from_hamming(hamming(q, key).normalized));
    }
    return alpha;
}

inline AttentionVector attend(const KeyValueMemory& mem, const BinaryVector& q)
{
    const std::vector<double> alpha = similarities(mem, q);
    AttentionVector out{std::vector<double>(alpha.size())};
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out.a[i] = softabs(alpha[i], mem.beta());
        total += out.a[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw ValidationError("softabs normalisation underflowed; reduce beta");
    }
    for (double& v : out.a) {
        v /= total;
    }
    return out;
}

struct Classification
{
    std::uint32_t label = 0;
    /// ŷ = aᵀY, one score per class.
    std::vector<double> scores;
};

/// ŷ = aᵀY and its argmax (lowest index on ties).
inline Classification readout(const KeyValueMemory& mem, std::span<const double> attention)
{
    detail::require(attention.size() == mem.size(), "attention length does not match memory size");
    Classification out{0, std::vector<double>(mem.n_cl(), 0.0)};
    for (std::size_t i = 0; i < attention.size(); ++i) {
        out.scores[mem.labels()[i]] += attention[i];
    }
    for (std::uint32_t c = 1; c < mem.n_cl(); ++c) {
        if (out.scores[c] > out.scores[out.label]) {
            out.label = c;
        }
    }
    return out;
}

inline Classification classify(const KeyValueMemory& mem, const BinaryVector& q)
{
    return readout(mem, attend(mem, q).a);
}

} // namespace binbci
