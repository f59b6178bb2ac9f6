#pragma once

// Multi-spectral Riemannian tangent-space features.

#include <cstddef>
#include <span>
#include <vector>

#include "dataio.hpp"
#include "filterbank.hpp"
#include "parallel.hpp"
#include "spd.hpp"

namespace binbci {

/// Band-major concatenation of per-band half-vectorised tangent vectors.
struct FeatureVector
{
    std::vector<double> values;
    std::size_t n_bands = 0;
    std::size_t per_band = 0;

    std::size_t size() const noexcept { return values.size(); }
    std::span<const double> band(std::size_t b) const { return std::span(values).subspan(b * per_band, per_band); }
};

inline std::size_t features_per_band(std::size_t n_ch) { return n_ch * (n_ch + 1) / 2; }

/// Per-band covariances of one trial.
inline std::vector<SpdMatrix> band_covariances(const Trial& trial, const FilterBank& bank, double alpha,
                                               unsigned threads = 1)
{
    const std::vector<Matrix> filtered = bank.apply(trial, threads);
    std::vector<SpdMatrix> covs(filtered.size());
    parallel_for(filtered.size(), threads, [&](std::size_t b) { covs[b] = covariance(filtered[b], alpha); });
    return covs;
}

/// vect(logm(W C W)) with W the whitening matrix of the band reference.
inline std::vector<double> tangent_features(const SpdMatrix& c, const Matrix& whitener)
{
    return half_vectorize(logm(SpdMatrix::from_matrix(congruence(whitener, c.dense()))));
}

/// Precomputed reference whiteners C_ref^-½, one per band.
struct RiemannianKernel
{
    std::vector<SpdMatrix> refs;
    std::vector<Matrix> whiteners;

    RiemannianKernel() = default;

    explicit RiemannianKernel(std::vector<SpdMatrix> references) : refs(std::move(references))
    {
        whiteners.reserve(refs.size());
        for (const auto& r : refs) {
            whiteners.push_back(inv_sqrtm(r).dense());
        }
    }

    std::size_t n_bands() const noexcept { return refs.size(); }
};

inline FeatureVector riemannian_features(const Trial& trial, const FilterBank& bank, const RiemannianKernel& kernel,
                                         double alpha, unsigned threads = 1)
{
    detail::require(kernel.n_bands() == bank.size(), "one reference matrix per band is required");
    for (const auto& r : kernel.refs) {
        detail::require(r.dim() == trial.n_ch(), "feature dimension mismatch: reference is " +
                                                     std::to_string(r.dim()) + " channels, trial has " +
                                                     std::to_string(trial.n_ch()));
    }
    const std::vector<Matrix> filtered = bank.apply(trial, threads);
    FeatureVector out;
    out.n_bands = bank.size();
    out.per_band = features_per_band(trial.n_ch());
    out.values.resize(out.n_bands * out.per_band);
    parallel_for(out.n_bands, threads, [&](std::size_t b) {
        const auto v = tangent_features(covariance(filtered[b], alpha), kernel.whiteners[b]);
        std::copy(v.begin(), v.end(), out.values.begin() + static_cast<std::ptrdiff_t>(b * out.per_band));
    });
    return out;
}

inline FeatureVector riemannian_features(const Trial& trial, const FilterBank& bank,
                                         std::span<const SpdMatrix> refs, double alpha, unsigned threads = 1)
{
    return riemannian_features(trial, bank, RiemannianKernel({refs.begin(), refs.end()}), alpha, threads);
}

/// Per-band geometric mean over all training covariances. Labels are unused.
inline std::vector<SpdMatrix> fit_reference(const Dataset& train, const FilterBank& bank, double alpha,
                                            unsigned threads = 1)
{
    detail::require(!train.empty(), "reference estimation needs a nonempty training set");
    std::vector<std::vector<SpdMatrix>> per_band(bank.size(), std::vector<SpdMatrix>(train.size()));
    parallel_for(train.size(), threads, [&](std::size_t i) {
        auto covs = band_covariances(train.trials[i], bank, alpha);
        for (std::size_t b = 0; b < covs.size(); ++b) {
            per_band[b][i] = std::move(covs[b]);
        }
    });
    std::vector<SpdMatrix> refs(bank.size());
    parallel_for(bank.size(), threads, [&](std::size_t b) { refs[b] = geometric_mean(per_band[b]).mean; });
    return refs;
}

} // namespace binbci
