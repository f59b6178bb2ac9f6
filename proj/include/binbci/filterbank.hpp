#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dataio.hpp"
#include "error.hpp"
#include "matrix.hpp"
#include "parallel.hpp"

namespace binbci {

struct BandSpec
{
    double low_hz = 0.0;
    double high_hz = 0.0;

    friend bool operator==(const BandSpec&, const BandSpec&) = default;
};

/// Second-order section y = (b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²) x.
struct Biquad
{
    double b0 = 0.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;

    std::complex<double> response(double freq_hz, double sample_rate_hz) const
    {
        const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate_hz);
        const std::complex<double> z2 = z1 * z1;
        return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
    }

    /// Both poles strictly inside the unit circle (Jury conditions).
    bool stable() const noexcept { return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2; }

    friend bool operator==(const Biquad&, const Biquad&) = default;
};

/// 43 bands over 4–40 Hz: 2 Hz wide in 2 Hz steps (18), 4 Hz wide in 2 Hz
/// steps (17) and 8 Hz wide in 4 Hz steps (8).
inline std::vector<BandSpec> default_bands()
{
    std::vector<BandSpec> bands;
    for (int low = 4; low + 2 <= 40; low += 2) {
        bands.push_back({double(low), double(low + 2)});
    }
    for (int low = 4; low + 4 <= 40; low += 2) {
        bands.push_back({double(low), double(low + 4)});
    }
    for (int low = 4; low + 8 <= 40; low += 4) {
        bands.push_back({double(low), double(low + 8)});
    }
    return bands;
}

inline void validate_band(const BandSpec& band, double sample_rate_hz)
{
    detail::require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "sample rate must be positive");
    detail::require(std::isfinite(band.low_hz) && std::isfinite(band.high_hz) && band.low_hz > 0.0 &&
                        band.low_hz < band.high_hz && band.high_hz < 0.5 * sample_rate_hz,
                    "band edges must satisfy 0 < low < high < Nyquist");
}

/// Second-order Butterworth bandpass: the first-order analog lowpass
/// prototype mapped to a bandpass between the prewarped edges, then
/// discretised by the bilinear transform. |H| = 1/√2 at both edges.
inline Biquad design_bandpass(const BandSpec& band, double sample_rate_hz)
{
    validate_band(band, sample_rate_hz);
    const double k = 2.0 * sample_rate_hz;
    const double w1 = k * std::tan(std::numbers::pi * band.low_hz / sample_rate_hz);
    const double w2 = k * std::tan(std::numbers::pi * band.high_hz / sample_rate_hz);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    // H(s) = bw s / (s² + bw s + w0²), s = k (1 - z⁻¹) / (1 + z⁻¹)
    const double a0 = k * k + bw * k + w0sq;
    Biquad q;
    q.b0 = bw * k / a0;
    q.b1 = 0.0;
    q.b2 = -bw * k / a0;
    q.a1 = (2.0 * w0sq - 2.0 * k * k) / a0;
    q.a2 = (k * k - bw * k + w0sq) / a0;
    return q;
}

/// Causal direct-form-II-transposed filtering, zero initial state.
inline void filter_signal(const Biquad& q, std::span<const double> in, std::span<double> out)
{
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t t = 0; t < in.size(); ++t) {
        const double x = in[t];
        const double y = q.b0 * x + s1;
        s1 = q.b1 * x - q.a1 * y + s2;
        s2 = q.b2 * x - q.a2 * y;
        out[t] = y;
    }
}

class FilterBank
{
public:
    FilterBank() = default;

    static FilterBank design(std::vector<BandSpec> bands, double sample_rate_hz)
    {
        detail::require(!bands.empty(), "filter bank needs at least one band");
        FilterBank fb;
        fb.sample_rate_hz_ = sample_rate_hz;
        fb.sections_.reserve(bands.size());
        for (const auto& b : bands) {
            fb.sections_.push_back(design_bandpass(b, sample_rate_hz));
            detail::require(fb.sections_.back().stable(), "designed bandpass section is unstable");
        }
        fb.bands_ = std::move(bands);
        return fb;
    }

    const std::vector<BandSpec>& bands() const noexcept { return bands_; }
    const std::vector<Biquad>& sections() const noexcept { return sections_; }
    double sample_rate_hz() const noexcept { return sample_rate_hz_; }
    std::size_t size() const noexcept { return bands_.size(); }

    /// One filtered copy of `samples` (n_ch × n_s) per band.
    std::vector<Matrix> apply(const Matrix& samples, unsigned threads = 1) const
    {
        std::vector<Matrix> out(bands_.size(), Matrix(samples.rows(), samples.cols()));
        const std::size_t n_ch = samples.rows();
        parallel_for(bands_.size() * n_ch, threads, [&](std::size_t idx) {
            const std::size_t band = idx / n_ch;
            const std::size_t ch = idx % n_ch;
            filter_signal(sections_[band], samples.row(ch), out[band].row(ch));
        });
        return out;
    }

    std::vector<Matrix> apply(const Trial& trial, unsigned threads = 1) const
    {
        detail::require(trial.sample_rate_hz == sample_rate_hz_,
                        "sample-rate mismatch: trial at " + std::to_string(trial.sample_rate_hz) +
                            " Hz, filter bank designed for " + std::to_string(sample_rate_hz_) + " Hz");
        return apply(trial.samples, threads);
    }

    friend bool operator==(const FilterBank&, const FilterBank&) = default;

private:
    std::vector<BandSpec> bands_;
    std::vector<Biquad> sections_;
    double sample_rate_hz_ = 0.0;
};

/// Band list in plain text: one `low high` pair per line; '#' starts a
/// comment and blank lines are ignored.
inline std::vector<BandSpec> parse_bands(std::istream& in)
{
    std::vector<BandSpec> bands;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto view = detail::trim(line);
        if (view.empty()) {
            continue;
        }
        std::istringstream fields{std::string(view)};
        BandSpec b;
        std::string extra;
        if (!(fields >> b.low_hz >> b.high_hz) || (fields >> extra)) {
            throw ValidationError("bands line " + std::to_string(line_no) + ": expected `low high`");
        }
        detail::require(b.low_hz > 0.0 && b.low_hz < b.high_hz,
                        "bands line " + std::to_string(line_no) + ": need 0 < low < high");
        bands.push_back(b);
    }
    detail::require(!bands.empty(), "band file lists no bands");
    return bands;
}

inline std::vector<BandSpec> read_bands(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open band file '" + path.string() + "'");
    }
    return parse_bands(in);
}

} // namespace binbci
