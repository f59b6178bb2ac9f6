#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "binary_io.hpp"
#include "eigen.hpp"
#include "error.hpp"
#include "matrix.hpp"

namespace binbci {

/// One labelled multichannel window; samples are n_ch × n_s.
struct Trial
{
    Matrix samples;
    std::uint32_t label = 0;
    double sample_rate_hz = 0.0;

    std::size_t n_ch() const noexcept { return samples.rows(); }
    std::size_t n_s() const noexcept { return samples.cols(); }

    friend bool operator==(const Trial&, const Trial&) = default;
};

struct Dataset
{
    std::vector<Trial> trials;
    std::uint32_t n_cl = 0;
    /// Free-form annotations (subject, session). Not persisted by TRL1.
    std::map<std::string, std::string> metadata;

    std::size_t size() const noexcept { return trials.size(); }
    bool empty() const noexcept { return trials.empty(); }
    std::size_t n_ch() const noexcept { return trials.empty() ? 0 : trials.front().n_ch(); }
    std::size_t n_s() const noexcept { return trials.empty() ? 0 : trials.front().n_s(); }
    double sample_rate_hz() const noexcept { return trials.empty() ? 0.0 : trials.front().sample_rate_hz; }

    std::vector<std::size_t> class_counts() const
    {
        std::vector<std::size_t> counts(n_cl, 0);
        for (const auto& t : trials) {
            if (t.label < n_cl) {
                ++counts[t.label];
            }
        }
        return counts;
    }

    /// Checks every Trial and Dataset invariant; with `training` every class
    /// must also be represented.
    void validate(bool training = false) const
    {
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const Trial& t = trials[i];
            const std::string where = "trial " + std::to_string(i) + ": ";
            detail::require(t.n_ch() >= 1, where + "needs at least one channel");
            detail::require(t.n_s() >= 2, where + "needs at least two samples");
            detail::require(std::isfinite(t.sample_rate_hz) && t.sample_rate_hz > 0.0,
                            where + "sample rate must be positive");
            detail::require(all_finite(t.samples), where + "non-finite sample");
            detail::require(t.label < n_cl, where + "label " + std::to_string(t.label) + " >= n_cl " +
                                                std::to_string(n_cl));
            detail::require(t.n_ch() == n_ch() && t.n_s() == n_s(), where + "inconsistent trial shape");
            detail::require(t.sample_rate_hz == sample_rate_hz(), where + "inconsistent sample rate");
        }
        if (training) {
            detail::require(!trials.empty(), "training split is empty");
            const auto counts = class_counts();
            for (std::uint32_t c = 0; c < n_cl; ++c) {
                detail::require(counts[c] > 0, "class " + std::to_string(c) + " is absent from the training split");
            }
        }
    }

    /// Metadata is annotation only and does not take part in equality.
    friend bool operator==(const Dataset& a, const Dataset& b)
    {
        return a.n_cl == b.n_cl && a.trials == b.trials;
    }
};

// ---------------------------------------------------------------------------
// TRL1 container
//
//   "TRL1" | version u32 | n_trials u32 | n_ch u32 | n_s u32 | n_cl u32 |
//   sample_rate f64 | n_trials × (label u32, n_ch·n_s f32 channel-major)
//
// All fields little-endian.

inline constexpr std::uint32_t trl_version = 1;
inline constexpr std::size_t trl_header_bytes = 32;

inline std::vector<std::uint8_t> encode_dataset(const Dataset& dataset)
{
    dataset.validate();
    io::ByteWriter w;
    w.put_magic("TRL1");
    w.put_u32(trl_version);
    w.put_u32(static_cast<std::uint32_t>(dataset.size()));
    w.put_u32(static_cast<std::uint32_t>(dataset.n_ch()));
    w.put_u32(static_cast<std::uint32_t>(dataset.n_s()));
    w.put_u32(dataset.n_cl);
    w.put_f64(dataset.sample_rate_hz());
    for (const Trial& t : dataset.trials) {
        w.put_u32(t.label);
        for (double v : t.samples.data()) {
            w.put_f32(static_cast<float>(v));
        }
    }
    return w.take();
}

inline Dataset decode_dataset(std::span<const std::uint8_t> bytes)
{
    io::ByteReader r(bytes);
    r.expect_magic("TRL1");
    const std::uint32_t version = r.get_u32();
    if (version != trl_version) {
        throw IoError("unsupported TRL1 version " + std::to_string(version));
    }
    const std::uint64_t n_trials = r.get_u32();
    const std::uint64_t n_ch = r.get_u32();
    const std::uint64_t n_s = r.get_u32();
    Dataset out;
    out.n_cl = r.get_u32();
    const double rate = r.get_f64();

    if (n_trials > 0 && n_ch > 0 && n_s > r.remaining() / n_ch) {
        throw IoError("truncated payload");
    }
    const std::uint64_t per_trial = 4 + 4 * n_ch * n_s;
    if (n_trials > 0 && r.remaining() / n_trials < per_trial) {
        throw IoError("truncated payload");
    }
    if (r.remaining() != n_trials * per_trial) {
        throw IoError("trailing bytes after TRL1 payload");
    }
    out.trials.reserve(n_trials);
    for (std::uint64_t i = 0; i < n_trials; ++i) {
        Trial t;
        t.label = r.get_u32();
        t.sample_rate_hz = rate;
        t.samples = Matrix(n_ch, n_s);
        for (double& v : t.samples.data()) {
            v = r.get_f32();
        }
        out.trials.push_back(std::move(t));
    }
    try {
        out.validate();
    } catch (const ValidationError& e) {
        throw IoError(std::string("invalid TRL1 content: ") + e.what());
    }
    return out;
}

inline void write_dataset(const Dataset& dataset, const std::filesystem::path& path)
{
    io::write_file(path, encode_dataset(dataset));
}

inline Dataset read_dataset(const std::filesystem::path& path)
{
    return decode_dataset(io::read_file(path));
}

// ---------------------------------------------------------------------------
// CSV import: `label, s(ch0,t0), s(ch0,t1), ..., s(ch1,t0), ...` per row.

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view cell, std::size_t line)
{
    cell = trim(cell);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ValidationError("line " + std::to_string(line) + ": non-numeric cell '" + std::string(cell) + "'");
    }
    return v;
}

} // namespace detail

inline Dataset import_csv(std::istream& in, std::size_t n_ch, double sample_rate_hz)
{
    detail::require(n_ch >= 1, "n_ch must be positive");
    detail::require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "sample rate must be positive");

    Dataset out;
    std::size_t width = 0;
    std::string text;
    std::size_t line_no = 0;
    std::uint32_t max_label = 0;
    std::vector<double> cells;
    while (std::getline(in, text)) {
        ++line_no;
        if (detail::trim(text).empty()) {
            continue;
        }
        cells.clear();
        std::string_view rest(text);
        while (true) {
            const auto comma = rest.find(',');
            cells.push_back(detail::parse_number(rest.substr(0, comma), line_no));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (width == 0) {
            width = cells.size();
            detail::require(width > 1 && (width - 1) % n_ch == 0,
                            "row width " + std::to_string(width) + " is not 1 + a multiple of n_ch=" +
                                std::to_string(n_ch));
        } else if (cells.size() != width) {
            throw ValidationError("line " + std::to_string(line_no) + ": ragged row (" +
                                  std::to_string(cells.size()) + " cells, expected " + std::to_string(width) + ")");
        }
        const double label = cells.front();
        detail::require(label >= 0.0 && label < 4294967296.0 && std::floor(label) == label,
                        "line " + std::to_string(line_no) + ": label must be a nonnegative integer");
        Trial t;
        t.label = static_cast<std::uint32_t>(label);
        t.sample_rate_hz = sample_rate_hz;
        const std::size_t n_s = (width - 1) / n_ch;
        t.samples = Matrix(n_ch, n_s);
        for (std::size_t i = 0; i + 1 < width; ++i) {
            // In-memory values are kept exactly representable by the f32 file format.
            t.samples.data()[i] = static_cast<float>(cells[i + 1]);
        }
        max_label = std::max(max_label, t.label);
        out.trials.push_back(std::move(t));
    }
    out.n_cl = out.trials.empty() ? 0 : max_label + 1;
    out.validate();
    return out;
}

inline Dataset import_csv(const std::filesystem::path& path, std::size_t n_ch, double sample_rate_hz)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return import_csv(in, n_ch, sample_rate_hz);
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthSpec
{
    std::uint32_t n_cl = 4;
    std::uint32_t n_ch = 8;
    std::uint32_t n_s = 250;
    std::uint32_t trials_per_class = 36;
    double sample_rate_hz = 250.0;
    double class_separation = 1.0;
    double noise_scale = 0.5;
    /// Trial draws.
    std::uint64_t seed = 0;
    /// Class covariances. Datasets that differ only in `seed` share their
    /// classes, which is what a train/test split needs.
    std::uint64_t structure_seed = 0;

    void validate() const
    {
        detail::require(n_cl >= 1, "synth: n_cl must be positive");
        detail::require(n_ch >= 1, "synth: n_ch must be positive");
        detail::require(n_s >= 2, "synth: n_s must be at least 2");
        detail::require(trials_per_class >= 1, "synth: trials_per_class must be positive");
        detail::require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "synth: sample rate must be positive");
        detail::require(std::isfinite(class_separation) && class_separation >= 0.0,
                        "synth: class_separation must be nonnegative");
        detail::require(std::isfinite(noise_scale) && noise_scale > 0.0, "synth: noise_scale must be positive");
    }
};

namespace detail {

/// Box-Muller on top of mt19937_64, so draws do not depend on the standard
/// library's distribution implementation.
class NormalSource
{
public:
    explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

    double operator()()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace detail

/// Ground-truth class covariance I + separation·S_c with S_c a random
/// symmetric matrix of unit spectral scale, eigenvalues floored at 0.05.
inline std::vector<Matrix> synthetic_class_covariances(const SynthSpec& spec)
{
    spec.validate();
    detail::NormalSource normal(spec.structure_seed ^ 0x9e3779b97f4a7c15ull);
    const std::size_t n = spec.n_ch;
    std::vector<Matrix> out;
    out.reserve(spec.n_cl);
    for (std::uint32_t c = 0; c < spec.n_cl; ++c) {
        Matrix g(n, n);
        for (double& v : g.data()) {
            v = normal();
        }
        Matrix s = symmetrized(g) * (1.0 / std::sqrt(2.0 * static_cast<double>(n)));
        Matrix sigma = Matrix::identity(n) + s * spec.class_separation;
        out.push_back(apply_spectral(eigendecompose(sigma), [](double v) { return std::max(v, 0.05); }));
    }
    return out;
}

/// Trials of class c have i.i.d. columns x_t = Σ_c^½ z_t + noise_scale·ν_t
/// with z, ν standard normal, so E[x xᵀ] = Σ_c + noise_scale²·I. Trials are
/// emitted class-interleaved (0, 1, ..., n_cl-1, 0, 1, ...).
inline Dataset generate_synthetic(const SynthSpec& spec)
{
    const std::vector<Matrix> sigmas = synthetic_class_covariances(spec);
    std::vector<Matrix> roots;
    roots.reserve(sigmas.size());
    for (const auto& s : sigmas) {
        roots.push_back(apply_spectral(eigendecompose(s), [](double v) { return std::sqrt(v); }));
    }

    detail::NormalSource normal(spec.seed);
    Dataset out;
    out.n_cl = spec.n_cl;
    out.metadata["source"] = "synthetic";
    out.metadata["seed"] = std::to_string(spec.seed);
    out.metadata["structure_seed"] = std::to_string(spec.structure_seed);
    const std::size_t n = spec.n_ch;
    std::vector<double> z(n);
    for (std::uint32_t k = 0; k < spec.trials_per_class; ++k) {
        for (std::uint32_t c = 0; c < spec.n_cl; ++c) {
            Trial t;
            t.label = c;
            t.sample_rate_hz = spec.sample_rate_hz;
            t.samples = Matrix(n, spec.n_s);
            for (std::size_t col = 0; col < spec.n_s; ++col) {
                for (double& v : z) {
                    v = normal();
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        acc += roots[c](i, j) * z[j];
                    }
                    acc += spec.noise_scale * normal();
                    t.samples(i, col) = static_cast<float>(acc);
                }
            }
            out.trials.push_back(std::move(t));
        }
    }
    return out;
}

/// Copy of `trial` restricted to samples [start, start + length).
inline Trial crop_trial(const Trial& trial, std::size_t start, std::size_t length)
{
    detail::require(length >= 2, "crop length must be at least 2");
    detail::require(start + length <= trial.n_s(), "crop window exceeds trial length");
    Trial out;
    out.label = trial.label;
    out.sample_rate_hz = trial.sample_rate_hz;
    out.samples = Matrix(trial.n_ch(), length);
    for (std::size_t i = 0; i < trial.n_ch(); ++i) {
        for (std::size_t t = 0; t < length; ++t) {
            out.samples(i, t) = trial.samples(i, start + t);
        }
    }
    return out;
}

} // namespace binbci
