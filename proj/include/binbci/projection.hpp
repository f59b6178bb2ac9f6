#pragma once

// Random projections to Hamming space, rematerialised on demand from a
// 32-bit seed. Entry (row, j) of R is a pure function of (seed, row, j), so
// any row can be regenerated independently and in any order.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "binary_vector.hpp"
#include "error.hpp"
#include "parallel.hpp"

namespace binbci {

enum class ProjectionKind : std::uint8_t {
    sparse_bipolar = 0,
    dense_bipolar = 1,
    /// No projection: E = H(f), d = n_f. Used for direct binarisation.
    identity = 2,
};

inline std::string to_string(ProjectionKind kind)
{
    switch (kind) {
    case ProjectionKind::sparse_bipolar: return "sparse_bipolar";
    case ProjectionKind::dense_bipolar: return "dense_bipolar";
    case ProjectionKind::identity: return "none";
    }
    return "unknown";
}

inline ProjectionKind parse_projection_kind(const std::string& s)
{
    if (s == "sparse_bipolar" || s == "sparse") {
        return ProjectionKind::sparse_bipolar;
    }
    if (s == "dense_bipolar" || s == "dense") {
        return ProjectionKind::dense_bipolar;
    }
    if (s == "none" || s == "identity") {
        return ProjectionKind::identity;
    }
    throw ValidationError("unknown projection kind '" + s + "' (sparse_bipolar, dense_bipolar or none)");
}

struct ProjectionSpec
{
    ProjectionKind kind = ProjectionKind::sparse_bipolar;
    std::uint32_t d = 0;
    std::uint32_t n_f = 0;
    /// Probability of a zero entry.
    double sparsity = 0.0;
    std::uint32_t seed = 0;

    void validate() const
    {
        detail::require(d >= 1, "projection dimension d must be positive");
        detail::require(n_f >= 1, "projection input dimension must be positive");
        detail::require(std::isfinite(sparsity) && sparsity >= 0.0 && sparsity < 1.0,
                        "projection sparsity must lie in [0, 1)");
        if (kind == ProjectionKind::dense_bipolar) {
            detail::require(sparsity == 0.0, "dense bipolar projection requires sparsity 0");
        }
        if (kind == ProjectionKind::identity) {
            detail::require(sparsity == 0.0 && d == n_f, "identity projection requires d == n_f and sparsity 0");
        }
    }

    friend bool operator==(const ProjectionSpec&, const ProjectionSpec&) = default;
};

struct SparseEntry
{
    std::uint32_t index = 0;
    std::int8_t sign = 0;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ull;

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Generator state for one row. Each 64-bit block word covers two columns;
/// column j uses the 32-bit lane j % 2 of block j / 2. Within a lane, the top
/// bit is the sign and the low 31 bits decide zero versus nonzero.
class RowStream
{
public:
    RowStream(const ProjectionSpec& spec, std::uint32_t row)
        : key_(mix64(mix64(std::uint64_t{spec.seed} ^ 0x5851f42d4c957f2dull) + (std::uint64_t{row} + 1) * golden_gamma)),
          zero_threshold_(static_cast<std::uint32_t>(std::floor(spec.sparsity * 2147483648.0)))
    {
    }

    std::uint64_t block(std::uint32_t b) const noexcept { return mix64(key_ + (std::uint64_t{b} + 1) * golden_gamma); }

    int decode(std::uint32_t lane) const noexcept
    {
        if ((lane & 0x7fffffffu) < zero_threshold_) {
            return 0;
        }
        return (lane >> 31) ? 1 : -1;
    }

    /// +1, -1 or 0 for column j.
    int entry(std::uint32_t j) const noexcept
    {
        return decode(static_cast<std::uint32_t>(block(j / 2) >> (32 * (j % 2))));
    }

private:
    std::uint64_t key_;
    std::uint32_t zero_threshold_;
};

inline void check_row(const ProjectionSpec& spec, std::size_t row)
{
    if (row >= spec.d) {
        throw ValidationError("projection row " + std::to_string(row) + " out of range for d=" +
                              std::to_string(spec.d));
    }
}

} // namespace detail

/// Nonzero entries of row `row` of R in ascending column order.
inline std::vector<SparseEntry> materialize_row(const ProjectionSpec& spec, std::size_t row)
{
    spec.validate();
    detail::check_row(spec, row);
    std::vector<SparseEntry> out;
    if (spec.kind == ProjectionKind::identity) {
        out.push_back({static_cast<std::uint32_t>(row), 1});
        return out;
    }
    out.reserve(static_cast<std::size_t>(std::ceil(spec.n_f * (1.0 - spec.sparsity) * 1.2)) + 8);
    const detail::RowStream stream(spec, static_cast<std::uint32_t>(row));
    for (std::uint32_t j = 0; j < spec.n_f; j += 2) {
        const std::uint64_t word = stream.block(j / 2);
        for (std::uint32_t lane = 0; lane < 2 && j + lane < spec.n_f; ++lane) {
            const int e = stream.decode(static_cast<std::uint32_t>(word >> (32 * lane)));
            if (e != 0) {
                out.push_back({j + lane, static_cast<std::int8_t>(e)});
            }
        }
    }
    return out;
}

namespace detail {

inline double row_dot(std::span<const SparseEntry> row, std::span<const double> f) noexcept
{
    double acc = 0.0;
    for (const auto& e : row) {
        if (e.sign > 0) {
            acc += f[e.index];
        } else {
            acc -= f[e.index];
        }
    }
    return acc;
}

} // namespace detail

/// E = H(R f) for a batch of inputs. Each row of R is materialised once and
/// applied to every input; rows are processed in blocks of 64 so each worker
/// owns whole output words.
inline std::vector<BinaryVector> project_binarize(const ProjectionSpec& spec,
                                                  std::span<const std::vector<double>> inputs,
                                                  unsigned threads = 1)
{
    spec.validate();
    for (const auto& f : inputs) {
        if (f.size() != spec.n_f) {
            throw ValidationError("dimension mismatch: projection expects " + std::to_string(spec.n_f) +
                                  " features, got " + std::to_string(f.size()));
        }
    }
    if (spec.kind == ProjectionKind::identity) {
        std::vector<BinaryVector> out;
        out.reserve(inputs.size());
        for (const auto& f : inputs) {
            out.push_back(heaviside(f));
        }
        return out;
    }

    const std::size_t n_words = BinaryVector::word_count(spec.d);
    std::vector<std::vector<std::uint64_t>> words(inputs.size(), std::vector<std::uint64_t>(n_words, 0));
    parallel_for(n_words, threads, [&](std::size_t w) {
        const std::size_t first = w * BinaryVector::word_bits;
        const std::size_t last = std::min<std::size_t>(spec.d, first + BinaryVector::word_bits);
        for (std::size_t row = first; row < last; ++row) {
            const auto entries = materialize_row(spec, row);
            for (std::size_t v = 0; v < inputs.size(); ++v) {
                if (detail::row_dot(entries, inputs[v]) >= 0.0) {
                    words[v][w] |= std::uint64_t{1} << (row - first);
                }
            }
        }
    });

    std::vector<BinaryVector> out;
    out.reserve(inputs.size());
    for (auto& w : words) {
        out.push_back(BinaryVector::from_words(spec.d, std::move(w)));
    }
    return out;
}

inline BinaryVector project_binarize(const ProjectionSpec& spec, std::span<const double> f, unsigned threads = 1)
{
    const std::vector<std::vector<double>> one{std::vector<double>(f.begin(), f.end())};
    return std::move(project_binarize(spec, std::span(one), threads).front());
}

} // namespace binbci
