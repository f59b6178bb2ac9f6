#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace binbci {

/// Bit-packed point of the d-dimensional Hamming space. Bit i set means
/// component i is 1 (bipolar +1); clear means 0 (bipolar -1). Bits at
/// positions >= d are always zero.
class BinaryVector
{
public:
    static constexpr std::size_t word_bits = 64;

    BinaryVector() = default;

    explicit BinaryVector(std::size_t d) : d_(d), words_(word_count(d), 0) {}

    static std::size_t word_count(std::size_t d) noexcept { return (d + word_bits - 1) / word_bits; }

    /// Padding bits of `words` are cleared.
    static BinaryVector from_words(std::size_t d, std::vector<std::uint64_t> words)
    {
        detail::require(words.size() == word_count(d), "word count does not match dimension");
        BinaryVector v;
        v.d_ = d;
        v.words_ = std::move(words);
        v.clear_padding();
        return v;
    }

    static BinaryVector from_bits(std::span<const std::uint8_t> bits)
    {
        BinaryVector v(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            v.set(i, bits[i] != 0);
        }
        return v;
    }

    std::size_t size() const noexcept { return d_; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    bool get(std::size_t i) const noexcept { return (words_[i / word_bits] >> (i % word_bits)) & 1u; }

    /// +1 or -1.
    int bipolar(std::size_t i) const noexcept { return get(i) ? 1 : -1; }

    void set(std::size_t i, bool bit)
    {
        check_index(i);
        const std::uint64_t mask = std::uint64_t{1} << (i % word_bits);
        if (bit) {
            words_[i / word_bits] |= mask;
        } else {
            words_[i / word_bits] &= ~mask;
        }
    }

    void flip(std::size_t i)
    {
        check_index(i);
        words_[i / word_bits] ^= std::uint64_t{1} << (i % word_bits);
    }

    BinaryVector complement() const
    {
        BinaryVector out = *this;
        for (auto& w : out.words_) {
            w = ~w;
        }
        out.clear_padding();
        return out;
    }

    std::size_t popcount() const noexcept
    {
        std::size_t n = 0;
        for (auto w : words_) {
            n += static_cast<std::size_t>(std::popcount(w));
        }
        return n;
    }

    /// True iff every bit at position >= d is zero.
    bool padding_clear() const noexcept
    {
        const std::size_t tail = d_ % word_bits;
        return tail == 0 || words_.empty() || (words_.back() >> tail) == 0;
    }

    friend bool operator==(const BinaryVector&, const BinaryVector&) = default;

private:
    void check_index(std::size_t i) const
    {
        if (i >= d_) {
            throw ValidationError("bit index " + std::to_string(i) + " out of range for dimension " +
                                  std::to_string(d_));
        }
    }

    void clear_padding() noexcept
    {
        const std::size_t tail = d_ % word_bits;
        if (tail != 0 && !words_.empty()) {
            words_.back() &= (std::uint64_t{1} << tail) - 1;
        }
    }

    std::size_t d_ = 0;
    std::vector<std::uint64_t> words_;
};

struct HammingDistance
{
    std::size_t raw = 0;
    double normalized = 0.0;
};

/// Popcount of the XOR, word by word.
inline std::size_t hamming_raw(const BinaryVector& a, const BinaryVector& b)
{
    if (a.size() != b.size()) {
        throw ValidationError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    const auto wa = a.words();
    const auto wb = b.words();
    std::size_t n = 0;
    for (std::size_t i = 0; i < wa.size(); ++i) {
        n += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
    }
    return n;
}

inline HammingDistance hamming(const BinaryVector& a, const BinaryVector& b)
{
    const std::size_t raw = hamming_raw(a, b);
    return {raw, a.size() == 0 ? 0.0 : static_cast<double>(raw) / static_cast<double>(a.size())};
}

/// Cosine similarity of the bipolar views: 1 - 2·d_h.
inline double cosine_from_hamming(double normalized)
{
    detail::require(normalized >= 0.0 && normalized <= 1.0, "normalized Hamming distance must lie in [0, 1]");
    return 1.0 - 2.0 * normalized;
}

/// Component-wise Heaviside step, H(0) = 1.
inline BinaryVector heaviside(std::span<const double> z)
{
    BinaryVector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] >= 0.0) {
            out.set(i, true);
        }
    }
    return out;
}

} // namespace binbci
