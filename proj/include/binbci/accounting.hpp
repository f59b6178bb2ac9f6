#pragma once

// MAC and memory-footprint models. Conventions: float weights are counted
// at 2 bytes (float16), binary weights at 1 bit, a rematerialised random
// projection at 4 bytes (its 32-bit seed), 32 Hamming elements = 1 MAC and
// 1 kB = 1000 bytes.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "projection.hpp"

namespace binbci {

struct CostStage
{
    std::string name;
    std::uint64_t macs = 0;
    std::uint64_t footprint_bytes = 0;
    std::string note;
};

struct CostReport
{
    std::string title;
    std::vector<CostStage> stages;
    /// Stages that are printed for comparison but excluded from the totals.
    std::vector<CostStage> annotations;

    std::uint64_t total_macs() const
    {
        std::uint64_t n = 0;
        for (const auto& s : stages) {
            n += s.macs;
        }
        return n;
    }

    std::uint64_t total_bytes() const
    {
        std::uint64_t n = 0;
        for (const auto& s : stages) {
            n += s.footprint_bytes;
        }
        return n;
    }

    const CostStage& stage(const std::string& name) const
    {
        for (const auto& s : stages) {
            if (s.name == name) {
                return s;
            }
        }
        throw ValidationError("cost report has no stage '" + name + "'");
    }

    nlohmann::json to_json() const
    {
        auto encode = [](const std::vector<CostStage>& list) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& s : list) {
                arr.push_back({{"stage", s.name}, {"macs", s.macs}, {"bytes", s.footprint_bytes}, {"note", s.note}});
            }
            return arr;
        };
        return {{"title", title},
                {"stages", encode(stages)},
                {"annotations", encode(annotations)},
                {"total", {{"macs", total_macs()}, {"bytes", total_bytes()}}}};
    }

    std::string to_text() const
    {
        std::ostringstream os;
        os << title << '\n';
        auto line = [&](const std::string& name, std::uint64_t macs, std::uint64_t bytes, const std::string& note) {
            os << "  " << std::left << std::setw(26) << name << std::right << std::setw(14) << macs << " MAC"
               << std::setw(11) << std::fixed << std::setprecision(3) << static_cast<double>(bytes) / 1000.0
               << " kB";
            if (!note.empty()) {
                os << "  " << note;
            }
            os << '\n';
        };
        for (const auto& s : stages) {
            line(s.name, s.macs, s.footprint_bytes, s.note);
        }
        line("total", total_macs(), total_bytes(), "");
        for (const auto& s : annotations) {
            line("(" + s.name + ")", s.macs, s.footprint_bytes, s.note);
        }
        return os.str();
    }
};

struct RiemannianMacs
{
    std::uint64_t filter = 0;
    std::uint64_t covariance = 0;
    /// 2·n_ch²·n_b, the constant the reference cost table implies.
    std::uint64_t whitening = 0;
    /// Two dense n_ch³ products per band.
    std::uint64_t whitening_naive = 0;
    std::uint64_t logm = 0;

    std::uint64_t total() const noexcept { return filter + covariance + whitening + logm; }
};

inline RiemannianMacs macs_riemannian(std::uint64_t n_ch, std::uint64_t n_s, std::uint64_t n_b)
{
    detail::require(n_ch > 0 && n_s > 0 && n_b > 0, "cost model dimensions must be positive");
    RiemannianMacs m;
    m.filter = 5 * n_ch * n_s * n_b;
    m.covariance = n_b * n_s * (n_ch * (n_ch + 1) / 2);
    m.whitening = 2 * n_ch * n_ch * n_b;
    m.whitening_naive = 2 * n_ch * n_ch * n_ch * n_b;
    // Householder tridiagonalisation 8n³/3 plus implicit-shift QR 6n³.
    // (8/3 + 6)·n³·n_b = 26·n³·n_b / 3, rounded half up in integers.
    m.logm = (26 * n_ch * n_ch * n_ch * n_b * 2 + 3) / 6;
    return m;
}

inline std::uint64_t macs_projection(const ProjectionSpec& spec)
{
    spec.validate();
    switch (spec.kind) {
    case ProjectionKind::identity: return 0;
    case ProjectionKind::dense_bipolar: return std::uint64_t{spec.d} * spec.n_f;
    case ProjectionKind::sparse_bipolar:
        return static_cast<std::uint64_t>(std::llround(static_cast<double>(spec.d) * spec.n_f * (1.0 - spec.sparsity)));
    }
    return 0;
}

/// Hamming search over n_prototypes vectors of d bits (packed 32 per MAC) plus
/// one MAC per nonzero of the one-hot readout.
inline std::uint64_t macs_hamming_classify(std::uint64_t d, std::uint64_t n_prototypes, std::uint64_t readout_entries)
{
    return n_prototypes * ((d + 31) / 32) + readout_entries;
}

enum class StoragePrecision { float16, binary, seed32, byte };

struct StoredTensor
{
    std::string name;
    std::uint64_t elements = 0;
    StoragePrecision precision = StoragePrecision::float16;
};

inline std::uint64_t footprint_bytes(const StoredTensor& t)
{
    switch (t.precision) {
    case StoragePrecision::float16: return 2 * t.elements;
    case StoragePrecision::binary: return (t.elements + 7) / 8;
    case StoragePrecision::seed32: return 4;
    case StoragePrecision::byte: return t.elements;
    }
    return 0;
}

/// Bytes per stored tensor, in order.
inline std::vector<std::uint64_t> footprint(std::span<const StoredTensor> model)
{
    std::vector<std::uint64_t> out;
    out.reserve(model.size());
    for (const auto& t : model) {
        out.push_back(footprint_bytes(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report builders

struct FrontEndShape
{
    std::uint64_t n_ch = 0;
    std::uint64_t n_s = 0;
    std::uint64_t n_b = 0;
};

inline std::vector<CostStage> riemannian_stages(const FrontEndShape& s)
{
    const RiemannianMacs m = macs_riemannian(s.n_ch, s.n_s, s.n_b);
    const std::uint64_t n_r = s.n_ch * (s.n_ch + 1) / 2;
    return {
        {"Bandpass filter", m.filter, footprint_bytes({"coeffs", 5 * s.n_b, StoragePrecision::float16}),
         "5 MAC/sample/channel/band; 5 float16 coefficients per band"},
        {"Covariance", m.covariance, 0, "n_b·n_s·n_ch(n_ch+1)/2"},
        {"Whitening", m.whitening, footprint_bytes({"whiteners", s.n_ch * s.n_ch * s.n_b, StoragePrecision::byte}),
         "table convention 2·n_ch²·n_b MAC, n_ch²·n_b bytes; naive: " + std::to_string(m.whitening_naive) +
             " MAC (2 dense products), " + std::to_string(2 * n_r * s.n_b) + " B (packed float16)"},
        {"Matrix logarithm", m.logm, 0, "estimate (8/3 + 6)·n_ch³·n_b"},
    };
}

inline CostReport report_riemannian_svm_float(const FrontEndShape& s, std::uint64_t n_cl)
{
    CostReport r;
    r.title = "Riemannian + SVM (float16)";
    r.stages = riemannian_stages(s);
    const std::uint64_t n_f = s.n_b * s.n_ch * (s.n_ch + 1) / 2;
    r.stages.push_back({"Linear SVM", n_cl * n_f, footprint_bytes({"weights", n_cl * n_f, StoragePrecision::float16}),
                        "n_cl·n_f MAC; float16 weights"});
    return r;
}

inline CostReport report_riemannian_svm_binarized(const FrontEndShape& s, const ProjectionSpec& proj,
                                                  std::uint64_t n_cl)
{
    CostReport r;
    r.title = "Riemannian + RP + SVM binarized";
    r.stages = riemannian_stages(s);
    if (proj.kind != ProjectionKind::identity) {
        r.stages.push_back({"Projection", macs_projection(proj), footprint_bytes({"seed", 1, StoragePrecision::seed32}),
                            "round(d·n_f·(1-s)) add/sub; matrix rematerialised from a 32-bit seed"});
    }
    r.stages.push_back({"Classification", macs_hamming_classify(proj.d, n_cl, 0),
                        footprint_bytes({"prototypes", n_cl * proj.d, StoragePrecision::binary}),
                        "n_cl·d/32 MAC (XOR+popcount); 1 bit per prototype element"});
    return r;
}

inline CostReport report_binmem(const std::vector<CostStage>& front_end, const ProjectionSpec& proj,
                                std::uint64_t n_keys, const std::string& title)
{
    CostReport r;
    r.title = title;
    r.stages = front_end;
    if (proj.kind != ProjectionKind::identity) {
        r.stages.push_back({"Projection", macs_projection(proj), footprint_bytes({"seed", 1, StoragePrecision::seed32}),
                            "matrix rematerialised from a 32-bit seed"});
    }
    r.stages.push_back({"Classification", macs_hamming_classify(proj.d, n_keys, n_keys),
                        footprint_bytes({"keys", n_keys * proj.d, StoragePrecision::binary}),
                        "keys·d/32 Hamming MAC + keys readout MAC; 1 bit per key element"});
    return r;
}

/// Names accepted by preset_report.
inline std::vector<std::string> preset_names()
{
    return {"paper-riemannian-float16", "paper-svm-float16", "paper-riemannian-binarized", "paper-mann-d128",
            "paper-mann-d256"};
}

/// Frozen cost tables for the reference configurations: 22 channels, 875
/// samples, 43 bands, 4 classes; d = 100 000 with s = 0.9 for the binarized
/// SVM; 8-shot/4-way memories behind a 272-feature controller.
inline CostReport preset_report(const std::string& name)
{
    const FrontEndShape ref{22, 875, 43};
    constexpr std::uint64_t n_cl = 4;
    if (name == "paper-riemannian-float16" || name == "paper-svm-float16") {
        return report_riemannian_svm_float(ref, n_cl);
    }
    if (name == "paper-riemannian-binarized") {
        const ProjectionSpec proj{ProjectionKind::sparse_bipolar, 100000, 10879, 0.9, 0};
        return report_riemannian_svm_binarized(ref, proj, n_cl);
    }
    if (name == "paper-mann-d128" || name == "paper-mann-d256") {
        const std::uint32_t d = name == "paper-mann-d128" ? 128 : 256;
        const std::vector<CostStage> controller{
            {"Controller", 13139680, 3070, "reference constant for the convolutional controller (not computed)"}};
        const ProjectionSpec proj{ProjectionKind::dense_bipolar, d, 272, 0.0, 0};
        return report_binmem(controller, proj, 32, "Binary memory, 8-shot/4-way, d=" + std::to_string(d));
    }
    throw ValidationError("unknown preset '" + name + "'");
}

} // namespace binbci
