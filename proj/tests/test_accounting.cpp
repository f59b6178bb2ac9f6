#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <binbci/accounting.hpp>

using namespace binbci;

namespace {

double kb(std::uint64_t bytes) { return static_cast<double>(bytes) / 1000.0; }

/// Printed kB with two (or three) decimals.
double rounded(double v, int decimals)
{
    const double p = std::pow(10.0, decimals);
    return std::round(v * p) / p;
}

} // namespace

TEST(Macs, RiemannianReferenceShape)
{
    const RiemannianMacs m = macs_riemannian(22, 875, 43);
    EXPECT_EQ(m.filter, 4138750u);
    EXPECT_EQ(m.covariance, 9519125u);
    EXPECT_EQ(m.whitening, 41624u);
    EXPECT_EQ(m.logm, 3968155u);
    EXPECT_EQ(m.whitening_naive, 2u * 22 * 22 * 22 * 43);
    EXPECT_THROW(macs_riemannian(0, 1, 1), ValidationError);
}

TEST(Macs, LogmRoundsHalfUp)
{
    // 26·n³·n_b/3 for small shapes, computed in exact rationals.
    for (std::uint64_t n = 1; n < 30; ++n) {
        for (std::uint64_t b = 1; b < 5; ++b) {
            const std::uint64_t num = 26 * n * n * n * b;
            const std::uint64_t expect = num / 3 + (num % 3 == 2 ? 1 : 0);
            EXPECT_EQ(macs_riemannian(n, 2, b).logm, expect);
        }
    }
}

TEST(Macs, Projection)
{
    EXPECT_EQ(macs_projection({ProjectionKind::sparse_bipolar, 100000, 10879, 0.9, 0}), 108790000u);
    EXPECT_EQ(macs_projection({ProjectionKind::dense_bipolar, 128, 272, 0.0, 0}), 34816u);
    EXPECT_EQ(macs_projection({ProjectionKind::sparse_bipolar, 1, 1, 0.0, 0}), 1u);
    EXPECT_EQ(macs_projection({ProjectionKind::identity, 7, 7, 0.0, 0}), 0u);
}

TEST(Macs, HammingClassification)
{
    EXPECT_EQ(macs_hamming_classify(100000, 4, 0), 12500u);
    EXPECT_EQ(macs_hamming_classify(256, 32, 32), 288u);
    EXPECT_EQ(macs_hamming_classify(128, 32, 32), 160u);
    EXPECT_EQ(macs_hamming_classify(33, 1, 0), 2u);
}

TEST(Footprint, Conventions)
{
    EXPECT_EQ(footprint_bytes({"svm", 4 * 10879, StoragePrecision::float16}), 87032u);
    EXPECT_EQ(footprint_bytes({"prototypes", 4 * 100000, StoragePrecision::binary}), 50000u);
    EXPECT_EQ(footprint_bytes({"rp", 100000ull * 10879, StoragePrecision::seed32}), 4u);
    EXPECT_EQ(footprint_bytes({"filters", 43 * 5, StoragePrecision::float16}), 430u);
    EXPECT_EQ(footprint_bytes({"odd", 9, StoragePrecision::binary}), 2u);
    const std::vector<StoredTensor> model{{"a", 3, StoragePrecision::float16}, {"b", 16, StoragePrecision::binary}};
    EXPECT_EQ(footprint(model), (std::vector<std::uint64_t>{6, 2}));
}

TEST(Report, FloatReference)
{
    const CostReport r = preset_report("paper-svm-float16");
    EXPECT_EQ(r.stage("Linear SVM").footprint_bytes, 87032u);
    EXPECT_EQ(r.stage("Linear SVM").macs, 43516u);
    EXPECT_EQ(r.total_macs(), 17711170u);
    std::uint64_t front = 0;
    for (const auto& s : riemannian_stages({22, 875, 43})) {
        front += s.macs;
    }
    EXPECT_EQ(front, 17667654u);
}

TEST(Report, BinarizedReferenceMatchesEveryRow)
{
    const CostReport r = preset_report("paper-riemannian-binarized");
    EXPECT_EQ(r.stage("Bandpass filter").macs, 4138750u);
    EXPECT_EQ(r.stage("Covariance").macs, 9519125u);
    EXPECT_EQ(r.stage("Whitening").macs, 41624u);
    EXPECT_EQ(r.stage("Matrix logarithm").macs, 3968155u);
    EXPECT_EQ(r.stage("Projection").macs, 108790000u);
    EXPECT_EQ(r.stage("Classification").macs, 12500u);
    EXPECT_EQ(r.total_macs(), 126470154u);
    EXPECT_EQ(rounded(kb(r.stage("Bandpass filter").footprint_bytes), 2), 0.43);
    EXPECT_EQ(rounded(kb(r.stage("Whitening").footprint_bytes), 2), 20.81);
    EXPECT_EQ(rounded(kb(r.stage("Projection").footprint_bytes), 3), 0.004);
    EXPECT_EQ(rounded(kb(r.stage("Classification").footprint_bytes), 2), 50.00);
    EXPECT_NEAR(kb(r.total_bytes()), 71.25, 0.01);
    for (const auto& s : r.stages) {
        EXPECT_FALSE(s.note.empty()) << s.name;
    }
    EXPECT_NE(r.stage("Whitening").note.find("915728"), std::string::npos);
}

TEST(Report, MemoryPresets)
{
    const CostReport a = preset_report("paper-mann-d128");
    EXPECT_EQ(a.stage("Classification").macs, 160u);
    EXPECT_EQ(a.stage("Projection").macs, 34816u);
    EXPECT_EQ(a.stage("Controller").macs, 13139680u);
    const CostReport b = preset_report("paper-mann-d256");
    EXPECT_EQ(b.stage("Classification").macs, 288u);
    EXPECT_EQ(b.stage("Classification").footprint_bytes, 1024u);
    EXPECT_THROW(preset_report("paper-unknown"), ValidationError);
}

TEST(Report, PresetsAreFrozen)
{
    for (const auto& name : preset_names()) {
        EXPECT_EQ(preset_report(name).to_json(), preset_report(name).to_json());
    }
    EXPECT_EQ(preset_report("paper-riemannian-float16").to_json(), preset_report("paper-svm-float16").to_json());
}

TEST(Report, TotalsAreStageSums)
{
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        const FrontEndShape s{1 + rng() % 30, 2 + rng() % 1000, 1 + rng() % 50};
        const std::uint32_t n_f = static_cast<std::uint32_t>(s.n_b * s.n_ch * (s.n_ch + 1) / 2);
        const ProjectionSpec p{ProjectionKind::sparse_bipolar, static_cast<std::uint32_t>(1 + rng() % 100000), n_f,
                               0.9, 0};
        for (const CostReport& r :
             {report_riemannian_svm_float(s, 4), report_riemannian_svm_binarized(s, p, 4),
              report_binmem(riemannian_stages(s), p, 32, "m")}) {
            std::uint64_t macs = 0, bytes = 0;
            for (const auto& st : r.stages) {
                macs += st.macs;
                bytes += st.footprint_bytes;
            }
            EXPECT_EQ(r.total_macs(), macs);
            EXPECT_EQ(r.total_bytes(), bytes);
            const auto j = r.to_json();
            EXPECT_EQ(j["total"]["macs"].get<std::uint64_t>(), macs);
            EXPECT_EQ(j["stages"].size(), r.stages.size());
        }
    }
}

TEST(Report, TextAndJsonFields)
{
    const CostReport r = preset_report("paper-riemannian-binarized");
    const std::string text = r.to_text();
    EXPECT_NE(text.find("108790000"), std::string::npos);
    EXPECT_NE(text.find("126470154"), std::string::npos);
    const auto j = r.to_json();
    for (const auto& s : j["stages"]) {
        EXPECT_TRUE(s.contains("stage"));
        EXPECT_TRUE(s.contains("macs"));
        EXPECT_TRUE(s.contains("bytes"));
        EXPECT_TRUE(s.contains("note"));
    }
}
