#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include <binbci/riemann.hpp>
#include <binbci/spd.hpp>

#include "eigen_oracles.hpp"
#include "oracles.hpp"

using namespace binbci;

namespace {

Matrix random_orthogonal(std::mt19937_64& rng, std::size_t n)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(oracle::to_eigen(oracle::random_matrix(rng, n, n)));
    return oracle::from_eigen(qr.householderQ() * Eigen::MatrixXd::Identity(n, n));
}

Matrix from_spectrum(const Matrix& q, const std::vector<double>& lambda)
{
    return oracle::naive_product(oracle::naive_product(q, Matrix::diagonal(lambda)), q.transposed());
}

double orthogonality_error(const Matrix& q)
{
    const Matrix qtq = oracle::naive_product(q.transposed(), q);
    double worst = 0.0;
    for (std::size_t i = 0; i < q.cols(); ++i) {
        for (std::size_t j = 0; j < q.cols(); ++j) {
            worst = std::max(worst, std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

SpdMatrix spd(const Matrix& m) { return SpdMatrix::from_matrix(m); }

} // namespace

TEST(Covariance, ZeroSignal)
{
    const SpdMatrix c = covariance(Matrix(2, 5), 0.1);
    EXPECT_DOUBLE_EQ(c(0, 0), 0.025);
    EXPECT_DOUBLE_EQ(c(1, 1), 0.025);
    EXPECT_EQ(c(0, 1), 0.0);
}

TEST(Covariance, IdentitySignalNoRegularisation)
{
    EXPECT_EQ(covariance(Matrix::identity(2), 0.0).dense(), Matrix::identity(2));
}

TEST(Covariance, MatchesBruteForce)
{
    std::mt19937_64 rng(1);
    const Matrix x = oracle::random_matrix(rng, 22, 875);
    const Matrix c = covariance(x, 0.1).dense();
    const Matrix ref = oracle::brute_covariance(x, 0.1);
    for (std::size_t i = 0; i < 22; ++i) {
        for (std::size_t j = 0; j < 22; ++j) {
            EXPECT_NEAR(c(i, j), ref(i, j), 1e-12 * std::max(1.0, std::abs(ref(i, j))));
        }
    }
}

TEST(Covariance, RankDeficientWithoutRegularisationIsReported)
{
    Matrix x(3, 2, {1, 2, 1, 2, 1, 2});
    EXPECT_THROW(covariance(x, 0.0), ValidationError);
    EXPECT_THROW(covariance(Matrix(2, 1), 0.1), ValidationError);
}

TEST(SpdMatrix, RejectsAsymmetricAndIndefinite)
{
    EXPECT_THROW(SpdMatrix::from_matrix(Matrix(2, 2, {1, 0.5, 0.2, 1})), ValidationError);
    EXPECT_THROW(SpdMatrix::from_matrix(Matrix(2, 2, {1, 2, 2, 1})), ValidationError);
    EXPECT_THROW(SpdMatrix::from_matrix(Matrix(2, 2, {0, 0, 0, 0})), ValidationError);
    const SpdMatrix ok = SpdMatrix::from_matrix(Matrix(2, 2, {2, 1, 1, 2}));
    EXPECT_EQ(ok.packed().size(), 3u);
    EXPECT_EQ(SpdMatrix::from_packed(2, {ok.packed().begin(), ok.packed().end()}), ok);
}

TEST(Eigen, DiagonalInput)
{
    const EigenDecomposition e = eigendecompose(Matrix::diagonal(std::vector<double>{3, 1, 2}));
    EXPECT_EQ(e.eigenvalues, (std::vector<double>{1, 2, 3}));
    for (std::size_t j = 0; j < 3; ++j) {
        int nonzero = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double v = e.eigenvectors(i, j);
            EXPECT_TRUE(v == 0.0 || std::abs(v) == 1.0);
            nonzero += v != 0.0;
        }
        EXPECT_EQ(nonzero, 1);
    }
    EXPECT_EQ(e.eigenvectors(1, 0), 1.0);
    EXPECT_EQ(e.eigenvectors(2, 1), 1.0);
    EXPECT_EQ(e.eigenvectors(0, 2), 1.0);
}

TEST(Eigen, WideSpectrumRecoveredToNormRelativeAccuracy)
{
    // Relative to ‖A‖ = 1e6; no backward-stable dense solver resolves 1e-6
    // to 1e-9 of itself from a rounded A.
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix q = random_orthogonal(rng, 3);
        const EigenDecomposition e = eigendecompose(from_spectrum(q, {1e-6, 1.0, 1e6}));
        EXPECT_NEAR(e.eigenvalues[0], 1e-6, 1e-9 * 1e6);
        EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-9);
        EXPECT_NEAR(e.eigenvalues[2], 1e6, 1e-9 * 1e6);
    }
}

TEST(Eigen, ModerateSpectrumRecoveredToElementwiseRelativeAccuracy)
{
    std::mt19937_64 rng(3);
    const std::vector<double> lambda{0.01, 0.5, 1.0, 3.0, 100.0};
    for (int trial = 0; trial < 20; ++trial) {
        const EigenDecomposition e = eigendecompose(from_spectrum(random_orthogonal(rng, 5), lambda));
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            EXPECT_NEAR(e.eigenvalues[i], lambda[i], 1e-9 * std::max(lambda[i], 1.0));
        }
    }
}

TEST(Eigen, RandomSymmetricReconstructionAndOrthogonality)
{
    std::mt19937_64 rng(4);
    for (std::size_t n : {1u, 2u, 5u, 22u, 40u, 64u}) {
        const Matrix a = oracle::random_symmetric(rng, n);
        const EigenDecomposition e = eigendecompose(a);
        EXPECT_TRUE(std::is_sorted(e.eigenvalues.begin(), e.eigenvalues.end()));
        EXPECT_LE(orthogonality_error(e.eigenvectors), 1e-10) << n;
        EXPECT_LE(oracle::rel_frobenius(from_spectrum(e.eigenvectors, e.eigenvalues), a), 1e-10) << n;
        double sum = 0.0;
        for (double v : e.eigenvalues) {
            sum += v;
        }
        EXPECT_NEAR(sum, trace(a), 1e-8 * std::max(1.0, frobenius_norm(a)));
        const auto ref = oracle::eigenvalues(a);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(e.eigenvalues[i], ref(i), 1e-10 * frobenius_norm(a));
        }
    }
}

TEST(Eigen, DeterminantMatchesCholesky)
{
    std::mt19937_64 rng(5);
    for (std::size_t n : {3u, 10u, 22u}) {
        const Matrix c = oracle::random_spd(rng, n, 1.0);
        const EigenDecomposition e = eigendecompose(c);
        double log_det_eig = 0.0;
        for (double v : e.eigenvalues) {
            log_det_eig += std::log(v);
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(oracle::to_eigen(c));
        double log_det_chol = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            log_det_chol += 2.0 * std::log(llt.matrixL()(i, i));
        }
        // Relative on det = exp(log det).
        EXPECT_NEAR(std::exp(log_det_eig - log_det_chol), 1.0, 1e-8);
    }
}

TEST(Eigen, SignConventionAndDeterminism)
{
    std::mt19937_64 rng(6);
    const Matrix a = oracle::random_symmetric(rng, 12);
    const EigenDecomposition e1 = eigendecompose(a), e2 = eigendecompose(a);
    EXPECT_EQ(e1.eigenvalues, e2.eigenvalues);
    EXPECT_EQ(e1.eigenvectors, e2.eigenvectors);
    for (std::size_t j = 0; j < 12; ++j) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < 12; ++i) {
            if (std::abs(e1.eigenvectors(i, j)) > std::abs(e1.eigenvectors(arg, j))) {
                arg = i;
            }
        }
        EXPECT_GT(e1.eigenvectors(arg, j), 0.0);
    }
}

TEST(Eigen, RepeatedEigenvaluesAndZeroMatrix)
{
    std::mt19937_64 rng(7);
    const Matrix q = random_orthogonal(rng, 6);
    const Matrix a = from_spectrum(q, {2, 2, 2, 5, 5, 9});
    const EigenDecomposition e = eigendecompose(a);
    EXPECT_LE(orthogonality_error(e.eigenvectors), 1e-10);
    EXPECT_LE(oracle::rel_frobenius(from_spectrum(e.eigenvectors, e.eigenvalues), a), 1e-10);
    const EigenDecomposition z = eigendecompose(Matrix(4, 4));
    EXPECT_EQ(z.eigenvalues, std::vector<double>(4, 0.0));
    EXPECT_EQ(z.eigenvectors, Matrix::identity(4));
}

TEST(Eigen, RejectsNonSymmetricAndNonFinite)
{
    EXPECT_THROW(eigendecompose(Matrix(2, 2, {1, 2, 3, 4})), ValidationError);
    EXPECT_THROW(eigendecompose(Matrix(2, 3)), ValidationError);
    EXPECT_THROW(eigendecompose(Matrix(1, 1, {std::nan("")})), ValidationError);
}

TEST(Logm, IdentityAndDiagonal)
{
    EXPECT_EQ(max_abs(logm(spd(Matrix::identity(4)))), 0.0);
    const double e = std::numbers::e;
    const Matrix l = logm(spd(Matrix::diagonal(std::vector<double>{e, e * e})));
    EXPECT_NEAR(l(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(l(1, 1), 2.0, 1e-15);
    EXPECT_EQ(l(0, 1), 0.0);
}

TEST(Logm, ExpmRoundTripAgainstPadeOracle)
{
    std::mt19937_64 rng(8);
    for (std::size_t n : {2u, 8u, 22u}) {
        const Matrix c = oracle::random_spd(rng, n);
        const Matrix l = logm(spd(c));
        EXPECT_TRUE(is_symmetric(l));
        EXPECT_LE(oracle::rel_frobenius(oracle::expm(l), c), 1e-8) << n;
    }
}

TEST(Logm, LogOfExpOnBoundedSpectrum)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> lambda(6);
        for (double& v : lambda) {
            v = u(rng);
        }
        const Matrix s = from_spectrum(random_orthogonal(rng, 6), lambda);
        const Matrix back = logm(SpdMatrix::from_matrix(symmetrized(oracle::expm(s))));
        EXPECT_LE(oracle::rel_frobenius(back, s), 1e-8);
        EXPECT_LE(oracle::rel_frobenius(expm_symmetric(s).dense(), oracle::expm(s)), 1e-10);
    }
}

TEST(InvSqrtm, ClosedForms)
{
    const Matrix a = inv_sqrtm(spd(Matrix::diagonal(std::vector<double>{4, 4}))).dense();
    EXPECT_DOUBLE_EQ(a(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(a(1, 1), 0.5);
    const Matrix b = inv_sqrtm(spd(Matrix::diagonal(std::vector<double>{9, 0.25}))).dense();
    EXPECT_NEAR(b(0, 0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(b(1, 1), 2.0, 1e-15);
}

TEST(InvSqrtm, DefiningPropertyAndSqrtOracle)
{
    std::mt19937_64 rng(10);
    for (std::size_t n : {3u, 16u, 22u}) {
        const Matrix c = oracle::random_spd(rng, n);
        const Matrix w = inv_sqrtm(spd(c)).dense();
        const Matrix white = oracle::naive_product(oracle::naive_product(w, c), w);
        EXPECT_LE(oracle::abs_frobenius(white, Matrix::identity(n)), 1e-8);
        EXPECT_LE(oracle::rel_frobenius(sqrtm(spd(c)).dense(), oracle::sqrtm(c)), 1e-10);
    }
}

TEST(GeometricMean, FixedPointAndCommutingInputs)
{
    std::mt19937_64 rng(11);
    const SpdMatrix c = spd(oracle::random_spd(rng, 5));
    const std::vector<SpdMatrix> same{c, c};
    const auto r = geometric_mean(same);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(oracle::abs_frobenius(r.mean.dense(), c.dense()), 1e-10);

    const std::vector<SpdMatrix> diag{spd(Matrix::diagonal(std::vector<double>{1, 4})),
                                      spd(Matrix::diagonal(std::vector<double>{4, 1}))};
    const Matrix g = geometric_mean(diag).mean.dense();
    EXPECT_NEAR(g(0, 0), 2.0, 1e-10);
    EXPECT_NEAR(g(1, 1), 2.0, 1e-10);
    EXPECT_NEAR(g(0, 1), 0.0, 1e-12);
}

TEST(GeometricMean, TwoMatrixClosedForm)
{
    std::mt19937_64 rng(12);
    for (std::size_t n : {2u, 6u, 12u}) {
        const Matrix a = oracle::random_spd(rng, n), b = oracle::random_spd(rng, n);
        const std::vector<SpdMatrix> pair{spd(a), spd(b)};
        const auto r = geometric_mean(pair);
        EXPECT_TRUE(r.converged);
        EXPECT_LE(oracle::rel_frobenius(r.mean.dense(), oracle::two_matrix_mean(a, b)), 1e-8) << n;
    }
}

TEST(GeometricMean, PermutationInvariant)
{
    std::mt19937_64 rng(13);
    std::vector<SpdMatrix> covs;
    for (int i = 0; i < 9; ++i) {
        covs.push_back(spd(oracle::random_spd(rng, 6, 0.5)));
    }
    const Matrix base = geometric_mean(covs).mean.dense();
    for (int k = 0; k < 5; ++k) {
        std::shuffle(covs.begin(), covs.end(), rng);
        EXPECT_LE(oracle::abs_frobenius(geometric_mean(covs).mean.dense(), base), 1e-8);
    }
}

TEST(GeometricMean, IterationBudgetIsReported)
{
    std::mt19937_64 rng(14);
    std::vector<SpdMatrix> covs;
    for (int i = 0; i < 4; ++i) {
        covs.push_back(spd(oracle::random_spd(rng, 4, 0.01)));
    }
    const auto r = geometric_mean(covs, 1e-30, 1);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 1u);
    EXPECT_TRUE(all_finite(r.mean.dense()));
    EXPECT_THROW(geometric_mean(std::vector<SpdMatrix>{}), ValidationError);
}

TEST(HalfVectorize, KnownVectors)
{
    const auto a = half_vectorize(Matrix::identity(2));
    EXPECT_EQ(a, (std::vector<double>{1, 0, 1}));
    const auto b = half_vectorize(Matrix(2, 2, {1, 2, 2, 3}));
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[0], 1.0);
    EXPECT_DOUBLE_EQ(b[1], 2.0 * std::sqrt(2.0));
    EXPECT_EQ(b[2], 3.0);
    EXPECT_EQ(half_vectorize(Matrix::identity(22)).size(), 253u);
}

TEST(HalfVectorize, LowerTriangleRowMajorOrder)
{
    const auto v = half_vectorize(Matrix(3, 3, {1, 2, 4, 2, 3, 5, 4, 5, 6}));
    const double r2 = std::sqrt(2.0);
    EXPECT_EQ(v, (std::vector<double>{1, 2 * r2, 3, 4 * r2, 5 * r2, 6}));
}

TEST(HalfVectorize, PreservesNorm)
{
    std::mt19937_64 rng(15);
    for (int k = 0; k < 100; ++k) {
        const Matrix s = oracle::random_symmetric(rng, 1 + k % 23);
        double sq = 0.0;
        for (double v : half_vectorize(s)) {
            sq += v * v;
        }
        EXPECT_LE(std::abs(std::sqrt(sq) - frobenius_norm(s)), 1e-12 * frobenius_norm(s));
    }
}

TEST(TangentFeatures, ToyExample)
{
    const double e = std::numbers::e;
    const auto f = tangent_features(spd(Matrix::diagonal(std::vector<double>{e, e})), Matrix::identity(2));
    ASSERT_EQ(f.size(), 3u);
    EXPECT_NEAR(f[0], 1.0, 1e-15);
    EXPECT_EQ(f[1], 0.0);
    EXPECT_NEAR(f[2], 1.0, 1e-15);
}

TEST(TangentFeatures, VanishAtTheReference)
{
    std::mt19937_64 rng(16);
    const SpdMatrix c = spd(oracle::random_spd(rng, 8));
    const RiemannianKernel kernel({c});
    for (double v : tangent_features(c, kernel.whiteners[0])) {
        EXPECT_NEAR(v, 0.0, 1e-12);
    }
}

namespace {

Dataset small_set(std::uint64_t seed, std::size_t n_trials, std::size_t n_ch)
{
    SynthSpec spec;
    spec.n_cl = 2;
    spec.n_ch = static_cast<std::uint32_t>(n_ch);
    spec.n_s = 120;
    spec.trials_per_class = static_cast<std::uint32_t>((n_trials + 1) / 2);
    spec.seed = seed;
    Dataset ds = generate_synthetic(spec);
    ds.trials.resize(n_trials);
    return ds;
}

} // namespace

TEST(RiemannianFeatures, LengthForReferenceConfiguration)
{
    std::mt19937_64 rng(17);
    Trial t;
    t.samples = oracle::random_matrix(rng, 22, 300);
    t.sample_rate_hz = 250.0;
    const FilterBank bank = FilterBank::design(default_bands(), 250.0);
    std::vector<SpdMatrix> refs(43, spd(Matrix::identity(22)));
    const FeatureVector f = riemannian_features(t, bank, refs, 0.1);
    EXPECT_EQ(f.size(), 10879u);
    EXPECT_EQ(f.per_band, 253u);
    EXPECT_EQ(f.n_bands, 43u);
}

TEST(RiemannianFeatures, ZeroWhenEveryBandEqualsItsReference)
{
    const Dataset ds = small_set(1, 1, 4);
    const FilterBank bank = FilterBank::design({{8, 12}, {12, 20}, {20, 30}}, ds.sample_rate_hz());
    const RiemannianKernel kernel(band_covariances(ds.trials[0], bank, 0.1));
    for (double v : riemannian_features(ds.trials[0], bank, kernel, 0.1).values) {
        EXPECT_NEAR(v, 0.0, 1e-12);
    }
}

TEST(RiemannianFeatures, BandMajorLayoutAndThreadInvariance)
{
    const Dataset ds = small_set(2, 3, 4);
    const FilterBank bank = FilterBank::design({{8, 12}, {12, 20}}, ds.sample_rate_hz());
    const RiemannianKernel kernel(fit_reference(ds, bank, 0.1));
    const FeatureVector f = riemannian_features(ds.trials[1], bank, kernel, 0.1, 1);
    EXPECT_EQ(f.values, riemannian_features(ds.trials[1], bank, kernel, 0.1, 2).values);
    const auto covs = band_covariances(ds.trials[1], bank, 0.1);
    const auto second = tangent_features(covs[1], kernel.whiteners[1]);
    const auto band = f.band(1);
    EXPECT_TRUE(std::equal(band.begin(), band.end(), second.begin()));
}

TEST(RiemannianFeatures, ChannelMismatchIsReported)
{
    const Dataset ds = small_set(3, 2, 4);
    const FilterBank bank = FilterBank::design({{8, 12}}, ds.sample_rate_hz());
    const RiemannianKernel kernel(fit_reference(ds, bank, 0.1));
    const Dataset other = small_set(3, 1, 3);
    try {
        riemannian_features(other.trials[0], bank, kernel, 0.1);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("feature dimension mismatch"), std::string::npos);
    }
}

TEST(FitReference, SingleTrialAndIdenticalTrials)
{
    Dataset ds = small_set(4, 1, 3);
    const FilterBank bank = FilterBank::design({{8, 12}, {20, 30}}, ds.sample_rate_hz());
    const auto covs = band_covariances(ds.trials[0], bank, 0.1);
    auto refs = fit_reference(ds, bank, 0.1);
    for (std::size_t b = 0; b < bank.size(); ++b) {
        EXPECT_LE(oracle::abs_frobenius(refs[b].dense(), covs[b].dense()), 1e-12);
    }
    ds.trials.push_back(ds.trials[0]);
    ds.trials.push_back(ds.trials[0]);
    refs = fit_reference(ds, bank, 0.1);
    for (std::size_t b = 0; b < bank.size(); ++b) {
        EXPECT_LE(oracle::rel_frobenius(refs[b].dense(), covs[b].dense()), 1e-10);
    }
}

TEST(FitReference, TwoTrialsMatchGeodesicMidpoint)
{
    const Dataset ds = small_set(5, 2, 4);
    const FilterBank bank = FilterBank::design({{8, 12}, {20, 30}}, ds.sample_rate_hz());
    const auto refs = fit_reference(ds, bank, 0.1);
    const auto a = band_covariances(ds.trials[0], bank, 0.1);
    const auto b = band_covariances(ds.trials[1], bank, 0.1);
    for (std::size_t k = 0; k < bank.size(); ++k) {
        EXPECT_LE(oracle::rel_frobenius(refs[k].dense(), oracle::two_matrix_mean(a[k].dense(), b[k].dense())), 1e-8);
    }
}

TEST(FitReference, IgnoresLabels)
{
    Dataset ds = small_set(6, 4, 3);
    const FilterBank bank = FilterBank::design({{8, 12}}, ds.sample_rate_hz());
    const auto refs = fit_reference(ds, bank, 0.1);
    for (auto& t : ds.trials) {
        t.label = 1 - t.label;
    }
    EXPECT_EQ(fit_reference(ds, bank, 0.1)[0], refs[0]);
}
