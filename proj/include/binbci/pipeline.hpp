#pragma once

// End-to-end fit / predict / evaluate for the filter bank -> Riemannian
// features -> projection -> binary classifier chain, plus the MDL1 model
// bundle format.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "accounting.hpp"
#include "binary_io.hpp"
#include "binmem.hpp"
#include "bsvm.hpp"
#include "dataio.hpp"
#include "filterbank.hpp"
#include "half.hpp"
#include "projection.hpp"
#include "riemann.hpp"

namespace binbci {

enum class Backend : std::uint8_t { svm_float = 0, svm_binarized = 1, binmem = 2 };

inline std::string to_string(Backend b)
{
    switch (b) {
    case Backend::svm_float: return "svm_float";
    case Backend::svm_binarized: return "svm_binarized";
    case Backend::binmem: return "binmem";
    }
    return "unknown";
}

inline Backend parse_backend(const std::string& s)
{
    if (s == "svm_float") {
        return Backend::svm_float;
    }
    if (s == "svm_binarized") {
        return Backend::svm_binarized;
    }
    if (s == "binmem") {
        return Backend::binmem;
    }
    throw ValidationError("unknown backend '" + s + "' (svm_float, svm_binarized or binmem)");
}

struct Crop
{
    std::uint32_t start = 0;
    std::uint32_t length = 0;

    friend bool operator==(const Crop&, const Crop&) = default;
};

struct PipelineConfig
{
    /// Empty means default_bands().
    std::vector<BandSpec> bands;
    double alpha = 0.1;
    ProjectionKind projection = ProjectionKind::sparse_bipolar;
    std::uint32_t dim = 100000;
    double sparsity = 0.9;
    std::uint32_t seed = 42;
    Backend backend = Backend::svm_binarized;
    double reg_c = 1.0;
    double beta = default_softabs_beta;
    std::uint32_t shots = 8;
    std::optional<Crop> crop;
    /// Worker threads; never affects results.
    unsigned threads = 1;

    void validate() const
    {
        detail::require(std::isfinite(alpha) && alpha >= 0.0, "config: alpha must be nonnegative");
        detail::require(std::isfinite(reg_c) && reg_c > 0.0, "config: reg_c must be positive");
        detail::require(std::isfinite(beta) && beta > 0.0, "config: beta must be positive");
        detail::require(shots >= 1, "config: shots must be positive");
        detail::require(threads >= 1, "config: threads must be positive");
        if (projection != ProjectionKind::identity) {
            detail::require(dim >= 1, "config: dim must be positive");
            detail::require(std::isfinite(sparsity) && sparsity >= 0.0 && sparsity < 1.0,
                            "config: sparsity must lie in [0, 1)");
            detail::require(projection != ProjectionKind::dense_bipolar || sparsity == 0.0,
                            "config: dense_bipolar projection requires sparsity = 0");
        }
        if (crop) {
            detail::require(crop->length >= 2, "config: crop length must be at least 2");
        }
    }
};

/// Plain `key = value` text; '#' starts a comment. A relative `bands` path is
/// resolved against `base_dir`.
inline PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {})
{
    PipelineConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::uint32_t> crop_start, crop_length;
    bool sparsity_set = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto view = detail::trim(line);
        if (view.empty()) {
            continue;
        }
        const auto eq = view.find('=');
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        detail::require(eq != std::string_view::npos, where + "expected key = value");
        const std::string key(detail::trim(view.substr(0, eq)));
        const std::string value(detail::trim(view.substr(eq + 1)));
        detail::require(!value.empty(), where + "missing value for '" + key + "'");
        auto number = [&]() { return detail::parse_number(value, line_no); };
        auto integer = [&]() {
            const double v = number();
            detail::require(v >= 0.0 && v <= 4294967295.0 && std::floor(v) == v,
                            where + "'" + key + "' must be a nonnegative integer");
            return static_cast<std::uint32_t>(v);
        };
        if (key == "bands") {
            if (value != "default") {
                std::filesystem::path p(value);
                if (p.is_relative() && !base_dir.empty()) {
                    p = base_dir / p;
                }
                cfg.bands = read_bands(p);
            }
        } else if (key == "alpha") {
            cfg.alpha = number();
        } else if (key == "projection") {
            cfg.projection = parse_projection_kind(value);
        } else if (key == "dim" || key == "d") {
            cfg.dim = integer();
        } else if (key == "sparsity") {
            cfg.sparsity = number();
            sparsity_set = true;
        } else if (key == "seed") {
            cfg.seed = integer();
        } else if (key == "backend") {
            cfg.backend = parse_backend(value);
        } else if (key == "reg_c") {
            cfg.reg_c = number();
        } else if (key == "beta") {
            cfg.beta = number();
        } else if (key == "shots") {
            cfg.shots = integer();
        } else if (key == "crop_start") {
            crop_start = integer();
        } else if (key == "crop_length") {
            crop_length = integer();
        } else if (key == "threads") {
            cfg.threads = integer();
        } else {
            throw ValidationError(where + "unknown key '" + key + "'");
        }
    }
    if (cfg.projection != ProjectionKind::sparse_bipolar && !sparsity_set) {
        cfg.sparsity = 0.0;
    }
    detail::require(crop_start.has_value() == crop_length.has_value(),
                    "config: crop_start and crop_length must be given together");
    if (crop_start) {
        cfg.crop = Crop{*crop_start, *crop_length};
    }
    cfg.validate();
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path.string() + "'");
    }
    return parse_config(in, path.parent_path());
}

/// Everything needed to classify a raw trial.
struct ModelBundle
{
    Backend backend = Backend::svm_binarized;
    std::uint32_t n_ch = 0;
    std::uint32_t n_s = 0;
    std::uint32_t n_cl = 0;
    double alpha = 0.1;
    std::optional<Crop> crop;
    FilterBank bank;
    RiemannianKernel kernel;
    ProjectionSpec projection;
    /// svm_float: weights rounded to float16, exactly as persisted.
    SvmModel float_model;
    BinarizedSvm binary_model;
    KeyValueMemory memory;

    std::size_t feature_dim() const noexcept { return bank.size() * features_per_band(n_ch); }

    /// Input length after cropping.
    std::uint32_t window() const noexcept { return crop ? crop->length : n_s; }
};

namespace detail {

inline Trial prepare(const ModelBundle& m, const Trial& trial)
{
    if (trial.n_ch() != m.n_ch) {
        throw ValidationError("feature dimension mismatch: model expects " + std::to_string(m.n_ch) +
                              " channels (" + std::to_string(m.feature_dim()) + " features), trial has " +
                              std::to_string(trial.n_ch()));
    }
    if (trial.sample_rate_hz != m.bank.sample_rate_hz()) {
        throw ValidationError("sample-rate mismatch: model expects " + std::to_string(m.bank.sample_rate_hz()) +
                              " Hz, trial has " + std::to_string(trial.sample_rate_hz) + " Hz");
    }
    if (m.crop) {
        return crop_trial(trial, m.crop->start, m.crop->length);
    }
    return trial;
}

inline std::vector<std::vector<double>> extract_features(const ModelBundle& m, std::span<const Trial> trials,
                                                         unsigned threads)
{
    std::vector<std::vector<double>> out(trials.size());
    parallel_for(trials.size(), threads, [&](std::size_t i) {
        out[i] = riemannian_features(prepare(m, trials[i]), m.bank, m.kernel, m.alpha).values;
    });
    return out;
}

inline SvmModel to_float16(SvmModel model)
{
    for (auto& w : model.weights) {
        for (double& v : w) {
            v = round_to_half(v);
        }
    }
    return model;
}

} // namespace detail

/// Trains a bundle on `train`. Deterministic in (config, train) for any thread count.
inline ModelBundle fit(const PipelineConfig& config, const Dataset& train)
{
    config.validate();
    train.validate(true);
    detail::require(train.n_cl >= 2, "training needs at least two classes");

    ModelBundle m;
    m.backend = config.backend;
    m.n_ch = static_cast<std::uint32_t>(train.n_ch());
    m.n_s = static_cast<std::uint32_t>(train.n_s());
    m.n_cl = train.n_cl;
    m.alpha = config.alpha;
    m.crop = config.crop;
    if (m.crop) {
        detail::require(std::uint64_t{m.crop->start} + m.crop->length <= m.n_s, "crop window exceeds trial length");
    }
    m.bank = FilterBank::design(config.bands.empty() ? default_bands() : config.bands, train.sample_rate_hz());

    const unsigned threads = config.threads;
    Dataset cropped;
    const Dataset* source = &train;
    if (m.crop) {
        cropped.n_cl = train.n_cl;
        for (const auto& t : train.trials) {
            cropped.trials.push_back(crop_trial(t, m.crop->start, m.crop->length));
        }
        source = &cropped;
    }
    m.kernel = RiemannianKernel(fit_reference(*source, m.bank, m.alpha, threads));

    const auto n_f = static_cast<std::uint32_t>(m.feature_dim());
    m.projection = config.projection == ProjectionKind::identity
                       ? ProjectionSpec{ProjectionKind::identity, n_f, n_f, 0.0, config.seed}
                       : ProjectionSpec{config.projection, config.dim, n_f, config.sparsity, config.seed};
    m.projection.validate();

    // Binmem only encodes the support set: the first `shots` trials of each class.
    std::vector<std::size_t> selected;
    if (m.backend == Backend::binmem) {
        std::vector<std::uint32_t> taken(m.n_cl, 0);
        for (std::size_t i = 0; i < train.size(); ++i) {
            const auto l = train.trials[i].label;
            if (taken[l] < config.shots) {
                ++taken[l];
                selected.push_back(i);
            }
        }
        for (std::uint32_t c = 0; c < m.n_cl; ++c) {
            detail::require(taken[c] == config.shots, "class " + std::to_string(c) + " has fewer than " +
                                                          std::to_string(config.shots) + " shots");
        }
    } else {
        selected.resize(train.size());
        std::iota(selected.begin(), selected.end(), 0);
    }
    std::vector<Trial> trials;
    std::vector<std::uint32_t> labels;
    for (auto i : selected) {
        trials.push_back(train.trials[i]);
        labels.push_back(train.trials[i].label);
    }

    const auto features = detail::extract_features(m, trials, threads);
    SvmTrainOptions opt;
    opt.reg_c = config.reg_c;
    opt.threads = threads;

    if (m.backend == Backend::svm_float && m.projection.kind == ProjectionKind::identity) {
        m.float_model = detail::to_float16(train_linear_svm_real(features, labels, m.n_cl, opt));
        return m;
    }
    auto encoded = project_binarize(m.projection, features, threads);
    switch (m.backend) {
    case Backend::svm_float:
        m.float_model = detail::to_float16(train_linear_svm(encoded, labels, m.n_cl, opt));
        break;
    case Backend::svm_binarized:
        m.binary_model = binarize(train_linear_svm(encoded, labels, m.n_cl, opt));
        break;
    case Backend::binmem:
        m.memory = write_support(std::move(encoded), labels, m.n_cl, config.beta);
        break;
    }
    return m;
}

/// Class indices for a batch of trials, in order.
inline std::vector<std::uint32_t> predict(const ModelBundle& m, std::span<const Trial> trials, unsigned threads = 1)
{
    const auto features = detail::extract_features(m, trials, threads);
    std::vector<std::uint32_t> out(trials.size());
    if (m.backend == Backend::svm_float && m.projection.kind == ProjectionKind::identity) {
        for (std::size_t i = 0; i < features.size(); ++i) {
            out[i] = decide_float(m.float_model, features[i]);
        }
        return out;
    }
    const auto encoded = project_binarize(m.projection, features, threads);
    parallel_for(encoded.size(), threads, [&](std::size_t i) {
        switch (m.backend) {
        case Backend::svm_float: out[i] = decide_float(m.float_model, encoded[i]); break;
        case Backend::svm_binarized: out[i] = decide_binary(m.binary_model, encoded[i]); break;
        case Backend::binmem: out[i] = classify(m.memory, encoded[i]).label; break;
        }
    });
    return out;
}

inline std::uint32_t predict(const ModelBundle& m, const Trial& trial)
{
    return predict(m, std::span(&trial, 1)).front();
}

/// Cost of one inference with this bundle.
inline CostReport cost_report(const ModelBundle& m)
{
    const FrontEndShape shape{m.n_ch, m.window(), m.bank.size()};
    switch (m.backend) {
    case Backend::svm_float:
        if (m.projection.kind == ProjectionKind::identity) {
            return report_riemannian_svm_float(shape, m.n_cl);
        } else {
            CostReport r;
            r.title = "Riemannian + RP + SVM (float16)";
            r.stages = riemannian_stages(shape);
            r.stages.push_back({"Projection", macs_projection(m.projection),
                                footprint_bytes({"seed", 1, StoragePrecision::seed32}),
                                "matrix rematerialised from a 32-bit seed"});
            r.stages.push_back({"Linear SVM", std::uint64_t{m.n_cl} * m.projection.d,
                                footprint_bytes({"weights", std::uint64_t{m.n_cl} * m.projection.d,
                                                 StoragePrecision::float16}),
                                "n_cl·d MAC; float16 weights"});
            return r;
        }
    case Backend::svm_binarized: return report_riemannian_svm_binarized(shape, m.projection, m.n_cl);
    case Backend::binmem:
        return report_binmem(riemannian_stages(shape), m.projection, m.memory.size(),
                             "Riemannian + RP + binary memory");
    }
    return {};
}

struct EvalReport
{
    double accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    /// confusion[true][predicted]
    std::vector<std::vector<std::uint64_t>> confusion;
    std::vector<std::uint32_t> predictions;
    CostReport cost;

    nlohmann::json to_json() const
    {
        return {{"accuracy", accuracy},
                {"per_class_accuracy", per_class_accuracy},
                {"confusion", confusion},
                {"n_trials", predictions.size()},
                {"cost", cost.to_json()}};
    }

    friend bool operator==(const EvalReport& a, const EvalReport& b) { return a.to_json() == b.to_json(); }
};

inline EvalReport evaluate(const ModelBundle& m, const Dataset& test, unsigned threads = 1)
{
    detail::require(!test.empty(), "empty evaluation set");
    test.validate();
    detail::require(test.n_cl <= m.n_cl, "test set has more classes than the model");
    EvalReport r;
    r.predictions = predict(m, test.trials, threads);
    r.confusion.assign(m.n_cl, std::vector<std::uint64_t>(m.n_cl, 0));
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto truth = test.trials[i].label;
        ++r.confusion[truth][r.predictions[i]];
        correct += truth == r.predictions[i];
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    r.per_class_accuracy.assign(m.n_cl, 0.0);
    for (std::uint32_t c = 0; c < m.n_cl; ++c) {
        std::uint64_t row = 0;
        for (auto v : r.confusion[c]) {
            row += v;
        }
        r.per_class_accuracy[c] = row == 0 ? 0.0 : static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
    }
    r.cost = cost_report(m);
    return r;
}

// ---------------------------------------------------------------------------
// Serialisation, little-endian throughout.
//
// ProjectionSpec: kind u8 | d u32 | n_f u32 | sparsity f64 | seed u32
// Reference block: n_bands u32 | n_ch u32 | n_bands × packed lower f64
// BSVM1: "BSVM1" | d u32 | n_cl u32 | ProjectionSpec | Reference block |
//        weight kind u8 (0 float16, 1 bit-packed) |
//        n_cl × d u16  or  n_cl × ceil(d/64) u64
// BMEM1: "BMEM1" | d u32 | n_cl u32 | count u32 | count × ceil(d/64) u64 |
//        count × u32 class index | beta f64
// MDL1:  "MDL1" | version u32 | backend u8 | n_ch u32 | n_s u32 |
//        sample_rate f64 | alpha f64 | has_crop u8 | crop start u32 |
//        crop length u32 | n_bands u32 | n_bands × (low f64, high f64) |
//        BSVM1   (svm backends)
//        ProjectionSpec | Reference block | BMEM1   (binmem)

namespace detail {

inline void put_projection(io::ByteWriter& w, const ProjectionSpec& p)
{
    w.put_u8(static_cast<std::uint8_t>(p.kind));
    w.put_u32(p.d);
    w.put_u32(p.n_f);
    w.put_f64(p.sparsity);
    w.put_u32(p.seed);
}

inline ProjectionSpec get_projection(io::ByteReader& r)
{
    ProjectionSpec p;
    const auto kind = r.get_u8();
    if (kind > 2) {
        throw IoError("unknown projection kind " + std::to_string(kind));
    }
    p.kind = static_cast<ProjectionKind>(kind);
    p.d = r.get_u32();
    p.n_f = r.get_u32();
    p.sparsity = r.get_f64();
    p.seed = r.get_u32();
    return p;
}

inline void put_refs(io::ByteWriter& w, const std::vector<SpdMatrix>& refs, std::uint32_t n_ch)
{
    w.put_u32(static_cast<std::uint32_t>(refs.size()));
    w.put_u32(n_ch);
    for (const auto& ref : refs) {
        for (double v : ref.packed()) {
            w.put_f64(v);
        }
    }
}

inline std::vector<SpdMatrix> get_refs(io::ByteReader& r, std::uint32_t expect_bands, std::uint32_t expect_ch)
{
    const auto n_bands = r.get_u32();
    const auto n_ch = r.get_u32();
    if (n_bands != expect_bands || n_ch != expect_ch) {
        throw IoError("reference block shape disagrees with model header");
    }
    const std::size_t packed = std::size_t{n_ch} * (n_ch + 1) / 2;
    r.require(std::size_t{n_bands} * packed * 8);
    std::vector<SpdMatrix> refs;
    for (std::uint32_t b = 0; b < n_bands; ++b) {
        std::vector<double> v(packed);
        for (double& x : v) {
            x = r.get_f64();
        }
        refs.push_back(SpdMatrix::from_packed(n_ch, std::move(v)));
    }
    return refs;
}

inline void put_words(io::ByteWriter& w, const BinaryVector& v)
{
    for (auto word : v.words()) {
        w.put_u64(word);
    }
}

inline BinaryVector get_binary(io::ByteReader& r, std::uint32_t d)
{
    std::vector<std::uint64_t> words(BinaryVector::word_count(d));
    for (auto& word : words) {
        word = r.get_u64();
    }
    BinaryVector v = BinaryVector::from_words(d, words);
    if (v.words().size() && v.words().back() != words.back()) {
        throw IoError("nonzero padding bits in binary vector");
    }
    return v;
}

} // namespace detail

inline std::vector<std::uint8_t> encode_bsvm(const ModelBundle& m)
{
    io::ByteWriter w;
    const bool binary = m.backend == Backend::svm_binarized;
    const std::uint32_t d = binary ? static_cast<std::uint32_t>(m.binary_model.d())
                                   : static_cast<std::uint32_t>(m.float_model.d());
    w.put_magic("BSVM1");
    w.put_u32(d);
    w.put_u32(m.n_cl);
    detail::put_projection(w, m.projection);
    detail::put_refs(w, m.kernel.refs, m.n_ch);
    w.put_u8(binary ? 1 : 0);
    if (binary) {
        for (const auto& p : m.binary_model.prototypes) {
            detail::put_words(w, p);
        }
    } else {
        for (const auto& wv : m.float_model.weights) {
            for (double v : wv) {
                w.put_u16(to_half_bits(v));
            }
        }
    }
    return w.take();
}

inline std::vector<std::uint8_t> encode_bmem(const KeyValueMemory& mem)
{
    io::ByteWriter w;
    w.put_magic("BMEM1");
    w.put_u32(static_cast<std::uint32_t>(mem.d()));
    w.put_u32(mem.n_cl());
    w.put_u32(static_cast<std::uint32_t>(mem.size()));
    for (const auto& k : mem.keys()) {
        detail::put_words(w, k);
    }
    for (auto l : mem.labels()) {
        w.put_u32(l);
    }
    w.put_f64(mem.beta());
    return w.take();
}

inline std::vector<std::uint8_t> encode_bundle(const ModelBundle& m)
{
    io::ByteWriter w;
    w.put_magic("MDL1");
    w.put_u32(1);
    w.put_u8(static_cast<std::uint8_t>(m.backend));
    w.put_u32(m.n_ch);
    w.put_u32(m.n_s);
    w.put_f64(m.bank.sample_rate_hz());
    w.put_f64(m.alpha);
    w.put_u8(m.crop ? 1 : 0);
    w.put_u32(m.crop ? m.crop->start : 0);
    w.put_u32(m.crop ? m.crop->length : 0);
    w.put_u32(static_cast<std::uint32_t>(m.bank.size()));
    for (const auto& b : m.bank.bands()) {
        w.put_f64(b.low_hz);
        w.put_f64(b.high_hz);
    }
    if (m.backend == Backend::binmem) {
        detail::put_projection(w, m.projection);
        detail::put_refs(w, m.kernel.refs, m.n_ch);
        w.put_bytes(encode_bmem(m.memory));
    } else {
        w.put_bytes(encode_bsvm(m));
    }
    return w.take();
}

inline ModelBundle decode_bundle(std::span<const std::uint8_t> bytes)
{
    io::ByteReader r(bytes);
    r.expect_magic("MDL1");
    if (const auto version = r.get_u32(); version != 1) {
        throw IoError("unsupported MDL1 version " + std::to_string(version));
    }
    ModelBundle m;
    const auto backend = r.get_u8();
    if (backend > 2) {
        throw IoError("unknown backend tag " + std::to_string(backend));
    }
    m.backend = static_cast<Backend>(backend);
    m.n_ch = r.get_u32();
    m.n_s = r.get_u32();
    const double rate = r.get_f64();
    m.alpha = r.get_f64();
    const bool has_crop = r.get_u8() != 0;
    const Crop crop{r.get_u32(), r.get_u32()};
    if (has_crop) {
        m.crop = crop;
    }
    const auto n_bands = r.get_u32();
    r.require(std::size_t{n_bands} * 16);
    std::vector<BandSpec> bands(n_bands);
    for (auto& b : bands) {
        b.low_hz = r.get_f64();
        b.high_hz = r.get_f64();
    }

    try {
        m.bank = FilterBank::design(std::move(bands), rate);
        ProjectionSpec header_proj;
        std::vector<SpdMatrix> refs;
        if (m.backend == Backend::binmem) {
            header_proj = detail::get_projection(r);
            refs = detail::get_refs(r, n_bands, m.n_ch);
            r.expect_magic("BMEM1");
            const auto d = r.get_u32();
            m.n_cl = r.get_u32();
            const auto count = r.get_u32();
            r.require(std::size_t{count} * (BinaryVector::word_count(d) * 8 + 4));
            std::vector<BinaryVector> keys;
            for (std::uint32_t i = 0; i < count; ++i) {
                keys.push_back(detail::get_binary(r, d));
            }
            std::vector<std::uint32_t> labels(count);
            for (auto& l : labels) {
                l = r.get_u32();
            }
            const double beta = r.get_f64();
            m.memory = KeyValueMemory(std::move(keys), std::move(labels), m.n_cl, beta);
            if (d != header_proj.d) {
                throw IoError("memory dimension disagrees with projection");
            }
        } else {
            r.expect_magic("BSVM1");
            const auto d = r.get_u32();
            m.n_cl = r.get_u32();
            header_proj = detail::get_projection(r);
            refs = detail::get_refs(r, n_bands, m.n_ch);
            const auto kind = r.get_u8();
            if (kind != (m.backend == Backend::svm_binarized ? 1 : 0)) {
                throw IoError("weight kind disagrees with backend");
            }
            if (kind == 1) {
                r.require(std::size_t{m.n_cl} * BinaryVector::word_count(d) * 8);
                for (std::uint32_t c = 0; c < m.n_cl; ++c) {
                    m.binary_model.prototypes.push_back(detail::get_binary(r, d));
                }
            } else {
                r.require(std::size_t{m.n_cl} * d * 2);
                m.float_model.weights.assign(m.n_cl, std::vector<double>(d));
                for (auto& wv : m.float_model.weights) {
                    for (double& v : wv) {
                        v = from_half_bits(r.get_u16());
                    }
                }
            }
            const std::uint32_t expect_d =
                header_proj.kind == ProjectionKind::identity ? header_proj.n_f : header_proj.d;
            if (d != expect_d) {
                throw IoError("classifier dimension disagrees with projection");
            }
        }
        header_proj.validate();
        m.projection = header_proj;
        if (m.projection.n_f != m.feature_dim()) {
            throw IoError("feature dimension mismatch between bands and projection");
        }
        m.kernel = RiemannianKernel(std::move(refs));
    } catch (const ValidationError& e) {
        throw IoError(std::string("invalid model file: ") + e.what());
    }
    if (r.remaining() != 0) {
        throw IoError("trailing bytes after model payload");
    }
    return m;
}

inline void save_bundle(const ModelBundle& m, const std::filesystem::path& path)
{
    io::write_file(path, encode_bundle(m));
}

inline ModelBundle load_bundle(const std::filesystem::path& path)
{
    return decode_bundle(io::read_file(path));
}

// ---------------------------------------------------------------------------
// Standard synthetic benchmark: 4 classes, 8 channels, 250 samples at 250 Hz,
// 8 bands of 8 Hz over 4–40 Hz. Training and test sets come from seeds
// (s, s + 1).

inline std::vector<BandSpec> benchmark_bands()
{
    std::vector<BandSpec> bands;
    for (int low = 4; low + 8 <= 40; low += 4) {
        bands.push_back({double(low), double(low + 8)});
    }
    return bands;
}

inline SynthSpec benchmark_spec(std::uint64_t seed)
{
    SynthSpec s;
    s.n_cl = 4;
    s.n_ch = 8;
    s.n_s = 250;
    s.trials_per_class = 36;
    s.sample_rate_hz = 250.0;
    s.class_separation = 0.5;
    s.noise_scale = 0.75;
    s.seed = seed;
    s.structure_seed = seed;
    return s;
}

/// Configuration shared by every backend on the benchmark. With 144 training
/// trials against hundreds to thousands of features the default C = 1
/// overfits; C = 1e-4 is used for all variants alike.
inline PipelineConfig benchmark_config(Backend backend = Backend::svm_binarized,
                                       ProjectionKind kind = ProjectionKind::sparse_bipolar, std::uint32_t dim = 50000)
{
    PipelineConfig c;
    c.bands = benchmark_bands();
    c.backend = backend;
    c.projection = kind;
    c.dim = dim;
    c.sparsity = kind == ProjectionKind::sparse_bipolar ? 0.9 : 0.0;
    c.reg_c = 1e-4;
    return c;
}

struct SweepRow
{
    std::uint32_t d = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
};

/// Accuracy of `config` over dimensions × seeds on train/test pairs from
/// `spec` with seeds (base + 2k, base + 2k + 1). Each pair shares class
/// structure drawn from base + 2k.
inline std::vector<SweepRow> dimension_sweep(PipelineConfig config, const SynthSpec& spec,
                                             std::span<const std::uint32_t> dims, std::size_t n_seeds)
{
    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < n_seeds; ++k) {
        SynthSpec train_spec = spec;
        train_spec.seed = spec.seed + 2 * k;
        train_spec.structure_seed = train_spec.seed;
        SynthSpec test_spec = train_spec;
        test_spec.seed = train_spec.seed + 1;
        const Dataset train = generate_synthetic(train_spec);
        const Dataset test = generate_synthetic(test_spec);
        for (auto d : dims) {
            config.dim = d;
            const ModelBundle m = fit(config, train);
            rows.push_back({d, train_spec.seed, evaluate(m, test, config.threads).accuracy});
        }
    }
    return rows;
}

} // namespace binbci
