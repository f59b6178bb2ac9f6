#pragma once

// Command-line front end. `run` never calls exit() and writes only to the
// streams it is given, so it can be driven from tests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "accounting.hpp"
#include "dataio.hpp"
#include "error.hpp"
#include "pipeline.hpp"

namespace binbci::cli {

/// `key = value` synthetic dataset description; unspecified fields keep their defaults.
inline SynthSpec parse_synth_spec(std::istream& in)
{
    SynthSpec s;
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
        const auto eq = view.find('=');
        const std::string where = "spec line " + std::to_string(line_no) + ": ";
        detail::require(eq != std::string_view::npos, where + "expected key = value");
        const std::string key(detail::trim(view.substr(0, eq)));
        const double v = detail::parse_number(view.substr(eq + 1), line_no);
        auto integer = [&]() {
            detail::require(v >= 0.0 && std::floor(v) == v && v <= 4294967295.0,
                            where + "'" + key + "' must be a nonnegative integer");
            return static_cast<std::uint32_t>(v);
        };
        if (key == "n_cl") {
            s.n_cl = integer();
        } else if (key == "n_ch") {
            s.n_ch = integer();
        } else if (key == "n_s") {
            s.n_s = integer();
        } else if (key == "trials_per_class") {
            s.trials_per_class = integer();
        } else if (key == "sample_rate_hz" || key == "fs") {
            s.sample_rate_hz = v;
        } else if (key == "class_separation") {
            s.class_separation = v;
        } else if (key == "noise_scale") {
            s.noise_scale = v;
        } else if (key == "seed") {
            s.seed = integer();
        } else if (key == "structure_seed") {
            s.structure_seed = integer();
        } else {
            throw ValidationError(where + "unknown key '" + key + "'");
        }
    }
    s.validate();
    return s;
}

namespace detail {

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return in;
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw IoError("cannot write '" + path + "'");
    }
}

inline std::vector<std::uint32_t> parse_dims(const std::string& text)
{
    std::vector<std::uint32_t> dims;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const double v = binbci::detail::parse_number(item, 1);
        binbci::detail::require(v >= 1.0 && v <= 4294967295.0 && std::floor(v) == v,
                                "--dims entries must be positive integers");
        dims.push_back(static_cast<std::uint32_t>(v));
    }
    binbci::detail::require(!dims.empty(), "--dims is empty");
    return dims;
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Binarized Riemannian motor-imagery classification", "binbci"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    std::string spec_path, out_path;
    synth->add_option("--spec", spec_path, "key=value dataset description")->required();
    synth->add_option("--out", out_path, "Output TRL1 file")->required();

    auto* import = app.add_subcommand("import", "Convert a CSV file to TRL1");
    std::string csv_path;
    std::size_t n_ch = 0;
    double fs = 0.0;
    import->add_option("--csv", csv_path, "Rows: label, then channel-major samples")->required();
    import->add_option("--nch", n_ch, "Channel count")->required()->check(CLI::PositiveNumber);
    import->add_option("--fs", fs, "Sample rate in Hz")->required()->check(CLI::PositiveNumber);
    import->add_option("--out", out_path, "Output TRL1 file")->required();

    auto* fit_cmd = app.add_subcommand("fit", "Train a model bundle");
    std::string config_path, train_path, bands_path;
    unsigned threads = 0;
    fit_cmd->add_option("--config", config_path, "key=value pipeline configuration")->required();
    fit_cmd->add_option("--train", train_path, "Training TRL1 file")->required();
    fit_cmd->add_option("--out", out_path, "Output MDL1 file")->required();
    fit_cmd->add_option("--bands", bands_path, "Band list overriding the config");
    fit_cmd->add_option("--threads", threads, "Worker threads (overrides config)")->check(CLI::PositiveNumber);

    auto* predict_cmd = app.add_subcommand("predict", "Print one predicted class per trial");
    std::string model_path, data_path;
    predict_cmd->add_option("--model", model_path, "MDL1 file")->required();
    predict_cmd->add_option("--data", data_path, "TRL1 file")->required();
    predict_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a labelled dataset");
    std::string test_path, json_path;
    eval_cmd->add_option("--model", model_path, "MDL1 file")->required();
    eval_cmd->add_option("--test", test_path, "TRL1 file")->required();
    eval_cmd->add_option("--json", json_path, "Write the EvalReport as JSON");
    eval_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "Accuracy versus dimension on the synthetic benchmark");
    std::string dims_text = "5000,10000,20000,50000,100000";
    std::size_t n_seeds = 10;
    std::uint64_t base_seed = 0;
    sweep->add_option("--dims", dims_text, "Comma-separated projection dimensions")->capture_default_str();
    sweep->add_option("--seeds", n_seeds, "Train/test seed pairs")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--base-seed", base_seed, "First training seed")->capture_default_str();
    sweep->add_option("--config", config_path, "Pipeline configuration (dim is overridden)");
    sweep->add_option("--out", out_path, "CSV output file (default: stdout)");
    sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string preset;
    bool as_json = false;
    auto add_cost = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        auto* p = sub->add_option("--preset", preset, "Reference configuration");
        p->check(CLI::IsMember(preset_names()));
        auto* m = sub->add_option("--model", model_path, "MDL1 file");
        p->excludes(m);
        sub->add_flag("--json", as_json, "Emit JSON instead of text");
        return sub;
    };
    auto* macs_cmd = add_cost("macs", "Per-stage MAC counts");
    auto* footprint_cmd = add_cost("footprint", "Per-stage memory footprint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (synth->parsed()) {
            auto in = detail::open_input(spec_path);
            const Dataset ds = generate_synthetic(parse_synth_spec(in));
            write_dataset(ds, out_path);
            out << "wrote " << ds.size() << " trials to " << out_path << '\n';
        } else if (import->parsed()) {
            const Dataset ds = import_csv(csv_path, n_ch, fs);
            write_dataset(ds, out_path);
            out << "wrote " << ds.size() << " trials to " << out_path << '\n';
        } else if (fit_cmd->parsed()) {
            PipelineConfig cfg = load_config(config_path);
            if (!bands_path.empty()) {
                cfg.bands = read_bands(bands_path);
            }
            if (threads > 0) {
                cfg.threads = threads;
            }
            const Dataset train = read_dataset(train_path);
            const ModelBundle m = fit(cfg, train);
            save_bundle(m, out_path);
            out << "trained " << to_string(m.backend) << " on " << train.size() << " trials, d=" << m.projection.d
                << ", model written to " << out_path << '\n';
        } else if (predict_cmd->parsed()) {
            const ModelBundle m = load_bundle(model_path);
            const Dataset ds = read_dataset(data_path);
            for (auto label : predict(m, ds.trials, std::max(1u, threads))) {
                out << label << '\n';
            }
        } else if (eval_cmd->parsed()) {
            const ModelBundle m = load_bundle(model_path);
            const Dataset ds = read_dataset(test_path);
            const EvalReport r = evaluate(m, ds, std::max(1u, threads));
            out << "accuracy " << std::fixed << std::setprecision(4) << r.accuracy << " (" << ds.size()
                << " trials)\n";
            for (std::size_t c = 0; c < r.per_class_accuracy.size(); ++c) {
                out << "  class " << c << ": " << r.per_class_accuracy[c] << '\n';
            }
            if (!json_path.empty()) {
                detail::write_text(json_path, r.to_json().dump(2) + "\n");
            }
        } else if (sweep->parsed()) {
            const auto dims = detail::parse_dims(dims_text);
            PipelineConfig cfg = config_path.empty() ? benchmark_config() : load_config(config_path);
            if (threads > 0) {
                cfg.threads = threads;
            }
            const auto rows = dimension_sweep(cfg, benchmark_spec(base_seed), dims, n_seeds);
            std::ostringstream csv;
            csv << "d,seed,accuracy\n";
            for (const auto& row : rows) {
                csv << row.d << ',' << row.seed << ',' << std::setprecision(6) << row.accuracy << '\n';
            }
            if (out_path.empty()) {
                out << csv.str();
            } else {
                detail::write_text(out_path, csv.str());
            }
        } else {
            const bool macs = macs_cmd->parsed();
            auto* sub = macs ? macs_cmd : footprint_cmd;
            (void)footprint_cmd;
            if (preset.empty() && model_path.empty()) {
                err << "error: " << sub->get_name() << " needs --preset or --model\n";
                return 1;
            }
            const CostReport r = preset.empty() ? cost_report(load_bundle(model_path)) : preset_report(preset);
            if (as_json) {
                out << r.to_json().dump(2) << '\n';
            } else {
                out << r.to_text();
            }
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace binbci::cli
