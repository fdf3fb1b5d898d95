#include "subscan/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "subscan/activation_io.hpp"
#include "subscan/error.hpp"
#include "subscan/harness.hpp"
#include "subscan/pvalues.hpp"
#include "subscan/scan.hpp"

namespace subscan {

namespace fs = std::filesystem;

namespace {

FileFormat resolve_format(const std::string& name, const fs::path& path) {
    return name.empty() ? format_for_path(path) : parse_file_format(name);
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void cmd_background(const fs::path& input, const fs::path& output,
                    const std::string& format_name, std::ostream& out) {
    const ActivationMatrix matrix = load_matrix(input, resolve_format(format_name, input));
    const BackgroundModel model = build_background(matrix);
    save_model(model, output);
    out << "J=" << model.n_nodes << " M=" << model.m_background << "\n";
}

void cmd_score(const fs::path& model_path, const fs::path& input,
               const std::string& format_name, const ScanConfig& config, bool no_subset,
               const fs::path& output, std::ostream& out) {
    const BackgroundModel model = load_model(model_path);
    const ActivationMatrix eval = load_matrix(input, resolve_format(format_name, input));
    const std::vector<ScanResult> results = score_dataset(model, eval, config);

    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const ScanResult& r = results[i];
        nlohmann::ordered_json rec;
        if (i < eval.sample_ids.size() && !eval.sample_ids[i].empty()) {
            rec["sample"] = eval.sample_ids[i];
        } else {
            rec["sample"] = i;
        }
        rec["score"] = r.score;
        rec["k_star"] = r.k_star;
        if (r.alpha_star) {
            rec["alpha_star"] = *r.alpha_star;
        } else {
            rec["alpha_star"] = nullptr;
        }
        if (!no_subset) {
            rec["subset"] = r.subset;
        }
        records.push_back(std::move(rec));
    }

    if (output.empty()) {
        for (const auto& rec : records) {
            out << rec.dump() << "\n";
        }
    } else {
        write_text_file(output, records.dump(2) + "\n");
    }
}

void cmd_synth(const SyntheticSpec& spec, const fs::path& out_dir,
               const std::string& format_name, const std::string& layer_name,
               std::ostream& out) {
    const FileFormat format =
        format_name.empty() ? FileFormat::binary : parse_file_format(format_name);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create directory: " + out_dir.string() + ": " + ec.message());
    }
    const SyntheticData data = generate_synthetic(spec);

    const std::string ext = format == FileFormat::csv ? ".csv" : ".bin";
    save_matrix(data.background, out_dir / ("background" + ext), format);
    save_matrix(data.clean, out_dir / ("clean" + ext), format);
    save_matrix(data.anomalous, out_dir / ("anomalous" + ext), format);
    save_index_list(data.true_subset, out_dir / "true_subset.txt");

    nlohmann::ordered_json layer;
    layer["layer"] = layer_name;
    layer["background"] = "background" + ext;
    layer["clean"] = "clean" + ext;
    layer["anomalous"] = "anomalous" + ext;
    layer["true_subset"] = "true_subset.txt";
    nlohmann::ordered_json manifest;
    manifest["layers"] = nlohmann::ordered_json::array({layer});
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

    out << "layer=" << layer_name << " J=" << spec.j_nodes
        << " affected=" << data.true_subset.size() << "\n";
}

void cmd_evaluate(const fs::path& manifest_path, const ScanConfig& config, std::uint64_t seed,
                  const fs::path& output, std::ostream& out) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    const EvaluationReport report = evaluate_manifest(manifest, config, seed);
    const std::string text = report_to_json(report).dump(2) + "\n";
    if (output.empty()) {
        out << text;
    } else {
        write_text_file(output, text);
    }
}

} // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Subset scanning over activation vectors: finds the group of nodes whose "
                 "empirical p-values are jointly most anomalous against a clean background."};
    app.name("subscan");
    app.require_subcommand(1);

    std::string format_name;
    std::string scorer_name = "bj";
    double alpha_max = 0.5;
    std::uint64_t seed = 0;
    fs::path input, output, model_path, manifest_path, out_dir;

    auto* bg = app.add_subcommand("background",
                                  "Build a sorted per-node background model from clean "
                                  "activations");
    bg->add_option("--input", input, "activation matrix of clean samples")->required();
    bg->add_option("--output", output, "background model file to write")->required();
    bg->add_option("--format", format_name, "input format: csv|binary (default: by extension)");
    bg->callback([&] { cmd_background(input, output, format_name, out); });

    auto* score = app.add_subcommand("score",
                                     "Score each sample against a background model; one JSON "
                                     "record per sample");
    bool no_subset = false;
    score->add_option("--model", model_path, "background model file")->required();
    score->add_option("--input", input, "activation matrix to score")->required();
    score->add_option("--format", format_name,
                      "input format: csv|binary (default: by extension)");
    score->add_option("--alpha-max", alpha_max, "significance ceiling in (0,1]")
        ->capture_default_str();
    score->add_option("--scorer", scorer_name, "scan statistic")
        ->check(CLI::IsMember({"bj", "hc"}))
        ->capture_default_str();
    score->add_option("--output", output, "write a JSON array here instead of stdout lines");
    score->add_flag("--no-subset", no_subset, "omit node index lists from the records");
    score->callback([&] {
        const ScanConfig config{alpha_max, parse_score_kind(scorer_name)};
        cmd_score(model_path, input, format_name, config, no_subset, output, out);
    });

    auto* synth = app.add_subcommand("synth",
                                     "Generate a seeded synthetic dataset with ground-truth "
                                     "anomalous nodes");
    SyntheticSpec spec;
    std::string layer_name = "layer0";
    synth->add_option("--nodes", spec.j_nodes, "nodes per sample")->capture_default_str();
    synth->add_option("--background", spec.m_background, "background sample count")
        ->capture_default_str();
    synth->add_option("--clean", spec.n_clean, "clean evaluation sample count")
        ->capture_default_str();
    synth->add_option("--anomalous", spec.n_anomalous, "anomalous sample count")
        ->capture_default_str();
    synth->add_option("--affected-fraction", spec.affected_fraction,
                      "fraction of nodes shifted in anomalous samples")
        ->capture_default_str();
    synth->add_option("--shift", spec.shift_sigma, "mean shift in standard deviations")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed, "RNG seed")->capture_default_str();
    synth->add_option("--out-dir", out_dir, "directory for the generated files")->required();
    synth->add_option("--format", format_name, "matrix format: csv|binary (default: binary)");
    synth->add_option("--layer", layer_name, "layer name recorded in the manifest")
        ->capture_default_str();
    synth->callback([&] { cmd_synth(spec, out_dir, format_name, layer_name, out); });

    auto* eval = app.add_subcommand("evaluate",
                                    "Score every manifest layer and report per-layer AUC plus "
                                    "subset recovery");
    eval->add_option("--manifest", manifest_path, "dataset manifest (JSON)")->required();
    eval->add_option("--alpha-max", alpha_max, "significance ceiling in (0,1]")
        ->capture_default_str();
    eval->add_option("--scorer", scorer_name, "scan statistic")
        ->check(CLI::IsMember({"bj", "hc"}))
        ->capture_default_str();
    eval->add_option("--seed", seed, "seed echoed into the report")->capture_default_str();
    eval->add_option("--output", output, "report file (default: stdout)");
    eval->callback([&] {
        const ScanConfig config{alpha_max, parse_score_kind(scorer_name)};
        cmd_evaluate(manifest_path, config, seed, output, out);
    });

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace subscan
