#include "subscan/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iterator>

#include "subscan/error.hpp"
#include "subscan/pvalues.hpp"
#include "subscan/rng.hpp"

namespace subscan {

double compute_auc(const LabeledScores& scores) {
    if (scores.clean_scores.empty() || scores.anomalous_scores.empty()) {
        throw ValidationError("AUC requires nonempty clean and anomalous score sets");
    }
    std::vector<double> clean = scores.clean_scores;
    std::vector<double> anomalous = scores.anomalous_scores;
    std::sort(clean.begin(), clean.end());
    std::sort(anomalous.begin(), anomalous.end());

    // Pair count where anomalous > clean, plus half the exact ties; with both
    // sides sorted each anomalous value needs one pair of binary searches.
    double u = 0.0;
    for (const double a : anomalous) {
        const auto lo = std::lower_bound(clean.begin(), clean.end(), a);
        const auto hi = std::upper_bound(lo, clean.end(), a);
        u += static_cast<double>(lo - clean.begin());
        u += 0.5 * static_cast<double>(hi - lo);
    }
    return u / (static_cast<double>(clean.size()) * static_cast<double>(anomalous.size()));
}

std::vector<ScanResult> score_dataset(const BackgroundModel& model,
                                      const ActivationMatrix& eval_matrix,
                                      const ScanConfig& config) {
    if (eval_matrix.n_nodes != model.n_nodes) {
        throw ValidationError("evaluation matrix width " + std::to_string(eval_matrix.n_nodes) +
                              " does not match model node count " +
                              std::to_string(model.n_nodes));
    }
    std::vector<ScanResult> results(eval_matrix.n_samples);
    for (std::size_t i = 0; i < eval_matrix.n_samples; ++i) {
        results[i] = scan_sample(pvalues_for_sample(model, eval_matrix.row(i)), config);
    }
    return results;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.j_nodes < 1 || spec.m_background < 1) {
        throw ValidationError("synthetic spec requires j_nodes >= 1 and m_background >= 1");
    }
    if (!(spec.affected_fraction > 0.0 && spec.affected_fraction <= 1.0)) {
        throw ValidationError("affected_fraction must be in (0,1]");
    }
    if (spec.shift_sigma < 0.0) {
        throw ValidationError("shift_sigma must be >= 0");
    }
    const auto n_affected = static_cast<std::size_t>(
        std::llround(spec.affected_fraction * static_cast<double>(spec.j_nodes)));
    if (spec.shift_sigma > 0.0 && n_affected < 1) {
        throw ValidationError("affected fraction rounds to zero nodes");
    }

    Rng rng(spec.seed);

    // Draw order is part of the format: subset first, then background, clean,
    // and anomalous matrices row-major. Matched seeds across shift values
    // therefore share every gaussian draw.
    std::vector<std::size_t> indices(spec.j_nodes);
    for (std::size_t j = 0; j < spec.j_nodes; ++j) {
        indices[j] = j;
    }
    for (std::size_t i = 0; i < n_affected; ++i) {
        const std::size_t pick = i + static_cast<std::size_t>(rng.below(spec.j_nodes - i));
        std::swap(indices[i], indices[pick]);
    }
    std::vector<std::size_t> subset(indices.begin(), indices.begin() + n_affected);
    std::sort(subset.begin(), subset.end());

    std::vector<char> affected(spec.j_nodes, 0);
    for (const auto j : subset) {
        affected[j] = 1;
    }

    const auto fill_normal = [&rng](ActivationMatrix& m, std::size_t rows, std::size_t cols,
                                    const char* layer) {
        m.n_samples = rows;
        m.n_nodes = cols;
        m.layer_name = layer;
        m.values.resize(rows * cols);
        for (auto& v : m.values) {
            v = static_cast<float>(rng.normal());
        }
    };

    SyntheticData data;
    fill_normal(data.background, spec.m_background, spec.j_nodes, "synthetic");
    fill_normal(data.clean, spec.n_clean, spec.j_nodes, "synthetic");
    fill_normal(data.anomalous, spec.n_anomalous, spec.j_nodes, "synthetic");
    for (std::size_t i = 0; i < data.anomalous.n_samples; ++i) {
        for (std::size_t j = 0; j < spec.j_nodes; ++j) {
            if (affected[j]) {
                data.anomalous.at(i, j) =
                    static_cast<float>(static_cast<double>(data.anomalous.at(i, j)) +
                                       spec.shift_sigma);
            }
        }
    }
    data.true_subset = std::move(subset);
    return data;
}

RecoveryMetrics subset_recovery(const ScanResult& result,
                                const std::vector<std::size_t>& true_subset) {
    std::vector<std::size_t> detected = result.subset;
    std::vector<std::size_t> truth = true_subset;
    std::sort(detected.begin(), detected.end());
    std::sort(truth.begin(), truth.end());

    std::vector<std::size_t> common;
    std::set_intersection(detected.begin(), detected.end(), truth.begin(), truth.end(),
                          std::back_inserter(common));
    const double n_common = static_cast<double>(common.size());
    const double n_union =
        static_cast<double>(detected.size() + truth.size() - common.size());

    RecoveryMetrics metrics;
    metrics.empty_detected = detected.empty();
    metrics.precision = detected.empty() ? 0.0 : n_common / static_cast<double>(detected.size());
    metrics.recall = truth.empty() ? 0.0 : n_common / static_cast<double>(truth.size());
    metrics.jaccard = (n_union == 0.0) ? 0.0 : n_common / n_union;
    return metrics;
}

EvaluationReport evaluate_manifest(const DatasetManifest& manifest, const ScanConfig& config,
                                   std::uint64_t seed) {
    EvaluationReport report;
    report.config = config;
    report.seed = seed;

    double sum_precision = 0.0;
    double sum_recall = 0.0;
    double sum_jaccard = 0.0;
    std::size_t n_scored = 0;
    std::size_t n_empty = 0;

    for (const auto& layer : manifest.layers) {
        try {
            const LayerData data = load_layer_data(layer);
            const BackgroundModel model = build_background(data.background);
            const auto clean_results = score_dataset(model, data.clean, config);
            const auto anom_results = score_dataset(model, data.anomalous, config);

            LabeledScores scores;
            scores.clean_scores.reserve(clean_results.size());
            for (const auto& r : clean_results) {
                scores.clean_scores.push_back(r.score);
            }
            scores.anomalous_scores.reserve(anom_results.size());
            for (const auto& r : anom_results) {
                scores.anomalous_scores.push_back(r.score);
            }

            LayerReport row;
            row.layer = layer.layer_name;
            row.dims = model.n_nodes;
            row.auc = compute_auc(scores);
            row.n_background = model.m_background;
            row.n_clean = data.clean.n_samples;
            row.n_anomalous = data.anomalous.n_samples;
            report.layers.push_back(std::move(row));

            if (data.has_truth) {
                for (const auto& r : anom_results) {
                    const auto metrics = subset_recovery(r, data.true_subset);
                    sum_precision += metrics.precision;
                    sum_recall += metrics.recall;
                    sum_jaccard += metrics.jaccard;
                    if (metrics.empty_detected) {
                        ++n_empty;
                    }
                    ++n_scored;
                }
            }
        } catch (const IoError& e) {
            throw IoError("layer '" + layer.layer_name + "': " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("layer '" + layer.layer_name + "': " + e.what());
        }
    }

    if (n_scored > 0) {
        RecoverySummary summary;
        summary.mean_precision = sum_precision / static_cast<double>(n_scored);
        summary.mean_recall = sum_recall / static_cast<double>(n_scored);
        summary.mean_jaccard = sum_jaccard / static_cast<double>(n_scored);
        summary.n_scored = n_scored;
        summary.n_empty_detected = n_empty;
        report.recovery = summary;
    }
    return report;
}

double round6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return std::strtod(buf, nullptr);
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
    nlohmann::ordered_json doc;
    doc["config"] = {
        {"alpha_max", round6(report.config.alpha_max)},
        {"scorer", std::string(to_string(report.config.scorer))},
        {"rng", std::string(k_rng_name)},
    };
    doc["layers"] = nlohmann::ordered_json::array();
    for (const auto& layer : report.layers) {
        nlohmann::ordered_json row;
        row["layer"] = layer.layer;
        row["dims"] = layer.dims;
        row["auc"] = round6(layer.auc);
        row["n_bg"] = layer.n_background;
        row["n_clean"] = layer.n_clean;
        row["n_anom"] = layer.n_anomalous;
        doc["layers"].push_back(std::move(row));
    }
    if (report.recovery) {
        doc["recovery"] = {
            {"mean_precision", round6(report.recovery->mean_precision)},
            {"mean_recall", round6(report.recovery->mean_recall)},
            {"mean_jaccard", round6(report.recovery->mean_jaccard)},
            {"n_scored", report.recovery->n_scored},
            {"n_empty_detected", report.recovery->n_empty_detected},
        };
    }
    doc["seed"] = report.seed;
    return doc;
}

} // namespace subscan
