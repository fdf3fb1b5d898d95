#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "subscan/activation_io.hpp"
#include "subscan/scan.hpp"

namespace subscan {

// Anomalousness scores split by ground-truth class, ready for AUC.
struct LabeledScores {
    std::vector<double> clean_scores;
    std::vector<double> anomalous_scores;
};

// Mann-Whitney AUC: the fraction of (clean, anomalous) pairs where the
// anomalous sample scores strictly higher, ties counted 0.5. Oriented so
// that anomalous-higher gives values above 0.5; reported raw, never flipped.
double compute_auc(const LabeledScores& scores);

// Scans every row of the evaluation matrix against the model. Row order is
// preserved and each row is scored independently of the others.
std::vector<ScanResult> score_dataset(const BackgroundModel& model,
                                      const ActivationMatrix& eval_matrix,
                                      const ScanConfig& config);

// Ground-truthed synthetic data: background and clean rows are i.i.d.
// standard normal per node; anomalous rows add a +shift_sigma mean to a
// randomly chosen node subset. Everything is a deterministic function of the
// seed.
struct SyntheticSpec {
    std::size_t j_nodes = 512;
    std::size_t m_background = 800;
    std::size_t n_clean = 200;
    std::size_t n_anomalous = 100;
    double affected_fraction = 0.1;
    double shift_sigma = 3.0;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    ActivationMatrix background;
    ActivationMatrix clean;
    ActivationMatrix anomalous;
    std::vector<std::size_t> true_subset;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Set overlap between a detected subset and the ground-truth nodes. An empty
// detected subset has no defined precision; it is reported as 0 with the
// flag set.
struct RecoveryMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double jaccard = 0.0;
    bool empty_detected = false;
};

RecoveryMetrics subset_recovery(const ScanResult& result,
                                const std::vector<std::size_t>& true_subset);

struct LayerReport {
    std::string layer;
    std::size_t dims = 0;
    double auc = 0.0;
    std::size_t n_background = 0;
    std::size_t n_clean = 0;
    std::size_t n_anomalous = 0;
};

// Mean recovery metrics over every anomalous sample of every layer that
// carries a ground-truth subset.
struct RecoverySummary {
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_jaccard = 0.0;
    std::size_t n_scored = 0;
    std::size_t n_empty_detected = 0;
};

struct EvaluationReport {
    ScanConfig config;
    std::uint64_t seed = 0;
    std::vector<LayerReport> layers;
    std::optional<RecoverySummary> recovery;
};

// Per layer: build the background model, score the clean and anomalous sets,
// and compute the AUC between them. Errors from a layer are rethrown with the
// layer name attached.
EvaluationReport evaluate_manifest(const DatasetManifest& manifest, const ScanConfig& config,
                                   std::uint64_t seed);

// Fixed-key-order JSON with floating values rounded to 6 significant digits.
nlohmann::ordered_json report_to_json(const EvaluationReport& report);

// Rounds to 6 significant decimal digits (the report serialization rule).
double round6(double value);

} // namespace subscan
