#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "subscan/npss.hpp"
#include "subscan/pvalues.hpp"

namespace subscan {

struct ScanConfig {
    double alpha_max = 0.5;
    ScoreKind scorer = ScoreKind::berk_jones;
};

// The score-maximizing subset for one sample: its node indices (ascending),
// the threshold alpha* that attained the maximum, the score F(S*), and the
// subset size k*. An empty subset with score 0 and absent alpha* means no
// p-value fell below alpha_max.
struct ScanResult {
    double score = 0.0;
    std::vector<std::size_t> subset;
    std::optional<double> alpha_star;
    std::size_t k_star = 0;
};

// The entries with p strictly below alpha_max, original node indices kept.
std::vector<std::pair<std::size_t, double>> filter_by_alpha_max(const PValueVector& pvec,
                                                                double alpha_max);

// Exact maximization over all 2^J subsets in O(J log J): filters by
// alpha_max, sorts the survivors ascending (ties by node index), and scores
// each prefix S_(k) at its own threshold alpha_k (the k-th smallest p-value).
// Ties between prefix scores go to the smallest k.
ScanResult scan_sample(const PValueVector& pvec, const ScanConfig& config);

// Test oracle: enumerates every nonempty subset of nodes and every candidate
// threshold within it (member p-values below alpha_max), so it makes no use
// of the priority ordering that scan_sample relies on. Ties are broken by
// smallest cardinality, then lexicographically smallest index set. Requires
// J <= 20.
ScanResult brute_force_scan(const PValueVector& pvec, const ScanConfig& config);

} // namespace subscan
