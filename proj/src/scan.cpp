#include "subscan/scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "subscan/error.hpp"

namespace subscan {

namespace {

void validate_scan_inputs(const PValueVector& pvec, const ScanConfig& config) {
    if (!(config.alpha_max > 0.0 && config.alpha_max <= 1.0)) {
        throw ValidationError("alpha_max must be in (0,1], got " +
                              std::to_string(config.alpha_max));
    }
    for (std::size_t j = 0; j < pvec.values.size(); ++j) {
        const double p = pvec.values[j];
        if (!(p > 0.0 && p <= 1.0)) {
            throw ValidationError("p-value at node " + std::to_string(j) +
                                  " outside (0,1]: " + std::to_string(p));
        }
    }
}

// Preference order for equal scores: smaller subset first, then
// lexicographically smaller index set. Index sets must be sorted ascending.
bool result_preferred(double score, const std::vector<std::size_t>& subset, double best_score,
                      const std::vector<std::size_t>& best_subset) {
    if (score != best_score) {
        return score > best_score;
    }
    if (subset.size() != best_subset.size()) {
        return subset.size() < best_subset.size();
    }
    return std::lexicographical_compare(subset.begin(), subset.end(), best_subset.begin(),
                                        best_subset.end());
}

} // namespace

std::vector<std::pair<std::size_t, double>> filter_by_alpha_max(const PValueVector& pvec,
                                                                double alpha_max) {
    std::vector<std::pair<std::size_t, double>> kept;
    for (std::size_t j = 0; j < pvec.values.size(); ++j) {
        if (pvec.values[j] < alpha_max) {
            kept.emplace_back(j, pvec.values[j]);
        }
    }
    return kept;
}

ScanResult scan_sample(const PValueVector& pvec, const ScanConfig& config) {
    validate_scan_inputs(pvec, config);

    // Only the p-values themselves need sorting: every prefix is scored at
    // its own largest member, and the member indices are recovered afterward.
    std::vector<double> kept;
    kept.reserve(pvec.values.size());
    for (const double p : pvec.values) {
        if (p < config.alpha_max) {
            kept.push_back(p);
        }
    }

    ScanResult result;
    if (kept.empty()) {
        return result;
    }
    std::sort(kept.begin(), kept.end());

    // Prefix S_(k) holds the k smallest filtered p-values; its threshold
    // alpha_k is the largest of them, so the score call is phi(alpha_k, k, k).
    double best_score = -1.0;
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= kept.size(); ++k) {
        const double alpha_k = kept[k - 1];
        const double score = npss_score(config.scorer, ScoreTriple{alpha_k, k, k});
        if (score > best_score) {
            best_score = score;
            best_k = k;
        }
    }

    const double alpha_star = kept[best_k - 1];
    result.score = best_score;
    result.k_star = best_k;
    result.alpha_star = alpha_star;

    // The winning prefix is every node strictly below alpha_star plus the
    // smallest-indexed nodes tied at alpha_star; one ascending pass collects
    // them already sorted.
    const std::size_t n_strict = static_cast<std::size_t>(
        std::lower_bound(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(best_k),
                         alpha_star) -
        kept.begin());
    std::size_t ties_needed = best_k - n_strict;
    result.subset.reserve(best_k);
    for (std::size_t j = 0; j < pvec.values.size() && result.subset.size() < best_k; ++j) {
        const double p = pvec.values[j];
        if (p < alpha_star) {
            result.subset.push_back(j);
        } else if (p == alpha_star && ties_needed > 0) {
            result.subset.push_back(j);
            --ties_needed;
        }
    }
    return result;
}

ScanResult brute_force_scan(const PValueVector& pvec, const ScanConfig& config) {
    validate_scan_inputs(pvec, config);
    const std::size_t j_nodes = pvec.values.size();
    if (j_nodes > 20) {
        throw ValidationError("brute force enumeration limited to 20 nodes, got " +
                              std::to_string(j_nodes));
    }

    ScanResult best; // empty subset, score 0
    bool found = false;

    std::vector<std::size_t> members;
    std::vector<double> member_ps;
    for (std::uint32_t mask = 1; mask < (1u << j_nodes); ++mask) {
        members.clear();
        member_ps.clear();
        for (std::size_t j = 0; j < j_nodes; ++j) {
            if (mask & (1u << j)) {
                members.push_back(j);
                member_ps.push_back(pvec.values[j]);
            }
        }

        // Candidate thresholds are the member p-values below alpha_max,
        // ascending so that score ties go to the smallest alpha.
        std::sort(member_ps.begin(), member_ps.end());
        double subset_score = -1.0;
        double subset_alpha = 0.0;
        for (const double alpha : member_ps) {
            if (!(alpha < config.alpha_max)) {
                break;
            }
            const std::size_t n_alpha = static_cast<std::size_t>(
                std::upper_bound(member_ps.begin(), member_ps.end(), alpha) -
                member_ps.begin());
            const double score =
                npss_score(config.scorer, ScoreTriple{alpha, n_alpha, members.size()});
            if (score > subset_score) {
                subset_score = score;
                subset_alpha = alpha;
            }
        }
        if (subset_score < 0.0) {
            continue; // no valid threshold in this subset
        }

        if (!found || result_preferred(subset_score, members, best.score, best.subset)) {
            best.score = subset_score;
            best.subset = members;
            best.alpha_star = subset_alpha;
            best.k_star = members.size();
            found = true;
        }
    }

    if (!found) {
        return ScanResult{};
    }
    return best;
}

} // namespace subscan
