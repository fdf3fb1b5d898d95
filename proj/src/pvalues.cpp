#include "subscan/pvalues.hpp"

#include <algorithm>
#include <cmath>

#include "subscan/error.hpp"

namespace subscan {

double empirical_pvalue(std::span<const float> sorted_column, float activation) {
    if (sorted_column.empty()) {
        throw ValidationError("empirical p-value requires a nonempty background column");
    }
    if (!std::isfinite(activation)) {
        throw ValidationError("empirical p-value requires a finite activation");
    }
    // Entries >= activation form the tail suffix of the ascending column.
    const auto first_geq =
        std::lower_bound(sorted_column.begin(), sorted_column.end(), activation);
    const std::size_t count_geq =
        static_cast<std::size_t>(sorted_column.end() - first_geq);
    const std::size_t m = sorted_column.size();
    return static_cast<double>(count_geq + 1) / static_cast<double>(m + 1);
}

namespace {

// Columns searched per lockstep group. One column at a time leaves every
// binary-search probe waiting on the previous cache miss; advancing a group
// of independent searches level by level keeps that many misses in flight.
constexpr std::size_t k_search_lanes = 32;

} // namespace

PValueVector pvalues_for_sample(const BackgroundModel& model, std::span<const float> sample) {
    if (sample.size() != model.n_nodes) {
        throw ValidationError("sample length " + std::to_string(sample.size()) +
                              " does not match model node count " +
                              std::to_string(model.n_nodes));
    }
    const std::size_t m = model.m_background;
    if (m == 0 && !sample.empty()) {
        throw ValidationError("empirical p-value requires a nonempty background column");
    }
    for (const float v : sample) {
        if (!std::isfinite(v)) {
            throw ValidationError("empirical p-value requires a finite activation");
        }
    }

    PValueVector pvec;
    pvec.values.resize(sample.size());
    const double denom = static_cast<double>(m + 1);
    const float* const data = model.sorted_values.data();

    for (std::size_t j0 = 0; j0 < sample.size(); j0 += k_search_lanes) {
        const std::size_t lanes = std::min(k_search_lanes, sample.size() - j0);
        const float* base[k_search_lanes];
        for (std::size_t g = 0; g < lanes; ++g) {
            base[g] = data + (j0 + g) * m;
            if (m > 1) {
                __builtin_prefetch(base[g] + m / 2 - 1);
            }
        }
        // Branchless lower_bound, all lanes in lockstep: every lane narrows
        // from the same length m, so they share the halving schedule. As soon
        // as a lane resolves a level, its next probe is known and is fetched
        // while the remaining lanes finish the round.
        std::size_t n = m;
        while (n > 1) {
            const std::size_t half = n / 2;
            const std::size_t rest = n - half;
            const std::size_t next_half = rest / 2;
            for (std::size_t g = 0; g < lanes; ++g) {
                const float* b = base[g] + ((base[g][half - 1] < sample[j0 + g]) ? half : 0);
                base[g] = b;
                if (next_half > 0) {
                    __builtin_prefetch(b + next_half - 1);
                }
            }
            n = rest;
        }
        for (std::size_t g = 0; g < lanes; ++g) {
            const float* const column = data + (j0 + g) * m;
            const std::size_t first_geq = static_cast<std::size_t>(base[g] - column) +
                                          (base[g][0] < sample[j0 + g] ? 1 : 0);
            pvec.values[j0 + g] = static_cast<double>(m - first_geq + 1) / denom;
        }
    }
    return pvec;
}

std::vector<PValueVector> pvalues_for_matrix(const BackgroundModel& model,
                                             const ActivationMatrix& matrix) {
    if (matrix.n_nodes != model.n_nodes) {
        throw ValidationError("matrix width " + std::to_string(matrix.n_nodes) +
                              " does not match model node count " +
                              std::to_string(model.n_nodes));
    }
    std::vector<PValueVector> out;
    out.reserve(matrix.n_samples);
    for (std::size_t i = 0; i < matrix.n_samples; ++i) {
        out.push_back(pvalues_for_sample(model, matrix.row(i)));
        if (!matrix.sample_ids.empty()) {
            out.back().source_sample_id = matrix.sample_ids[i];
        }
    }
    return out;
}

} // namespace subscan
