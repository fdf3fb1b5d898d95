#pragma once

#include <span>
#include <string>
#include <vector>

#include "subscan/activation_io.hpp"

namespace subscan {

// Per-node empirical p-values for one test sample. Values live on the grid
// {c/(M+1) : c = 1..M+1}, so they are always in (0, 1].
struct PValueVector {
    std::vector<double> values;
    std::string source_sample_id;
};

// Rank-based tail p-value of one activation against one sorted background
// column: (#{background >= activation} + 1) / (M + 1). The comparison is
// non-strict, so ties with background values raise the p-value. O(log M).
double empirical_pvalue(std::span<const float> sorted_column, float activation);

PValueVector pvalues_for_sample(const BackgroundModel& model, std::span<const float> sample);

std::vector<PValueVector> pvalues_for_matrix(const BackgroundModel& model,
                                             const ActivationMatrix& matrix);

} // namespace subscan
