#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "subscan/error.hpp"

namespace subscan {

// Score functions available to the scanner. Berk-Jones is the default;
// Higher-Criticism is an optional alternative outside the default protocol.
enum class ScoreKind {
    berk_jones,
    higher_criticism,
};

// One evaluation point of a scan statistic: significance level alpha,
// the number of p-values at or below alpha (n_alpha), and the subset size (n).
struct ScoreTriple {
    double alpha = 0.0;
    std::size_t n_alpha = 0;
    std::size_t n = 0;
};

inline void validate_triple(const ScoreTriple& t) {
    if (!(t.alpha > 0.0 && t.alpha < 1.0)) {
        throw ValidationError("score triple: alpha must be in (0,1), got " +
                              std::to_string(t.alpha));
    }
    if (t.n < 1) {
        throw ValidationError("score triple: n must be >= 1");
    }
    if (t.n_alpha > t.n) {
        throw ValidationError("score triple: n_alpha (" + std::to_string(t.n_alpha) +
                              ") exceeds n (" + std::to_string(t.n) + ")");
    }
}

// Bernoulli KL divergence x*ln(x/y) + (1-x)*ln((1-x)/(1-y)), natural log,
// with the 0*ln(0) = 0 convention at x = 0 and x = 1.
inline double kl_bernoulli(double x, double y) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError("kl_bernoulli: x must be in [0,1], got " + std::to_string(x));
    }
    if (!(y > 0.0 && y < 1.0)) {
        throw ValidationError("kl_bernoulli: y must be in (0,1), got " + std::to_string(y));
    }
    const double t1 = (x == 0.0) ? 0.0 : x * std::log(x / y);
    const double t2 = (x == 1.0) ? 0.0 : (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
    // Cancellation near x == y can round a few ulp below zero.
    return std::max(0.0, t1 + t2);
}

// Berk-Jones statistic N * KL(N_alpha/N, alpha), clamped to 0 when the
// observed proportion does not exceed alpha (one-sided: only an excess of
// significant p-values counts as evidence).
inline double berk_jones(const ScoreTriple& t) {
    validate_triple(t);
    const double ratio = static_cast<double>(t.n_alpha) / static_cast<double>(t.n);
    if (ratio <= t.alpha) {
        return 0.0;
    }
    return static_cast<double>(t.n) * kl_bernoulli(ratio, t.alpha);
}

// Higher-Criticism statistic (N_alpha - N*alpha) / sqrt(N*alpha*(1-alpha)),
// with the same one-sided clamp as berk_jones.
inline double higher_criticism(const ScoreTriple& t) {
    validate_triple(t);
    const double n = static_cast<double>(t.n);
    const double ratio = static_cast<double>(t.n_alpha) / n;
    if (ratio <= t.alpha) {
        return 0.0;
    }
    return (static_cast<double>(t.n_alpha) - n * t.alpha) /
           std::sqrt(n * t.alpha * (1.0 - t.alpha));
}

inline double npss_score(ScoreKind kind, const ScoreTriple& t) {
    switch (kind) {
    case ScoreKind::berk_jones: return berk_jones(t);
    case ScoreKind::higher_criticism: return higher_criticism(t);
    }
    throw ValidationError("unknown score kind");
}

inline std::string_view to_string(ScoreKind kind) {
    switch (kind) {
    case ScoreKind::berk_jones: return "bj";
    case ScoreKind::higher_criticism: return "hc";
    }
    return "?";
}

inline ScoreKind parse_score_kind(std::string_view name) {
    if (name == "bj") return ScoreKind::berk_jones;
    if (name == "hc") return ScoreKind::higher_criticism;
    throw ValidationError("unknown scorer '" + std::string(name) + "' (expected bj or hc)");
}

} // namespace subscan
