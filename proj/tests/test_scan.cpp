#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"

#include "subscan/rng.hpp"
#include "subscan/scan.hpp"

using namespace subscan;

namespace {

PValueVector pvec_of(std::vector<double> values) {
    PValueVector pvec;
    pvec.values = std::move(values);
    return pvec;
}

// Draws either tie-rich grid p-values (multiples of 0.1, including values at
// and above alpha_max) or continuous ones.
PValueVector random_pvec(Rng& rng, std::size_t j_nodes, bool grid) {
    std::vector<double> values(j_nodes);
    for (auto& p : values) {
        p = grid ? static_cast<double>(1 + rng.below(10)) / 10.0 : rng.uniform01();
    }
    return pvec_of(std::move(values));
}

void check_same_result(const ScanResult& got, const ScanResult& expected) {
    CHECK(got.score == doctest::Approx(expected.score).epsilon(1e-9));
    CHECK(got.subset == expected.subset);
    CHECK(got.k_star == expected.k_star);
    REQUIRE(got.alpha_star.has_value() == expected.alpha_star.has_value());
    if (expected.alpha_star) {
        CHECK(*got.alpha_star == *expected.alpha_star);
    }
}

} // namespace

TEST_SUITE("scan") {

TEST_CASE("filter_by_alpha_max keeps strictly smaller p-values") {
    const PValueVector pvec = pvec_of({0.01, 0.2, 0.4, 0.6, 0.9});
    const auto kept = filter_by_alpha_max(pvec, 0.5);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].first == 0);
    CHECK(kept[1].first == 1);
    CHECK(kept[2].first == 2);

    CHECK(filter_by_alpha_max(pvec_of({0.5, 0.7, 1.0}), 0.5).empty());
    // alpha_max = 1 keeps everything except exact ones.
    CHECK(filter_by_alpha_max(pvec_of({0.5, 0.7, 1.0}), 1.0).size() == 2);
}

TEST_CASE("scan_sample worked example") {
    const ScanResult r = scan_sample(pvec_of({0.01, 0.2, 0.4, 0.6, 0.9}), ScanConfig{});
    CHECK(r.score == doctest::Approx(std::log(100.0)).epsilon(1e-12));
    CHECK(r.score == doctest::Approx(4.6052).epsilon(1e-4));
    CHECK(r.subset == std::vector<std::size_t>{0});
    CHECK(r.k_star == 1);
    REQUIRE(r.alpha_star.has_value());
    CHECK(*r.alpha_star == 0.01);
}

TEST_CASE("scan_sample with nothing significant") {
    const ScanResult r = scan_sample(pvec_of({0.9, 0.8, 0.7}), ScanConfig{});
    CHECK(r.score == 0.0);
    CHECK(r.subset.empty());
    CHECK(r.k_star == 0);
    CHECK_FALSE(r.alpha_star.has_value());

    const ScanResult empty = scan_sample(pvec_of({}), ScanConfig{});
    CHECK(empty.score == 0.0);
    CHECK(empty.subset.empty());
}

TEST_CASE("equal p-values: the full prefix wins") {
    const ScanResult r = scan_sample(pvec_of({0.1, 0.1, 0.1, 0.1}), ScanConfig{});
    CHECK(r.k_star == 4);
    REQUIRE(r.alpha_star.has_value());
    CHECK(*r.alpha_star == 0.1);
    CHECK(r.score == doctest::Approx(4.0 * std::log(10.0)).epsilon(1e-12));
    CHECK(r.score == doctest::Approx(9.2103).epsilon(1e-4));
    CHECK(r.subset == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("result invariants on random vectors") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const PValueVector pvec = random_pvec(rng, 1 + rng.below(16), trial % 2 == 0);
        const ScanConfig config{trial % 3 == 0 ? 0.3 : 0.5, ScoreKind::berk_jones};
        const ScanResult r = scan_sample(pvec, config);

        CHECK(r.k_star == r.subset.size());
        CHECK(std::is_sorted(r.subset.begin(), r.subset.end()));
        if (r.subset.empty()) {
            CHECK(r.score == 0.0);
            CHECK_FALSE(r.alpha_star.has_value());
            continue;
        }
        REQUIRE(r.alpha_star.has_value());
        CHECK(*r.alpha_star < config.alpha_max);
        for (const std::size_t j : r.subset) {
            CHECK(j < pvec.values.size());
            CHECK(pvec.values[j] <= *r.alpha_star);
        }
        const ScoreTriple triple{*r.alpha_star, r.k_star, r.k_star};
        CHECK(r.score == npss_score(config.scorer, triple));
    }
}

TEST_CASE("brute-force oracle: single-node cases") {
    const ScanResult hit = brute_force_scan(pvec_of({0.3}), ScanConfig{});
    CHECK(hit.score == doctest::Approx(std::log(1.0 / 0.3)).epsilon(1e-12));
    CHECK(hit.score == doctest::Approx(1.2040).epsilon(1e-4));
    CHECK(hit.subset == std::vector<std::size_t>{0});

    const ScanResult miss = brute_force_scan(pvec_of({0.6}), ScanConfig{});
    CHECK(miss.score == 0.0);
    CHECK(miss.subset.empty());
}

TEST_CASE("brute-force oracle refuses huge inputs") {
    CHECK_THROWS_AS(brute_force_scan(pvec_of(std::vector<double>(21, 0.4)), ScanConfig{}),
                    ValidationError);
}

TEST_CASE("scan_sample agrees with the brute-force oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t j_nodes = 1 + rng.below(10);
        const PValueVector pvec = random_pvec(rng, j_nodes, trial % 2 == 0);
        ScanConfig config;
        config.alpha_max = (trial % 4 == 0) ? 1.0 : (trial % 4 == 1) ? 0.3 : 0.5;
        config.scorer = (trial % 5 == 0) ? ScoreKind::higher_criticism
                                         : ScoreKind::berk_jones;
        check_same_result(scan_sample(pvec, config), brute_force_scan(pvec, config));
    }
}

TEST_CASE("permutation equivariance") {
    Rng rng(13);
    const ScanConfig config{};
    for (int trial = 0; trial < 50; ++trial) {
        const PValueVector pvec = random_pvec(rng, 8, trial % 2 == 0);

        // Reverse is enough to move every index.
        PValueVector reversed;
        reversed.values.assign(pvec.values.rbegin(), pvec.values.rend());

        const ScanResult a = scan_sample(pvec, config);
        const ScanResult b = scan_sample(reversed, config);
        CHECK(a.score == b.score);
        std::vector<std::size_t> mapped;
        for (const std::size_t j : b.subset) {
            mapped.push_back(pvec.values.size() - 1 - j);
        }
        std::sort(mapped.begin(), mapped.end());
        CHECK(a.subset == mapped);
    }
}

TEST_CASE("decreasing one p-value never lowers the score") {
    Rng rng(17);
    const ScanConfig config{};
    for (int trial = 0; trial < 100; ++trial) {
        PValueVector pvec = random_pvec(rng, 1 + rng.below(12), trial % 2 == 0);
        const double base = scan_sample(pvec, config).score;
        const std::size_t j = rng.below(pvec.values.size());
        pvec.values[j] *= rng.uniform01();
        if (pvec.values[j] <= 0.0) {
            continue;
        }
        CHECK(scan_sample(pvec, config).score >= base);
    }
}

TEST_CASE("p-values at or above alpha_max are inert") {
    Rng rng(19);
    const ScanConfig config{};
    for (int trial = 0; trial < 100; ++trial) {
        PValueVector pvec = random_pvec(rng, 1 + rng.below(12), true);
        const ScanResult base = scan_sample(pvec, config);

        bool changed = false;
        for (auto& p : pvec.values) {
            if (p >= config.alpha_max) {
                // New value still at or above alpha_max.
                p = config.alpha_max + (1.0 - config.alpha_max) * rng.uniform01();
                changed = true;
            }
        }
        if (!changed) {
            continue;
        }
        check_same_result(scan_sample(pvec, config), base);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(scan_sample(pvec_of({0.0}), ScanConfig{}), ValidationError);
    CHECK_THROWS_AS(scan_sample(pvec_of({-0.1}), ScanConfig{}), ValidationError);
    CHECK_THROWS_AS(scan_sample(pvec_of({1.1}), ScanConfig{}), ValidationError);
    CHECK_THROWS_AS(scan_sample(pvec_of({0.5}), ScanConfig{0.0, ScoreKind::berk_jones}),
                    ValidationError);
    CHECK_THROWS_AS(scan_sample(pvec_of({0.5}), ScanConfig{1.5, ScoreKind::berk_jones}),
                    ValidationError);
    CHECK_NOTHROW(scan_sample(pvec_of({1.0}), ScanConfig{1.0, ScoreKind::berk_jones}));
}

} // TEST_SUITE
