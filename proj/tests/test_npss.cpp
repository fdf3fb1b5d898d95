#include <cmath>

#include "doctest.h"

#include "subscan/npss.hpp"

using namespace subscan;

TEST_SUITE("npss") {

TEST_CASE("kl_bernoulli known values") {
    CHECK(kl_bernoulli(0.5, 0.5) == 0.0);
    CHECK(kl_bernoulli(1.0, 0.2) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
    CHECK(kl_bernoulli(0.0, 0.2) == doctest::Approx(std::log(1.0 / 0.8)).epsilon(1e-12));
    CHECK(kl_bernoulli(0.5, 0.1) ==
          doctest::Approx(0.5 * std::log(5.0) + 0.5 * std::log(0.5 / 0.9)).epsilon(1e-12));
    CHECK(kl_bernoulli(0.5, 0.1) == doctest::Approx(0.51083).epsilon(1e-4));
}

TEST_CASE("kl_bernoulli domain errors") {
    CHECK_THROWS_AS(kl_bernoulli(0.5, 0.0), ValidationError);
    CHECK_THROWS_AS(kl_bernoulli(0.5, 1.0), ValidationError);
    CHECK_THROWS_AS(kl_bernoulli(-0.1, 0.5), ValidationError);
    CHECK_THROWS_AS(kl_bernoulli(1.1, 0.5), ValidationError);
}

TEST_CASE("kl_bernoulli nonnegative on a dense grid, zero only at x == y") {
    for (int xi = 0; xi <= 100; ++xi) {
        const double x = xi / 100.0;
        for (int yi = 1; yi <= 99; ++yi) {
            const double y = yi / 100.0;
            const double kl = kl_bernoulli(x, y);
            CHECK(kl >= 0.0);
            if (x != y) {
                CHECK(kl > 0.0);
            }
        }
    }
}

TEST_CASE("berk_jones known values") {
    CHECK(berk_jones({0.5, 5, 10}) == 0.0);
    CHECK(berk_jones({0.1, 5, 10}) ==
          doctest::Approx(10.0 * kl_bernoulli(0.5, 0.1)).epsilon(1e-12));
    CHECK(berk_jones({0.1, 5, 10}) == doctest::Approx(5.1083).epsilon(1e-4));
    CHECK(berk_jones({0.01, 1, 1}) == doctest::Approx(std::log(100.0)).epsilon(1e-12));
}

TEST_CASE("berk_jones closed form at n_alpha == n") {
    for (const double alpha : {0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999}) {
        for (const std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{100},
                                    std::size_t{9999}}) {
            const double expected = static_cast<double>(n) * std::log(1.0 / alpha);
            CHECK(berk_jones({alpha, n, n}) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("berk_jones clamps to zero at or below the expected proportion") {
    CHECK(berk_jones({0.5, 0, 10}) == 0.0);
    CHECK(berk_jones({0.5, 2, 10}) == 0.0);
    CHECK(berk_jones({0.3, 3, 10}) == 0.0);
    CHECK(berk_jones({0.299, 3, 10}) > 0.0);
}

TEST_CASE("berk_jones non-decreasing in n_alpha above the clamp region") {
    const double alpha = 0.2;
    const std::size_t n = 50;
    double prev = 0.0;
    for (std::size_t n_alpha = 10; n_alpha <= n; ++n_alpha) {
        const double score = berk_jones({alpha, n_alpha, n});
        CHECK(score >= prev);
        prev = score;
    }
}

TEST_CASE("triple validation") {
    CHECK_THROWS_AS(berk_jones({0.0, 1, 1}), ValidationError);
    CHECK_THROWS_AS(berk_jones({1.0, 1, 1}), ValidationError);
    CHECK_THROWS_AS(berk_jones({0.5, 0, 0}), ValidationError);
    CHECK_THROWS_AS(berk_jones({0.5, 3, 2}), ValidationError);
}

TEST_CASE("higher_criticism known values") {
    CHECK(higher_criticism({0.5, 5, 10}) == 0.0);
    CHECK(higher_criticism({0.1, 5, 10}) ==
          doctest::Approx(4.0 / std::sqrt(0.9)).epsilon(1e-12));
    CHECK(higher_criticism({0.1, 5, 10}) == doctest::Approx(4.2164).epsilon(1e-4));
    CHECK(higher_criticism({0.2, 1, 1}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("npss_score dispatches by kind") {
    const ScoreTriple t{0.1, 4, 10};
    CHECK(npss_score(ScoreKind::berk_jones, t) == berk_jones(t));
    CHECK(npss_score(ScoreKind::higher_criticism, t) == higher_criticism(t));
}

TEST_CASE("score kind names round-trip") {
    CHECK(to_string(ScoreKind::berk_jones) == "bj");
    CHECK(to_string(ScoreKind::higher_criticism) == "hc");
    CHECK(parse_score_kind("bj") == ScoreKind::berk_jones);
    CHECK(parse_score_kind("hc") == ScoreKind::higher_criticism);
    CHECK_THROWS_AS(parse_score_kind("ks"), ValidationError);
}

} // TEST_SUITE
