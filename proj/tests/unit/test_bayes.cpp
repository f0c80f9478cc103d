#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "common/fixtures.hpp"
#include "common/quadrature.hpp"
#include "doctest.h"
#include "skyjoin/bayes.hpp"
#include "skyjoin/errors.hpp"
#include "skyjoin/geometry.hpp"

using namespace skyjoin;
using namespace skyjoin::bayes;
using namespace skyjoin::sphere;
using skyjoin::testsupport::SkyRng;

namespace {

/// Two unit vectors separated by exactly psi, in the xy plane.
std::pair<UnitVector, UnitVector> separated(double psi_rad) {
    return {UnitVector{1.0, 0.0, 0.0},
            UnitVector{std::cos(psi_rad), std::sin(psi_rad), 0.0}};
}

double acc_log_bf(const std::vector<double>& sigma_rad,
                  const std::vector<UnitVector>& x) {
    MatchAccumulator acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc.add(x[i], Precision::from_sigma_rad(sigma_rad[i]));
    }
    return log_bayes_factor(acc);
}

}  // namespace

TEST_CASE("precision factories") {
    Precision p = Precision::from_sigma_arcsec(0.1);
    double sigma_rad = 0.1 * kArcsecRad;
    CHECK(p.w == doctest::Approx(1.0 / (sigma_rad * sigma_rad)).epsilon(1e-12));
    CHECK(p.sigma_rad == doctest::Approx(sigma_rad).epsilon(1e-12));
    CHECK(Precision::from_w(4.0).sigma_rad == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(Precision::from_sigma_arcsec(0.0), DomainError);
    CHECK_THROWS_AS(Precision::from_sigma_arcsec(-1.0), DomainError);
    CHECK_THROWS_AS(Precision::from_w(0.0), DomainError);
    CHECK_THROWS_AS(Precision::from_sigma_rad(std::numeric_limits<double>::quiet_NaN()),
                    DomainError);
    CHECK_THROWS_AS(Precision::from_w(std::numeric_limits<double>::infinity()),
                    DomainError);
}

TEST_CASE("logsinh agrees with long double references on both sides of the seam") {
    for (double w : {1e-3, 0.1, 0.5, 1.0, 5.0, 20.0, 33.9}) {
        double ref = (double)std::log(std::sinh((long double)w));
        CHECK(logsinh(w) == doctest::Approx(ref).epsilon(1e-14));
    }
    for (double w : {34.1, 40.0, 100.0, 300.0}) {
        long double ref = (long double)w - std::log((long double)2) +
                          std::log1p(-std::exp(-2 * (long double)w));
        CHECK(logsinh(w) == doctest::Approx((double)ref).epsilon(1e-14));
    }
    // continuity: scan across the branch switch
    for (double w = 33.0; w <= 35.0; w += 0.01) {
        long double ref = (long double)w - std::log((long double)2) +
                          std::log1p(-std::exp(-2 * (long double)w));
        CHECK(std::abs(logsinh(w) - (double)ref) <= 1e-13 * std::abs((double)ref));
    }
    // far beyond exp overflow the tail is exactly zero
    CHECK(logsinh(1e12) == 1e12 - kLn2);
    CHECK(logsinh(1e300) == 1e300);

    CHECK_THROWS_AS(logsinh(0.0), DomainError);
    CHECK_THROWS_AS(logsinh(-1.0), DomainError);
    CHECK_THROWS_AS(logsinh(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("evidence matches spherical quadrature at degree-scale errors") {
    const double deg = kRadPerDeg;
    {
        auto [a, b] = separated(0.5 * deg);
        double lb = acc_log_bf({2 * deg, 2 * deg}, {a, b});
        CHECK(lb == doctest::Approx(testsupport::quadrature_log_bf({2 * deg, 2 * deg},
                                                                   {a, b}))
                        .epsilon(1e-8));
    }
    {
        auto [a, b] = separated(3.0 * deg);
        double lb = acc_log_bf({2 * deg, 5 * deg}, {a, b});
        CHECK(lb == doctest::Approx(testsupport::quadrature_log_bf({2 * deg, 5 * deg},
                                                                   {a, b}))
                        .epsilon(1e-8));
    }
    {
        // three detections around a common object
        std::vector<UnitVector> x = {
            to_unit_vector(SkyCoord{40.0, -10.0}),
            to_unit_vector(SkyCoord{41.5, -10.5}),
            to_unit_vector(SkyCoord{39.2, -8.9}),
        };
        std::vector<double> s = {2 * deg, 3 * deg, 5 * deg};
        CHECK(acc_log_bf(s, x) ==
              doctest::Approx(testsupport::quadrature_log_bf(s, x)).epsilon(1e-8));
    }
}

TEST_CASE("log evidence is independent of accumulation order") {
    SkyRng rng(11);
    UnitVector center = to_unit_vector(SkyCoord{123.0, 45.0});
    std::vector<UnitVector> x;
    std::vector<Precision> p;
    for (int i = 0; i < 6; ++i) {
        x.push_back(rng.near(center, 1.0 * kArcsecRad));
        p.push_back(Precision::from_sigma_arcsec(rng.uniform(0.05, 0.5)));
    }
    std::vector<int> order = {0, 1, 2, 3, 4, 5};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    do {
        MatchAccumulator acc;
        for (int i : order) acc.add(x[(std::size_t)i], p[(std::size_t)i]);
        double lb = log_bayes_factor(acc);
        lo = std::min(lo, lb);
        hi = std::max(hi, lb);
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(hi - lo <= 1e-9 * std::max(1.0, std::abs(hi)));
}

TEST_CASE("best position sits on the weighted geodesic") {
    UnitVector x1 = to_unit_vector(SkyCoord{10.0, 20.0});
    double psi = 1.0 * kArcsecRad;
    // x2 one arcsecond away, three times lower weight
    SkyRng rng(3);
    UnitVector x2 = x1;
    while (angular_distance(x1, x2) < 0.9 * psi) x2 = rng.near(x1, psi);
    psi = angular_distance(x1, x2);

    Precision p1 = Precision::from_sigma_arcsec(0.1);
    Precision p2 = Precision::from_w(p1.w / 3.0);
    MatchAccumulator acc;
    acc.add(x1, p1);
    acc.add(x2, p2);
    UnitVector bp = best_position(acc);
    CHECK(angular_distance(bp, x1) == doctest::Approx(psi / 4.0).epsilon(1e-6));
    CHECK(angular_distance(bp, x1) + angular_distance(bp, x2) ==
          doctest::Approx(psi).epsilon(1e-9));

    // equal weights land halfway
    MatchAccumulator eq;
    eq.add(x1, p1);
    eq.add(x2, p1);
    CHECK(angular_distance(best_position(eq), x1) ==
          doctest::Approx(psi / 2.0).epsilon(1e-6));
}

TEST_CASE("single, empty and cancelling accumulators") {
    MatchAccumulator acc;
    CHECK_THROWS_AS(log_bayes_factor(acc), DomainError);
    CHECK_THROWS_AS(best_position(acc), DomainError);

    acc.add(UnitVector{0.0, 0.0, 1.0}, Precision::from_sigma_arcsec(0.3));
    CHECK(log_bayes_factor(acc) == 0.0);
    CHECK(best_position(acc).z == doctest::Approx(1.0));

    // equal weights at antipodes cancel: no combined position exists
    MatchAccumulator bad;
    bad.add(UnitVector{0.0, 0.0, 1.0}, Precision::from_w(1e10));
    bad.add(UnitVector{0.0, 0.0, -1.0}, Precision::from_w(1e10));
    CHECK_THROWS_AS(log_bayes_factor(bad), DegenerateConfiguration);
    CHECK_THROWS_AS(best_position(bad), DegenerateConfiguration);

    // accumulate() is by-value and leaves its input alone
    MatchAccumulator one;
    one.add(UnitVector{1.0, 0.0, 0.0}, Precision::from_w(100.0));
    MatchAccumulator two = accumulate(one, UnitVector{0.0, 1.0, 0.0},
                                      Precision::from_w(50.0));
    CHECK(one.n == 1);
    CHECK(two.n == 2);
}

TEST_CASE("pair evidence peaks at coincidence and decreases with separation") {
    SkyRng rng(42);
    for (int i = 0; i < 300; ++i) {
        double w1 = std::exp(rng.uniform(std::log(1e2), std::log(1e13)));
        double w2 = std::exp(rng.uniform(std::log(1e2), std::log(1e13)));
        double c = coincident_log_bf({w1, w2});
        CHECK(std::abs(pair_log_bf_w(w1, w2, 0.0) - c) <= 1e-12 * std::abs(c));
        double p1 = rng.uniform(0.0, kPi);
        double p2 = rng.uniform(0.0, kPi);
        if (p1 > p2) std::swap(p1, p2);
        double b1 = pair_log_bf_w(w1, w2, p1);
        double b2 = pair_log_bf_w(w1, w2, p2);
        CHECK(b1 <= c + 1e-9 * std::abs(c));
        CHECK(b2 <= b1 + 1e-9 * std::max(1.0, std::abs(b1)));
    }
}

TEST_CASE("pair closed form matches the n-way accumulator") {
    SkyRng rng(1234);
    for (int i = 0; i < 400; ++i) {
        double w1 = std::exp(rng.uniform(std::log(10.0), std::log(1e13)));
        double w2 = w1 * std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
        double sigma_scale = 1.0 / std::sqrt(std::min(w1, w2));
        double psi = rng.uniform(0.0, 20.0) * sigma_scale;
        if (psi >= kPi) psi = kPi * 0.999;
        auto [a, b] = separated(psi);
        MatchAccumulator acc;
        acc.add(a, Precision::from_w(w1));
        acc.add(b, Precision::from_w(w2));
        double direct = pair_log_bf_w(w1, w2, psi);
        double viaacc = log_bayes_factor(acc);
        CHECK(std::abs(direct - viaacc) <= 1e-9 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("gaussian small-angle limit at survey scale") {
    // 0.1" and 0.2" errors, 0.3" apart: the flat-sky formula is exact to ~1e-9
    double s1 = 0.1 * kArcsecRad, s2 = 0.2 * kArcsecRad;
    double psi = 0.3 * kArcsecRad;
    auto [a, b] = separated(psi);
    double gauss = gaussian_limit_log_bf({s1, s2}, {a, b});
    double exact = acc_log_bf({s1, s2}, {a, b});
    CHECK(std::abs(exact - gauss) <= 1e-6 * std::abs(gauss));

    double sum = s1 * s1 + s2 * s2;
    CHECK(gauss == doctest::Approx(std::log(2.0 / sum) - psi * psi / (2.0 * sum))
                       .epsilon(1e-12));

    CHECK_THROWS_AS(gaussian_limit_log_bf({s1}, {a}), DomainError);
    CHECK_THROWS_AS(gaussian_limit_log_bf({s1, s2, s1}, {a, b, a}), DomainError);
}

TEST_CASE("cutoff radius brackets the evidence limit") {
    struct Case {
        double s1_as, s2_as, limit;
    };
    for (const Case& c : {Case{0.1, 0.2, 1e6}, Case{1.0, 1.0, 1e3},
                          Case{30.0, 60.0, 10.0}, Case{0.05, 0.5, 1e9}}) {
        double s1 = c.s1_as * kArcsecRad, s2 = c.s2_as * kArcsecRad;
        double log_limit = std::log(c.limit);
        double r = cutoff_radius(s1, s2, log_limit);
        REQUIRE(r > 0.0);
        REQUIRE(r < kPi);
        double w1 = 1.0 / (s1 * s1), w2 = 1.0 / (s2 * s2);
        CHECK(pair_log_bf_w(w1, w2, r * (1.0 - 1e-6)) >= log_limit);
        CHECK(pair_log_bf_w(w1, w2, r * (1.0 + 1e-6)) < log_limit);
        CHECK(cutoff_radius_w(w1, w2, log_limit) == r);
    }

    // unreachable limit: not even coincident detections qualify
    double w = Precision::from_sigma_arcsec(1.0).w;
    CHECK(cutoff_radius_w(w, w, coincident_log_bf({w, w}) + 1.0) == 0.0);
    // trivial limit: every separation qualifies
    CHECK(cutoff_radius_w(0.1, 0.1, -10.0) == kPi);
    CHECK(cutoff_radius_w(w, w, -std::numeric_limits<double>::infinity()) == kPi);
}

TEST_CASE("evidence survives survey-grade weights without overflow") {
    // w ~ 4e12: everything must stay finite and ordered
    double s = 0.1 * kArcsecRad;
    auto [a, b] = separated(0.05 * kArcsecRad);
    double lb_near = acc_log_bf({s, s}, {a, b});
    CHECK(std::isfinite(lb_near));
    auto [c, d] = separated(30.0 * kRadPerDeg);
    double lb_far = acc_log_bf({s, s}, {c, d});
    CHECK(std::isfinite(lb_far));
    CHECK(lb_far < 0.0);
    CHECK(lb_near > lb_far);
    CHECK(lb_near == doctest::Approx(pair_log_bf(Precision::from_sigma_rad(s),
                                                   Precision::from_sigma_rad(s),
                                                   angular_distance(a, b)))
                           .epsilon(1e-9));
}
