#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace pulearn;
using namespace pulearn::metrics;

namespace {

std::vector<unsigned char> mask(const std::vector<int>& v) {
    return {v.begin(), v.end()};
}

std::vector<int> labels_of(const std::vector<int>& pos) {
    std::vector<int> y;
    for (int v : pos) y.push_back(v != 0 ? 1 : -1);
    return y;
}

}  // namespace

TEST_CASE("ecdf examples") {
    const std::vector<double> s{1, 2, 3, 4};
    CHECK(ecdf_at(s, 2.5) == 0.5);
    CHECK(ecdf_at(s, 0.0) == 0.0);
    CHECK(ecdf_at(s, 4.0) == 1.0);
}

TEST_CASE("quantile_threshold examples") {
    const std::vector<double> s{4, 2, 1, 3};
    CHECK(quantile_threshold(s, 0.25) == 3.0);
    CHECK(quantile_threshold(s, 0.5) == 2.0);
    CHECK(quantile_threshold(s, 1.0) == 1.0);
    CHECK_THROWS_AS(quantile_threshold(s, 0.0), Error);
    CHECK_THROWS_AS(quantile_threshold(std::vector<double>{}, 0.5), Error);
}

TEST_CASE("quantile_threshold matches the infimum definition") {
    rng::Stream stream(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + stream.below(12);
        std::vector<double> s(n);
        for (auto& v : s) v = static_cast<double>(stream.below(5));
        for (std::size_t j = 1; j <= 4 * n; ++j) {
            const double p = static_cast<double>(j) / static_cast<double>(4 * n);
            CHECK(quantile_threshold(s, p) == oracle::threshold(s, p));
        }
    }
}

TEST_CASE("with distinct scores n - ceil((1 - p) n) + 1 samples reach the threshold") {
    rng::Stream stream(4);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + stream.below(40);
        std::vector<double> s(n);
        for (auto& v : s) v = stream.normal();
        for (std::size_t j = 0; j < 2 * n; ++j) {
            // Odd multiples of 1/(4n) keep (1 - p) n away from integers.
            const double p = static_cast<double>(2 * j + 1) / static_cast<double>(4 * n);
            const double t = quantile_threshold(s, p);
            const auto reach =
                static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double v) { return v >= t; }));
            const auto expect = n - static_cast<std::size_t>(std::ceil((1.0 - p) * static_cast<double>(n))) + 1;
            CHECK(reach == expect);
        }
    }
}

TEST_CASE("sensitivity examples") {
    const std::vector<double> s{0.9, 0.1, 0.7};
    const std::vector<std::size_t> pos{0, 2};
    CHECK(sensitivity(s, pos, 0.8) == 0.5);
    CHECK(sensitivity(s, pos, -std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(sensitivity(s, pos, 0.95) == 0.0);
}

TEST_CASE("lift curve example") {
    const std::vector<double> s{0.9, 0.8, 0.7, 0.1};
    const auto curve = lift_curve(s, std::vector<std::size_t>{0, 2});
    REQUIRE(curve.points.size() == 4);
    const double p[] = {0.25, 0.5, 0.75, 1.0};
    const double a[] = {0.5, 0.5, 1.0, 1.0};
    for (int t = 0; t < 4; ++t) {
        CHECK(curve.points[t].p == p[t]);
        CHECK(curve.points[t].alpha == a[t]);
    }
    CHECK(lift_curve_csv(curve) == "p,alpha\n0.25,0.5\n0.5,0.5\n0.75,1\n1,1\n");
}

TEST_CASE("lift curve forced shapes") {
    const std::vector<double> s{0.3, 0.9, 0.5, 0.1, 0.7};
    const auto all = lift_curve(s, mask({1, 1, 1, 1, 1}));
    for (std::size_t t = 0; t < 5; ++t) CHECK(all.points[t].alpha == static_cast<double>(t + 1) / 5.0);
    const auto sep = lift_curve(s, mask({0, 1, 0, 0, 1}));
    for (std::size_t t = 0; t < 5; ++t) CHECK(sep.points[t].alpha == std::min<double>(t + 1, 2) / 2.0);
}

TEST_CASE("aul examples") {
    CHECK(aul(std::vector<double>{0.9, 0.8, 0.7, 0.1}, std::vector<std::size_t>{0, 2}) == 0.75);
    CHECK(aul(std::vector<double>{0.9, 0.1}, std::vector<std::size_t>{0}) == 1.0);
    CHECK(aul(std::vector<double>{0.9, 0.1}, std::vector<std::size_t>{1}) == 0.5);
    CHECK_THROWS_AS(aul(std::vector<double>{0.9, 0.1}, std::vector<std::size_t>{}), Error);
}

TEST_CASE("canonical ties break by ascending index") {
    const std::vector<double> s{0.5, 0.5, 0.5, 0.5};
    CHECK(canonical_order(s) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(aul(s, mask({1, 0, 0, 0})) == 1.0);
    CHECK(aul(s, mask({0, 0, 0, 1})) == 0.25);
    CHECK(aul(s, mask({1, 0, 0, 0}), TieMode::Average) == 0.625);
    CHECK(aul(s, mask({0, 0, 0, 1}), TieMode::Average) == 0.625);
}

TEST_CASE("average tie mode equals the mean over tie orderings") {
    rng::Stream stream(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + stream.below(7);
        std::vector<double> s(n);
        std::vector<int> pos(n);
        for (auto& v : s) v = static_cast<double>(stream.below(3));
        for (auto& v : pos) v = stream.bernoulli(0.5) ? 1 : 0;
        pos[stream.below(n)] = 1;
        CHECK(aul(s, mask(pos), TieMode::Average) == doctest::Approx(oracle::aul_all_tie_orders(s, pos)).epsilon(1e-12));
    }
}

TEST_CASE("aul equals the integral of the lift step function") {
    rng::Stream stream(23);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + stream.below(10);
        std::vector<double> s(n);
        std::vector<int> pos(n);
        for (auto& v : s) v = stream.uniform();
        for (auto& v : pos) v = stream.bernoulli(0.4) ? 1 : 0;
        pos[stream.below(n)] = 1;
        CHECK(std::abs(aul(s, mask(pos)) - oracle::aul_integral(s, pos)) < 1e-12);
    }
}

TEST_CASE("auc examples") {
    CHECK(auc(std::vector<double>{0.9, 0.8, 0.7, 0.1}, std::vector<int>{1, -1, 1, -1}) == 0.75);
    CHECK(auc(std::vector<double>{0.4, 0.4, 0.4}, std::vector<int>{1, -1, -1}) == 0.5);
    CHECK(auc(std::vector<double>{0.9, 0.2, 0.8}, std::vector<int>{1, -1, 1}) == 1.0);
    CHECK_THROWS_AS(auc(std::vector<double>{0.9, 0.8}, std::vector<int>{1, 1}), Error);
}

TEST_CASE("auc matches pairwise enumeration with ties") {
    rng::Stream stream(31);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + stream.below(19);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (auto& v : s) v = static_cast<double>(stream.below(6));
        for (auto& v : y) v = stream.bernoulli(0.5) ? 1 : -1;
        y[0] = 1;
        y[1] = -1;
        CHECK(auc(s, y) == oracle::auc_pairs(s, y));
    }
}

TEST_CASE("relation residual examples") {
    CHECK(relation_residual(0.5, 0.5, 0.123) == 0.0);
    CHECK(relation_residual(0.75, 0.75, 0.5) == -0.125);
}

TEST_CASE("finite-sample relation with the empirical prior") {
    // AUL_PN = thetaP/2 + (1 - thetaP) AUC + 1/(2n) when thetaP is the label
    // fraction, for tie-free scores in canonical mode and for any scores in
    // average mode.
    rng::Stream stream(41);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + stream.below(60);
        std::vector<double> s(n), tied(n);
        std::vector<int> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = stream.uniform();
            tied[i] = static_cast<double>(stream.below(4));
            pos[i] = stream.bernoulli(0.4) ? 1 : 0;
        }
        pos[0] = 1;
        pos[1] = 0;
        const auto y = labels_of(pos);
        const double theta = static_cast<double>(std::count(pos.begin(), pos.end(), 1)) / static_cast<double>(n);
        const double half_n = 0.5 / static_cast<double>(n);
        CHECK(relation_residual(auc(s, y), aul(s, mask(pos)), theta) == doctest::Approx(-half_n).epsilon(1e-9));
        CHECK(relation_residual(auc(tied, y), aul(tied, mask(pos), TieMode::Average), theta) ==
              doctest::Approx(-half_n).epsilon(1e-9));
    }
}

TEST_CASE("aul and auc are invariant under strictly increasing transforms") {
    rng::Stream stream(53);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + stream.below(50);
        std::vector<double> s(n), t(n);
        std::vector<int> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(stream.below(8));
            t[i] = std::exp(0.5 * s[i]) - 3.0;
            pos[i] = stream.bernoulli(0.3) ? 1 : 0;
        }
        pos[0] = 1;
        pos[1] = 0;
        for (auto mode : {TieMode::Canonical, TieMode::Average}) {
            CHECK(aul(s, mask(pos), mode) == aul(t, mask(pos), mode));
        }
        CHECK(auc(s, labels_of(pos)) == auc(t, labels_of(pos)));
    }
}

TEST_CASE("lift curve is monotone with alpha_n = 1") {
    rng::Stream stream(61);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + stream.below(40);
        std::vector<double> s(n);
        std::vector<int> pos(n);
        for (auto& v : s) v = static_cast<double>(stream.below(5));
        for (auto& v : pos) v = stream.bernoulli(0.3) ? 1 : 0;
        pos[0] = 1;
        for (auto mode : {TieMode::Canonical, TieMode::Average}) {
            const auto curve = lift_curve(s, mask(pos), mode);
            for (std::size_t t = 1; t < n; ++t) CHECK(curve.points[t].alpha >= curve.points[t - 1].alpha);
            CHECK(curve.points.back().alpha == 1.0);
            const double a = aul(s, mask(pos), mode);
            CHECK(a > 0.0);
            CHECK(a <= 1.0);
        }
    }
}

TEST_CASE("metric report JSON omits absent fields") {
    MetricReport r;
    r.aul = 0.75;
    r.n = 4;
    r.n_pos = 2;
    const auto text = r.to_json();
    CHECK(text.find("\"aul\": 0.75") != std::string::npos);
    CHECK(text.find("auc") == std::string::npos);
    CHECK(text.find("residual") == std::string::npos);
}
