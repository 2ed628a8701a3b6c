#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "coupledmc/estimators.hpp"

using namespace coupledmc;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ParticleBlock make_block(std::vector<double> log_w, std::vector<double> f) {
    std::vector<Point> points(log_w.size());
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<double>(i);
    return ParticleBlock(std::move(points), std::move(log_w), std::move(f));
}

} // namespace

TEST_CASE("unit weights give log Zhat = 0", "[estimators]") {
    const auto spec = exponential_pair(1.0);
    Rng rng(1);
    const auto block = sample_block(spec, 5, rng);
    for (double lw : block.log_weights()) CHECK(lw == 0.0);
    CHECK(block.log_zhat() == 0.0);
    CHECK(zhat(block) == 1.0);
}

TEST_CASE("sampling is deterministic given the seed", "[estimators]") {
    const auto spec = exponential_pair(1.5);
    Rng a(77);
    Rng b(77);
    const auto x = sample_block(spec, 3, a);
    const auto y = sample_block(spec, 3, b);
    CHECK(std::ranges::equal(x.points(), y.points()));
    CHECK(std::ranges::equal(x.log_weights(), y.log_weights()));
    CHECK(x.fhat() == y.fhat());
}

TEST_CASE("hand-evaluated estimators", "[estimators]") {
    const auto single = make_block({std::log(7.0)}, {0.25});
    CHECK(snis(single) == 0.25);

    const auto pair = make_block({std::log(1.0), std::log(3.0)}, {0.0, 1.0});
    CHECK_THAT(snis(pair), WithinRel(0.75, 1e-15));

    const auto flat = make_block({0.4, 0.4, 0.4, 0.4}, {1.0, 2.0, 3.0, 6.0});
    CHECK_THAT(snis(flat), WithinRel(3.0, 1e-15));

    const auto unnorm = make_block({std::log(2.0), 0.0}, {1.0, 1.0});
    CHECK_THAT(unnormalized_is(unnorm), WithinRel(1.5, 1e-15));

    // weights (2, 2, 0) of the discrete example, one particle on each state
    const auto spec = discrete_pair({0.5, 0.5, 0.0}, {0.25, 0.25, 0.5});
    const auto block = make_block({spec.log_weight(0), spec.log_weight(1), spec.log_weight(2)}, {0.0, 1.0, 2.0});
    CHECK_THAT(zhat(block), WithinRel(4.0 / 3.0, 1e-15));
}

TEST_CASE("log Zhat agrees with the arithmetic mean of the weights", "[estimators]") {
    const auto block = make_block({-1.0, 0.5, 2.0, -0.25}, {0, 0, 0, 0});
    const double mean = (std::exp(-1.0) + std::exp(0.5) + std::exp(2.0) + std::exp(-0.25)) / 4.0;
    CHECK_THAT(zhat(block), WithinRel(mean, 1e-12));

    // 600 orders of magnitude apart: the max shift keeps both finite
    const auto wide = make_block({-300.0, 300.0}, {0.0, 1.0});
    CHECK_THAT(wide.log_zhat(), WithinRel(300.0 - std::log(2.0), 1e-15));
    CHECK(snis(wide) == 1.0);
}

TEST_CASE("snis is unchanged by a common log-weight shift", "[estimators]") {
    // Dyadic log-weights keep lw + c exact, so the shifted weights are bit-identical.
    const std::vector<double> lw = {0.5, -1.25, 2.0, 0.75, -3.5};
    const std::vector<double> f = {0.1, -0.7, 0.3, 0.9, -0.2};
    const double base = snis(make_block(lw, f));
    for (double c : {-100.0, 0.0, 100.0}) {
        auto shifted = lw;
        for (auto& v : shifted) v += c;
        CHECK(snis(make_block(shifted, f)) == base);
    }
}

TEST_CASE("snis stays inside the range of f and is permutation invariant", "[estimators]") {
    const auto spec = exponential_pair(1.2);
    Rng rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const auto block = sample_block(spec, 17, rng);
        const auto [lo, hi] = std::ranges::minmax(block.f_values());
        REQUIRE(block.fhat() >= lo);
        REQUIRE(block.fhat() <= hi);
        REQUIRE(std::abs(block.fhat()) <= 1.0);

        std::vector<Point> pts(block.points().rbegin(), block.points().rend());
        std::vector<double> lw(block.log_weights().rbegin(), block.log_weights().rend());
        std::vector<double> fv(block.f_values().rbegin(), block.f_values().rend());
        const ParticleBlock reversed(pts, lw, fv);
        REQUIRE_THAT(reversed.fhat(), WithinRel(block.fhat(), 1e-12));
        REQUIRE_THAT(zhat(reversed), WithinRel(zhat(block), 1e-12));
    }
}

TEST_CASE("invalid blocks are rejected", "[estimators]") {
    CHECK_THROWS_AS(make_block({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(make_block({0.0, 0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_block({kNegInf, kNegInf}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_block({std::nan(""), 0.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_block({-kNegInf}, {1.0}), std::invalid_argument);
    CHECK_NOTHROW(make_block({kNegInf, 0.0}, {1.0, 2.0}));

    // every particle on the zero-weight state
    const auto spec = discrete_pair({1.0, 0.0}, {0.5, 0.5});
    Rng rng(1);
    bool threw = false;
    for (int i = 0; i < 64 && !threw; ++i) {
        try {
            sample_block(spec, 1, rng);
        } catch (const std::invalid_argument&) {
            threw = true;
        }
    }
    CHECK(threw);
}

TEST_CASE("Zhat is unbiased on the discrete example", "[estimators][statistical]") {
    // E Zhat = 1 and Var(omega) = 1, so SE = 1 / sqrt(n).
    const auto spec = discrete_pair({0.5, 0.5, 0.0}, {0.25, 0.25, 0.5});
    Rng rng(8);
    const std::size_t n = 10000;
    const auto block = sample_block(spec, n, rng);
    CHECK(std::abs(zhat(block) - 1.0) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("exactly normalized IS is unbiased", "[estimators][statistical]") {
    const auto spec = exponential_pair(1.5);
    Rng rng(99);
    const int repeats = 100000;
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < repeats; ++r) {
        const double v = unnormalized_is(sample_block(spec, 100, rng));
        s += v;
        s2 += v * v;
    }
    const double mean = s / repeats;
    const double se = std::sqrt((s2 / repeats - mean * mean) / repeats);
    CHECK(std::abs(mean - 0.5) < 5 * se);
}

TEST_CASE("logsumexp handles empty and -inf inputs", "[estimators]") {
    CHECK(logsumexp(std::vector<double>{kNegInf, kNegInf}) == kNegInf);
    CHECK_THAT(logsumexp(std::vector<double>{0.0, 0.0}), WithinRel(std::log(2.0), 1e-15));
}
