#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "coupledmc/model.hpp"
#include "coupledmc/oracle.hpp"

using namespace coupledmc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("exponential pair with k = 1 has unit weight", "[model]") {
    const auto spec = exponential_pair(1.0);
    for (double x : {0.0, 0.3, 2.0, 40.0}) CHECK(spec.log_weight(x) == 0.0);
    REQUIRE(spec.analytic);
    CHECK(spec.analytic->integral_I == 0.5);
    CHECK(*spec.analytic->c1 == 1.0);
    CHECK(std::isinf(spec.analytic->moment_order_p));
}

TEST_CASE("exponential closed forms at k = 1.5", "[model]") {
    const auto refs = exponential_refs(1.5);
    CHECK_THAT(*refs.c1, WithinRel(4.0 / 3.0, 1e-15));
    CHECK_THAT(*refs.c2, WithinRel(8.0 / 15.0, 1e-15));
    CHECK_THAT(*refs.asym_bias_B, WithinRel(2.0 / 15.0, 1e-14));
    // mpmath evaluation of the defining integrals
    CHECK_THAT(*refs.c3, WithinAbs(0.627450980392156621587630980545, 1e-15));
    CHECK_THAT(*refs.asym_var_V, WithinAbs(0.427450980392156621587630980274, 1e-15));
    CHECK_THAT(refs.moment_order_p, WithinRel(3.0, 1e-15));
}

TEST_CASE("bias and variance refs are absent once C1 diverges", "[model]") {
    for (double k : {2.0, 2.5}) {
        const auto refs = exponential_refs(k);
        CHECK_FALSE(refs.asym_bias_B.has_value());
        CHECK_FALSE(refs.asym_var_V.has_value());
        CHECK_FALSE(refs.c1.has_value());
    }
    CHECK_THROWS_AS(exponential_pair(0.0), std::invalid_argument);
    CHECK_THROWS_AS(exponential_pair(-1.0), std::invalid_argument);
}

TEST_CASE("exponential_pair_for_order maps p to k = p/(p-1)", "[model]") {
    CHECK_THAT(exponential_pair_for_order(3.0).analytic->moment_order_p, WithinRel(3.0, 1e-14));
    CHECK_THAT(exponential_pair_for_order(5.0).analytic->moment_order_p, WithinRel(5.0, 1e-14));
    CHECK_THROWS_AS(exponential_pair_for_order(1.0), std::invalid_argument);
}

TEST_CASE("exponential sampler is inverse-CDF on uniform_open", "[model]") {
    const auto spec = exponential_pair(1.5);
    Rng a(11);
    Rng b(11);
    for (int i = 0; i < 5; ++i) CHECK(spec.proposal_sampler(a) == -std::log(b.uniform_open()) / 1.5);
}

TEST_CASE("normal pair weights", "[model]") {
    const auto unit = normal_pair(1.0);
    for (double x : {-3.0, 0.0, 1.7}) CHECK(unit.log_weight(x) == 0.0);

    const auto wide = normal_pair(4.0);
    for (int i = 0; i <= 2000; ++i) {
        const double x = -10.0 + 0.01 * i;
        REQUIRE(std::exp(wide.log_weight(x)) <= 2.0 + 1e-15);
    }
    CHECK(std::isinf(wide.analytic->moment_order_p));
    CHECK_FALSE(wide.analytic->asym_var_V.has_value());

    const auto narrow = normal_pair(0.8);
    CHECK_THAT(narrow.analytic->moment_order_p, WithinRel(5.0, 1e-12));
    CHECK(std::isfinite(oracle::weight_moment(narrow, 4.9)));
    CHECK(std::isinf(oracle::weight_moment(narrow, 5.1)));
}

TEST_CASE("discrete pair weights and validation", "[model]") {
    const auto uniform = discrete_pair({1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    for (int i = 0; i < 3; ++i) CHECK(uniform.log_weight(i) == 0.0);

    const auto partial = discrete_pair({0.5, 0.5, 0.0}, {0.25, 0.25, 0.5});
    CHECK_THAT(std::exp(partial.log_weight(0)), WithinRel(2.0, 1e-15));
    CHECK_THAT(std::exp(partial.log_weight(1)), WithinRel(2.0, 1e-15));
    CHECK(partial.log_weight(2) == -std::numeric_limits<double>::infinity());

    CHECK_THROWS_AS(discrete_pair({0.5, 0.5}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(discrete_pair({1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(discrete_pair({0.5, 0.6}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(discrete_pair({0.5, 0.5}, {0.5, 0.5}, {1.0}), std::invalid_argument);
}

TEST_CASE("discrete sampler follows the proposal frequencies", "[model]") {
    const auto spec = discrete_preset();
    Rng rng(3);
    const int n = 200000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) ++counts[static_cast<int>(spec.proposal_sampler(rng))];
    const double q[3] = {0.2, 0.3, 0.5};
    for (int i = 0; i < 3; ++i) {
        const double se = std::sqrt(q[i] * (1 - q[i]) / n);
        CHECK(std::abs(counts[i] / static_cast<double>(n) - q[i]) < 5 * se);
    }
}

TEST_CASE("continuous pairs integrate to one and reproduce pi(f)", "[model][quadrature]") {
    for (const auto& spec : {exponential_pair(1.2), exponential_pair(1.5), normal_pair(0.8), normal_pair(4.0)}) {
        const auto& lw = spec.log_weight;
        CHECK_THAT(oracle::quadrature_moment(spec, [&](double x) { return std::exp(lw(x)); }, 1e-10),
                   WithinAbs(1.0, 1e-8));
        CHECK_THAT(oracle::weighted_moment(spec, 1.0, [](double x) { return std::sin(x); }, 1e-10),
                   WithinAbs(spec.analytic->integral_I, 1e-8));
    }
}

TEST_CASE("bias and variance integrals match the closed forms", "[model][quadrature]") {
    for (double k : {1.2, 1.5}) {
        const auto spec = exponential_pair(k);
        const double I = spec.analytic->integral_I;
        const double V = oracle::weighted_moment(
            spec, 2.0, [&](double x) { const double d = std::sin(x) - I; return d * d; }, 1e-10);
        const double B = -oracle::weighted_moment(spec, 2.0, [&](double x) { return std::sin(x) - I; }, 1e-10);
        CHECK_THAT(V, WithinAbs(*spec.analytic->asym_var_V, 1e-8));
        CHECK_THAT(B, WithinAbs(*spec.analytic->asym_bias_B, 1e-8));
    }
}

TEST_CASE("sample mean of the weight is one", "[model][statistical]") {
    const auto spec = exponential_pair(1.5);
    Rng rng(2024);
    const int n = 1'000'000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = std::exp(spec.log_weight(spec.proposal_sampler(rng)));
        s += w;
        s2 += w * w;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0) < 5 * se);
}
