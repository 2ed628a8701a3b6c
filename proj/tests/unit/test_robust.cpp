#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "coupledmc/robust.hpp"
#include "coupledmc/unbiased.hpp"

using namespace coupledmc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RobustConfig with_k(std::size_t K) { return RobustConfig{0.05, K, 2}; }

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    const auto spec = normal_pair(1.0);
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = spec.proposal_sampler(rng);
    return v;
}

} // namespace

TEST_CASE("block count from delta", "[robust]") {
    CHECK(default_block_count(0.05) == 24);
    CHECK(RobustConfig::from_delta(0.05).K == 24);
    CHECK(default_block_count(0.5) == 6);
    CHECK_THROWS_AS(default_block_count(1.0), std::invalid_argument);
}

TEST_CASE("contiguous blocks put the remainder first", "[robust]") {
    CHECK(block_offsets(10, 3) == std::vector<std::size_t>{0, 4, 7, 10});
    CHECK(block_offsets(6, 3) == std::vector<std::size_t>{0, 2, 4, 6});
    CHECK_THROWS_AS(block_offsets(2, 3), std::invalid_argument);
}

TEST_CASE("empirical median", "[robust]") {
    CHECK(empmed(std::vector<double>{1, 2, 3}) == 2);
    CHECK(empmed(std::vector<double>{1, 1}) == 1);
    CHECK(empmed(std::vector<double>{3, 1, 2}) == 2);
    // both middle values qualify for even length; the first in input order wins
    CHECK(empmed(std::vector<double>{4, 1, 2, 3}) == 2);
    CHECK(empmed(std::vector<double>{3, 2, 1, 4}) == 3);
    CHECK_THROWS_AS(empmed(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("median of means", "[robust]") {
    CHECK(mom(std::vector<double>(30, 2.5), with_k(7)) == 2.5);
    const std::vector<double> v = {0.5, 1.5, 4.0, -1.0};
    CHECK_THAT(mom(v, with_k(1)), WithinRel(1.25, 1e-15));
    CHECK(mom(std::vector<double>{0, 0, 10, 10, 1, 1}, with_k(3)) == 1.0);
    CHECK_THROWS_AS(mom(std::vector<double>{1, 2}, with_k(3)), std::invalid_argument);
}

TEST_CASE("Minsker-Ndaoud", "[robust]") {
    CHECK(minsker_ndaoud(std::vector<double>(12, -3.0), with_k(4)) == -3.0);

    // equal within-block variances: plain average of block means
    const std::vector<double> eq = {0, 2, 5, 7, 1, 3};
    CHECK_THAT(minsker_ndaoud(eq, with_k(3)), WithinRel((1.0 + 6.0 + 2.0) / 3.0, 1e-14));

    // Blocks 1 and 2 have zero spread and sigma_tilde^2 = mom(d) = 0, so their
    // weights are infinite and block 3 gets none; all block means are 0.
    const std::vector<double> outlier = {0, 0, 0, 0, 100, -100};
    CHECK(minsker_ndaoud(outlier, with_k(3)) == 0.0);
    CHECK(mom(outlier, with_k(3)) == 0.0);

    // A finite-weight case: the noisy block is down-weighted toward the quiet ones.
    const std::vector<double> mixed = {0, 1, 0, 1, 30, -20};
    const double mn = minsker_ndaoud(mixed, with_k(3));
    const double plain = std::accumulate(mixed.begin(), mixed.end(), 0.0) / 6.0;
    CHECK(mn > 0.5);
    CHECK(mn < plain);
}

TEST_CASE("Lee-Valiant", "[robust]") {
    const auto flat = lee_valiant_detail(std::vector<double>(30, 4.0), with_k(3));
    CHECK(flat.estimate == 4.0);
    CHECK_FALSE(flat.has_root);

    const auto data = normals(100, 41);
    const RobustConfig cfg = RobustConfig::from_delta(0.05);
    const auto lv = lee_valiant_detail(data, cfg);
    REQUIRE(lv.has_root);
    const double target = std::log(20.0) / 3.0;
    double lhs = 0.0;
    for (double x : data) lhs += std::min(1.0, lv.alpha * (x - lv.kappa) * (x - lv.kappa));
    CHECK(std::abs(lhs - target) <= 1e-9 * std::max(1.0, target));
    CHECK(lv.residual <= 1e-9);
    CHECK(std::abs(lv.estimate) < 0.5);
    // lhs at alpha = 0 is zero, below the positive target
    CHECK(target > 0.0);

    // Too few points away from kappa: no root, return kappa.
    std::vector<double> sparse(48, 1.0);
    const auto nr = lee_valiant_detail(sparse, with_k(24));
    CHECK(nr.estimate == 1.0);
}

TEST_CASE("robust estimators are translation equivariant", "[robust]") {
    const auto data = normals(240, 42);
    const RobustConfig cfg = RobustConfig::from_delta(0.05);
    for (double c : {-5.0, 0.0, 17.0}) {
        auto shifted = data;
        for (auto& x : shifted) x += c;
        CHECK_THAT(empmed(shifted), WithinAbs(empmed(data) + c, 1e-9));
        CHECK_THAT(mom(shifted, cfg), WithinAbs(mom(data, cfg) + c, 1e-9));
        CHECK_THAT(minsker_ndaoud(shifted, cfg), WithinAbs(minsker_ndaoud(data, cfg) + c, 1e-9));
        CHECK_THAT(lee_valiant(shifted, cfg), WithinAbs(lee_valiant(data, cfg) + c, 1e-9));
    }
}

TEST_CASE("permutations that keep block membership leave estimates unchanged", "[robust]") {
    auto data = normals(48, 43);
    const RobustConfig cfg = with_k(4);
    const double m0 = mom(data, cfg), n0 = minsker_ndaoud(data, cfg), l0 = lee_valiant(data, cfg);
    // reverse inside each block of 12
    for (std::size_t b = 0; b < 4; ++b) std::reverse(data.begin() + 12 * b, data.begin() + 12 * (b + 1));
    CHECK_THAT(mom(data, cfg), WithinAbs(m0, 1e-12));
    CHECK_THAT(minsker_ndaoud(data, cfg), WithinAbs(n0, 1e-12));
    CHECK_THAT(lee_valiant(data, cfg), WithinAbs(l0, 1e-12));

    // odd length: the median is unique, so any permutation keeps it
    std::vector<double> odd(data.begin(), data.begin() + 47);
    const double e0 = empmed(odd);
    std::reverse(odd.begin(), odd.end());
    CHECK(empmed(odd) == e0);
}

TEST_CASE("MoM-SNIS", "[robust]") {
    const auto spec = exponential_pair(1.5);
    Rng a(44), b(44);
    CHECK(compose_snis(spec, 16, with_k(1), a) == sample_block(spec, 16, b).fhat());

    const auto flat = exponential_pair(1.0);
    Rng c(45), d(45);
    std::vector<double> means(5);
    for (auto& m : means) {
        const auto block = sample_block(flat, 4, d);
        double s = 0.0;
        for (double f : block.f_values()) s += f;
        m = s / 4.0;
    }
    CHECK_THAT(compose_snis(flat, 20, with_k(5), c), WithinAbs(empmed(means), 1e-15));
    CHECK_THROWS_AS(compose_snis(spec, 25, with_k(24), c), std::invalid_argument);
}

TEST_CASE("robust SUIS compositions", "[robust]") {
    const auto spec = exponential_pair(1.5);
    for (auto method : {RobustMethod::mom, RobustMethod::mn, RobustMethod::lv}) {
        Rng a(46), b(46);
        const auto one = compose_suis(spec, 4, 1, with_k(1), method, a);
        const auto ref = suis(spec, 4, b);
        CHECK(one.value == ref.value);
        CHECK(one.cost == ref.cost);
    }
    const auto flat = exponential_pair(1.0);
    Rng c(47);
    const auto e = compose_suis(flat, 4, 4, with_k(24), RobustMethod::mom, c);
    CHECK(e.cost == 24 * 4 * 8);
    CHECK(parse_robust_method("lv") == RobustMethod::lv);
    CHECK(to_string(RobustMethod::mn) == "mn");
    CHECK_THROWS_AS(parse_robust_method("median"), std::invalid_argument);
}
