#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "coupledmc/model.hpp"
#include "coupledmc/rng.hpp"

namespace coupledmc {

/// ceil(8 ln(1/delta)); 24 for delta = 0.05.
std::size_t default_block_count(double delta);

struct RobustConfig {
    double delta = 0.05;
    std::size_t K = 24;   // number of blocks
    int a = 2;            // Minsker-Ndaoud weight power

    static RobustConfig from_delta(double delta, int a = 2);
};

/// Contiguous partition of n indices into K blocks; the first n mod K blocks
/// hold one extra element. Returns K + 1 offsets.
std::vector<std::size_t> block_offsets(std::size_t n, std::size_t K);

/// Element with at least ceil(k/2) values <= it and at least ceil(k/2) >= it;
/// the smallest such index wins.
double empmed(std::span<const double> values);

double mom(std::span<const double> values, const RobustConfig& cfg);

double minsker_ndaoud(std::span<const double> values, const RobustConfig& cfg);

struct LeeValiantResult {
    double estimate = 0.0;
    double kappa = 0.0;      // median of block means
    double alpha = 0.0;      // root of sum min(1, alpha d_i) = ln(1/delta)/3
    double residual = 0.0;   // |lhs(alpha) - target|; 0 when no root exists
    bool has_root = false;
};

LeeValiantResult lee_valiant_detail(std::span<const double> values, const RobustConfig& cfg);
double lee_valiant(std::span<const double> values, const RobustConfig& cfg);

/// Median of K self-normalized estimates on n_total / K draws each.
double compose_snis(const ProblemSpec& spec, std::size_t n_total, const RobustConfig& cfg, Rng& rng);

enum class RobustMethod { mom, mn, lv };

RobustMethod parse_robust_method(std::string_view name);
std::string_view to_string(RobustMethod method) noexcept;

double robust_combine(std::span<const double> values, const RobustConfig& cfg, RobustMethod method);

struct RobustEstimate {
    double value = 0.0;
    std::uint64_t cost = 0;
};

/// K * per_block independent symmetrized unbiased estimates (n_particles each),
/// combined with the chosen robust estimator over K contiguous blocks.
RobustEstimate compose_suis(const ProblemSpec& spec, std::size_t n_particles, std::size_t per_block,
                            const RobustConfig& cfg, RobustMethod method, Rng& rng);

} // namespace coupledmc
