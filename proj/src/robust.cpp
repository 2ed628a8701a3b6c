#include "coupledmc/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "coupledmc/estimators.hpp"
#include "coupledmc/unbiased.hpp"

namespace coupledmc {

namespace {

void require_enough(std::size_t n, std::size_t K, const char* who) {
    if (K == 0) throw std::invalid_argument(std::string(who) + ": K must be positive");
    if (n < K) {
        throw std::invalid_argument(std::string(who) + ": need at least K values, got " +
                                    std::to_string(n) + " < " + std::to_string(K));
    }
}

std::vector<double> block_means(std::span<const double> values, std::span<const std::size_t> offsets) {
    std::vector<double> means(offsets.size() - 1);
    for (std::size_t j = 0; j + 1 < offsets.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = offsets[j]; i < offsets[j + 1]; ++i) s += values[i];
        means[j] = s / static_cast<double>(offsets[j + 1] - offsets[j]);
    }
    return means;
}

} // namespace

std::size_t default_block_count(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("default_block_count: delta must lie in (0, 1)");
    }
    return static_cast<std::size_t>(std::ceil(8.0 * std::log(1.0 / delta)));
}

RobustConfig RobustConfig::from_delta(double delta, int a) {
    return RobustConfig{delta, default_block_count(delta), a};
}

std::vector<std::size_t> block_offsets(std::size_t n, std::size_t K) {
    require_enough(n, K, "block_offsets");
    const std::size_t base = n / K;
    const std::size_t extra = n % K;
    std::vector<std::size_t> offsets(K + 1, 0);
    for (std::size_t j = 0; j < K; ++j) {
        offsets[j + 1] = offsets[j] + base + (j < extra ? 1 : 0);
    }
    return offsets;
}

double empmed(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("empmed: empty input");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = values.size();
    const std::size_t half = (k + 1) / 2;
    for (double v : values) {
        const auto below = static_cast<std::size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
        const auto above = k - static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
        if (below >= half && above >= half) return v;
    }
    // Unreachable for finite input: the lower median always qualifies.
    throw std::logic_error("empmed: no qualifying element");
}

double mom(std::span<const double> values, const RobustConfig& cfg) {
    require_enough(values.size(), cfg.K, "mom");
    const auto offsets = block_offsets(values.size(), cfg.K);
    return empmed(block_means(values, offsets));
}

double minsker_ndaoud(std::span<const double> values, const RobustConfig& cfg) {
    require_enough(values.size(), cfg.K, "minsker_ndaoud");
    if (cfg.a < 1) throw std::invalid_argument("minsker_ndaoud: a must be a positive integer");
    const auto offsets = block_offsets(values.size(), cfg.K);
    const auto means = block_means(values, offsets);
    const double kappa = empmed(means);

    std::vector<double> d(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double c = values[i] - kappa;
        d[i] = c * c;
    }
    const double sigma_tilde2 = mom(d, cfg);

    std::vector<double> denom(cfg.K);
    std::vector<double> exact_blocks; // means of blocks whose weight is infinite
    for (std::size_t j = 0; j < cfg.K; ++j) {
        double s = 0.0;
        for (std::size_t i = offsets[j]; i < offsets[j + 1]; ++i) {
            const double c = values[i] - means[j];
            s += c * c;
        }
        denom[j] = s / static_cast<double>(offsets[j + 1] - offsets[j]) + sigma_tilde2;
        if (denom[j] == 0.0) exact_blocks.push_back(means[j]);
    }
    if (!exact_blocks.empty()) {
        // Zero spread makes those weights infinite; every block zero means all data sit at kappa.
        return exact_blocks.size() == cfg.K ? kappa : empmed(exact_blocks);
    }
    double sw = 0.0;
    double swx = 0.0;
    const double power = 0.5 * static_cast<double>(cfg.a);
    for (std::size_t j = 0; j < cfg.K; ++j) {
        const double w = std::pow(denom[j], -power);
        sw += w;
        swx += w * means[j];
    }
    return swx / sw;
}

LeeValiantResult lee_valiant_detail(std::span<const double> values, const RobustConfig& cfg) {
    require_enough(values.size(), cfg.K, "lee_valiant");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
        throw std::invalid_argument("lee_valiant: delta must lie in (0, 1)");
    }
    LeeValiantResult out;
    const auto offsets = block_offsets(values.size(), cfg.K);
    out.kappa = empmed(block_means(values, offsets));
    out.estimate = out.kappa;

    const std::size_t n = values.size();
    std::vector<double> d(n);
    std::size_t positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = values[i] - out.kappa;
        d[i] = c * c;
        if (d[i] > 0.0) ++positive;
    }
    const double target = std::log(1.0 / cfg.delta) / 3.0;
    if (static_cast<double>(positive) < target) {
        // Even alpha -> inf cannot reach the target; every term is fully clipped.
        out.alpha = std::numeric_limits<double>::infinity();
        return out;
    }

    auto lhs = [&](double alpha) {
        double s = 0.0;
        for (double di : d) s += std::min(1.0, alpha * di);
        return s;
    };
    double lo = 0.0;
    double hi = 1.0;
    while (lhs(hi) < target) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (lhs(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.alpha = 0.5 * (lo + hi);
    out.residual = std::abs(lhs(out.alpha) - target);
    out.has_root = true;

    double correction = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        correction += (values[i] - out.kappa) * (1.0 - std::min(1.0, out.alpha * d[i]));
    }
    out.estimate = out.kappa + correction / static_cast<double>(n);
    return out;
}

double lee_valiant(std::span<const double> values, const RobustConfig& cfg) {
    return lee_valiant_detail(values, cfg).estimate;
}

double compose_snis(const ProblemSpec& spec, std::size_t n_total, const RobustConfig& cfg, Rng& rng) {
    if (cfg.K == 0 || n_total == 0 || n_total % cfg.K != 0) {
        throw std::invalid_argument("compose_snis: n_total must be a positive multiple of K");
    }
    const std::size_t per_block = n_total / cfg.K;
    std::vector<double> estimates(cfg.K);
    for (auto& e : estimates) e = sample_block(spec, per_block, rng).fhat();
    return empmed(estimates);
}

RobustMethod parse_robust_method(std::string_view name) {
    if (name == "mom") return RobustMethod::mom;
    if (name == "mn") return RobustMethod::mn;
    if (name == "lv") return RobustMethod::lv;
    throw std::invalid_argument("unknown robust method: " + std::string(name));
}

std::string_view to_string(RobustMethod method) noexcept {
    switch (method) {
    case RobustMethod::mom: return "mom";
    case RobustMethod::mn: return "mn";
    case RobustMethod::lv: return "lv";
    }
    return "?";
}

double robust_combine(std::span<const double> values, const RobustConfig& cfg, RobustMethod method) {
    switch (method) {
    case RobustMethod::mom: return mom(values, cfg);
    case RobustMethod::mn: return minsker_ndaoud(values, cfg);
    case RobustMethod::lv: return lee_valiant(values, cfg);
    }
    throw std::invalid_argument("robust_combine: bad method");
}

RobustEstimate compose_suis(const ProblemSpec& spec, std::size_t n_particles, std::size_t per_block,
                            const RobustConfig& cfg, RobustMethod method, Rng& rng) {
    if (cfg.K == 0 || per_block == 0) {
        throw std::invalid_argument("compose_suis: K and per_block must be positive");
    }
    std::vector<double> values(cfg.K * per_block);
    RobustEstimate out;
    for (auto& v : values) {
        const UnbiasedEstimate e = suis(spec, n_particles, rng);
        v = e.value;
        out.cost += e.cost;
    }
    out.value = robust_combine(values, cfg, method);
    return out;
}

} // namespace coupledmc
