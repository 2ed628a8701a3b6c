#include "coupledmc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coupledmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double max_of(std::span<const double> values) noexcept {
    double m = kNegInf;
    for (double v : values) m = std::max(m, v);
    return m;
}

} // namespace

double logsumexp(std::span<const double> values) noexcept {
    const double m = max_of(values);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

ParticleBlock::ParticleBlock(std::vector<Point> points, std::vector<double> log_weights,
                             std::vector<double> f_values)
    : points_(std::move(points)), log_weights_(std::move(log_weights)), f_values_(std::move(f_values)) {
    if (points_.empty()) {
        throw std::invalid_argument("ParticleBlock: at least one particle is required");
    }
    if (log_weights_.size() != points_.size() || f_values_.size() != points_.size()) {
        throw std::invalid_argument("ParticleBlock: points, log_weights and f_values differ in length");
    }
    double m = kNegInf;
    for (double lw : log_weights_) {
        if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
            throw std::invalid_argument("ParticleBlock: log-weight is NaN or +inf");
        }
        m = std::max(m, lw);
    }
    if (m == kNegInf) {
        throw std::invalid_argument("ParticleBlock: every weight is zero");
    }
    // One pass for both sum(w) and sum(w f), with the largest log-weight shifted out.
    double sum_w = 0.0;
    double sum_wf = 0.0;
    double f_lo = f_values_.front();
    double f_hi = f_values_.front();
    for (std::size_t i = 0; i < log_weights_.size(); ++i) {
        const double w = std::exp(log_weights_[i] - m);
        sum_w += w;
        sum_wf += w * f_values_[i];
        f_lo = std::min(f_lo, f_values_[i]);
        f_hi = std::max(f_hi, f_values_[i]);
    }
    log_zhat_ = m + std::log(sum_w) - std::log(static_cast<double>(points_.size()));
    // A convex combination; the clamp only removes rounding past the hull.
    fhat_ = std::clamp(sum_wf / sum_w, f_lo, f_hi);
}

ParticleBlock sample_block(const ProblemSpec& spec, std::size_t n, Rng& rng) {
    if (n == 0) {
        throw std::invalid_argument("sample_block: n must be at least 1");
    }
    std::vector<Point> points(n);
    std::vector<double> log_weights(n);
    std::vector<double> f_values(n);
    for (std::size_t i = 0; i < n; ++i) {
        points[i] = spec.proposal_sampler(rng);
        log_weights[i] = spec.log_weight(points[i]);
        f_values[i] = spec.test_fn(points[i]);
    }
    return ParticleBlock(std::move(points), std::move(log_weights), std::move(f_values));
}

BlockRef sample_block_ref(const ProblemSpec& spec, std::size_t n, Rng& rng) {
    return std::make_shared<const ParticleBlock>(sample_block(spec, n, rng));
}

double snis(const ParticleBlock& block) noexcept { return block.fhat(); }

double unnormalized_is(const ParticleBlock& block) noexcept {
    const auto lw = block.log_weights();
    const auto f = block.f_values();
    double s = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) s += std::exp(lw[i]) * f[i];
    return s / static_cast<double>(lw.size());
}

double zhat(const ParticleBlock& block) noexcept { return std::exp(block.log_zhat()); }

} // namespace coupledmc
