#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "coupledmc/model.hpp"
#include "coupledmc/rng.hpp"

namespace coupledmc {

/// N proposal draws together with their log-weights and test-function values.
/// The normalizing-constant estimate and the self-normalized estimate are
/// computed once at construction; the block is immutable afterwards.
class ParticleBlock {
public:
    /// Throws std::invalid_argument on length mismatch, an empty block, a
    /// +inf/NaN log-weight, or when every log-weight is -inf.
    ParticleBlock(std::vector<Point> points, std::vector<double> log_weights,
                  std::vector<double> f_values);

    std::size_t size() const noexcept { return points_.size(); }
    std::span<const Point> points() const noexcept { return points_; }
    std::span<const double> log_weights() const noexcept { return log_weights_; }
    std::span<const double> f_values() const noexcept { return f_values_; }

    /// log Zhat = logsumexp(log_weights) - ln N.
    double log_zhat() const noexcept { return log_zhat_; }
    /// Self-normalized estimate sum(w f) / sum(w).
    double fhat() const noexcept { return fhat_; }

private:
    std::vector<Point> points_;
    std::vector<double> log_weights_;
    std::vector<double> f_values_;
    double log_zhat_ = 0.0;
    double fhat_ = 0.0;
};

/// Blocks are shared between coupled chains; pointer identity is block identity.
using BlockRef = std::shared_ptr<const ParticleBlock>;

/// Draws n i.i.d. proposal points in order, evaluating weight and f once each.
ParticleBlock sample_block(const ProblemSpec& spec, std::size_t n, Rng& rng);
BlockRef sample_block_ref(const ProblemSpec& spec, std::size_t n, Rng& rng);

double snis(const ParticleBlock& block) noexcept;
double unnormalized_is(const ParticleBlock& block) noexcept;
double zhat(const ParticleBlock& block) noexcept;

/// log(sum(exp(v))) with the max shifted out; -inf for an all -inf input.
double logsumexp(std::span<const double> values) noexcept;

} // namespace coupledmc
