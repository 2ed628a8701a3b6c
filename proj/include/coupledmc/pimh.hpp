#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "coupledmc/estimators.hpp"
#include "coupledmc/model.hpp"
#include "coupledmc/rng.hpp"

namespace coupledmc {

/// Current state of a particle independent Metropolis-Hastings chain on X^N.
struct PimhState {
    BlockRef block;
    std::uint64_t iteration = 0;
    std::uint64_t accept_count = 0;
};

/// Accept rule shared by every kernel: ln u < log Zhat(proposal) - log Zhat(current).
/// u == 0 gives ln u = -inf, so any finite log-ratio is accepted.
inline bool accepts(double u, double log_zhat_current, double log_zhat_proposal) noexcept {
    return std::log(u) < log_zhat_proposal - log_zhat_current;
}

/// One PIMH transition. Consumes the n proposal draws first, then one uniform.
/// A rejected step keeps the very same block object.
PimhState pimh_step(const PimhState& state, const ProblemSpec& spec, std::size_t n, Rng& rng);

/// Independent Metropolis-Hastings on single points (the n = 1 case).
/// Throws std::domain_error when the current weight is zero.
Point imh_step(Point x, const ProblemSpec& spec, Rng& rng);

/// Ergodic average of the self-normalized estimate over iterations
/// burn_in, ..., t_iters - 1, where iteration 0 is the initial draw from q^N.
double chain_estimate(const ProblemSpec& spec, std::size_t n, std::size_t t_iters,
                      std::size_t burn_in, Rng& rng);

} // namespace coupledmc
