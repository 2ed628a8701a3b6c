#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "coupledmc/estimators.hpp"
#include "coupledmc/model.hpp"
#include "coupledmc/rng.hpp"

namespace coupledmc {

inline constexpr std::uint64_t kDefaultMaxIters = 1'000'000;

struct CoupledPair {
    BlockRef x;
    BlockRef y;
};

/// Common-draws coupling of two PIMH chains: one shared proposal block and one
/// shared uniform, each chain applying its own acceptance ratio.
CoupledPair coupled_step(const BlockRef& x, const BlockRef& y, const ProblemSpec& spec,
                         std::size_t n, Rng& rng);

/// Trace of one lagged coupled run. tau = inf{t >= 1 : x_t = y_{t-1}}.
struct CoupledRun {
    std::uint64_t tau = 0;               // 0 only for a truncated (unmet) partial run
    std::size_t n = 0;
    std::vector<double> x_trace;          // Fhat(x_0), ..., Fhat(x_tau)
    std::vector<double> y_trace;          // Fhat(y_0), ..., Fhat(y_{tau-1})
    double x0_fhat = 0.0;
    double y0_fhat = 0.0;
    std::uint64_t proposals_drawn = 0;    // blocks sampled, 2 + (tau - 1) once met

    /// Evaluations of the weight: N * blocks drawn = 2N + N(tau - 1).
    std::uint64_t cost() const noexcept { return static_cast<std::uint64_t>(n) * proposals_drawn; }
};

/// Raised when chains have not met within the iteration cap. The partial
/// trace is attached for diagnostics and must not be used as an estimate.
class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& what, CoupledRun partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const CoupledRun& partial() const noexcept { return partial_; }

private:
    CoupledRun partial_;
};

/// Lagged coupled PIMH: draws x_0 then y_0 from q^N, then continues from the same stream.
CoupledRun run_lagged_coupling(const ProblemSpec& spec, std::size_t n, Rng& rng,
                               std::uint64_t max_iters = kDefaultMaxIters);

/// Lagged coupled PIMH from given initial blocks; `rng` supplies every later
/// proposal and uniform.
CoupledRun run_lagged_coupling_from(const BlockRef& x0, const BlockRef& y0, const ProblemSpec& spec,
                                    std::size_t n, Rng& rng,
                                    std::uint64_t max_iters = kDefaultMaxIters);

/// Meeting time inf{t >= 1 : x_t = y_t} of the (non-lagged) common-draws
/// coupling started at (x, y).
std::uint64_t coupled_meeting_time(const BlockRef& x, const BlockRef& y, const ProblemSpec& spec,
                                   std::size_t n, Rng& rng,
                                   std::uint64_t max_iters = kDefaultMaxIters);

/// Empirical E[max(0, tau - 1 - t)], an upper bound on |q^N P^t - pi_N|_TV.
double tv_upper_bound(std::span<const CoupledRun> runs, std::uint64_t t);
double tv_upper_bound(std::span<const std::uint64_t> taus, std::uint64_t t);

struct TheoryConstants {
    double M_p = 0.0;      // E|Zhat - 1|^p <= M(p) N^{-p/2}
    double beta_p = 0.0;   // geometric part of the expected rejection bound
    double c_p_half = 0.0; // c_p(1/2) in the rejection-probability bound
};

/// Constants of the moment and rejection bounds given q(omega^p).
/// Requires p >= 2 and a finite q(omega^p) >= 1.
TheoryConstants theory_constants(double p, double q_omega_p);

/// c_p(theta) = (1 - theta)^{p/(p-1)} / q(omega^p)^{1/(p-1)}.
double rejection_bound_constant(double p, double q_omega_p, double theta);

/// Block of given points with weights and f evaluated from `spec`.
BlockRef block_at(const ProblemSpec& spec, std::vector<Point> points);

} // namespace coupledmc
