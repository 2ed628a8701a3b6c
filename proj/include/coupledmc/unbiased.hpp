#pragma once

#include <cstddef>
#include <cstdint>

#include "coupledmc/coupling.hpp"
#include "coupledmc/estimators.hpp"
#include "coupledmc/model.hpp"
#include "coupledmc/rng.hpp"

namespace coupledmc {

struct UnbiasedEstimate {
    double value = 0.0;
    std::uint64_t tau = 0;
    std::uint64_t cost = 0; // weight evaluations, N * (tau + 1)
};

/// Telescoping estimator Fhat(x_0) + sum_{t=1}^{tau-1} [Fhat(x_t) - Fhat(y_{t-1})].
UnbiasedEstimate uis(const CoupledRun& run);

/// Symmetrized estimator from freshly drawn x_0 then y_0; `rng` continues as
/// the shared auxiliary stream.
UnbiasedEstimate suis(const ProblemSpec& spec, std::size_t n, Rng& rng,
                      std::uint64_t max_iters = kDefaultMaxIters);

/// Symmetrized estimator for given initial blocks. Only the ordering whose
/// first chain has the larger Zhat is simulated; the other ordering meets at
/// tau = 1 and contributes Fhat of its own initial block. Ties go to x0.
/// Exchanging x0 and y0 with the same auxiliary stream gives a bit-identical value.
UnbiasedEstimate suis_from(const BlockRef& x0, const BlockRef& y0, const ProblemSpec& spec,
                           std::size_t n, Rng& aux, std::uint64_t max_iters = kDefaultMaxIters);

/// Mean cost times MSE.
double inefficiency(double mean_cost, double mse) noexcept;

} // namespace coupledmc
