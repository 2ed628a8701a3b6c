#include "coupledmc/unbiased.hpp"

#include <stdexcept>

namespace coupledmc {

UnbiasedEstimate uis(const CoupledRun& run) {
    if (run.tau == 0 || run.x_trace.size() != run.tau + 1 || run.y_trace.size() != run.tau) {
        throw std::invalid_argument("uis: run is incomplete or its traces are inconsistent");
    }
    double value = run.x_trace.front();
    for (std::uint64_t t = 1; t < run.tau; ++t) {
        value += run.x_trace[t] - run.y_trace[t - 1];
    }
    return {value, run.tau, run.cost()};
}

UnbiasedEstimate suis_from(const BlockRef& x0, const BlockRef& y0, const ProblemSpec& spec,
                           std::size_t n, Rng& aux, std::uint64_t max_iters) {
    const bool x_dominant = !(x0->log_zhat() < y0->log_zhat());
    const BlockRef& lead = x_dominant ? x0 : y0;
    const BlockRef& other = x_dominant ? y0 : x0;
    const UnbiasedEstimate simulated = uis(run_lagged_coupling_from(lead, other, spec, n, aux, max_iters));
    // The ordering led by the smaller Zhat always accepts its first proposal.
    const double shortcut = other->fhat();
    return {0.5 * (simulated.value + shortcut), simulated.tau, simulated.cost};
}

UnbiasedEstimate suis(const ProblemSpec& spec, std::size_t n, Rng& rng, std::uint64_t max_iters) {
    BlockRef x0 = sample_block_ref(spec, n, rng);
    BlockRef y0 = sample_block_ref(spec, n, rng);
    return suis_from(x0, y0, spec, n, rng, max_iters);
}

double inefficiency(double mean_cost, double mse) noexcept { return mean_cost * mse; }

} // namespace coupledmc
