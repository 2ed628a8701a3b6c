#include "coupledmc/pimh.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace coupledmc {

PimhState pimh_step(const PimhState& state, const ProblemSpec& spec, std::size_t n, Rng& rng) {
    if (!state.block || state.block->size() != n) {
        throw std::invalid_argument("pimh_step: current block must hold n particles");
    }
    BlockRef proposal = sample_block_ref(spec, n, rng);
    const double u = rng.uniform();
    PimhState next = state;
    next.iteration += 1;
    if (accepts(u, state.block->log_zhat(), proposal->log_zhat())) {
        next.block = std::move(proposal);
        next.accept_count += 1;
    }
    return next;
}

Point imh_step(Point x, const ProblemSpec& spec, Rng& rng) {
    const double log_w = spec.log_weight(x);
    if (log_w == -std::numeric_limits<double>::infinity()) {
        throw std::domain_error("imh_step: acceptance ratio undefined at a zero-weight state");
    }
    const Point candidate = spec.proposal_sampler(rng);
    const double u = rng.uniform();
    return accepts(u, log_w, spec.log_weight(candidate)) ? candidate : x;
}

double chain_estimate(const ProblemSpec& spec, std::size_t n, std::size_t t_iters,
                      std::size_t burn_in, Rng& rng) {
    if (t_iters <= burn_in) {
        throw std::invalid_argument("chain_estimate: t_iters must exceed burn_in");
    }
    PimhState state{sample_block_ref(spec, n, rng), 0, 0};
    double sum = 0.0;
    for (std::size_t t = 0; t < t_iters; ++t) {
        if (t > 0) state = pimh_step(state, spec, n, rng);
        if (t >= burn_in) sum += state.block->fhat();
    }
    return sum / static_cast<double>(t_iters - burn_in);
}

} // namespace coupledmc
