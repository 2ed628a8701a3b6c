#include "coupledmc/coupling.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "coupledmc/pimh.hpp"

namespace coupledmc {

CoupledPair coupled_step(const BlockRef& x, const BlockRef& y, const ProblemSpec& spec,
                         std::size_t n, Rng& rng) {
    if (!x || !y || x->size() != n || y->size() != n) {
        throw std::invalid_argument("coupled_step: both blocks must hold n particles");
    }
    BlockRef proposal = sample_block_ref(spec, n, rng);
    const double u = rng.uniform();
    const double log_u = std::log(u);
    const double log_z_star = proposal->log_zhat();
    CoupledPair out{x, y};
    if (log_u < log_z_star - x->log_zhat()) out.x = proposal;
    if (log_u < log_z_star - y->log_zhat()) out.y = proposal;
    return out;
}

CoupledRun run_lagged_coupling(const ProblemSpec& spec, std::size_t n, Rng& rng,
                               std::uint64_t max_iters) {
    BlockRef x0 = sample_block_ref(spec, n, rng);
    BlockRef y0 = sample_block_ref(spec, n, rng);
    return run_lagged_coupling_from(x0, y0, spec, n, rng, max_iters);
}

CoupledRun run_lagged_coupling_from(const BlockRef& x0, const BlockRef& y0, const ProblemSpec& spec,
                                    std::size_t n, Rng& rng, std::uint64_t max_iters) {
    if (n == 0 || max_iters == 0) {
        throw std::invalid_argument("run_lagged_coupling: n and max_iters must be positive");
    }
    if (!x0 || !y0 || x0->size() != n || y0->size() != n) {
        throw std::invalid_argument("run_lagged_coupling: initial blocks must hold n particles");
    }
    CoupledRun run;
    run.n = n;
    run.proposals_drawn = 2;
    run.x0_fhat = x0->fhat();
    run.y0_fhat = y0->fhat();
    run.x_trace.push_back(x0->fhat());
    run.y_trace.push_back(y0->fhat());

    // First transition: y_0 is proposed to the x-chain; the y-chain does not move.
    const double u = rng.uniform();
    BlockRef x = x0;
    if (accepts(u, x0->log_zhat(), y0->log_zhat())) {
        run.tau = 1;
        run.x_trace.push_back(y0->fhat());
        return run;
    }
    run.x_trace.push_back(x0->fhat());

    BlockRef y = y0;
    for (std::uint64_t t = 1; t <= max_iters; ++t) {
        // (x_t, y_{t-1}) -> (x_{t+1}, y_t)
        CoupledPair next = coupled_step(x, y, spec, n, rng);
        run.proposals_drawn += 1;
        x = std::move(next.x);
        y = std::move(next.y);
        run.x_trace.push_back(x->fhat());
        run.y_trace.push_back(y->fhat());
        if (x == y) {
            run.tau = t + 1;
            return run;
        }
    }
    throw TruncationError("run_lagged_coupling: chains did not meet within " +
                              std::to_string(max_iters) + " iterations",
                          std::move(run));
}

std::uint64_t coupled_meeting_time(const BlockRef& x, const BlockRef& y, const ProblemSpec& spec,
                                   std::size_t n, Rng& rng, std::uint64_t max_iters) {
    BlockRef cx = x;
    BlockRef cy = y;
    for (std::uint64_t t = 1; t <= max_iters; ++t) {
        CoupledPair next = coupled_step(cx, cy, spec, n, rng);
        cx = std::move(next.x);
        cy = std::move(next.y);
        if (cx == cy) return t;
    }
    CoupledRun partial;
    partial.n = n;
    throw TruncationError("coupled_meeting_time: chains did not meet within " +
                              std::to_string(max_iters) + " iterations",
                          std::move(partial));
}

double tv_upper_bound(std::span<const std::uint64_t> taus, std::uint64_t t) {
    if (taus.empty()) {
        throw std::invalid_argument("tv_upper_bound: no runs supplied");
    }
    double sum = 0.0;
    for (std::uint64_t tau : taus) {
        if (tau > t + 1) sum += static_cast<double>(tau - 1 - t);
    }
    return sum / static_cast<double>(taus.size());
}

double tv_upper_bound(std::span<const CoupledRun> runs, std::uint64_t t) {
    std::vector<std::uint64_t> taus;
    taus.reserve(runs.size());
    for (const auto& run : runs) taus.push_back(run.tau);
    return tv_upper_bound(std::span<const std::uint64_t>(taus), t);
}

double rejection_bound_constant(double p, double q_omega_p, double theta) {
    if (!(p > 1.0)) throw std::invalid_argument("rejection_bound_constant: p must exceed 1");
    if (!(q_omega_p >= 1.0) || !std::isfinite(q_omega_p)) {
        throw std::invalid_argument("rejection_bound_constant: q(omega^p) must be finite and >= 1");
    }
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("rejection_bound_constant: theta must lie in [0, 1]");
    }
    return std::pow(1.0 - theta, p / (p - 1.0)) / std::pow(q_omega_p, 1.0 / (p - 1.0));
}

TheoryConstants theory_constants(double p, double q_omega_p) {
    if (!(p >= 2.0) || !std::isfinite(p)) {
        throw std::invalid_argument("theory_constants: p must be finite and at least 2");
    }
    if (!(q_omega_p >= 1.0) || !std::isfinite(q_omega_p)) {
        // q(omega) = 1 and Jensen give q(omega^p) >= 1.
        throw std::invalid_argument("theory_constants: q(omega^p) must be finite and >= 1");
    }
    TheoryConstants c;
    const double base = std::pow(2.0, 1.0 - 1.0 / p) * (p - 1.0) * std::pow(1.0 + q_omega_p, 1.0 / p);
    c.M_p = std::pow(base, p);
    c.beta_p = 1.0 - 1.0 / (std::pow(2.0, (3.0 * p - 2.0) / (p - 1.0)) *
                            std::pow(q_omega_p, 1.0 / (p - 1.0)));
    c.c_p_half = rejection_bound_constant(p, q_omega_p, 0.5);
    return c;
}

BlockRef block_at(const ProblemSpec& spec, std::vector<Point> points) {
    std::vector<double> log_w(points.size());
    std::vector<double> f(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        log_w[i] = spec.log_weight(points[i]);
        f[i] = spec.test_fn(points[i]);
    }
    return std::make_shared<const ParticleBlock>(std::move(points), std::move(log_w), std::move(f));
}

} // namespace coupledmc
