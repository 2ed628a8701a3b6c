#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coupledmc/model.hpp"

namespace coupledmc::oracle {

/// Transition matrix of independent Metropolis-Hastings on a finite space.
struct DiscreteKernel {
    std::size_t size = 0;
    std::vector<double> matrix;   // row-major, size x size
    std::vector<double> target;
    std::vector<double> proposal;
    std::vector<double> weight;   // target / proposal, 0 where the target vanishes

    double at(std::size_t i, std::size_t j) const { return matrix[i * size + j]; }
};

/// P(i,j) = q_j min(1, w_j / w_i) for j != i, the diagonal taking the rest.
/// A zero-weight current state accepts every proposal.
DiscreteKernel build_imh_kernel(const ProblemSpec& spec);

/// Row vector times P, t times.
std::vector<double> propagate(const DiscreteKernel& kernel, std::span<const double> start, std::uint64_t t);

/// Total variation between start P^t and the target.
double exact_tv(const DiscreteKernel& kernel, std::span<const double> start, std::uint64_t t);

/// Total variation between rows i and j of P^t.
double exact_tv_between(const DiscreteKernel& kernel, std::size_t i, std::size_t j, std::uint64_t t);

/// r(i) = sum_{j != i} q_j (1 - min(1, w_j / w_i)).
double exact_rejection(const DiscreteKernel& kernel, std::size_t i);

/// P(tau > t) for the lagged coupled chain with N = 1 started from q x q.
double lagged_meeting_survival(const DiscreteKernel& kernel, std::uint64_t t);

/// E[max(0, tau - 1 - t)] for the same lagged construction.
double lagged_tv_bound(const DiscreteKernel& kernel, std::uint64_t t);

/// Point mass on state i.
std::vector<double> point_mass(std::size_t size, std::size_t i);

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate) {}
    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

/// Integral of g(x) q(x) over the proposal's support to absolute tolerance `tol`.
/// Gauss-Kronrod 7/15 with bisection on dyadically growing panels; returns
/// +inf for integrals that keep growing past 1e12. Finite models are summed exactly.
double quadrature_moment(const ProblemSpec& spec, const std::function<double(double)>& g, double tol);

/// Integral of g(x) omega(x)^p q(x), with omega^p q formed in log space.
double weighted_moment(const ProblemSpec& spec, double p, const std::function<double(double)>& g, double tol);

/// q(omega^p) by quadrature.
double weight_moment(const ProblemSpec& spec, double p, double tol = 1e-10);

struct FixtureRecord {
    std::string model_id;
    std::size_t state = 0;
    std::uint64_t t = 0;
    double value = 0.0;
};

/// exact_tv from every point mass of the three-state preset, t = 0..max_t.
std::vector<FixtureRecord> tv_fixture_records(std::uint64_t max_t = 10);

/// `model_id state t value` lines, values with 17 significant digits.
void write_fixture(std::ostream& out, std::span<const FixtureRecord> records);
std::vector<FixtureRecord> read_fixture(std::istream& in);

} // namespace coupledmc::oracle
