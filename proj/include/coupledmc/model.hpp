#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coupledmc/rng.hpp"

namespace coupledmc {

/// States are scalars. Finite models encode category i as the double i.
using Point = double;

enum class Support { half_line, real_line, finite };

/// Closed-form quantities of a target/proposal pair. Entries that have no
/// closed form (or diverge) are left empty instead of holding NaN.
struct AnalyticRefs {
    double integral_I = 0.0;            // pi(f)
    std::optional<double> asym_bias_B;  // lim N * E[Fhat - pi(f)]
    std::optional<double> asym_var_V;   // q(omega^2 (f - pi(f))^2)
    std::optional<double> c1;           // q(omega^2)
    std::optional<double> c2;           // q(omega^2 f)
    std::optional<double> c3;           // q(omega^2 f^2)
    double moment_order_p = 0.0;        // sup{p : q(omega^p) < inf}; +inf when bounded
};

struct FiniteModel {
    std::vector<double> target;
    std::vector<double> proposal;
    std::vector<double> f_values;
};

struct ProblemSpec {
    std::string label;
    Support support = Support::real_line;
    std::function<Point(Rng&)> proposal_sampler;
    std::function<double(Point)> log_weight;
    std::function<double(Point)> test_fn;
    /// Proposal density (continuous) or mass function (finite); used by quadrature.
    std::function<double(Point)> proposal_density;
    /// Log of the continuous proposal density; lets quadrature reach far into the tail.
    std::function<double(Point)> log_proposal_density;
    std::optional<AnalyticRefs> analytic;
    std::optional<FiniteModel> finite;
};

/// pi = Exponential(1), q = Exponential(k), f = sin.
ProblemSpec exponential_pair(double k);

/// Exponential pair whose weight has moments of every order below p: k = p/(p-1).
ProblemSpec exponential_pair_for_order(double p);

/// pi = Normal(0,1), q = Normal(0, sigma2), f = sin.
ProblemSpec normal_pair(double sigma2);

/// Categorical target/proposal on {0, ..., m-1}. `f_values` defaults to f(i) = i.
ProblemSpec discrete_pair(std::vector<double> target_probs, std::vector<double> proposal_probs,
                          std::vector<double> f_values = {});

/// Three-state model with strictly positive weights used by the exact checks.
ProblemSpec discrete_preset();

/// Closed forms for the Exponential pair; bias/variance entries are empty when k >= 2.
AnalyticRefs exponential_refs(double k);

} // namespace coupledmc
