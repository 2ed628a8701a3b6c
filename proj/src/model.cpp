#include "coupledmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace coupledmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_probability_vector(const std::vector<double>& probs, const char* name) {
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument(std::string(name) + " has a negative or non-finite entry");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument(std::string(name) + " does not sum to 1");
    }
}

} // namespace

AnalyticRefs exponential_refs(double k) {
    AnalyticRefs refs;
    refs.integral_I = 0.5;
    refs.moment_order_p = k > 1.0 ? k / (k - 1.0) : kInf;
    if (k < 2.0) {
        const double I = refs.integral_I;
        const double s = 2.0 - k;
        const double c1 = 1.0 / (k * s);
        const double c2 = 1.0 / (k * (1.0 + s * s));
        const double c3 = 0.5 * c1 - 0.5 * s / (k * (4.0 + s * s));
        refs.c1 = c1;
        refs.c2 = c2;
        refs.c3 = c3;
        refs.asym_bias_B = -(c2 - I * c1);
        refs.asym_var_V = c3 - 2.0 * I * c2 + I * I * c1;
    }
    return refs;
}

ProblemSpec exponential_pair(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw std::invalid_argument("exponential_pair: rate k must be positive and finite");
    }
    ProblemSpec spec;
    spec.label = "exponential(k=" + std::to_string(k) + ")";
    spec.support = Support::half_line;
    spec.proposal_sampler = [k](Rng& rng) { return -std::log(rng.uniform_open()) / k; };
    const double log_k = std::log(k);
    spec.log_weight = [k, log_k](Point x) { return -log_k - (1.0 - k) * x; };
    spec.test_fn = [](Point x) { return std::sin(x); };
    spec.proposal_density = [k](Point x) { return x < 0.0 ? 0.0 : k * std::exp(-k * x); };
    spec.log_proposal_density = [k, log_k](Point x) { return x < 0.0 ? -kInf : log_k - k * x; };
    spec.analytic = exponential_refs(k);
    return spec;
}

ProblemSpec exponential_pair_for_order(double p) {
    if (!(p > 1.0)) {
        throw std::invalid_argument("exponential_pair_for_order: p must exceed 1");
    }
    return exponential_pair(p / (p - 1.0));
}

ProblemSpec normal_pair(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw std::invalid_argument("normal_pair: sigma2 must be positive and finite");
    }
    ProblemSpec spec;
    spec.label = "normal(sigma2=" + std::to_string(sigma2) + ")";
    spec.support = Support::real_line;
    const double sigma = std::sqrt(sigma2);
    spec.proposal_sampler = [sigma](Rng& rng) {
        const double u1 = rng.uniform_open();
        const double u2 = rng.uniform_open();
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    };
    const double log_sigma = std::log(sigma);
    const double curvature = 1.0 - 1.0 / sigma2;
    spec.log_weight = [log_sigma, curvature](Point x) { return log_sigma - 0.5 * x * x * curvature; };
    spec.test_fn = [](Point x) { return std::sin(x); };
    spec.proposal_density = [sigma2](Point x) {
        return std::exp(-0.5 * x * x / sigma2) / std::sqrt(2.0 * std::numbers::pi * sigma2);
    };
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * sigma2);
    spec.log_proposal_density = [sigma2, log_norm](Point x) { return log_norm - 0.5 * x * x / sigma2; };
    AnalyticRefs refs;
    refs.integral_I = 0.0; // sin is odd and pi is symmetric
    refs.moment_order_p = sigma2 < 1.0 ? (1.0 / sigma2) / (1.0 / sigma2 - 1.0) : kInf;
    spec.analytic = refs;
    return spec;
}

ProblemSpec discrete_pair(std::vector<double> target_probs, std::vector<double> proposal_probs,
                          std::vector<double> f_values) {
    const std::size_t m = target_probs.size();
    if (m < 2 || proposal_probs.size() != m) {
        throw std::invalid_argument("discrete_pair: vectors must share a length of at least 2");
    }
    check_probability_vector(target_probs, "target_probs");
    check_probability_vector(proposal_probs, "proposal_probs");
    for (std::size_t i = 0; i < m; ++i) {
        if (target_probs[i] > 0.0 && proposal_probs[i] == 0.0) {
            throw std::invalid_argument("discrete_pair: target is not absolutely continuous with "
                                        "respect to proposal at state " + std::to_string(i));
        }
    }
    if (f_values.empty()) {
        f_values.resize(m);
        for (std::size_t i = 0; i < m; ++i) f_values[i] = static_cast<double>(i);
    } else if (f_values.size() != m) {
        throw std::invalid_argument("discrete_pair: f_values length mismatch");
    }

    auto model = std::make_shared<const FiniteModel>(FiniteModel{target_probs, proposal_probs, f_values});

    std::vector<double> log_w(m);
    for (std::size_t i = 0; i < m; ++i) {
        log_w[i] = target_probs[i] > 0.0 ? std::log(target_probs[i]) - std::log(proposal_probs[i])
                                         : -kInf;
    }
    // Inverse CDF; the last positive-mass state absorbs rounding in the cumulative sum.
    std::vector<double> cumulative(m);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < m; ++i) {
        acc += proposal_probs[i];
        cumulative[i] = acc;
        if (proposal_probs[i] > 0.0) last_positive = i;
    }

    ProblemSpec spec;
    spec.label = "discrete(m=" + std::to_string(m) + ")";
    spec.support = Support::finite;
    spec.proposal_sampler = [cumulative, last_positive](Rng& rng) {
        const double u = rng.uniform();
        for (std::size_t i = 0; i < last_positive; ++i) {
            if (u < cumulative[i]) return static_cast<Point>(i);
        }
        return static_cast<Point>(last_positive);
    };
    spec.log_weight = [log_w](Point x) { return log_w[static_cast<std::size_t>(x)]; };
    spec.test_fn = [model](Point x) { return model->f_values[static_cast<std::size_t>(x)]; };
    spec.proposal_density = [model](Point x) { return model->proposal[static_cast<std::size_t>(x)]; };

    AnalyticRefs refs;
    double I = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        I += target_probs[i] * f_values[i];
    }
    refs.integral_I = I;
    refs.moment_order_p = kInf; // finite state space: the weight is bounded
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (proposal_probs[i] == 0.0) continue;
        const double w2 = std::exp(2.0 * log_w[i]);
        c1 += proposal_probs[i] * w2;
        c2 += proposal_probs[i] * w2 * f_values[i];
        c3 += proposal_probs[i] * w2 * f_values[i] * f_values[i];
    }
    refs.c1 = c1;
    refs.c2 = c2;
    refs.c3 = c3;
    refs.asym_bias_B = -(c2 - I * c1);
    refs.asym_var_V = c3 - 2.0 * I * c2 + I * I * c1;
    spec.analytic = refs;
    spec.finite = *model;
    return spec;
}

ProblemSpec discrete_preset() {
    return discrete_pair({0.5, 0.3, 0.2}, {0.2, 0.3, 0.5});
}

} // namespace coupledmc
