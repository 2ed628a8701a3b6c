#include "coupledmc/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

namespace coupledmc::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const FiniteModel& require_finite(const ProblemSpec& spec, const char* who) {
    if (spec.support != Support::finite || !spec.finite) {
        throw std::invalid_argument(std::string(who) + ": spec is not a finite (discrete) model");
    }
    return *spec.finite;
}

// Acceptance ratio min(1, w_to / w_from); a zero-weight state accepts everything.
double acceptance(double w_from, double w_to) {
    if (w_from == 0.0) return 1.0;
    return std::min(1.0, w_to / w_from);
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (positive half, centre last).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Sample {
    double value = 0.0;
    double noise = 0.0; // absolute rounding noise carried by `value`
};

struct Rule {
    double kronrod = 0.0;
    double abs_kronrod = 0.0;
    double error = 0.0;
    double noise = 0.0;
};

template <class F>
Rule gk15(const F& h, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const Sample fc = h(centre);
    double k = fc.value * kWgk[7];
    double kabs = std::abs(fc.value) * kWgk[7];
    double noise = fc.noise * kWgk[7];
    double g = fc.value * kWg[3];
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * kXgk[i];
        const Sample f1 = h(centre - dx);
        const Sample f2 = h(centre + dx);
        k += kWgk[i] * (f1.value + f2.value);
        kabs += kWgk[i] * (std::abs(f1.value) + std::abs(f2.value));
        noise += kWgk[i] * (f1.noise + f2.noise);
        if (i % 2 == 1) g += kWg[i / 2] * (f1.value + f2.value);
    }
    const double width = std::abs(half);
    return {k * half, kabs * width, std::abs((k - g) * half), noise * width};
}

struct PanelResult {
    double value = 0.0;
    double abs_value = 0.0;
};

constexpr std::size_t kSubdivisionBudget = 4'000'000;

// Adaptive bisection of [a, b] until each piece meets its share of `tol`.
template <class F>
PanelResult integrate_panel(const F& h, double a, double b, double tol, std::size_t& budget,
                            double best_so_far) {
    PanelResult out;
    const double length = b - a;
    std::vector<std::pair<double, double>> stack{{a, b}};
    while (!stack.empty()) {
        auto [lo, hi] = stack.back();
        stack.pop_back();
        const Rule r = gk15(h, lo, hi);
        const double allowed = tol * (hi - lo) / length;
        const double roundoff = 64.0 * (std::numeric_limits<double>::epsilon() * r.abs_kronrod + r.noise);
        if (std::isnan(r.kronrod)) {
            throw QuadratureError("weighted_moment: integrand produced NaN", best_so_far + out.value);
        }
        if (r.error <= allowed || r.error <= roundoff || std::isinf(r.kronrod)) {
            out.value += r.kronrod;
            out.abs_value += r.abs_kronrod;
            continue;
        }
        const double mid = 0.5 * (lo + hi);
        if (budget == 0 || !(lo < mid && mid < hi)) {
            throw QuadratureError(budget == 0 ? "weighted_moment: subdivision budget exhausted"
                                              : "weighted_moment: interval too small to bisect",
                                  best_so_far + out.value);
        }
        --budget;
        stack.emplace_back(mid, hi);
        stack.emplace_back(lo, mid);
    }
    return out;
}

} // namespace

DiscreteKernel build_imh_kernel(const ProblemSpec& spec) {
    const FiniteModel& model = require_finite(spec, "build_imh_kernel");
    DiscreteKernel k;
    k.size = model.target.size();
    k.target = model.target;
    k.proposal = model.proposal;
    k.weight.resize(k.size);
    for (std::size_t i = 0; i < k.size; ++i) {
        if (model.target[i] > 0.0 && model.proposal[i] == 0.0) {
            throw std::invalid_argument("build_imh_kernel: target mass on a state the proposal never visits");
        }
        k.weight[i] = model.target[i] > 0.0 ? model.target[i] / model.proposal[i] : 0.0;
    }
    k.matrix.assign(k.size * k.size, 0.0);
    for (std::size_t i = 0; i < k.size; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < k.size; ++j) {
            if (j == i) continue;
            const double pij = k.proposal[j] * acceptance(k.weight[i], k.weight[j]);
            k.matrix[i * k.size + j] = pij;
            off += pij;
        }
        k.matrix[i * k.size + i] = 1.0 - off;
    }
    return k;
}

std::vector<double> propagate(const DiscreteKernel& kernel, std::span<const double> start, std::uint64_t t) {
    if (start.size() != kernel.size) {
        throw std::invalid_argument("propagate: start distribution has the wrong length");
    }
    std::vector<double> cur(start.begin(), start.end());
    std::vector<double> next(kernel.size);
    for (std::uint64_t s = 0; s < t; ++s) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < kernel.size; ++i) {
            if (cur[i] == 0.0) continue;
            for (std::size_t j = 0; j < kernel.size; ++j) next[j] += cur[i] * kernel.at(i, j);
        }
        std::swap(cur, next);
    }
    return cur;
}

double exact_tv(const DiscreteKernel& kernel, std::span<const double> start, std::uint64_t t) {
    const auto dist = propagate(kernel, start, t);
    double s = 0.0;
    for (std::size_t j = 0; j < kernel.size; ++j) s += std::abs(dist[j] - kernel.target[j]);
    return 0.5 * s;
}

double exact_tv_between(const DiscreteKernel& kernel, std::size_t i, std::size_t j, std::uint64_t t) {
    const auto a = propagate(kernel, point_mass(kernel.size, i), t);
    const auto b = propagate(kernel, point_mass(kernel.size, j), t);
    double s = 0.0;
    for (std::size_t k = 0; k < kernel.size; ++k) s += std::abs(a[k] - b[k]);
    return 0.5 * s;
}

double exact_rejection(const DiscreteKernel& kernel, std::size_t i) {
    if (i >= kernel.size) throw std::out_of_range("exact_rejection: state out of range");
    double r = 0.0;
    for (std::size_t j = 0; j < kernel.size; ++j) {
        if (j == i) continue;
        r += kernel.proposal[j] * (1.0 - acceptance(kernel.weight[i], kernel.weight[j]));
    }
    return r;
}

double lagged_meeting_survival(const DiscreteKernel& kernel, std::uint64_t t) {
    if (t == 0) return 1.0;
    // tau > t needs the first proposal (y_0) rejected, after which x_0 dominates and
    // the remaining wait is geometric with parameter 1 - r(x_0).
    double s = 0.0;
    for (std::size_t x = 0; x < kernel.size; ++x) {
        const double rx = exact_rejection(kernel, x);
        for (std::size_t y = 0; y < kernel.size; ++y) {
            const double reject_first = 1.0 - acceptance(kernel.weight[x], kernel.weight[y]);
            s += kernel.proposal[x] * kernel.proposal[y] * reject_first *
                 std::pow(rx, static_cast<double>(t - 1));
        }
    }
    return s;
}

double lagged_tv_bound(const DiscreteKernel& kernel, std::uint64_t t) {
    // sum_{j >= 1} P(tau > t + j)
    double s = 0.0;
    for (std::size_t x = 0; x < kernel.size; ++x) {
        const double rx = exact_rejection(kernel, x);
        if (rx >= 1.0) return kInf;
        for (std::size_t y = 0; y < kernel.size; ++y) {
            const double reject_first = 1.0 - acceptance(kernel.weight[x], kernel.weight[y]);
            s += kernel.proposal[x] * kernel.proposal[y] * reject_first *
                 std::pow(rx, static_cast<double>(t)) / (1.0 - rx);
        }
    }
    return s;
}

std::vector<double> point_mass(std::size_t size, std::size_t i) {
    if (i >= size) throw std::out_of_range("point_mass: state out of range");
    std::vector<double> v(size, 0.0);
    v[i] = 1.0;
    return v;
}

double weighted_moment(const ProblemSpec& spec, double p, const std::function<double(double)>& g, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("weighted_moment: tol must be positive");
    const auto& log_weight = spec.log_weight;
    if (spec.support == Support::finite) {
        const FiniteModel& model = require_finite(spec, "weighted_moment");
        double s = 0.0;
        for (std::size_t i = 0; i < model.proposal.size(); ++i) {
            if (model.proposal[i] == 0.0) continue;
            const double x = static_cast<double>(i);
            const double w = p == 0.0 ? 1.0 : std::exp(p * log_weight(x));
            s += g(x) * w * model.proposal[i];
        }
        return s;
    }
    if (!spec.log_proposal_density) {
        throw std::invalid_argument("weighted_moment: spec has no log proposal density");
    }
    const auto& log_density = spec.log_proposal_density;
    // omega^p q is formed in log space: near the moment boundary the integrand decays
    // so slowly that q alone underflows long before the integral settles.
    // The exponent is a difference of terms that grow with |x|; its rounding error
    // is carried along so the error test does not chase noise.
    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto h = [&](double x) -> Sample {
        const double lq = log_density(x);
        if (lq == -kInf) return {};
        const double lw = p == 0.0 ? 0.0 : p * log_weight(x);
        const double v = g(x) * std::exp(lw + lq);
        return {v, std::abs(v) * eps * (std::abs(lw) + std::abs(lq))};
    };
    const bool two_sided = spec.support == Support::real_line;

    // Panels [0,1], [1,2], [2,4], ... (mirrored for the real line); each panel gets
    // a geometrically shrinking share of the tolerance, floored at tol/256 (at most 60
    // panels, so the shares still sum below tol).
    std::size_t budget = kSubdivisionBudget;
    double total = 0.0;
    double panel_tol = 0.25 * tol;
    auto add_panel = [&](double lo, double hi) {
        PanelResult r = integrate_panel(h, lo, hi, panel_tol, budget, total);
        if (two_sided) {
            const PanelResult left = integrate_panel(h, -hi, -lo, panel_tol, budget, total + r.value);
            r.value += left.value;
            r.abs_value += left.abs_value;
        }
        panel_tol = std::max(0.5 * panel_tol, tol / 256.0);
        return r;
    };

    total = add_panel(0.0, 1.0).value;
    double previous_tail = kInf;
    constexpr double kDivergenceLevel = 1e12;
    for (double lo = 1.0; lo < 0x1.0p60; lo *= 2.0) {
        const PanelResult tail = add_panel(lo, 2.0 * lo);
        if (!std::isfinite(tail.value)) return kInf;
        total += tail.value;
        if (std::abs(total) > kDivergenceLevel && tail.abs_value >= previous_tail) return kInf;
        if (tail.abs_value < 0.1 * tol && tail.abs_value < previous_tail) return total;
        previous_tail = tail.abs_value;
    }
    throw QuadratureError("weighted_moment: tail did not settle", total);
}

double quadrature_moment(const ProblemSpec& spec, const std::function<double(double)>& g, double tol) {
    return weighted_moment(spec, 0.0, g, tol);
}

double weight_moment(const ProblemSpec& spec, double p, double tol) {
    return weighted_moment(spec, p, [](double) { return 1.0; }, tol);
}

std::vector<FixtureRecord> tv_fixture_records(std::uint64_t max_t) {
    const DiscreteKernel kernel = build_imh_kernel(discrete_preset());
    std::vector<FixtureRecord> records;
    for (std::size_t i = 0; i < kernel.size; ++i) {
        const auto start = point_mass(kernel.size, i);
        for (std::uint64_t t = 0; t <= max_t; ++t) {
            records.push_back({"preset3", i, t, exact_tv(kernel, start, t)});
        }
    }
    return records;
}

void write_fixture(std::ostream& out, std::span<const FixtureRecord> records) {
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g", r.value);
        out << r.model_id << ' ' << r.state << ' ' << r.t << ' ' << buf << '\n';
    }
}

std::vector<FixtureRecord> read_fixture(std::istream& in) {
    std::vector<FixtureRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        std::istringstream fields(line);
        FixtureRecord r;
        if (!(fields >> r.model_id >> r.state >> r.t >> r.value)) {
            throw std::runtime_error("read_fixture: malformed line: " + line);
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace coupledmc::oracle
