#include "coupledmc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "coupledmc/coupling.hpp"
#include "coupledmc/estimators.hpp"
#include "coupledmc/parallel.hpp"
#include "coupledmc/robust.hpp"
#include "coupledmc/unbiased.hpp"

namespace coupledmc {

namespace {

constexpr Method kAllMethods[] = {Method::snis,     Method::enis,         Method::mom_snis,
                                  Method::meeting_time, Method::uis,      Method::suis,
                                  Method::mom_suis, Method::mn_suis,      Method::lv_suis};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

template <class T>
T parse_number(std::string_view text, std::string_view key) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw std::invalid_argument("config: bad value for '" + std::string(key) + "': '" +
                                    std::string(text) + "'");
    }
    return value;
}

bool fixed_grid(Preset preset) {
    return preset == Preset::figure4 || preset == Preset::table1 || preset == Preset::table2;
}

// Particles per basic estimator in the robust-estimation presets.
std::size_t fixed_n(Method method) {
    switch (method) {
    case Method::snis:
    case Method::enis: return 1000;
    case Method::mom_snis: return 48;
    default: return 4;
    }
}

std::optional<RobustMethod> robust_kind(Method method) {
    switch (method) {
    case Method::mom_suis: return RobustMethod::mom;
    case Method::mn_suis: return RobustMethod::mn;
    case Method::lv_suis: return RobustMethod::lv;
    default: return std::nullopt;
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

template <class Loop>
std::vector<EstimatorReport> run_grid(const ExperimentConfig& cfg, Loop&& loop) {
    cfg.validate();
    std::vector<ProblemSpec> specs;
    specs.reserve(cfg.p_values.size());
    for (double p : cfg.p_values) specs.push_back(exponential_pair_for_order(p));

    std::vector<EstimatorReport> reports;
    std::vector<RepeatResult> results(cfg.repeats);
    for (const Cell& cell : expand_cells(cfg)) {
        const ProblemSpec& spec = specs[cell.p_index];
        loop(cfg.repeats, [&](std::uint64_t r) { results[r] = run_repeat(cfg, spec, cell, r); });

        std::vector<double> values;
        std::vector<double> costs;
        values.reserve(results.size());
        costs.reserve(results.size());
        for (const auto& res : results) {
            if (res.truncated) continue;
            values.push_back(res.value);
            costs.push_back(res.cost);
        }
        const std::uint64_t truncated = cfg.repeats - values.size();
        if (static_cast<double>(truncated) > 1e-3 * static_cast<double>(cfg.repeats)) {
            throw TruncationRateError("run_experiment: " + std::to_string(truncated) + " of " +
                                      std::to_string(cfg.repeats) + " couplings truncated for " +
                                      std::string(to_string(cell.method)) + " at p=" +
                                      format_double(cell.p) + ", N=" + std::to_string(cell.n));
        }
        if (values.empty()) {
            throw TruncationRateError("run_experiment: every repeat was truncated");
        }
        reports.push_back(summarize(std::string(to_string(cell.method)), cell.p, cell.n, values, costs,
                                    reference_value(spec, cell.method)));
    }
    return reports;
}

} // namespace

Preset parse_preset(std::string_view name) {
    if (name == "figure1") return Preset::figure1;
    if (name == "figure2") return Preset::figure2;
    if (name == "figure3") return Preset::figure3;
    if (name == "figure4") return Preset::figure4;
    if (name == "table1") return Preset::table1;
    if (name == "table2") return Preset::table2;
    if (name == "custom") return Preset::custom;
    throw std::invalid_argument("unknown preset: " + std::string(name));
}

std::string_view to_string(Preset preset) noexcept {
    switch (preset) {
    case Preset::figure1: return "figure1";
    case Preset::figure2: return "figure2";
    case Preset::figure3: return "figure3";
    case Preset::figure4: return "figure4";
    case Preset::table1: return "table1";
    case Preset::table2: return "table2";
    case Preset::custom: return "custom";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (Method m : kAllMethods) {
        if (to_string(m) == name) return m;
    }
    throw std::invalid_argument("unknown method: " + std::string(name));
}

std::string_view to_string(Method method) noexcept {
    switch (method) {
    case Method::snis: return "snis";
    case Method::enis: return "enis";
    case Method::mom_snis: return "mom_snis";
    case Method::meeting_time: return "meeting_time";
    case Method::uis: return "uis";
    case Method::suis: return "suis";
    case Method::mom_suis: return "mom_suis";
    case Method::mn_suis: return "mn_suis";
    case Method::lv_suis: return "lv_suis";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (p_values.empty()) throw std::invalid_argument("config: p_values is empty");
    if (p_values.size() > 255) throw std::invalid_argument("config: at most 255 p values");
    for (double p : p_values) {
        if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("config: every p must exceed 1");
    }
    if (!fixed_grid(preset)) {
        if (n_grid.empty()) throw std::invalid_argument("config: n_grid is empty");
        if (n_grid.size() > 255) throw std::invalid_argument("config: at most 255 grid sizes");
    }
    for (std::size_t n : n_grid) {
        if (n < 1) throw std::invalid_argument("config: every N must be at least 1");
    }
    if (preset == Preset::custom && methods.empty()) {
        throw std::invalid_argument("config: the custom preset needs a methods list");
    }
    if (repeats < 1) throw std::invalid_argument("config: repeats must be at least 1");
    if (repeats > 0xFFFFFFFFULL) throw std::invalid_argument("config: repeats must fit in 32 bits");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta must lie in (0, 1)");
    if (per_block < 1) throw std::invalid_argument("config: per_block must be at least 1");
    if (workers < 1) throw std::invalid_argument("config: workers must be at least 1");
}

ExperimentConfig preset_config(Preset preset) {
    ExperimentConfig cfg;
    cfg.preset = preset;
    cfg.repeats = 100'000;
    auto powers_of_two = [](int lo, int hi) {
        std::vector<std::size_t> grid;
        for (int e = lo; e <= hi; ++e) grid.push_back(std::size_t{1} << e);
        return grid;
    };
    switch (preset) {
    case Preset::figure1:
        cfg.methods = {Method::snis};
        cfg.p_values = {3.0, 5.0};
        cfg.n_grid = powers_of_two(7, 13);
        break;
    case Preset::figure2:
        cfg.methods = {Method::meeting_time};
        cfg.p_values = {3.0, 5.0};
        cfg.n_grid = powers_of_two(4, 12);
        break;
    case Preset::figure3:
        cfg.methods = {Method::suis};
        cfg.p_values = {3.0, 5.0};
        cfg.n_grid = powers_of_two(4, 11);
        break;
    case Preset::figure4:
        cfg.methods = {Method::snis, Method::mom_snis, Method::mom_suis, Method::mn_suis, Method::lv_suis};
        cfg.p_values = {2.01, 3.0};
        break;
    case Preset::table1:
        cfg.methods = {Method::enis, Method::snis, Method::mom_snis};
        cfg.p_values = {2.01, 2.1, 3.0};
        cfg.repeats = 10'000;
        break;
    case Preset::table2:
        cfg.methods = {Method::mom_snis, Method::mom_suis, Method::lv_suis, Method::mn_suis};
        cfg.p_values = {2.01, 2.1, 3.0};
        cfg.repeats = 10'000;
        break;
    case Preset::custom:
        break;
    }
    return cfg;
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg) {
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key == "preset") {
            // Switching preset resets the grid to that preset's defaults; later keys override.
            const Preset preset = parse_preset(value);
            ExperimentConfig fresh = preset_config(preset);
            fresh.master_seed = cfg.master_seed;
            fresh.workers = cfg.workers;
            fresh.out_path = cfg.out_path;
            cfg = std::move(fresh);
        } else if (key == "p_values") {
            cfg.p_values.clear();
            for (auto item : split_list(value)) cfg.p_values.push_back(parse_number<double>(item, key));
        } else if (key == "n_grid") {
            cfg.n_grid.clear();
            for (auto item : split_list(value)) cfg.n_grid.push_back(parse_number<std::size_t>(item, key));
        } else if (key == "methods") {
            cfg.methods.clear();
            for (auto item : split_list(value)) cfg.methods.push_back(parse_method(item));
        } else if (key == "repeats") {
            cfg.repeats = parse_number<std::uint64_t>(value, key);
        } else if (key == "delta") {
            cfg.delta = parse_number<double>(value, key);
        } else if (key == "per_block") {
            cfg.per_block = parse_number<std::size_t>(value, key);
        } else if (key == "master_seed" || key == "seed") {
            cfg.master_seed = parse_number<std::uint64_t>(value, key);
        } else if (key == "workers") {
            cfg.workers = parse_number<int>(value, key);
        } else if (key == "out_path" || key == "out") {
            cfg.out_path = std::string(value);
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                        std::string(key) + "'");
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    return parse_config(in, std::move(base));
}

EstimatorReport summarize(std::string method, double p, std::uint64_t n, std::span<const double> values,
                          std::span<const double> costs, double truth) {
    if (values.empty() || values.size() != costs.size()) {
        throw std::invalid_argument("summarize: need equally many values and costs, at least one");
    }
    EstimatorReport r;
    r.method = std::move(method);
    r.p = p;
    r.n = n;
    r.repeats = values.size();
    const auto count = static_cast<double>(values.size());

    double sum = 0.0;
    double cost_sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        cost_sum += costs[i];
    }
    r.mean = sum / count;
    r.mean_cost = cost_sum / count;
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.var = ss / count;
    r.bias = r.mean - truth;
    r.mse = r.var + r.bias * r.bias;

    std::vector<double> abs_err(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) abs_err[i] = std::abs(values[i] - truth);
    std::sort(abs_err.begin(), abs_err.end());
    auto order_stat = [&](double q) {
        auto rank = static_cast<std::size_t>(std::ceil(q * count));
        rank = std::clamp<std::size_t>(rank, 1, abs_err.size());
        return abs_err[rank - 1];
    };
    r.q95_abs_err = order_stat(0.95);
    r.q99_abs_err = order_stat(0.99);
    r.q999_abs_err = order_stat(0.999);
    return r;
}

std::vector<Cell> expand_cells(const ExperimentConfig& cfg) {
    const std::vector<Method> methods =
        cfg.preset == Preset::custom ? cfg.methods : preset_config(cfg.preset).methods;
    std::vector<Cell> cells;
    for (Method m : methods) {
        for (std::size_t pi = 0; pi < cfg.p_values.size(); ++pi) {
            if (fixed_grid(cfg.preset)) {
                cells.push_back({m, cfg.p_values[pi], fixed_n(m), pi, 0});
                continue;
            }
            for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
                cells.push_back({m, cfg.p_values[pi], cfg.n_grid[ni], pi, ni});
            }
        }
    }
    return cells;
}

std::uint64_t stream_index(const Cell& cell, std::uint64_t repeat) {
    return (static_cast<std::uint64_t>(cell.method) << 48) | (static_cast<std::uint64_t>(cell.p_index) << 40) |
           (static_cast<std::uint64_t>(cell.n_index) << 32) | repeat;
}

double reference_value(const ProblemSpec& spec, Method method) {
    if (method == Method::meeting_time) return 1.0;
    if (!spec.analytic) throw std::invalid_argument("reference_value: model has no analytic pi(f)");
    return spec.analytic->integral_I;
}

RepeatResult run_repeat(const ExperimentConfig& cfg, const ProblemSpec& spec, const Cell& cell,
                        std::uint64_t repeat) {
    Rng rng(derive_seed(cfg.master_seed, stream_index(cell, repeat)));
    const auto n = cell.n;
    RepeatResult out;
    try {
        switch (cell.method) {
        case Method::snis:
            out.value = sample_block(spec, n, rng).fhat();
            out.cost = static_cast<double>(n);
            break;
        case Method::enis:
            out.value = unnormalized_is(sample_block(spec, n, rng));
            out.cost = static_cast<double>(n);
            break;
        case Method::mom_snis: {
            const RobustConfig robust = RobustConfig::from_delta(cfg.delta);
            out.value = compose_snis(spec, robust.K * n, robust, rng);
            out.cost = static_cast<double>(robust.K * n);
            break;
        }
        case Method::meeting_time: {
            const CoupledRun run = run_lagged_coupling(spec, n, rng);
            out.value = static_cast<double>(run.tau);
            out.cost = static_cast<double>(run.cost());
            break;
        }
        case Method::uis: {
            const UnbiasedEstimate e = uis(run_lagged_coupling(spec, n, rng));
            out.value = e.value;
            out.cost = static_cast<double>(e.cost);
            break;
        }
        case Method::suis: {
            const UnbiasedEstimate e = suis(spec, n, rng);
            out.value = e.value;
            out.cost = static_cast<double>(e.cost);
            break;
        }
        case Method::mom_suis:
        case Method::mn_suis:
        case Method::lv_suis: {
            const RobustEstimate e = compose_suis(spec, n, cfg.per_block, RobustConfig::from_delta(cfg.delta),
                                                  *robust_kind(cell.method), rng);
            out.value = e.value;
            out.cost = static_cast<double>(e.cost);
            break;
        }
        }
    } catch (const TruncationError&) {
        out = RepeatResult{0.0, 0.0, true};
    }
    return out;
}

std::vector<EstimatorReport> run_experiment(const ExperimentConfig& cfg) {
    return run_grid(cfg, [&](std::uint64_t count, auto&& fn) { for_each_repeat(count, cfg.workers, fn); });
}

std::vector<EstimatorReport> run_experiment_serial(const ExperimentConfig& cfg) {
    return run_grid(cfg, [](std::uint64_t count, auto&& fn) { for_each_repeat_serial(count, fn); });
}

void write_csv(std::ostream& out, std::span<const EstimatorReport> reports) {
    out << kCsvHeader << '\n';
    for (const auto& r : reports) {
        out << r.method << ',' << format_double(r.p) << ',' << r.n << ',' << r.repeats << ','
            << format_double(r.mean) << ',' << format_double(r.mse) << ',' << format_double(r.bias) << ','
            << format_double(r.var) << ',' << format_double(r.q95_abs_err) << ','
            << format_double(r.q99_abs_err) << ',' << format_double(r.q999_abs_err) << ','
            << format_double(r.mean_cost) << '\n';
    }
}

void emit_csv(std::span<const EstimatorReport> reports, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path + " for writing");
    write_csv(out, reports);
    out.flush();
    if (!out) throw std::runtime_error("emit_csv: write to " + path + " failed");
}

std::vector<EstimatorReport> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::invalid_argument("read_csv: missing or unexpected header");
    }
    std::vector<EstimatorReport> reports;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_list(line);
        if (fields.size() != 12) throw std::invalid_argument("read_csv: expected 12 fields: " + line);
        EstimatorReport r;
        r.method = std::string(fields[0]);
        r.p = parse_number<double>(fields[1], "p");
        r.n = parse_number<std::uint64_t>(fields[2], "n");
        r.repeats = parse_number<std::uint64_t>(fields[3], "repeats");
        r.mean = parse_number<double>(fields[4], "mean");
        r.mse = parse_number<double>(fields[5], "mse");
        r.bias = parse_number<double>(fields[6], "bias");
        r.var = parse_number<double>(fields[7], "var");
        r.q95_abs_err = parse_number<double>(fields[8], "q95");
        r.q99_abs_err = parse_number<double>(fields[9], "q99");
        r.q999_abs_err = parse_number<double>(fields[10], "q999");
        r.mean_cost = parse_number<double>(fields[11], "mean_cost");
        reports.push_back(std::move(r));
    }
    return reports;
}

} // namespace coupledmc
