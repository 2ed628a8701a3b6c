#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coupledmc/model.hpp"
#include "coupledmc/rng.hpp"

namespace coupledmc {

enum class Preset { figure1, figure2, figure3, figure4, table1, table2, custom };

Preset parse_preset(std::string_view name);
std::string_view to_string(Preset preset) noexcept;

/// Estimators the harness can repeat. The enum value is the method id used in
/// stream indices, so the order is frozen.
enum class Method : std::uint8_t {
    snis = 0,
    enis = 1,
    mom_snis = 2,
    meeting_time = 3,
    uis = 4,
    suis = 5,
    mom_suis = 6,
    mn_suis = 7,
    lv_suis = 8,
};

Method parse_method(std::string_view name);
std::string_view to_string(Method method) noexcept;

struct ExperimentConfig {
    Preset preset = Preset::figure1;
    std::vector<double> p_values;        // tail orders; the model is Exponential with k = p/(p-1)
    std::vector<std::size_t> n_grid;     // particles per basic estimator
    std::vector<Method> methods;         // only read for the custom preset
    std::uint64_t repeats = 0;
    double delta = 0.05;
    std::size_t per_block = 4;           // robust SUIS estimators per block (M)
    std::uint64_t master_seed = 0;
    int workers = 1;
    std::string out_path;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

/// Preset grid with its default scale (1e5 repeats for figures, 1e4 for tables).
ExperimentConfig preset_config(Preset preset);

/// Reads `key = value` lines (`#` starts a comment, lists are comma-separated)
/// on top of `base`. Unknown keys and malformed values throw std::invalid_argument.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base);

struct EstimatorReport {
    std::string method;
    double p = 0.0;
    std::uint64_t n = 0;
    std::uint64_t repeats = 0;
    double mean = 0.0;
    double mse = 0.0;
    double bias = 0.0;
    double var = 0.0;
    double q95_abs_err = 0.0;
    double q99_abs_err = 0.0;
    double q999_abs_err = 0.0;
    double mean_cost = 0.0;
};

/// Summary of per-repeat values against `truth`. var is the population
/// variance (two-pass), mse = var + bias^2, quantiles are order statistics
/// |err|_(ceil(q n)).
EstimatorReport summarize(std::string method, double p, std::uint64_t n, std::span<const double> values,
                          std::span<const double> costs, double truth);

/// One (method, p, N) grid cell.
struct Cell {
    Method method;
    double p;
    std::size_t n;
    std::size_t p_index;
    std::size_t n_index;
};

std::vector<Cell> expand_cells(const ExperimentConfig& cfg);

/// method_id << 48 | p_index << 40 | n_index << 32 | repeat.
std::uint64_t stream_index(const Cell& cell, std::uint64_t repeat);

/// Outcome of a single repeat. Truncated couplings carry no value.
struct RepeatResult {
    double value = 0.0;
    double cost = 0.0;
    bool truncated = false;
};

/// Runs one repeat of `cell` on the stream derived from (master_seed, stream index).
RepeatResult run_repeat(const ExperimentConfig& cfg, const ProblemSpec& spec, const Cell& cell,
                        std::uint64_t repeat);

/// Value each method's errors are measured against: pi(f), or 1 for meeting times.
double reference_value(const ProblemSpec& spec, Method method);

class TruncationRateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs every cell, repeats spread over cfg.workers threads. Truncated runs are
/// dropped from the summary and counted; more than 0.1% truncated aborts.
std::vector<EstimatorReport> run_experiment(const ExperimentConfig& cfg);

/// Same grid evaluated on the calling thread in index order (reference path).
std::vector<EstimatorReport> run_experiment_serial(const ExperimentConfig& cfg);

inline constexpr std::string_view kCsvHeader = "method,p,n,repeats,mean,mse,bias,var,q95,q99,q999,mean_cost";

/// Header then one row per report, floats as %.10g, LF line endings.
void write_csv(std::ostream& out, std::span<const EstimatorReport> reports);
void emit_csv(std::span<const EstimatorReport> reports, const std::string& path);
std::vector<EstimatorReport> read_csv(std::istream& in);

} // namespace coupledmc
