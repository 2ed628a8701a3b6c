#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "coupledmc/harness.hpp"
#include "coupledmc/oracle.hpp"
#include "coupledmc/parallel.hpp"

using namespace coupledmc;

namespace {

int default_workers() {
    if (const char* env = std::getenv("COUPLEDMC_WORKERS")) {
        try {
            const int w = std::stoi(env);
            if (w >= 1) return w;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring COUPLEDMC_WORKERS=" << env << '\n';
    }
    return hardware_workers();
}

// Quick invariant checks; each prints one line.
int selftest() {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
        if (!ok) ++failures;
    };

    const auto kernel = oracle::build_imh_kernel(discrete_preset());
    double worst = 0.0;
    for (std::size_t i = 0; i < kernel.size; ++i) {
        for (std::size_t j = 0; j < kernel.size; ++j) {
            const double r = std::max(oracle::exact_rejection(kernel, i), oracle::exact_rejection(kernel, j));
            for (std::uint64_t t = 0; t <= 6; ++t) {
                const double expected = i == j ? 0.0 : std::pow(r, static_cast<double>(t));
                worst = std::max(worst, std::abs(oracle::exact_tv_between(kernel, i, j, t) - expected));
            }
        }
    }
    check("coupling inequality is an equality on the three-state model", worst < 1e-10);

    const double c1 = oracle::weight_moment(exponential_pair(1.5), 2.0);
    check("quadrature q(w^2) for k=1.5 equals 4/3", std::abs(c1 - 4.0 / 3.0) < 1e-8);

    ExperimentConfig cfg = preset_config(Preset::custom);
    cfg.methods = {Method::snis, Method::suis, Method::mom_suis};
    cfg.p_values = {3.0};
    cfg.n_grid = {8};
    cfg.repeats = 200;
    cfg.master_seed = 7;
    cfg.workers = 1;
    std::ostringstream serial;
    write_csv(serial, run_experiment(cfg));
    cfg.workers = 4;
    std::ostringstream parallel;
    write_csv(parallel, run_experiment(cfg));
    check("csv identical for 1 and 4 workers", serial.str() == parallel.str());

    bool identity = true;
    std::istringstream reread(serial.str());
    for (const auto& r : read_csv(reread)) {
        identity = identity && std::abs(r.mse - (r.var + r.bias * r.bias)) <= 1e-9 * std::max(r.mse, 1e-300);
    }
    check("mse = var + bias^2 on every row", identity);

    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << '\n';
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled importance sampling and unbiased IS experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a preset and write its CSV report");
    std::string preset_name = "figure1";
    std::string config_path;
    std::string out_path;
    std::uint64_t repeats = 0;
    std::uint64_t seed = 0;
    int workers = 0;
    run->add_option("--preset", preset_name, "figure1..figure4, table1, table2 or custom")->capture_default_str();
    run->add_option("--config", config_path, "key = value file applied on top of the preset");
    run->add_option("--repeats", repeats, "Independent repeats per grid cell");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--workers", workers, "Worker threads (default: COUPLEDMC_WORKERS or all cores)");
    run->add_option("--out", out_path, "CSV output path (default: stdout)");

    auto* oracle_cmd = app.add_subcommand("oracle", "Exact-computation utilities");
    oracle_cmd->require_subcommand(1);
    auto* regen = oracle_cmd->add_subcommand("regen-fixtures", "Rewrite the exact TV fixture file");
    std::string fixture_path = "tests/fixtures/exact_tv.txt";
    regen->add_option("--out", fixture_path, "Fixture path")->capture_default_str();

    auto* self = app.add_subcommand("selftest", "Run the invariant checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ExperimentConfig cfg = preset_config(parse_preset(preset_name));
            cfg.workers = default_workers();
            if (!config_path.empty()) cfg = load_config(config_path, cfg);
            if (run->count("--repeats")) cfg.repeats = repeats;
            if (run->count("--seed")) cfg.master_seed = seed;
            if (run->count("--workers")) cfg.workers = workers;
            if (run->count("--out")) cfg.out_path = out_path;
            const auto reports = run_experiment(cfg);
            if (cfg.out_path.empty()) {
                write_csv(std::cout, reports);
            } else {
                emit_csv(reports, cfg.out_path);
            }
        } else if (*regen) {
            const auto records = oracle::tv_fixture_records();
            std::ofstream out(fixture_path, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot write " + fixture_path);
            oracle::write_fixture(out, records);
            std::cout << "wrote " << records.size() << " records to " << fixture_path << '\n';
        } else if (*self) {
            return selftest();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
