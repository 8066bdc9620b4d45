// Benchmark and simulation front end.
//
//   riukf bench satellite --config <file> --out <dir>
//   riukf bench scalar --steps N --out <dir>
//   riukf simulate --config <file> [--out <file>]
//
// Exit codes: 0 success, 1 usage or I/O error, 2 filter-contract violation
// (any failure other than the expected UKFRM positiveness loss).

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "riukf/bench/config.hpp"
#include "riukf/bench/report.hpp"
#include "riukf/bench/satellite.hpp"
#include "riukf/bench/scalar.hpp"
#include "riukf/riukf.hpp"

namespace {

constexpr int kExitContract = 2;

int bench_satellite(const std::string& config_path, const std::string& out_dir) {
    const auto cfg = riukf::bench::load_config(config_path);
    const auto report = riukf::bench::run_satellite(cfg);
    riukf::bench::emit(report, out_dir);
    riukf::bench::write_summary(std::cout, report);
    std::cout << "wall_seconds," << riukf::bench::format_double(report.wall_seconds) << '\n';
    if (report.contract_violation()) {
        for (const auto& run : report.runs) {
            if (!run.failure_step) continue;
            if (cfg.filters[static_cast<std::size_t>(run.filter)].type == riukf::bench::FilterSpec::Type::Ukfrm &&
                run.failure_kind == riukf::ErrorKind::PositivenessLoss)
                continue;
            std::cerr << "contract violation: run " << run.run_id << ' '
                      << report.filter_names[static_cast<std::size_t>(run.filter)] << ": " << run.failure_message
                      << '\n';
        }
        return kExitContract;
    }
    return 0;
}

int bench_scalar(int steps, const std::string& out_dir) {
    const auto report = riukf::bench::run_scalar(steps);
    riukf::bench::emit(report, out_dir);
    riukf::bench::write_scalar(std::cout, report);
    if (report.ukfrm_failure_step) {
        std::cout << "ukfrm failed at step " << *report.ukfrm_failure_step << ": " << report.ukfrm_failure_message
                  << '\n';
    }
    const bool ukfrm_unexpected =
        report.ukfrm_failure_kind && *report.ukfrm_failure_kind != riukf::ErrorKind::PositivenessLoss;
    if (report.contract_violation || ukfrm_unexpected) {
        std::cerr << "contract violation: "
                  << (report.contract_violation ? *report.contract_violation : report.ukfrm_failure_message) << '\n';
        return kExitContract;
    }
    return 0;
}

/// Samples the additive attitude model (process and measurement noise) and
/// writes k, true state and measurement quaternions as CSV.
int simulate(const std::string& config_path, const std::string& out_path) {
    using riukf::bench::format_double;
    const auto cfg = riukf::bench::load_config(config_path);
    const auto sys = riukf::bench::satellite_additive_system(cfg);
    const auto traj = riukf::simulate(sys, riukf::bench::to_point(cfg.q0), cfg.steps(), cfg.seed);

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << "k,x_w,x_x,x_y,x_z,y_w,y_x,y_y,y_z\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        out << k;
        for (int i = 0; i < 4; ++i) out << ',' << format_double(traj.states[k].coords()(i));
        for (int i = 0; i < 4; ++i) {
            out << ',';
            if (k > 0) out << format_double(traj.measurements[k - 1].coords()(i));
        }
        out << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Riemannian unscented Kalman filter benchmarks"};
    app.require_subcommand(1);

    auto* bench = app.add_subcommand("bench", "Run a benchmark");
    bench->require_subcommand(1);

    std::string sat_config, sat_out;
    auto* satellite = bench->add_subcommand("satellite", "Monte-Carlo attitude tracking comparison");
    satellite->add_option("--config", sat_config, "key=value configuration file")->required();
    satellite->add_option("--out", sat_out, "output directory")->required();

    int scalar_steps = 20;
    std::string scalar_out;
    auto* scalar = bench->add_subcommand("scalar", "Scalar divergence example");
    scalar->add_option("--steps", scalar_steps, "number of filter steps")->check(CLI::PositiveNumber);
    scalar->add_option("--out", scalar_out, "output directory")->required();

    std::string sim_config, sim_out;
    auto* sim = app.add_subcommand("simulate", "Sample one trajectory of the attitude model");
    sim->add_option("--config", sim_config, "key=value configuration file")->required();
    sim->add_option("--out", sim_out, "output CSV file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*satellite) return bench_satellite(sat_config, sat_out);
        if (*scalar) return bench_scalar(scalar_steps, scalar_out);
        if (*sim) return simulate(sim_config, sim_out);
    } catch (const riukf::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == riukf::ErrorKind::ContractViolation ? 1 : kExitContract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
