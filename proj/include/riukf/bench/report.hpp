#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riukf/bench/satellite.hpp"
#include "riukf/bench/scalar.hpp"
#include "riukf/error.hpp"
#include "riukf/version.hpp"

namespace riukf::bench {

inline constexpr const char* kTrajectoryHeader =
    "run_id,k,filter,true_w,true_x,true_y,true_z,est_w,est_x,est_y,est_z,geodesic_error,min_cov_eigenvalue";
inline constexpr const char* kSummaryHeader =
    "filter,rmse_x1e-6,runs_completed,runs_failed,failure_step_min,failure_step_max";
inline constexpr const char* kScalarHeader = "k,kf_mean,kf_cov,riadukf_mean,riadukf_cov,ukfrm_mean,ukfrm_cov";

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite values.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace detail {

inline void write_quaternion(std::ostream& out, const Quaternion& q) {
    for (int i = 0; i < 4; ++i) out << ',' << format_double(q(i));
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::ContractViolation, "cannot write " + path.string());
    return out;
}

inline nlohmann::json config_json(const SatelliteConfig& cfg) {
    nlohmann::json j;
    j["dt"] = cfg.dt;
    j["duration"] = cfg.duration;
    j["steps"] = cfg.steps();
    j["num_runs"] = cfg.num_runs;
    j["seed"] = cfg.seed;
    j["q_scale"] = cfg.q_scale;
    j["r_scale"] = cfg.r_scale;
    j["q0"] = std::vector<double>(cfg.q0.data(), cfg.q0.data() + 4);
    std::vector<double> p0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) p0.push_back(cfg.P0(r, c));
    j["p0"] = p0;
    j["rho"] = cfg.rho;
    j["omega_units"] = cfg.omega_units == AngleUnits::Degrees ? "degrees" : "radians";
    j["threads"] = cfg.threads;
    std::vector<std::string> names;
    for (const auto& f : cfg.filters) names.push_back(f.name());
    j["filters"] = names;
    j["initial_estimate"] = "true q0";
    return j;
}

inline void write_manifest(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

}  // namespace detail

inline void write_trajectories(std::ostream& out, const SatelliteReport& r) {
    out << kTrajectoryHeader << '\n';
    for (const auto& row : r.trajectory) {
        out << row.run_id << ',' << row.k << ',' << r.filter_names[static_cast<std::size_t>(row.filter)];
        detail::write_quaternion(out, row.truth);
        detail::write_quaternion(out, row.estimate);
        out << ',' << format_double(row.error) << ',' << format_double(row.min_eig) << '\n';
    }
}

inline void write_summary(std::ostream& out, const SatelliteReport& r) {
    out << kSummaryHeader << '\n';
    auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    for (const auto& s : r.summary) {
        out << s.name << ',' << format_double(s.rmse * 1e6) << ',' << s.completed << ',' << s.failed << ','
            << opt(s.failure_step_min) << ',' << opt(s.failure_step_max) << '\n';
    }
}

inline void write_scalar(std::ostream& out, const ScalarReport& r) {
    out << kScalarHeader << '\n';
    for (const auto& row : r.rows) {
        out << row.k << ',' << format_double(row.kf_mean) << ',' << format_double(row.kf_cov) << ','
            << format_double(row.riadukf_mean) << ',' << format_double(row.riadukf_cov) << ','
            << format_double(row.ukfrm_mean) << ',' << format_double(row.ukfrm_cov) << '\n';
    }
}

/// Writes trajectories.csv, summary.csv and manifest.json into `dir`.
inline void emit(const SatelliteReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = detail::open_output(dir / "trajectories.csv");
        write_trajectories(out, r);
    }
    {
        auto out = detail::open_output(dir / "summary.csv");
        write_summary(out, r);
    }
    nlohmann::json j;
    j["benchmark"] = "satellite";
    j["version"] = kVersion;
    j["config"] = detail::config_json(r.config);
    j["seed"] = r.config.seed;
    j["rmse_definition"] = "per-run sqrt(mean_k dist^2(x_hat_k, x_k)), averaged over completed runs, x1e-6";
    j["wall_seconds"] = r.wall_seconds;
    j["contract_violation"] = r.contract_violation();
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& run : r.runs) {
        if (!run.failure_step) continue;
        failures.push_back({{"run_id", run.run_id},
                            {"filter", r.filter_names[static_cast<std::size_t>(run.filter)]},
                            {"step", *run.failure_step},
                            {"kind", to_string(*run.failure_kind)}});
    }
    j["failures"] = failures;
    detail::write_manifest(dir / "manifest.json", j);
}

/// Writes scalar.csv and manifest.json into `dir`.
inline void emit(const ScalarReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = detail::open_output(dir / "scalar.csv");
        write_scalar(out, r);
    }
    nlohmann::json j;
    j["benchmark"] = "scalar";
    j["version"] = kVersion;
    j["steps"] = r.steps;
    j["max_kf_riadukf_deviation"] = r.max_kf_riadukf_deviation();
    j["ukfrm_failure_step"] = r.ukfrm_failure_step ? nlohmann::json(*r.ukfrm_failure_step) : nlohmann::json();
    j["ukfrm_failure_kind"] =
        r.ukfrm_failure_kind ? nlohmann::json(to_string(*r.ukfrm_failure_kind)) : nlohmann::json();
    j["contract_violation"] = r.contract_violation.has_value();
    detail::write_manifest(dir / "manifest.json", j);
}

}  // namespace riukf::bench
