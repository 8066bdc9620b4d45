#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "riukf/bench/quaternion.hpp"
#include "riukf/filters.hpp"
#include "riukf/manifold.hpp"
#include "riukf/sigma.hpp"
#include "riukf/systems.hpp"

namespace riukf::bench {

enum class AngleUnits { Degrees, Radians };

/// One filter of the comparison: an additive or augmented RiUKF with a given sigma
/// representation, or the noise-free UKFRM baseline.
struct FilterSpec {
    enum class Type { Additive, Augmented, Ukfrm };

    Type type = Type::Additive;
    SigmaKind kind;

    static FilterSpec additive(SigmaKind kind) { return {Type::Additive, std::move(kind)}; }
    static FilterSpec augmented(SigmaKind kind) { return {Type::Augmented, std::move(kind)}; }
    static FilterSpec ukfrm() { return {Type::Ukfrm, SigmaKind::homogeneous_minimum_symmetric()}; }

    std::string name() const {
        switch (type) {
            case Type::Additive: return "Ri" + kind.tag() + "AdUKF";
            case Type::Augmented: return "Ri" + kind.tag() + "AuUKF";
            case Type::Ukfrm: return "UKFRM";
        }
        return "?";
    }
};

/// The four sigma families with the bench defaults (rho = 0.5, ramp pair weights).
inline std::vector<SigmaKind> bench_sigma_kinds(double rho = 0.5) {
    return {SigmaKind::minimum(), SigmaKind::rho_minimum(rho), SigmaKind::minimum_symmetric(),
            SigmaKind::homogeneous_minimum_symmetric()};
}

/// Augmented row, additive row, then UKFRM.
inline std::vector<FilterSpec> default_filters(double rho = 0.5) {
    std::vector<FilterSpec> out;
    for (const auto& k : bench_sigma_kinds(rho)) out.push_back(FilterSpec::augmented(k));
    for (const auto& k : bench_sigma_kinds(rho)) out.push_back(FilterSpec::additive(k));
    out.push_back(FilterSpec::ukfrm());
    return out;
}

inline Quaternion default_initial_attitude() {
    const double eta = 0.96, a = 0.13, b = 0.19;
    return Quaternion(eta, a, b, std::sqrt(1.0 - eta * eta - a * a - b * b));
}

struct SatelliteConfig {
    double dt = 0.1;
    double duration = 20.0;
    int num_runs = 100;
    std::uint64_t seed = 1;
    double q_scale = std::pow(0.31236e-6, 2);
    double r_scale = std::pow(0.5 * std::numbers::pi / 180.0 * 1e-6, 2);
    Quaternion q0 = default_initial_attitude();
    Matrix P0 = 1e-6 * Matrix::Identity(3, 3);
    double rho = 0.5;
    std::vector<FilterSpec> filters = default_filters(0.5);
    AngleUnits omega_units = AngleUnits::Degrees;
    int threads = 1;

    int steps() const { return static_cast<int>(std::lround(duration / dt)); }

    void validate() const {
        require(dt > 0.0, "dt must be positive");
        require(duration >= dt, "duration must be at least dt");
        require(num_runs >= 0, "num_runs must be non-negative");
        require(std::abs(q0.norm() - 1.0) <= 1e-12, "q0 must be a unit quaternion");
        require(q_scale >= 0.0 && r_scale >= 0.0, "noise scales must be non-negative");
        require_square(P0, 3, "P0");
        require(is_psd(P0), "P0 must be PSD");
        require(threads >= 1, "threads must be at least 1");
    }
};

/// Angular velocity profile: 0.03 sin(pi t/600 - phase) with phases 0, 300, 600 degrees.
/// In degree mode the time term pi t/600 is read as degrees; radian mode reads it as
/// radians (phases stay in degrees).
inline Eigen::Vector3d angular_velocity(double t, AngleUnits units = AngleUnits::Degrees) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double base = std::numbers::pi * t / 600.0;
    const double arg = units == AngleUnits::Degrees ? base * deg : base;
    return Eigen::Vector3d(0.03 * std::sin(arg), 0.03 * std::sin(arg - 300.0 * deg),
                           0.03 * std::sin(arg - 600.0 * deg));
}

using OmegaFn = std::function<Eigen::Vector3d(double)>;

/// RK4 integration of q' = 1/2 [0, w(t)] (x) q, renormalizing after every step.
/// Returns steps+1 attitudes, the first being q0.
inline std::vector<Quaternion> integrate_attitude(const Quaternion& q0, const OmegaFn& omega, double dt, int steps) {
    auto rate = [&](double t, const Quaternion& q) {
        Quaternion w;
        w << 0.0, omega(t);
        return Quaternion(0.5 * quat_mul_raw(w, q));
    };
    std::vector<Quaternion> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(q0);
    Quaternion q = q0;
    for (int i = 0; i < steps; ++i) {
        const double t = i * dt;
        const Quaternion k1 = rate(t, q);
        const Quaternion k2 = rate(t + 0.5 * dt, q + 0.5 * dt * k1);
        const Quaternion k3 = rate(t + 0.5 * dt, q + 0.5 * dt * k2);
        const Quaternion k4 = rate(t + dt, q + dt * k3);
        q = quat_normalized(q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        out.push_back(q);
    }
    return out;
}

inline std::vector<Quaternion> gen_truth(const SatelliteConfig& cfg) {
    cfg.validate();
    return integrate_attitude(
        cfg.q0, [units = cfg.omega_units](double t) { return angular_velocity(t, units); }, cfg.dt, cfg.steps());
}

inline const Manifold& s3() {
    static const Manifold m = Manifold::sphere(3);
    return m;
}

inline Point to_point(const Quaternion& q) { return Point::normalized(s3(), q); }

/// Process map f_k(x) = [cos th, w^T/|w| sin th]^T (x) x with th = |w(t)| dt/2 and
/// t = (k - 1/2) dt, the midpoint of the step.
inline Point attitude_step(const SatelliteConfig& cfg, int k, const Point& x) {
    const Eigen::Vector3d w = angular_velocity((k - 0.5) * cfg.dt, cfg.omega_units);
    const double wn = w.norm();
    if (wn == 0.0) return x;
    const double theta = wn * cfg.dt / 2.0;
    Quaternion dq;
    dq << std::cos(theta), (w / wn) * std::sin(theta);
    return to_point(quat_mul(dq, x.coords()));
}

/// Additive model on S^3 with an identity measurement map.
inline AdditiveSystem satellite_additive_system(const SatelliteConfig& cfg) {
    return AdditiveSystem{
        s3(), s3(),
        AdditiveProcess{[cfg](int k, const Point& x) { return attitude_step(cfg, k, x); },
                        NoiseSpec::centered(cfg.q_scale * Matrix::Identity(3, 3))},
        AdditiveMeasurement::identity_map(NoiseSpec::centered(cfg.r_scale * Matrix::Identity(3, 3)))};
}

/// The same model in general form with R^3-valued noises entering through exp.
inline GeneralSystem satellite_general_system(const SatelliteConfig& cfg) {
    const Manifold r3 = Manifold::euclidean(3);
    const Point zero(r3, Vector::Zero(3));
    return GeneralSystem{
        s3(), s3(),
        GeneralProcess{[cfg](int k, const Point& x, const Point& w) {
                           return exp_coords(attitude_step(cfg, k, x), w.coords());
                       },
                       RandomPointEstimate{zero, cfg.q_scale * Matrix::Identity(3, 3)}},
        GeneralMeasurement{[](int, const Point& x, const Point& v) { return exp_coords(x, v.coords()); },
                           RandomPointEstimate{zero, cfg.r_scale * Matrix::Identity(3, 3)}}};
}

/// Flips the observed quaternion into the hemisphere of the prediction.
inline Point align_hemisphere(const Point& y, const Point& y_pred) {
    if (y.coords().dot(y_pred.coords()) >= 0.0) return y;
    return Point(y.manifold(), -y.coords());
}

/// Measurements y_k = exp_{q_k}(v), v ~ N(0, R) in tangent_basis(q_k), for k = 1..K.
inline std::vector<Quaternion> synthesize_measurements(const SatelliteConfig& cfg,
                                                       const std::vector<Quaternion>& truth, int run_id) {
    auto rng = detail::make_stream(cfg.seed, 0x5a7e0000ULL + static_cast<std::uint64_t>(run_id));
    const NoiseSpec noise = NoiseSpec::centered(cfg.r_scale * Matrix::Identity(3, 3));
    std::vector<Quaternion> out;
    out.reserve(truth.size() - 1);
    for (std::size_t k = 1; k < truth.size(); ++k) {
        out.push_back(detail::sample_tangent(rng, to_point(truth[k]), noise).coords());
    }
    return out;
}

struct TrajectoryRow {
    int run_id;
    int k;
    int filter;
    Quaternion truth;
    Quaternion estimate;
    double error;
    double min_eig;
};

struct FilterRun {
    int run_id;
    int filter;
    double rmse = std::numeric_limits<double>::quiet_NaN();
    int steps_completed = 0;
    std::optional<int> failure_step;
    std::optional<ErrorKind> failure_kind;
    std::string failure_message;
};

struct FilterSummary {
    std::string name;
    bool expected_to_fail = false;
    double rmse = std::numeric_limits<double>::quiet_NaN();
    int completed = 0;
    int failed = 0;
    std::optional<int> failure_step_min;
    std::optional<int> failure_step_max;
};

struct SatelliteReport {
    SatelliteConfig config;
    std::vector<std::string> filter_names;
    std::vector<FilterRun> runs;  // run-major, then filter order
    std::vector<TrajectoryRow> trajectory;
    std::vector<FilterSummary> summary;
    double wall_seconds = 0.0;

    /// A RiUKF failed, or UKFRM failed for a reason other than positiveness loss.
    bool contract_violation() const {
        for (const auto& r : runs) {
            if (!r.failure_step) continue;
            const bool ukfrm = config.filters[static_cast<std::size_t>(r.filter)].type == FilterSpec::Type::Ukfrm;
            if (!ukfrm || r.failure_kind != ErrorKind::PositivenessLoss) return true;
        }
        return false;
    }
};

namespace detail {

struct RunOutput {
    std::vector<FilterRun> runs;
    std::vector<TrajectoryRow> rows;
};

inline RunOutput run_one(const SatelliteConfig& cfg, const std::vector<Quaternion>& truth, int run_id,
                         const AdditiveSystem& additive, const GeneralSystem& general) {
    const std::vector<Quaternion> ys = synthesize_measurements(cfg, truth, run_id);
    FilterOptions opts;
    opts.align_measurement = align_hemisphere;
    const int K = static_cast<int>(ys.size());

    RunOutput out;
    for (std::size_t fi = 0; fi < cfg.filters.size(); ++fi) {
        const FilterSpec& spec = cfg.filters[fi];
        FilterRun run{run_id, static_cast<int>(fi), std::numeric_limits<double>::quiet_NaN(), 0, {}, {}, {}};
        FilterState state{to_point(cfg.q0), cfg.P0, 0};
        double sq_sum = 0.0;
        for (int k = 1; k <= K; ++k) {
            const Point y = to_point(ys[static_cast<std::size_t>(k - 1)]);
            try {
                switch (spec.type) {
                    case FilterSpec::Type::Additive: state = riadukf_step(state, additive, y, spec.kind, opts); break;
                    case FilterSpec::Type::Augmented: state = riaukf_step(state, general, y, spec.kind, opts); break;
                    case FilterSpec::Type::Ukfrm:
                        state = ukfrm_step(state, additive.process.f, additive.measurement.h, y, opts);
                        break;
                }
            } catch (const Error& e) {
                run.failure_step = e.step().value_or(k);
                run.failure_kind = e.kind();
                run.failure_message = e.what();
                break;
            }
            const Point truth_k = to_point(truth[static_cast<std::size_t>(k)]);
            const double err = distance(state.x_hat, truth_k);
            sq_sum += err * err;
            run.steps_completed = k;
            out.rows.push_back(TrajectoryRow{run_id, k, static_cast<int>(fi), truth[static_cast<std::size_t>(k)],
                                             state.x_hat.coords(), err, min_eigenvalue(state.P_hat)});
        }
        if (!run.failure_step && run.steps_completed > 0) run.rmse = std::sqrt(sq_sum / run.steps_completed);
        out.runs.push_back(std::move(run));
    }
    return out;
}

}  // namespace detail

/// Monte-Carlo comparison on the attitude-tracking benchmark. Every filter sees the
/// same measurements within a run; runs use independent seeded streams and are
/// aggregated in run order, so the report does not depend on `threads`.
inline SatelliteReport run_satellite(const SatelliteConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<Quaternion> truth = gen_truth(cfg);
    const AdditiveSystem additive = satellite_additive_system(cfg);
    const GeneralSystem general = satellite_general_system(cfg);

    std::vector<detail::RunOutput> per_run(static_cast<std::size_t>(cfg.num_runs));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < cfg.num_runs; r = next++) {
            per_run[static_cast<std::size_t>(r)] = detail::run_one(cfg, truth, r, additive, general);
        }
    };
    if (cfg.threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < cfg.threads; ++i) pool.emplace_back(worker);
    }

    SatelliteReport report;
    report.config = cfg;
    for (const auto& f : cfg.filters) report.filter_names.push_back(f.name());
    for (auto& r : per_run) {
        report.runs.insert(report.runs.end(), r.runs.begin(), r.runs.end());
        report.trajectory.insert(report.trajectory.end(), r.rows.begin(), r.rows.end());
    }
    for (std::size_t fi = 0; fi < cfg.filters.size(); ++fi) {
        FilterSummary s;
        s.name = report.filter_names[fi];
        s.expected_to_fail = cfg.filters[fi].type == FilterSpec::Type::Ukfrm;
        double sum = 0.0;
        for (const auto& r : report.runs) {
            if (r.filter != static_cast<int>(fi)) continue;
            if (r.failure_step) {
                ++s.failed;
                const int step = *r.failure_step;
                s.failure_step_min = s.failure_step_min ? std::min(*s.failure_step_min, step) : step;
                s.failure_step_max = s.failure_step_max ? std::max(*s.failure_step_max, step) : step;
            } else {
                ++s.completed;
                sum += r.rmse;
            }
        }
        if (s.completed > 0) s.rmse = sum / s.completed;
        report.summary.push_back(std::move(s));
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace riukf::bench
