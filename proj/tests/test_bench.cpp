#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "riukf/bench/config.hpp"
#include "riukf/bench/report.hpp"
#include "riukf/bench/satellite.hpp"
#include "riukf/bench/scalar.hpp"
#include "test_support.hpp"

namespace riukf::bench {
namespace {

using riukf::testing::Gen;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("riukf_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

SatelliteConfig small_config() {
    SatelliteConfig cfg;
    cfg.duration = 2.0;
    cfg.num_runs = 3;
    return cfg;
}

// quaternions

TEST(Quaternion, IdentityIsNeutral) {
    Gen g(501);
    const Quaternion q = quat_normalized(g.gaussian(4));
    EXPECT_LE((quat_mul(quat_identity(), q) - q).norm(), 1e-15);
    EXPECT_LE((quat_mul(q, quat_identity()) - q).norm(), 1e-15);
}

TEST(Quaternion, ConjugateIsInverse) {
    Gen g(502);
    for (int t = 0; t < 20; ++t) {
        const Quaternion q = quat_normalized(g.gaussian(4));
        EXPECT_LE((quat_mul(q, quat_conj(q)) - quat_identity()).norm(), 1e-15);
    }
}

TEST(Quaternion, TwoQuarterTurnsMakeHalfTurn) {
    const Quaternion z90 = quat_from_axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi / 2);
    const Quaternion half = quat_mul(z90, z90);
    EXPECT_LE((half - Quaternion(0, 0, 0, 1)).norm(), 1e-15);
}

TEST(Quaternion, ZeroRejected) { EXPECT_THROW(quat_normalized(Quaternion::Zero()), Error); }

// truth generation

TEST(Truth, ZeroRateIsConstant) {
    const Quaternion q0 = default_initial_attitude();
    const auto qs = integrate_attitude(q0, [](double) { return Eigen::Vector3d::Zero(); }, 0.1, 50);
    ASSERT_EQ(qs.size(), 51u);
    for (const auto& q : qs) EXPECT_EQ(q, q0);
}

TEST(Truth, ConstantRateHalfTurn) {
    const double w = 0.03, T = std::numbers::pi / w;
    const int steps = 1000;
    const auto qs = integrate_attitude(quat_identity(), [&](double) { return Eigen::Vector3d(w, 0, 0); }, T / steps, steps);
    EXPECT_LE((qs.back() - Quaternion(0, 1, 0, 0)).norm(), 1e-6);
}

TEST(Truth, UnitNormAndLength) {
    const SatelliteConfig cfg;
    const auto qs = gen_truth(cfg);
    ASSERT_EQ(static_cast<int>(qs.size()), cfg.steps() + 1);
    EXPECT_EQ(qs.front(), cfg.q0);
    for (const auto& q : qs) EXPECT_NEAR(q.norm(), 1.0, 1e-12);
}

TEST(Truth, InitialAttitudeIsUnit) { EXPECT_NEAR(default_initial_attitude().norm(), 1.0, 1e-15); }

TEST(Truth, AngularVelocityProfile) {
    EXPECT_LE((angular_velocity(0.0) - Eigen::Vector3d(0, 0.03 * std::sin(-300 * std::numbers::pi / 180),
                                                       0.03 * std::sin(-600 * std::numbers::pi / 180)))
                  .norm(),
              1e-17);
    // degree mode: pi t / 600 degrees reaches 90 degrees at t = 54000 / pi
    EXPECT_NEAR(angular_velocity(54000.0 / std::numbers::pi)(0), 0.03, 1e-15);
    EXPECT_NEAR(angular_velocity(300.0, AngleUnits::Radians)(0), 0.03, 1e-15);
}

// filter names

TEST(FilterSpec, DefaultOrder) {
    std::vector<std::string> names;
    for (const auto& f : default_filters()) names.push_back(f.name());
    const std::vector<std::string> expected{"RiMiAuUKF", "RiRhoMiAuUKF", "RiMiSyAuUKF", "RiHoMiSyAuUKF", "RiMiAdUKF",
                                            "RiRhoMiAdUKF", "RiMiSyAdUKF", "RiHoMiSyAdUKF", "UKFRM"};
    EXPECT_EQ(names, expected);
}

// config parsing

TEST(Config, DefaultsWhenEmpty) {
    const SatelliteConfig cfg = parse_config("# nothing\n\n");
    EXPECT_EQ(cfg.num_runs, 100);
    EXPECT_EQ(cfg.steps(), 200);
    EXPECT_EQ(cfg.filters.size(), 9u);
}

TEST(Config, ParsesAllKeys) {
    const SatelliteConfig cfg = parse_config(
        "dt = 0.05\nduration=1\nnum_runs = 4  # trailing comment\nseed = 99\nq_scale = 0\nr_scale = 1e-12\n"
        "rho = 2\nthreads = 3\nq0 = 1, 0, 0, 0\np0 = 1e-4\nfilters = RiMiAdUKF, RiRhoMiAuUKF, UKFRM\n"
        "omega_units = radians\n");
    EXPECT_EQ(cfg.dt, 0.05);
    EXPECT_EQ(cfg.steps(), 20);
    EXPECT_EQ(cfg.num_runs, 4);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.q_scale, 0.0);
    EXPECT_EQ(cfg.r_scale, 1e-12);
    EXPECT_EQ(cfg.threads, 3);
    EXPECT_EQ(cfg.q0, quat_identity());
    EXPECT_EQ(cfg.P0, 1e-4 * Matrix::Identity(3, 3));
    EXPECT_EQ(cfg.omega_units, AngleUnits::Radians);
    ASSERT_EQ(cfg.filters.size(), 3u);
    EXPECT_EQ(cfg.filters[1].name(), "RiRhoMiAuUKF");
    EXPECT_EQ(cfg.filters[1].kind.rho, 2.0);
    EXPECT_EQ(cfg.filters[2].type, FilterSpec::Type::Ukfrm);
}

TEST(Config, FullCovariance) {
    const SatelliteConfig cfg = parse_config("p0 = 2,1,0, 1,2,0, 0,0,1\n");
    EXPECT_EQ(cfg.P0(0, 1), 1.0);
    EXPECT_EQ(cfg.P0(2, 2), 1.0);
}

TEST(Config, ErrorsNameTheLine) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"dt = -1\n", "dt must be positive"},
        {"dt\n", "config line 1"},
        {"\nbogus = 1\n", "config line 2: unknown key 'bogus'"},
        {"num_runs = 2.5\n", "invalid value"},
        {"q0 = 1, 0, 0\n", "q0 needs 4 numbers"},
        {"q0 = 2, 0, 0, 0\n", "unit quaternion"},
        {"p0 = 1, 2\n", "p0 needs 1 or 9 numbers"},
        {"p0 = -1\n", "PSD"},
        {"filters = KF\n", "unknown filter 'KF'"},
        {"omega_units = gradians\n", "degrees or radians"},
        {"seed =\n", "missing value"},
        {"threads = 0\n", "threads"},
    };
    for (const auto& [text, needle] : cases) {
        try {
            parse_config(text);
            ADD_FAILURE() << "accepted: " << text;
        } catch (const Error& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    }
}

TEST(Config, ShippedExampleMatchesDefaults) {
    const SatelliteConfig cfg = load_config(RIUKF_CONFIG_DIR "/satellite.cfg");
    const SatelliteConfig def;
    EXPECT_EQ(cfg.dt, def.dt);
    EXPECT_EQ(cfg.steps(), def.steps());
    EXPECT_EQ(cfg.num_runs, def.num_runs);
    EXPECT_EQ(cfg.seed, def.seed);
    EXPECT_EQ(cfg.q_scale, def.q_scale);
    EXPECT_EQ(cfg.r_scale, def.r_scale);
    EXPECT_EQ(cfg.q0, def.q0);
    EXPECT_EQ(cfg.P0, def.P0);
    EXPECT_EQ(cfg.rho, def.rho);
    EXPECT_EQ(cfg.filters.size(), def.filters.size());
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/riukf.cfg"), Error); }

// report formatting

TEST(Report, FormatDouble) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0 / 3.0), "0.3333333333333333");
    EXPECT_EQ(format_double(-2.0), "-2");
    EXPECT_EQ(format_double(1e-20), "1e-20");
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(format_double(-HUGE_VAL), "-inf");
    EXPECT_EQ(std::stod(format_double(0.0150973123456789)), 0.0150973123456789);
}

TEST(Report, EmptyReportHasHeadersOnly) {
    SatelliteConfig cfg = small_config();
    cfg.num_runs = 0;
    const SatelliteReport r = run_satellite(cfg);
    std::ostringstream t, s;
    write_trajectories(t, r);
    write_summary(s, r);
    EXPECT_EQ(t.str(), std::string(kTrajectoryHeader) + "\n");
    EXPECT_EQ(s.str().substr(0, s.str().find('\n')), kSummaryHeader);
    EXPECT_FALSE(r.contract_violation());
}

TEST(Report, EmitWritesFilesAndManifest) {
    const auto dir = scratch("emit");
    const SatelliteReport r = run_satellite(small_config());
    emit(r, dir);
    const std::string traj = slurp(dir / "trajectories.csv");
    EXPECT_EQ(traj.substr(0, traj.find('\n')), kTrajectoryHeader);
    // 3 runs x 20 steps x 8 RiUKF rows, plus one UKFRM row per run before it fails
    EXPECT_EQ(std::count(traj.begin(), traj.end(), '\n'), 1 + 3 * 20 * 8 + 3);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["seed"], 1);
    EXPECT_EQ(manifest["contract_violation"], false);
    EXPECT_EQ(manifest["failures"].size(), 3u);
    EXPECT_EQ(manifest["failures"][0]["kind"], "positiveness-loss");
    std::filesystem::remove_all(dir);
}

// satellite benchmark

TEST(Satellite, DeterministicBytes) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    emit(run_satellite(small_config()), a);
    emit(run_satellite(small_config()), b);
    for (const char* f : {"trajectories.csv", "summary.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

TEST(Satellite, ThreadCountDoesNotChangeResults) {
    SatelliteConfig one = small_config(), many = small_config();
    one.num_runs = many.num_runs = 5;
    many.threads = 3;
    std::ostringstream a, b;
    write_trajectories(a, run_satellite(one));
    write_trajectories(b, run_satellite(many));
    EXPECT_EQ(a.str(), b.str());
}

TEST(Satellite, MeasurementsReplayable) {
    const SatelliteConfig cfg = small_config();
    const auto truth = gen_truth(cfg);
    const auto a = synthesize_measurements(cfg, truth, 2), b = synthesize_measurements(cfg, truth, 2);
    const auto c = synthesize_measurements(cfg, truth, 3);
    ASSERT_EQ(static_cast<int>(a.size()), cfg.steps());
    for (size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k], b[k]);
        EXPECT_NE(a[k], c[k]);
        EXPECT_NEAR(a[k].norm(), 1.0, 1e-12);
    }
}

TEST(Satellite, NoiselessTrackingIsAccurate) {
    SatelliteConfig cfg = small_config();
    // R = 0 would make the second innovation singular
    cfg.q_scale = 0.0;
    cfg.r_scale = 1e-20;
    cfg.filters = {FilterSpec::additive(SigmaKind::minimum()), FilterSpec::augmented(SigmaKind::minimum())};
    const SatelliteReport r = run_satellite(cfg);
    for (const auto& s : r.summary) {
        EXPECT_EQ(s.failed, 0);
        EXPECT_LT(s.rmse, 1e-5) << s.name;
    }
}

TEST(Satellite, UkfrmFailureIsNotAViolation) {
    const SatelliteReport r = run_satellite(small_config());
    const FilterSummary& ukfrm = r.summary.back();
    EXPECT_TRUE(ukfrm.expected_to_fail);
    EXPECT_EQ(ukfrm.failed, 3);
    EXPECT_EQ(ukfrm.failure_step_min, 2);
    EXPECT_EQ(ukfrm.failure_step_max, 2);
    EXPECT_FALSE(r.contract_violation());
    for (size_t i = 0; i + 1 < r.summary.size(); ++i) EXPECT_EQ(r.summary[i].completed, 3);
}

TEST(Satellite, OversizedPriorIsAViolation) {
    SatelliteConfig cfg = small_config();
    cfg.num_runs = 1;
    cfg.P0 = 10.0 * Matrix::Identity(3, 3);
    cfg.filters = {FilterSpec::additive(SigmaKind::homogeneous_minimum_symmetric())};
    const SatelliteReport r = run_satellite(cfg);
    EXPECT_TRUE(r.contract_violation());
    EXPECT_EQ(r.runs[0].failure_kind, ErrorKind::SigmaOutOfBall);
    EXPECT_EQ(r.runs[0].failure_step, 1);
}

TEST(Satellite, HemisphereAlignment) {
    const Point y = to_point(default_initial_attitude());
    const Point flipped = to_point(-default_initial_attitude());
    EXPECT_EQ(align_hemisphere(flipped, y).coords(), y.coords());
    EXPECT_EQ(align_hemisphere(y, y).coords(), y.coords());
}

// scalar benchmark

TEST(Scalar, ReportValues) {
    const ScalarReport r = run_scalar(5);
    ASSERT_EQ(r.rows.size(), 5u);
    EXPECT_NEAR(r.rows[0].kf_mean, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.rows[0].kf_cov, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.rows[1].kf_mean, 0.125, 1e-15);
    EXPECT_NEAR(r.rows[1].kf_cov, 0.625, 1e-15);
    EXPECT_LE(r.max_kf_riadukf_deviation(), 1e-12);
    EXPECT_NEAR(r.rows[0].ukfrm_cov, 0.0, 1e-15);
    EXPECT_TRUE(std::isnan(r.rows[1].ukfrm_cov));
    EXPECT_EQ(r.ukfrm_failure_step, 2);
    EXPECT_EQ(r.ukfrm_failure_kind, ErrorKind::PositivenessLoss);
    EXPECT_FALSE(r.contract_violation.has_value());
}

TEST(Scalar, EmitCsv) {
    const auto dir = scratch("scalar");
    emit(run_scalar(3), dir);
    const std::string csv = slurp(dir / "scalar.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kScalarHeader);
    EXPECT_NE(csv.find("\n2,0.125,"), std::string::npos);
    EXPECT_NE(csv.find(",nan,nan\n"), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(Scalar, RejectsZeroSteps) { EXPECT_THROW(run_scalar(0), Error); }

}  // namespace
}  // namespace riukf::bench
