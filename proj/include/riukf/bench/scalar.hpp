#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "riukf/filters.hpp"
#include "riukf/manifold.hpp"
#include "riukf/sigma.hpp"

namespace riukf::bench {

/// x0 ~ (1, 1), x_k = x_{k-1} + w, y_k = 1 - x_k + v, Q = R = 1, every observation y = 1.
inline LinearGaussianModel scalar_model() {
    return LinearGaussianModel{Matrix::Identity(1, 1), Vector::Zero(1), -Matrix::Identity(1, 1),
                               Vector::Ones(1),        Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
}

struct ScalarRow {
    int k;
    double kf_mean, kf_cov;
    double riadukf_mean, riadukf_cov;
    /// NaN once UKFRM has failed.
    double ukfrm_mean, ukfrm_cov;
};

struct ScalarReport {
    int steps = 0;
    std::vector<ScalarRow> rows;
    std::optional<int> ukfrm_failure_step;
    std::optional<ErrorKind> ukfrm_failure_kind;
    std::string ukfrm_failure_message;
    /// Set when the KF or RiAdUKF throws; the example must never do so.
    std::optional<std::string> contract_violation;

    double max_kf_riadukf_deviation() const {
        double d = 0.0;
        for (const auto& r : rows) {
            d = std::max({d, std::abs(r.kf_mean - r.riadukf_mean), std::abs(r.kf_cov - r.riadukf_cov)});
        }
        return d;
    }
};

/// Runs the linear KF, RiAdUKF (HoMiSy) and UKFRM side by side for `steps` steps.
inline ScalarReport run_scalar(int steps) {
    require(steps >= 1, "run_scalar: steps must be at least 1");
    const LinearGaussianModel model = scalar_model();
    const AdditiveSystem sys = model.as_additive_system();
    const Manifold r1 = sys.state_manifold;
    const Point x0(r1, Vector::Ones(1));
    const Matrix P0 = Matrix::Identity(1, 1);
    const Point y(sys.meas_manifold, Vector::Ones(1));
    const SigmaKind kind = SigmaKind::homogeneous_minimum_symmetric();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    ScalarReport report;
    report.steps = steps;
    FilterState kf{x0, P0, 0}, ri{x0, P0, 0}, rm{x0, P0, 0};
    bool ukfrm_alive = true;
    for (int k = 1; k <= steps; ++k) {
        try {
            kf = linear_kf_step(kf, model, y.coords());
            ri = riadukf_step(ri, sys, y, kind);
        } catch (const Error& e) {
            report.contract_violation = e.what();
            break;
        }
        ScalarRow row{k, kf.x_hat.coords()(0), kf.P_hat(0, 0), ri.x_hat.coords()(0), ri.P_hat(0, 0), nan, nan};
        if (ukfrm_alive) {
            try {
                rm = ukfrm_step(rm, sys.process.f, sys.measurement.h, y);
                row.ukfrm_mean = rm.x_hat.coords()(0);
                row.ukfrm_cov = rm.P_hat(0, 0);
            } catch (const Error& e) {
                ukfrm_alive = false;
                report.ukfrm_failure_step = e.step().value_or(k);
                report.ukfrm_failure_kind = e.kind();
                report.ukfrm_failure_message = e.what();
            }
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace riukf::bench
