#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Cholesky>

#include "riukf/error.hpp"
#include "riukf/linalg.hpp"
#include "riukf/manifold.hpp"
#include "riukf/sigma.hpp"
#include "riukf/stats.hpp"
#include "riukf/systems.hpp"
#include "riukf/unscented.hpp"

namespace riukf {

/// x_hat_{k|k} and its covariance in tangent_basis(x_hat) coordinates.
struct FilterState {
    Point x_hat;
    Matrix P_hat;
    int k = 0;
};

/// The five predicted quantities the correction consumes. P_pred is expressed at
/// x_pred, P_yy at y_pred, and P_xy uses x_pred (rows) and y_pred (columns).
struct PredictionBundle {
    Point x_pred;
    Matrix P_pred;
    Point y_pred;
    Matrix P_yy;
    Matrix P_xy;
};

struct FilterOptions {
    KarcherOptions karcher;
    /// Reuse the state-prediction dependent set as the independent set of the
    /// measurement prediction instead of regenerating it.
    bool reuse_sigma = false;
    /// P_yy with a larger spectral condition number is rejected as singular.
    double condition_limit = 1e12;
    /// Corrected covariance fails when lambda_min < -tol * (1 + trace).
    double positiveness_tol = 1e-9;
    /// Optional hook applied to the observation before log_{y_pred}; used to pick
    /// the quaternion sign nearest the prediction on S^3.
    std::function<Point(const Point& y_obs, const Point& y_pred)> align_measurement;

    UTOptions ut() const { return UTOptions{karcher}; }
};

/// G = P_xy P_yy^{-1} by an SPD solve, after checking the conditioning of P_yy.
inline Matrix kalman_gain(const Matrix& P_xy, const Matrix& P_yy, double condition_limit = 1e12) {
    require_square(P_yy, P_xy.cols(), "kalman_gain");
    const double cond = spd_condition(P_yy);
    if (!(cond <= condition_limit)) {
        fail(ErrorKind::SingularInnovation,
             "innovation covariance is singular or ill-conditioned (condition " + std::to_string(cond) + ")");
    }
    Eigen::LLT<Matrix> llt(symmetrize(P_yy));
    if (llt.info() != Eigen::Success) fail(ErrorKind::SingularInnovation, "innovation covariance is not SPD");
    return llt.solve(P_xy.transpose()).transpose();
}

/// Prediction for an identity map: x' = exp_x(noise.mean), P' = PT(P + Q).
inline RandomPointEstimate identity_shortcut(const RandomPointEstimate& prior, const NoiseSpec& noise) {
    return add_tangent_noise(prior, noise);
}

namespace detail {

struct StatePrediction {
    RandomPointEstimate estimate;
    /// Set when the prediction ran through a UT; the dependent set and its mean.
    std::optional<WeightedSet> dependent;
    std::optional<Point> dependent_mean;
};

inline Point join(const Manifold& product, const Point& a, const Point& b) {
    Vector c(product.ambient_dim());
    c << a.coords(), b.coords();
    return Point(product, std::move(c));
}

inline std::pair<Point, Point> split(const Point& p, const Manifold& first, const Manifold& second) {
    return {Point(first, p.coords().head(first.ambient_dim())), Point(second, p.coords().tail(second.ambient_dim()))};
}

inline StatePrediction predict_state(const AdditiveProcess& process, const FilterState& state, int k,
                                     const SigmaKind& kind, const FilterOptions& opts) {
    const RandomPointEstimate prior{state.x_hat, state.P_hat};
    if (process.identity) return {identity_shortcut(prior, process.noise), std::nullopt, std::nullopt};
    UTResult ut = riut1([&](const Point& x) { return process.f(k, x); }, prior, kind, opts.ut());
    RandomPointEstimate predicted = staged("process-noise", [&] {
        return add_tangent_noise(RandomPointEstimate{ut.mean_out, ut.cov_out}, process.noise);
    });
    return {std::move(predicted), std::move(ut.dependent), std::move(ut.mean_out)};
}

inline StatePrediction predict_state(const GeneralProcess& process, const FilterState& state, int k,
                                     const SigmaKind& kind, const FilterOptions& opts) {
    const Manifold& xm = state.x_hat.manifold();
    const Manifold& wm = process.noise.mean.manifold();
    const Manifold aug = Manifold::product({xm, wm});
    const RandomPointEstimate prior{join(aug, state.x_hat, process.noise.mean),
                                    block_diag(state.P_hat, process.noise.cov)};
    auto f_aug = [&](const Point& p) {
        auto [x, w] = split(p, xm, wm);
        return process.f(k, x, w);
    };
    UTResult ut = riut1(f_aug, prior, kind, opts.ut());
    RandomPointEstimate predicted{ut.mean_out, ut.cov_out};
    return {std::move(predicted), std::move(ut.dependent), std::move(ut.mean_out)};
}

/// Adds tangent measurement noise to (y*, P_yy*) and carries the y-side of P_xy
/// along when the noise mean moves the predicted measurement.
inline void add_measurement_noise(PredictionBundle& b, const NoiseSpec& noise) {
    staged("measurement-noise", [&] {
        const Point y_star = b.y_pred;
        RandomPointEstimate y = add_tangent_noise(RandomPointEstimate{y_star, b.P_yy}, noise);
        if (!noise.is_zero_mean()) b.P_xy = b.P_xy * transport_matrix(y_star, y.mean).transpose();
        b.y_pred = std::move(y.mean);
        b.P_yy = std::move(y.cov);
    });
}

inline PredictionBundle predict_measurement(const AdditiveMeasurement& meas, const StatePrediction& sp, int k,
                                            const SigmaKind& kind, const FilterOptions& opts) {
    const RandomPointEstimate& x = sp.estimate;
    PredictionBundle b{x.mean, x.cov, x.mean, x.cov, x.cov};
    if (!meas.identity) {
        UTResult ut;
        if (opts.reuse_sigma && sp.dependent) {
            ut = staged("riut2", [&] {
                return transform_set([&](const Point& p) { return meas.h(k, p); }, *sp.dependent,
                                     *sp.dependent_mean, true, opts.ut());
            });
            if (!same_point(*sp.dependent_mean, x.mean)) {
                ut.cross_cov = transport_matrix(*sp.dependent_mean, x.mean) * *ut.cross_cov;
            }
        } else {
            ut = riut2([&](const Point& p) { return meas.h(k, p); }, x, kind, opts.ut());
        }
        b.y_pred = std::move(ut.mean_out);
        b.P_yy = std::move(ut.cov_out);
        b.P_xy = std::move(*ut.cross_cov);
    }
    add_measurement_noise(b, meas.noise);
    return b;
}

inline PredictionBundle predict_measurement(const GeneralMeasurement& meas, const StatePrediction& sp, int k,
                                            const SigmaKind& kind, const FilterOptions& opts) {
    const RandomPointEstimate& x = sp.estimate;
    const Manifold& xm = x.mean.manifold();
    const Manifold& vm = meas.noise.mean.manifold();
    const Manifold aug = Manifold::product({xm, vm});
    const RandomPointEstimate prior{join(aug, x.mean, meas.noise.mean), block_diag(x.cov, meas.noise.cov)};
    auto h_aug = [&](const Point& p) {
        auto [xs, v] = split(p, xm, vm);
        return meas.h(k, xs, v);
    };
    UTResult ut = riut2(h_aug, prior, kind, opts.ut());
    return PredictionBundle{x.mean, x.cov, std::move(ut.mean_out), std::move(ut.cov_out),
                            ut.cross_cov->topRows(xm.dim())};
}

inline void check_positiveness(const Matrix& P, double tol) {
    const double lambda = min_eigenvalue(P);
    const double threshold = -tol * (1.0 + std::abs(P.trace()));
    if (!P.allFinite() || !(lambda >= threshold)) {
        fail(ErrorKind::PositivenessLoss,
             "corrected covariance has smallest eigenvalue " + std::to_string(lambda));
    }
}

}  // namespace detail

/// State correction shared by every filter:
/// G = P_xy P_yy^{-1}, x_tm = G log_{y_pred}(y), x = exp_{x_pred}(x_tm),
/// P = PT(P_pred - G P_yy G^T, x_pred, x).
inline FilterState correct(const PredictionBundle& b, const Point& y_obs, int k, const FilterOptions& opts = {}) {
    return staged("correct", [&] {
        const Point y = opts.align_measurement ? opts.align_measurement(y_obs, b.y_pred) : y_obs;
        require(y.manifold() == b.y_pred.manifold(), "observation is not on the measurement manifold");
        const Matrix G = kalman_gain(b.P_xy, b.P_yy, opts.condition_limit);
        const Vector innovation = log_coords(b.y_pred, y);
        Point x = exp_coords(b.x_pred, G * innovation);
        const Matrix P_local = symmetrize(b.P_pred - G * b.P_yy * G.transpose());
        detail::check_positiveness(P_local, opts.positiveness_tol);
        Matrix P = parallel_transport_cov(P_local, b.x_pred, x);
        return FilterState{std::move(x), std::move(P), k};
    });
}

/// Prediction half of a filter step for any process/measurement combination.
template <class Process, class Measurement>
PredictionBundle predict(const FilterState& state, const System<Process, Measurement>& sys, const SigmaKind& kind,
                         const FilterOptions& opts = {}) {
    const int k = state.k + 1;
    try {
        require(state.x_hat.manifold() == sys.state_manifold, "filter state is not on the state manifold");
        require_square(state.P_hat, sys.state_manifold.dim(), "filter covariance");
        detail::StatePrediction sp =
            staged("state-prediction", [&] { return detail::predict_state(sys.process, state, k, kind, opts); });
        return staged("measurement-prediction",
                      [&] { return detail::predict_measurement(sys.measurement, sp, k, kind, opts); });
    } catch (const Error& e) {
        throw e.with_step(k);
    }
}

template <class Process, class Measurement>
FilterState filter_step(const FilterState& state, const System<Process, Measurement>& sys, const Point& y_obs,
                        const SigmaKind& kind, const FilterOptions& opts = {}) {
    const PredictionBundle b = predict(state, sys, kind, opts);
    const int k = state.k + 1;
    try {
        return correct(b, y_obs, k, opts);
    } catch (const Error& e) {
        throw e.with_step(k);
    }
}

/// Additive Riemannian UKF step.
inline FilterState riadukf_step(const FilterState& state, const AdditiveSystem& sys, const Point& y_obs,
                                const SigmaKind& kind, const FilterOptions& opts = {}) {
    return filter_step(state, sys, y_obs, kind, opts);
}

/// Augmented Riemannian UKF step: noises enter through augmented sigma points.
inline FilterState riaukf_step(const FilterState& state, const GeneralSystem& sys, const Point& y_obs,
                               const SigmaKind& kind, const FilterOptions& opts = {}) {
    return filter_step(state, sys, y_obs, kind, opts);
}

/// Mixed step: augmented prediction for whichever side is general, additive for the other.
inline FilterState partially_additive_step(const FilterState& state, const PartiallyAdditiveSystem& sys,
                                           const Point& y_obs, const SigmaKind& kind,
                                           const FilterOptions& opts = {}) {
    return std::visit([&](const auto& s) { return filter_step(state, s, y_obs, kind, opts); }, sys);
}

/// Baseline UKF for Riemannian manifolds without noise statistics: 2n-point
/// homogeneous symmetric sets, no Q or R anywhere, and a zero prior tangent term.
/// Any covariance breakdown during step k is reported as positiveness loss at k.
inline FilterState ukfrm_step(const FilterState& state, const StateFn& f, const StateFn& h, const Point& y_obs,
                              const FilterOptions& opts = {}) {
    const int k = state.k + 1;
    const SigmaKind kind = SigmaKind::homogeneous_minimum_symmetric();
    try {
        UTResult pred = riut1([&](const Point& x) { return f(k, x); }, {state.x_hat, state.P_hat}, kind, opts.ut());
        const RandomPointEstimate x_pred{pred.mean_out, pred.cov_out};
        UTResult meas = riut2([&](const Point& x) { return h(k, x); }, x_pred, kind, opts.ut());
        const PredictionBundle b{x_pred.mean, x_pred.cov, meas.mean_out, meas.cov_out, *meas.cross_cov};
        return correct(b, y_obs, k, opts);
    } catch (const Error& e) {
        switch (e.kind()) {
            case ErrorKind::NotPsd:
            case ErrorKind::Factorization:
            case ErrorKind::SingularInnovation:
            case ErrorKind::PositivenessLoss: throw e.as(ErrorKind::PositivenessLoss).with_step(k);
            default: throw e.with_step(k);
        }
    }
}

/// Affine-Gaussian model x' = A x + b + w, y = H x + d + v.
struct LinearGaussianModel {
    Matrix A;
    Vector b;
    Matrix H;
    Vector d;
    Matrix Q;
    Matrix R;

    int state_dim() const { return static_cast<int>(A.rows()); }
    int meas_dim() const { return static_cast<int>(H.rows()); }

    /// The same model as an additive system on Euclidean spaces.
    AdditiveSystem as_additive_system() const {
        const Manifold xm = Manifold::euclidean(state_dim());
        const Manifold ym = Manifold::euclidean(meas_dim());
        return AdditiveSystem{
            xm, ym,
            AdditiveProcess{[xm, A = A, b = b](int, const Point& x) { return Point(xm, A * x.coords() + b); },
                            NoiseSpec::centered(Q)},
            AdditiveMeasurement{[ym, H = H, d = d](int, const Point& x) { return Point(ym, H * x.coords() + d); },
                                NoiseSpec::centered(R)}};
    }
};

/// Textbook Kalman filter predict/correct.
inline FilterState linear_kf_step(const FilterState& state, const LinearGaussianModel& m, const Vector& y) {
    const Vector& x = state.x_hat.coords();
    const Vector x_pred = m.A * x + m.b;
    const Matrix P_pred = m.A * state.P_hat * m.A.transpose() + m.Q;
    const Matrix S = m.H * P_pred * m.H.transpose() + m.R;
    const Matrix K = kalman_gain(P_pred * m.H.transpose(), S);
    const Vector x_new = x_pred + K * (y - m.H * x_pred - m.d);
    const Matrix P_new = symmetrize(P_pred - K * S * K.transpose());
    return FilterState{Point(state.x_hat.manifold(), x_new), P_new, state.k + 1};
}

}  // namespace riukf
