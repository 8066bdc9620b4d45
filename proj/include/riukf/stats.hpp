#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "riukf/error.hpp"
#include "riukf/linalg.hpp"
#include "riukf/manifold.hpp"

namespace riukf {

/// Weighted point set with separate weight families for the sample mean (w_m),
/// second moments (w_c) and cross-moments (w_cc).
struct WeightedSet {
    std::vector<Point> points;
    Vector w_m;
    Vector w_c;
    Vector w_cc;

    /// All three families share the same weights.
    static WeightedSet with_weights(std::vector<Point> points, const Vector& w) {
        return WeightedSet{std::move(points), w, w, w};
    }

    std::size_t size() const { return points.size(); }

    const Manifold& manifold() const {
        require(!points.empty(), "weighted set is empty");
        return points.front().manifold();
    }

    bool is_normalized(double tol = 1e-12) const {
        return std::abs(w_m.sum() - 1.0) <= tol && std::abs(w_c.sum() - 1.0) <= tol &&
               std::abs(w_cc.sum() - 1.0) <= tol;
    }

    void validate() const {
        const auto n = static_cast<Eigen::Index>(points.size());
        require(n > 0, "weighted set is empty");
        require(w_m.size() == n && w_c.size() == n && w_cc.size() == n,
                "weighted set: weight families must match the number of points");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (w_m(i) == 0.0 || w_c(i) == 0.0 || w_cc(i) == 0.0) {
                fail(ErrorKind::ContractViolation, "weighted set: weight " + std::to_string(i) + " is zero");
            }
        }
        for (const auto& p : points) {
            require(p.manifold() == points.front().manifold(), "weighted set mixes manifolds");
        }
    }
};

/// Random point summarized by its mean and a covariance in tangent_basis(mean)
/// coordinates.
struct RandomPointEstimate {
    Point mean;
    Matrix cov;

    void validate() const {
        require_square(cov, mean.manifold().dim(), "random point covariance");
    }
};

struct KarcherOptions {
    double tol = 1e-6;
    int max_iter = 200;
};

namespace detail {

inline void require_convex_ball(const WeightedSet& set, const Point& center) {
    // Checked per leaf factor: a Euclidean factor never limits the ball.
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Vector& p = set.points[i].coords();
        for (const auto& leaf : center.manifold().leaves()) {
            if (leaf.kind != Manifold::Kind::Sphere) continue;
            const double d = sphere_dist(center.coords().segment(leaf.ambient_offset, leaf.ambient_dim),
                                         p.segment(leaf.ambient_offset, leaf.ambient_dim));
            if (!(d < 0.5 * std::numbers::pi)) {
                fail(ErrorKind::CutLocus, "karcher_mean: point " + std::to_string(i) + " lies at distance " +
                                              std::to_string(d) +
                                              " from the initial guess, outside the injectivity_radius/2 ball");
            }
        }
    }
}

inline Vector weighted_log_sum(const WeightedSet& set, const Point& mu) {
    const Manifold& m = mu.manifold();
    Vector g = Vector::Zero(m.ambient_dim());
    for (std::size_t i = 0; i < set.size(); ++i) {
        g += set.w_m(static_cast<Eigen::Index>(i)) * log_raw(m, mu.coords(), set.points[i].coords());
    }
    return g;
}

}  // namespace detail

/// Karcher (Frechet) sample mean by the fixed-point gradient iteration
/// mu <- exp_mu(sum_i w_m[i] log_mu(x_i)). Stops once the gradient norm is <= tol.
inline Point karcher_mean(const WeightedSet& set, const Point& init, const KarcherOptions& opts = {}) {
    set.validate();
    require(opts.tol > 0.0, "karcher_mean: tolerance must be positive");
    detail::require_same_manifold(set.points.front(), init, "karcher_mean");
    detail::require_convex_ball(set, init);

    Point mu = init;
    double gnorm = 0.0;
    for (int it = 0; it <= opts.max_iter; ++it) {
        const Vector g = detail::weighted_log_sum(set, mu);
        gnorm = g.norm();
        if (gnorm <= opts.tol) return mu;
        if (it == opts.max_iter) break;
        mu = Point::normalized(mu.manifold(), detail::exp_raw(mu.manifold(), mu.coords(), g));
    }
    throw Error(ErrorKind::Convergence, "karcher_mean did not converge in " + std::to_string(opts.max_iter) +
                                            " iterations (gradient norm " + std::to_string(gnorm) + ")")
        .with_value(gnorm);
}

/// Karcher mean started from the point with the largest mean weight.
inline Point karcher_mean(const WeightedSet& set, const KarcherOptions& opts = {}) {
    set.validate();
    Eigen::Index best = 0;
    set.w_m.maxCoeff(&best);
    return karcher_mean(set, set.points[static_cast<std::size_t>(best)], opts);
}

/// Second sample moment of `set` with respect to its sample mean `mu`, evaluated in
/// the tangent space at `at` (tangent_basis(at) coordinates).
inline Matrix sample_moment(const WeightedSet& set, const Point& mu, const Point& at) {
    set.validate();
    detail::require_same_manifold(set.points.front(), at, "sample_moment");
    const Manifold& m = at.manifold();
    const Matrix frame = detail::basis_raw(m, at.coords());
    const Vector center = frame.transpose() * detail::log_raw(m, at.coords(), mu.coords());
    Matrix S = Matrix::Zero(m.dim(), m.dim());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Vector d = frame.transpose() * detail::log_raw(m, at.coords(), set.points[i].coords()) - center;
        S += set.w_c(static_cast<Eigen::Index>(i)) * d * d.transpose();
    }
    return symmetrize(S);
}

/// Sample covariance at the sample mean `mean`.
inline Matrix sample_covariance(const WeightedSet& set, const Point& mean) { return sample_moment(set, mean, mean); }

/// Second sample cross-moment, logs of X at `at_x` and of Y at `at_y`, weights w_cc of X.
inline Matrix sample_cross_moment(const WeightedSet& x, const Point& mu_x, const Point& at_x, const WeightedSet& y,
                                  const Point& mu_y, const Point& at_y) {
    x.validate();
    y.validate();
    if (x.size() != y.size()) {
        fail(ErrorKind::ContractViolation, "sample_cross_covariance: sets have " + std::to_string(x.size()) +
                                               " and " + std::to_string(y.size()) + " points");
    }
    const Manifold& mx = at_x.manifold();
    const Manifold& my = at_y.manifold();
    const Matrix fx = detail::basis_raw(mx, at_x.coords());
    const Matrix fy = detail::basis_raw(my, at_y.coords());
    const Vector cx = fx.transpose() * detail::log_raw(mx, at_x.coords(), mu_x.coords());
    const Vector cy = fy.transpose() * detail::log_raw(my, at_y.coords(), mu_y.coords());
    Matrix S = Matrix::Zero(mx.dim(), my.dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Vector dx = fx.transpose() * detail::log_raw(mx, at_x.coords(), x.points[i].coords()) - cx;
        const Vector dy = fy.transpose() * detail::log_raw(my, at_y.coords(), y.points[i].coords()) - cy;
        S += x.w_cc(static_cast<Eigen::Index>(i)) * dx * dy.transpose();
    }
    return S;
}

inline Matrix sample_cross_covariance(const WeightedSet& x, const Point& mean_x, const WeightedSet& y,
                                      const Point& mean_y) {
    return sample_cross_moment(x, mean_x, mean_x, y, mean_y, mean_y);
}

}  // namespace riukf
