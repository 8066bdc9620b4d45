#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "riukf/error.hpp"
#include "riukf/linalg.hpp"
#include "riukf/manifold.hpp"
#include "riukf/stats.hpp"

namespace riukf {

/// Which normalized sigma representation to generate.
///
///  - Minimum: n+1 regular-simplex points, equal weights.
///  - RhoMinimum: n+1 simplex points, first weight rho/(n+rho), the rest 1/(n+rho).
///    rho = 1 coincides with Minimum.
///  - MinimumSymmetric: 2n points mean +/- col_i(sqrt P)/sqrt(2 w_i) with pair weights w_i
///    (each side sums to 1/2). An empty weight list selects the ramp w_i = i/(n(n+1)).
///  - HomogeneousMinimumSymmetric: 2n points mean +/- sqrt(n) col_i(sqrt P), weights 1/(2n).
struct SigmaKind {
    enum class Family { Minimum, RhoMinimum, MinimumSymmetric, HomogeneousMinimumSymmetric };

    Family family = Family::HomogeneousMinimumSymmetric;
    double rho = 1.0;
    std::vector<double> pair_weights;

    static SigmaKind minimum() { return {Family::Minimum, 1.0, {}}; }
    static SigmaKind rho_minimum(double rho) {
        require(rho > 0.0, "RhoMinimum needs rho > 0");
        return {Family::RhoMinimum, rho, {}};
    }
    static SigmaKind minimum_symmetric(std::vector<double> pair_weights = {}) {
        return {Family::MinimumSymmetric, 1.0, std::move(pair_weights)};
    }
    static SigmaKind homogeneous_minimum_symmetric() { return {Family::HomogeneousMinimumSymmetric, 1.0, {}}; }

    bool symmetric() const {
        return family == Family::MinimumSymmetric || family == Family::HomogeneousMinimumSymmetric;
    }

    int point_count(int n) const { return symmetric() ? 2 * n : n + 1; }

    /// Short tag used in filter names: Mi, RhoMi, MiSy, HoMiSy.
    std::string tag() const {
        switch (family) {
            case Family::Minimum: return "Mi";
            case Family::RhoMinimum: return "RhoMi";
            case Family::MinimumSymmetric: return "MiSy";
            case Family::HomogeneousMinimumSymmetric: return "HoMiSy";
        }
        return "?";
    }

    /// Pair weights actually used for dimension n (MinimumSymmetric only).
    Vector resolved_pair_weights(int n) const {
        if (pair_weights.empty()) {
            Vector w(n);
            for (int i = 0; i < n; ++i) w(i) = static_cast<double>(i + 1) / (static_cast<double>(n) * (n + 1));
            return w;
        }
        if (static_cast<int>(pair_weights.size()) != n) {
            fail(ErrorKind::ContractViolation, "MinimumSymmetric: expected " + std::to_string(n) +
                                                   " pair weights, got " + std::to_string(pair_weights.size()));
        }
        Vector w = Eigen::Map<const Vector>(pair_weights.data(), n);
        require((w.array() > 0.0).all(), "MinimumSymmetric: pair weights must be positive");
        require(std::abs(w.sum() - 0.5) <= 1e-12, "MinimumSymmetric: pair weights must sum to 1/2");
        return w;
    }
};

/// Sigma representation in R^n: the set lives on Euclidean(n).
struct EuclideanSigmaSet {
    WeightedSet set;
    SigmaKind kind;

    /// Points as columns of an n x N matrix.
    Matrix columns() const {
        const auto n = set.points.front().coords().size();
        Matrix out(n, static_cast<Eigen::Index>(set.size()));
        for (std::size_t i = 0; i < set.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = set.points[i].coords();
        return out;
    }
};

namespace detail {

/// Unit-scatter simplex: n x (n+1) matrix Z with Z w = 0 and Z diag(w) Z^T = I for
/// positive weights w summing to one. Rows of Z diag(sqrt w) are the Householder
/// complement of sqrt(w).
inline Matrix unit_simplex(const Vector& w) {
    const Eigen::Index m = w.size();
    const Vector s = w.cwiseSqrt();
    Vector h = -s;
    h(0) += 1.0;
    Matrix H = Matrix::Identity(m, m);
    if (h.squaredNorm() > 0.0) H -= (2.0 / h.squaredNorm()) * h * h.transpose();
    Matrix Z = H.rightCols(m - 1).transpose();
    for (Eigen::Index i = 0; i < m; ++i) Z.col(i) /= s(i);
    return Z;
}

}  // namespace detail

/// Normalized sigma representation of (mean, P) with all mean weights positive.
inline EuclideanSigmaSet euclidean_sigma(const SigmaKind& kind, const Vector& mean, const Matrix& P) {
    const auto n = static_cast<int>(mean.size());
    require(n >= 1, "euclidean_sigma: dimension must be at least 1");
    require_square(P, n, "euclidean_sigma");
    const Matrix L = psd_sqrt(P);
    const Manifold space = Manifold::euclidean(n);

    std::vector<Point> points;
    Vector w;
    switch (kind.family) {
        case SigmaKind::Family::Minimum:
        case SigmaKind::Family::RhoMinimum: {
            const double rho = kind.family == SigmaKind::Family::Minimum ? 1.0 : kind.rho;
            require(rho > 0.0, "RhoMinimum needs rho > 0");
            w = Vector::Constant(n + 1, 1.0 / (n + rho));
            w(0) = rho / (n + rho);
            const Matrix Z = detail::unit_simplex(w);
            for (int i = 0; i <= n; ++i) points.emplace_back(space, mean + L * Z.col(i));
            break;
        }
        case SigmaKind::Family::MinimumSymmetric: {
            const Vector pw = kind.resolved_pair_weights(n);
            w.resize(2 * n);
            for (int i = 0; i < n; ++i) {
                const Vector d = L.col(i) / std::sqrt(2.0 * pw(i));
                points.emplace_back(space, mean + d);
                w(2 * i) = pw(i);
                points.emplace_back(space, mean - d);
                w(2 * i + 1) = pw(i);
            }
            break;
        }
        case SigmaKind::Family::HomogeneousMinimumSymmetric: {
            const double scale = std::sqrt(static_cast<double>(n));
            w = Vector::Constant(2 * n, 0.5 / n);
            for (int i = 0; i < n; ++i) {
                points.emplace_back(space, mean + scale * L.col(i));
                points.emplace_back(space, mean - scale * L.col(i));
            }
            break;
        }
    }
    return EuclideanSigmaSet{WeightedSet::with_weights(std::move(points), w), kind};
}

/// Riemannian sigma representation: a tangent-space sigma set at est.mean, lifted
/// through exp. Every tangent point must lie strictly inside the ball of radius
/// 1/2 min{inj, pi/sqrt(kappa)}.
inline WeightedSet riemannian_sigma(const SigmaKind& kind, const RandomPointEstimate& est) {
    est.validate();
    const Manifold& m = est.mean.manifold();
    const EuclideanSigmaSet tangent = euclidean_sigma(kind, Vector::Zero(m.dim()), est.cov);
    const TangentBasis basis = tangent_basis(est.mean);
    const double radius = m.sigma_ball_radius();

    std::vector<Point> points;
    points.reserve(tangent.set.size());
    for (std::size_t i = 0; i < tangent.set.size(); ++i) {
        const Vector& c = tangent.set.points[i].coords();
        const double norm = c.norm();
        if (!(norm < radius)) {
            throw Error(ErrorKind::SigmaOutOfBall, "sigma point " + std::to_string(i) + " has tangent norm " +
                                                       std::to_string(norm) + ", outside the admissible ball of radius " +
                                                       std::to_string(radius) + "; covariance too large for " +
                                                       m.name())
                .with_value(norm);
        }
        points.push_back(exp_map(est.mean, from_coords(c, basis)));
    }
    return WeightedSet{std::move(points), tangent.set.w_m, tangent.set.w_c, tangent.set.w_cc};
}

}  // namespace riukf
