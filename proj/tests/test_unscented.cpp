#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "riukf/bench/quaternion.hpp"
#include "test_support.hpp"

namespace riukf {
namespace {

using testing::Gen;
using testing::max_abs;
using testing::pole;
using testing::vec;

std::vector<SigmaKind> all_kinds() {
    return {SigmaKind::minimum(), SigmaKind::rho_minimum(0.5), SigmaKind::minimum_symmetric(),
            SigmaKind::homogeneous_minimum_symmetric()};
}

PointMap affine(const Matrix& A, const Vector& b) {
    const Manifold out = Manifold::euclidean(static_cast<int>(A.rows()));
    return [A, b, out](const Point& x) { return Point(out, A * x.coords() + b); };
}

// Classical Euclidean UT written directly on the sigma matrix, independent of the
// manifold code paths.
struct ClassicalUT {
    Vector mean;
    Matrix cov;
    Matrix cross;
    Matrix sigma;
};

template <class F>
ClassicalUT classical_ut(const SigmaKind& kind, const Vector& m, const Matrix& P, F f) {
    const auto set = euclidean_sigma(kind, m, P);
    const Matrix X = set.columns();
    const Eigen::Index N = X.cols();
    Matrix Y(f(X.col(0)).size(), N);
    for (Eigen::Index i = 0; i < N; ++i) Y.col(i) = f(X.col(i));
    const Vector y = Y * set.set.w_m;
    const Matrix dY = Y.colwise() - y;
    const Matrix dX = X.colwise() - m;
    return {y, dY * set.set.w_c.asDiagonal() * dY.transpose(), dX * set.set.w_cc.asDiagonal() * dY.transpose(), X};
}

TEST(Riut1, IdentityReturnsInput) {
    Gen g(201);
    const Point mean = g.sphere_point(3);
    const Matrix P = g.spd(3, 0.001, 0.01);
    for (const auto& kind : all_kinds()) {
        const UTResult r = riut1([](const Point& x) { return x; }, {mean, P}, kind);
        EXPECT_LE(distance(r.mean_out, mean), 1e-6) << kind.tag();
        EXPECT_LE(max_abs(r.cov_out - P), 1e-6) << kind.tag();
        EXPECT_FALSE(r.cross_cov.has_value());
    }
}

TEST(Riut1, AffineIsExact) {
    Gen g(202);
    for (int t = 0; t < 30; ++t) {
        const int n = g.integer(1, 5), m = g.integer(1, 5);
        const Matrix A = g.gaussian(m, n);
        const Vector b = g.gaussian(m);
        const Vector mu = g.gaussian(n);
        const Matrix P = g.spd(n);
        for (const auto& kind : all_kinds()) {
            const UTResult r = riut1(affine(A, b), {Point(Manifold::euclidean(n), mu), P}, kind);
            EXPECT_LE((r.mean_out.coords() - (A * mu + b)).norm(), 1e-12 * (1 + (A * mu + b).norm()));
            EXPECT_LE(max_abs(r.cov_out - A * P * A.transpose()), 1e-12 * (1 + max_abs(A * P * A.transpose())));
        }
    }
}

TEST(Riut1, QuaternionIsometryOnS3) {
    Gen g(203);
    const Manifold s3 = Manifold::sphere(3);
    for (int t = 0; t < 20; ++t) {
        const bench::Quaternion q0 = bench::quat_normalized(g.gaussian(4));
        const Point mean = g.sphere_point(3);
        const Matrix P = g.spd(3, 0.001, 0.05);
        const PointMap f = [&](const Point& x) { return Point::normalized(s3, bench::quat_mul(q0, x.coords())); };
        for (const auto& kind : all_kinds()) {
            const UTResult r = riut1(f, {mean, P}, kind, UTOptions{KarcherOptions{1e-13, 200}});
            const Point expected = f(mean);
            EXPECT_LE(distance(r.mean_out, expected), 1e-9);
            EXPECT_LE((eigenvalues(r.cov_out) - eigenvalues(P)).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(Riut2, IdentityCrossCovariance) {
    Gen g(204);
    const Matrix P = g.spd(3);
    const Point mean(Manifold::euclidean(3), g.gaussian(3));
    for (const auto& kind : all_kinds()) {
        const UTResult r = riut2([](const Point& x) { return x; }, {mean, P}, kind);
        ASSERT_TRUE(r.cross_cov.has_value());
        EXPECT_LE(max_abs(*r.cross_cov - P), 1e-12);
    }
}

TEST(Riut2, LinearCrossCovariance) {
    Gen g(205);
    for (int t = 0; t < 20; ++t) {
        const int n = g.integer(1, 4), m = g.integer(1, 4);
        const Matrix A = g.gaussian(m, n);
        const Matrix P = g.spd(n);
        for (const auto& kind : all_kinds()) {
            const UTResult r = riut2(affine(A, Vector::Zero(m)), {Point(Manifold::euclidean(n), g.gaussian(n)), P}, kind);
            EXPECT_LE(max_abs(*r.cross_cov - P * A.transpose()), 1e-12 * (1 + max_abs(P * A.transpose())));
        }
    }
}

TEST(Riut2, ConstantFunction) {
    Gen g(206);
    const Point c = g.sphere_point(2);
    const Point mean = g.sphere_point(3);
    for (const auto& kind : all_kinds()) {
        const UTResult r = riut2([&](const Point&) { return c; }, {mean, 0.01 * Matrix::Identity(3, 3)}, kind);
        EXPECT_EQ(r.cov_out, Matrix::Zero(2, 2));
        EXPECT_EQ(*r.cross_cov, Matrix::Zero(3, 2));
        EXPECT_EQ(r.mean_out.coords(), c.coords());
    }
}

TEST(Riut, StageTaggedErrors) {
    try {
        riut1([](const Point& x) { return x; }, {pole(2), 4.0 * Matrix::Identity(2, 2)},
              SigmaKind::homogeneous_minimum_symmetric());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SigmaOutOfBall);
        EXPECT_EQ(e.stage(), "riut1/sigma");
    }
    try {
        riut2([](const Point&) -> Point { fail(ErrorKind::Domain, "boom"); }, {pole(2), 0.01 * Matrix::Identity(2, 2)},
              SigmaKind::minimum());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Domain);
        EXPECT_EQ(e.stage(), "riut2/map");
    }
}

// Each statistic must depend only on its own weight family.
TEST(TransformSet, WeightFamilySeparation) {
    const Manifold r1 = Manifold::euclidean(1);
    const std::vector<Point> pts{Point(r1, vec({-1})), Point(r1, vec({0})), Point(r1, vec({2}))};
    const WeightedSet base{pts, vec({0.2, 0.5, 0.3}), vec({0.2, 0.5, 0.3}), vec({0.2, 0.5, 0.3})};
    const PointMap f = [&](const Point& x) { return Point(r1, 3.0 * x.coords()); };
    const Point mean = karcher_mean(base);
    const UTResult ref = transform_set(f, base, mean, true);

    WeightedSet alt_c = base;
    alt_c.w_c = vec({0.6, 0.1, 0.3});
    const UTResult rc = transform_set(f, alt_c, mean, true);
    EXPECT_EQ(rc.mean_out.coords(), ref.mean_out.coords());
    EXPECT_NE(rc.cov_out(0, 0), ref.cov_out(0, 0));
    EXPECT_EQ(*rc.cross_cov, *ref.cross_cov);

    WeightedSet alt_cc = base;
    alt_cc.w_cc = vec({0.6, 0.1, 0.3});
    const UTResult rcc = transform_set(f, alt_cc, mean, true);
    EXPECT_EQ(rcc.mean_out.coords(), ref.mean_out.coords());
    EXPECT_EQ(rcc.cov_out, ref.cov_out);
    EXPECT_NE((*rcc.cross_cov)(0, 0), (*ref.cross_cov)(0, 0));

    WeightedSet alt_m = base;
    alt_m.w_m = vec({0.6, 0.1, 0.3});
    const UTResult rm = transform_set(f, alt_m, mean, true);
    EXPECT_NE(rm.mean_out.coords()(0), ref.mean_out.coords()(0));
}

TEST(EuclideanReduction, MatchesClassicalUTProperty) {
    Gen g(207);
    for (int t = 0; t < 40; ++t) {
        const int n = g.integer(1, 4), m = g.integer(1, 4);
        const Vector mu = g.gaussian(n);
        const Matrix P = g.spd(n);
        const Matrix A = g.gaussian(m, n);
        const Vector b = g.gaussian(m);
        std::vector<Matrix> Hs;
        for (int k = 0; k < m; ++k) Hs.push_back(symmetrize(g.gaussian(n, n)));
        auto quad = [&](const Vector& x) {
            Vector y = A * x + b;
            for (int k = 0; k < m; ++k) y(k) += x.dot(Hs[static_cast<size_t>(k)] * x);
            return y;
        };
        const Manifold ym = Manifold::euclidean(m);
        for (const auto& kind : all_kinds()) {
            const RandomPointEstimate est{Point(Manifold::euclidean(n), mu), P};

            const ClassicalUT ca = classical_ut(kind, mu, P, [&](const Vector& x) { return Vector(A * x + b); });
            const UTResult ra = riut2(affine(A, b), est, kind);
            EXPECT_LE((ra.mean_out.coords() - ca.mean).norm(), 1e-10);
            EXPECT_LE(max_abs(ra.cov_out - ca.cov), 1e-10);
            EXPECT_LE(max_abs(*ra.cross_cov - ca.cross), 1e-10);
            for (size_t i = 0; i < ra.independent.size(); ++i) {
                EXPECT_EQ(ra.independent.points[i].coords(), ca.sigma.col(static_cast<Eigen::Index>(i)));
            }

            const ClassicalUT cq = classical_ut(kind, mu, P, quad);
            const UTResult rq = riut2([&](const Point& x) { return Point(ym, quad(x.coords())); }, est, kind);
            const double scale = 1 + cq.mean.norm() + max_abs(cq.cov);
            EXPECT_LE((rq.mean_out.coords() - cq.mean).norm(), 1e-10 * scale);
            EXPECT_LE(max_abs(rq.cov_out - cq.cov), 1e-10 * scale);
            EXPECT_LE(max_abs(*rq.cross_cov - cq.cross), 1e-10 * scale);
        }
    }
}

// Hopf map S^3 -> S^2: smooth, at most doubles distances.
Point hopf(const Point& x) {
    const Vector& q = x.coords();
    return Point::normalized(Manifold::sphere(2),
                             vec({q(0) * q(0) + q(1) * q(1) - q(2) * q(2) - q(3) * q(3),
                                  2 * (q(0) * q(3) + q(1) * q(2)), 2 * (q(1) * q(3) - q(0) * q(2))}));
}

TEST(Riut, OutputSymmetricPsdProperty) {
    Gen g(208);
    for (int t = 0; t < 30; ++t) {
        const Point mean = g.sphere_point(3);
        const Matrix P = g.spd(3, 0.0, 0.05);
        for (const auto& kind : all_kinds()) {
            const UTResult r = riut2(hopf, {mean, P}, kind);
            EXPECT_EQ(r.cov_out, r.cov_out.transpose());
            EXPECT_TRUE(is_psd(r.cov_out, -1e-9));
            EXPECT_EQ(r.cross_cov->rows(), 3);
            EXPECT_EQ(r.cross_cov->cols(), 2);
        }
    }
}

}  // namespace
}  // namespace riukf
