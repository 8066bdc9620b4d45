#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "riukf/error.hpp"
#include "riukf/linalg.hpp"

namespace riukf {

/// Exp/log closed forms refuse tangent vectors this close to the cut locus.
inline constexpr double kCutLocusTolerance = 1e-9;

/// A geodesically complete Riemannian manifold: R^n, the unit sphere S^n embedded
/// in R^(n+1), or a finite Cartesian product of those. Descriptors are immutable
/// and cheap to copy.
class Manifold {
  public:
    enum class Kind { Euclidean, Sphere, Product };

    /// One Euclidean or sphere factor of a (possibly nested) product, with its
    /// offsets into the ambient and intrinsic coordinate vectors.
    struct Leaf {
        Kind kind;
        int dim;
        int ambient_dim;
        int ambient_offset;
        int tangent_offset;
    };

    Manifold() : Manifold(euclidean(0)) {}

    static Manifold euclidean(int n) {
        require(n >= 0, "Euclidean dimension must be non-negative");
        auto node = std::make_shared<Node>();
        node->kind = Kind::Euclidean;
        node->dim = n;
        node->ambient = n;
        node->inj = std::numeric_limits<double>::infinity();
        node->kappa = 0.0;
        node->leaves = {Leaf{Kind::Euclidean, n, n, 0, 0}};
        return Manifold(std::move(node));
    }

    static Manifold sphere(int n) {
        require(n >= 1, "sphere dimension must be at least 1");
        auto node = std::make_shared<Node>();
        node->kind = Kind::Sphere;
        node->dim = n;
        node->ambient = n + 1;
        node->inj = std::numbers::pi;
        node->kappa = 1.0;
        node->leaves = {Leaf{Kind::Sphere, n, n + 1, 0, 0}};
        return Manifold(std::move(node));
    }

    static Manifold product(std::vector<Manifold> factors) {
        require(!factors.empty(), "product manifold needs at least one factor");
        auto node = std::make_shared<Node>();
        node->kind = Kind::Product;
        node->dim = 0;
        node->ambient = 0;
        node->inj = std::numeric_limits<double>::infinity();
        node->kappa = 0.0;
        for (const auto& f : factors) {
            for (Leaf leaf : f.leaves()) {
                leaf.ambient_offset += node->ambient;
                leaf.tangent_offset += node->dim;
                node->leaves.push_back(leaf);
            }
            node->dim += f.dim();
            node->ambient += f.ambient_dim();
            node->inj = std::min(node->inj, f.injectivity_radius());
            node->kappa = std::max(node->kappa, f.curvature_bound());
        }
        node->factors = std::move(factors);
        return Manifold(std::move(node));
    }

    Kind kind() const { return node_->kind; }
    int dim() const { return node_->dim; }
    int ambient_dim() const { return node_->ambient; }
    double injectivity_radius() const { return node_->inj; }
    double curvature_bound() const { return node_->kappa; }
    const std::vector<Manifold>& factors() const { return node_->factors; }
    const std::vector<Leaf>& leaves() const { return node_->leaves; }

    /// Radius of the ball on which sigma points and tangent noise means are
    /// admissible: half of min{inj, pi/sqrt(kappa)}; kappa = 0 drops the second term.
    double sigma_ball_radius() const {
        double r = injectivity_radius();
        if (curvature_bound() > 0.0) r = std::min(r, std::numbers::pi / std::sqrt(curvature_bound()));
        return 0.5 * r;
    }

    std::string name() const {
        switch (kind()) {
            case Kind::Euclidean: return "R^" + std::to_string(dim());
            case Kind::Sphere: return "S^" + std::to_string(dim());
            case Kind::Product: {
                std::string s;
                for (const auto& f : factors()) {
                    if (!s.empty()) s += " x ";
                    s += f.kind() == Kind::Product ? "(" + f.name() + ")" : f.name();
                }
                return s;
            }
        }
        return "?";
    }

    friend bool operator==(const Manifold& a, const Manifold& b) {
        if (a.node_ == b.node_) return true;
        if (a.kind() != b.kind() || a.dim() != b.dim() || a.ambient_dim() != b.ambient_dim()) return false;
        if (a.kind() != Kind::Product) return true;
        return a.factors() == b.factors();
    }

  private:
    struct Node {
        Kind kind;
        int dim;
        int ambient;
        double inj;
        double kappa;
        std::vector<Manifold> factors;
        std::vector<Leaf> leaves;
    };

    explicit Manifold(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

namespace detail {

inline std::string format_vector(const Vector& v) {
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
    os << ")";
    return os.str();
}

}  // namespace detail

/// A point given by its ambient coordinates.
class Point {
  public:
    Point() = default;

    Point(Manifold manifold, Vector coords) : manifold_(std::move(manifold)), coords_(std::move(coords)) {
        if (coords_.size() != manifold_.ambient_dim()) {
            fail(ErrorKind::ContractViolation, "point on " + manifold_.name() + " needs " +
                                                   std::to_string(manifold_.ambient_dim()) +
                                                   " coordinates, got " + std::to_string(coords_.size()));
        }
        if (!coords_.allFinite()) fail(ErrorKind::ContractViolation, "point has non-finite coordinates");
        for (const auto& leaf : manifold_.leaves()) {
            if (leaf.kind != Manifold::Kind::Sphere) continue;
            const double norm = coords_.segment(leaf.ambient_offset, leaf.ambient_dim).norm();
            if (std::abs(norm - 1.0) > 1e-12) {
                fail(ErrorKind::ContractViolation,
                     "sphere point " + detail::format_vector(coords_) + " is not unit norm");
            }
        }
    }

    /// Projects sphere factors onto the unit sphere before validating.
    static Point normalized(Manifold manifold, Vector coords) {
        for (const auto& leaf : manifold.leaves()) {
            if (leaf.kind != Manifold::Kind::Sphere) continue;
            auto seg = coords.segment(leaf.ambient_offset, leaf.ambient_dim);
            const double norm = seg.norm();
            require(norm > 0.0, "cannot normalize a zero vector onto the sphere");
            seg /= norm;
        }
        return Point(std::move(manifold), std::move(coords));
    }

    const Manifold& manifold() const { return manifold_; }
    const Vector& coords() const { return coords_; }

  private:
    Manifold manifold_;
    Vector coords_;
};

/// Tangent vector in ambient coordinates, attached to its base point.
class TangentVector {
  public:
    TangentVector() = default;

    TangentVector(Point base, Vector coords) : base_(std::move(base)), coords_(std::move(coords)) {
        require(coords_.size() == base_.manifold().ambient_dim(), "tangent vector has wrong ambient size");
        for (const auto& leaf : base_.manifold().leaves()) {
            if (leaf.kind != Manifold::Kind::Sphere) continue;
            const double dot = base_.coords().segment(leaf.ambient_offset, leaf.ambient_dim).dot(
                coords_.segment(leaf.ambient_offset, leaf.ambient_dim));
            const double scale = std::max(1.0, coords_.segment(leaf.ambient_offset, leaf.ambient_dim).norm());
            if (std::abs(dot) > 1e-10 * scale) {
                fail(ErrorKind::ContractViolation, "tangent vector is not orthogonal to its sphere base point");
            }
        }
    }

    static TangentVector zero(const Point& base) {
        return TangentVector(base, Vector::Zero(base.manifold().ambient_dim()));
    }

    const Point& base() const { return base_; }
    const Vector& coords() const { return coords_; }
    double norm() const { return coords_.norm(); }

  private:
    Point base_;
    Vector coords_;
};

/// Orthonormal frame of a tangent space, stored as an ambient_dim x dim matrix.
class TangentBasis {
  public:
    TangentBasis(Point base, Matrix frame) : base_(std::move(base)), frame_(std::move(frame)) {}

    const Point& base() const { return base_; }
    const Matrix& frame() const { return frame_; }
    int size() const { return static_cast<int>(frame_.cols()); }
    TangentVector vector(int i) const { return TangentVector(base_, frame_.col(i)); }

  private:
    Point base_;
    Matrix frame_;
};

namespace detail {

using Seg = Eigen::Ref<const Vector>;

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

inline void require_same_manifold(const Point& a, const Point& b, std::string_view op) {
    if (!(a.manifold() == b.manifold())) {
        fail(ErrorKind::ContractViolation, std::string(op) + ": points live on different manifolds (" +
                                               a.manifold().name() + " vs " + b.manifold().name() + ")");
    }
}

inline bool same_point(const Point& a, const Point& b) {
    if (!(a.manifold() == b.manifold())) return false;
    if (a.coords().size() == 0) return true;
    const double scale = 1.0 + a.coords().cwiseAbs().maxCoeff();
    return (a.coords() - b.coords()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

inline void require_based_at(const TangentVector& v, const Point& a, std::string_view op) {
    if (!same_point(v.base(), a)) {
        fail(ErrorKind::ContractViolation, std::string(op) + ": tangent vector is based at " +
                                               format_vector(v.base().coords()) + ", expected " +
                                               format_vector(a.coords()));
    }
}

// Sphere leaf formulas on raw ambient segments.

inline Vector sphere_exp(const Seg& a, const Seg& v) {
    const double nv = v.norm();
    if (nv >= std::numbers::pi - kCutLocusTolerance) {
        fail(ErrorKind::Domain, "sphere exp: tangent norm " + std::to_string(nv) +
                                    " reaches the tangential cut locus (pi)");
    }
    if (nv == 0.0) return a;
    Vector out = std::cos(nv) * a + (std::sin(nv) / nv) * v;
    out /= out.norm();
    return out;
}

inline void sphere_check_cut(const Seg& a, const Seg& b) {
    if (1.0 + a.dot(b) <= kCutLocusTolerance) {
        fail(ErrorKind::CutLocus, "points " + format_vector(a) + " and " + format_vector(b) +
                                      " are (nearly) antipodal; log is undefined");
    }
}

/// Angle between unit vectors from the chord lengths; exact at a = b and accurate
/// for tiny angles where arccos(a.b) is not.
inline double sphere_angle(const Seg& a, const Seg& b) { return 2.0 * std::atan2((b - a).norm(), (b + a).norm()); }

inline Vector sphere_log(const Seg& a, const Seg& b) {
    sphere_check_cut(a, b);
    const double theta = sphere_angle(a, b);
    if (theta == 0.0) return Vector::Zero(a.size());
    Vector v = b - a.dot(b) * a;
    const double nv = v.norm();
    if (theta < 1e-8 || nv == 0.0) return v;
    return (theta / nv) * v;
}

inline double sphere_dist(const Seg& a, const Seg& b) { return sphere_angle(a, b); }

inline Vector sphere_transport(const Seg& a, const Seg& b, const Seg& v) {
    const Vector l = sphere_log(a, b);
    const double theta = l.norm();
    if (theta == 0.0) return v;
    const Vector u = l / theta;
    const double uv = u.dot(v);
    Vector out = v + uv * ((std::cos(theta) - 1.0) * u - std::sin(theta) * a);
    // remove the O(eps) normal component so the result is tangent at b
    Vector bb = b;
    out -= bb.dot(out) * bb;
    return out;
}

/// Householder complement of the base point, keyed on its largest-magnitude coordinate.
inline Matrix sphere_basis(const Seg& p) {
    const Eigen::Index m = p.size();
    Eigen::Index j = 0;
    p.cwiseAbs().maxCoeff(&j);
    const double sigma = p(j) >= 0.0 ? -1.0 : 1.0;
    Vector w = -sigma * p;
    w(j) += 1.0;
    const Matrix H = Matrix::Identity(m, m) - (2.0 / w.squaredNorm()) * w * w.transpose();
    Matrix frame(m, m - 1);
    for (Eigen::Index k = 0, c = 0; k < m; ++k) {
        if (k == j) continue;
        frame.col(c++) = H.col(k);
    }
    return frame;
}

inline Vector exp_raw(const Manifold& m, const Vector& a, const Vector& v) {
    Vector out(a.size());
    for (const auto& leaf : m.leaves()) {
        const auto as = a.segment(leaf.ambient_offset, leaf.ambient_dim);
        const auto vs = v.segment(leaf.ambient_offset, leaf.ambient_dim);
        if (leaf.kind == Manifold::Kind::Sphere) {
            out.segment(leaf.ambient_offset, leaf.ambient_dim) = sphere_exp(as, vs);
        } else {
            out.segment(leaf.ambient_offset, leaf.ambient_dim) = as + vs;
        }
    }
    return out;
}

inline Vector log_raw(const Manifold& m, const Vector& a, const Vector& b) {
    Vector out(a.size());
    for (const auto& leaf : m.leaves()) {
        const auto as = a.segment(leaf.ambient_offset, leaf.ambient_dim);
        const auto bs = b.segment(leaf.ambient_offset, leaf.ambient_dim);
        if (leaf.kind == Manifold::Kind::Sphere) {
            out.segment(leaf.ambient_offset, leaf.ambient_dim) = sphere_log(as, bs);
        } else {
            out.segment(leaf.ambient_offset, leaf.ambient_dim) = bs - as;
        }
    }
    return out;
}

inline Vector transport_raw(const Manifold& m, const Vector& a, const Vector& b, const Vector& v) {
    Vector out(a.size());
    for (const auto& leaf : m.leaves()) {
        const auto vs = v.segment(leaf.ambient_offset, leaf.ambient_dim);
        if (leaf.kind == Manifold::Kind::Sphere) {
            out.segment(leaf.ambient_offset, leaf.ambient_dim) =
                sphere_transport(a.segment(leaf.ambient_offset, leaf.ambient_dim),
                                 b.segment(leaf.ambient_offset, leaf.ambient_dim), vs);
        } else {
            out.segment(leaf.ambient_offset, leaf.ambient_dim) = vs;
        }
    }
    return out;
}

inline Matrix basis_raw(const Manifold& m, const Vector& a) {
    Matrix frame = Matrix::Zero(m.ambient_dim(), m.dim());
    for (const auto& leaf : m.leaves()) {
        if (leaf.dim == 0) continue;
        auto block = frame.block(leaf.ambient_offset, leaf.tangent_offset, leaf.ambient_dim, leaf.dim);
        if (leaf.kind == Manifold::Kind::Sphere) {
            block = sphere_basis(a.segment(leaf.ambient_offset, leaf.ambient_dim));
        } else {
            block.setIdentity();
        }
    }
    return frame;
}

}  // namespace detail

inline double inner(const TangentVector& u, const TangentVector& v) {
    require(detail::same_point(u.base(), v.base()), "inner: vectors are based at different points");
    return u.coords().dot(v.coords());
}

/// exp_a(v). Euclidean: a + v; sphere: cos|v| a + sin|v| v/|v|; products factor-wise.
inline Point exp_map(const Point& a, const TangentVector& v) {
    detail::require_based_at(v, a, "exp_map");
    return Point::normalized(a.manifold(), detail::exp_raw(a.manifold(), a.coords(), v.coords()));
}

/// log_a(b), the inverse of exp_a away from the cut locus of a.
inline TangentVector log_map(const Point& a, const Point& b) {
    detail::require_same_manifold(a, b, "log_map");
    return TangentVector(a, detail::log_raw(a.manifold(), a.coords(), b.coords()));
}

inline double distance(const Point& a, const Point& b) {
    detail::require_same_manifold(a, b, "distance");
    double sq = 0.0;
    for (const auto& leaf : a.manifold().leaves()) {
        const auto as = a.coords().segment(leaf.ambient_offset, leaf.ambient_dim);
        const auto bs = b.coords().segment(leaf.ambient_offset, leaf.ambient_dim);
        const double d = leaf.kind == Manifold::Kind::Sphere ? detail::sphere_dist(as, bs) : (bs - as).norm();
        sq += d * d;
    }
    return std::sqrt(sq);
}

/// Parallel transport of v (based at a) to b along the minimizing geodesic.
inline TangentVector parallel_transport_vec(const TangentVector& v, const Point& a, const Point& b) {
    detail::require_based_at(v, a, "parallel_transport_vec");
    detail::require_same_manifold(a, b, "parallel_transport_vec");
    return TangentVector(b, detail::transport_raw(a.manifold(), a.coords(), b.coords(), v.coords()));
}

/// Deterministic orthonormal tangent frame: canonical axes on R^n, Householder
/// complement on spheres, block-diagonal on products.
inline TangentBasis tangent_basis(const Point& a) {
    return TangentBasis(a, detail::basis_raw(a.manifold(), a.coords()));
}

inline Vector to_coords(const TangentVector& v, const TangentBasis& basis) {
    detail::require_based_at(v, basis.base(), "to_coords");
    return basis.frame().transpose() * v.coords();
}

inline TangentVector from_coords(const Vector& c, const TangentBasis& basis) {
    if (c.size() != basis.size()) {
        fail(ErrorKind::ContractViolation, "from_coords: expected " + std::to_string(basis.size()) +
                                               " coordinates, got " + std::to_string(c.size()));
    }
    return TangentVector(basis.base(), basis.frame() * c);
}

/// exp_a of a tangent vector given in the deterministic basis at a.
inline Point exp_coords(const Point& a, const Vector& c) { return exp_map(a, from_coords(c, tangent_basis(a))); }

/// log_a(b) expressed in the deterministic basis at a.
inline Vector log_coords(const Point& a, const Point& b) {
    detail::require_same_manifold(a, b, "log_coords");
    return detail::basis_raw(a.manifold(), a.coords()).transpose() *
           detail::log_raw(a.manifold(), a.coords(), b.coords());
}

/// Matrix T with to_coords(PT(v), basis_b) = T * to_coords(v, basis_a).
inline Matrix transport_matrix(const TangentBasis& basis_a, const TangentBasis& basis_b) {
    const Point& a = basis_a.base();
    const Point& b = basis_b.base();
    detail::require_same_manifold(a, b, "transport_matrix");
    Matrix moved(basis_a.frame().rows(), basis_a.size());
    for (int i = 0; i < basis_a.size(); ++i) {
        moved.col(i) = detail::transport_raw(a.manifold(), a.coords(), b.coords(), basis_a.frame().col(i));
    }
    return basis_b.frame().transpose() * moved;
}

inline Matrix transport_matrix(const Point& a, const Point& b) {
    return transport_matrix(tangent_basis(a), tangent_basis(b));
}

/// Transports a symmetric bilinear form P (coordinates in basis_a) from a to b:
/// P = sum_i l_i v_i v_i^T  ->  sum_i l_i PT(v_i) PT(v_i)^T, re-expressed in basis_b.
inline Matrix parallel_transport_cov(const Matrix& P, const Point& a, const Point& b, const TangentBasis& basis_a,
                                     const TangentBasis& basis_b) {
    require_square(P, a.manifold().dim(), "parallel_transport_cov");
    if (!is_symmetric(P, 1e-9)) fail(ErrorKind::ContractViolation, "parallel_transport_cov: P is not symmetric");
    require(detail::same_point(basis_a.base(), a) && detail::same_point(basis_b.base(), b),
            "parallel_transport_cov: bases are not attached to the endpoints");
    detail::require_same_manifold(a, b, "parallel_transport_cov");
    const int n = a.manifold().dim();
    if (n == 0) return P;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(P));
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const TangentVector vi = from_coords(es.eigenvectors().col(i), basis_a);
        const Vector moved = to_coords(parallel_transport_vec(vi, a, b), basis_b);
        out += es.eigenvalues()(i) * moved * moved.transpose();
    }
    return symmetrize(out);
}

inline Matrix parallel_transport_cov(const Matrix& P, const Point& a, const Point& b) {
    return parallel_transport_cov(P, a, b, tangent_basis(a), tangent_basis(b));
}

}  // namespace riukf
