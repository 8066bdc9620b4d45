#pragma once

#include <cmath>

#include <Eigen/Core>

#include "riukf/error.hpp"

namespace riukf::bench {

/// Unit quaternion stored as (eta, eps_x, eps_y, eps_z), scalar part first.
using Quaternion = Eigen::Vector4d;

inline Quaternion quat_identity() { return Quaternion(1.0, 0.0, 0.0, 0.0); }

inline Quaternion quat_normalized(const Quaternion& q) {
    const double n = q.norm();
    require(n > 0.0, "cannot normalize a zero quaternion");
    return q / n;
}

/// Hamilton product without renormalization (used inside the integrator, where
/// the angular-rate quaternion is not unit).
inline Quaternion quat_mul_raw(const Quaternion& a, const Quaternion& b) {
    const double eta1 = a(0), eta2 = b(0);
    const Eigen::Vector3d e1 = a.tail<3>(), e2 = b.tail<3>();
    Quaternion out;
    out(0) = eta1 * eta2 - e1.dot(e2);
    out.tail<3>() = eta1 * e2 + eta2 * e1 + e1.cross(e2);
    return out;
}

/// q1 (x) q2 = [eta1 eta2 - e1.e2; eta1 e2 + eta2 e1 + e1 x e2], renormalized.
inline Quaternion quat_mul(const Quaternion& q1, const Quaternion& q2) {
    return quat_normalized(quat_mul_raw(q1, q2));
}

inline Quaternion quat_conj(const Quaternion& q) { return Quaternion(q(0), -q(1), -q(2), -q(3)); }

inline Quaternion quat_from_axis_angle(const Eigen::Vector3d& axis, double angle) {
    const double n = axis.norm();
    if (n == 0.0 || angle == 0.0) return quat_identity();
    Quaternion q;
    q(0) = std::cos(0.5 * angle);
    q.tail<3>() = std::sin(0.5 * angle) * axis / n;
    return q;
}

}  // namespace riukf::bench
