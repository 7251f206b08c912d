#pragma once

#include <cmath>

#include <Eigen/Core>

#include "hsi/common/scalar.hpp"

namespace hsi {

template <class T>
using Mat3T = Eigen::Matrix<T, 3, 3>;
template <class T>
using Vec3T = Eigen::Matrix<T, 3, 1>;

// Gram-Schmidt on the two 3-vectors (a1 = r[0..2], a2 = r[3..5]); the result
// has columns b1, b2, b3 = b1 x b2. Degenerate input falls back to a
// perturbed frame and sets *degenerate.
template <class T>
Mat3T<T> rot6d_to_matrix(const Eigen::Matrix<T, 6, 1>& r, bool* degenerate = nullptr) {
    using std::sqrt;
    Vec3T<T> a1 = r.template head<3>();
    Vec3T<T> a2 = r.template tail<3>();
    bool bad = false;
    if (value_of(a1.squaredNorm()) < 1e-16) {
        a1 = Vec3T<T>(T(1.0), T(0.0), T(0.0));
        bad = true;
    }
    const Vec3T<T> b1 = a1 / sqrt(a1.squaredNorm());
    Vec3T<T> u = a2 - b1.dot(a2) * b1;
    if (value_of(u.squaredNorm()) < 1e-16) {
        // Any axis not parallel to b1.
        int k = 0;
        for (int a = 1; a < 3; ++a)
            if (std::abs(value_of(b1[a])) < std::abs(value_of(b1[k]))) k = a;
        Vec3T<T> e = Vec3T<T>::Zero();
        e[k] = T(1.0);
        u = e - b1.dot(e) * b1;
        bad = true;
    }
    const Vec3T<T> b2 = u / sqrt(u.squaredNorm());
    Mat3T<T> m;
    m.col(0) = b1;
    m.col(1) = b2;
    m.col(2) = b1.cross(b2);
    if (degenerate) *degenerate = bad;
    return m;
}

// First two columns, the inverse of rot6d_to_matrix on rotations.
template <class T>
Eigen::Matrix<T, 6, 1> matrix_to_rot6d(const Mat3T<T>& m) {
    Eigen::Matrix<T, 6, 1> r;
    r << m.col(0), m.col(1);
    return r;
}

// Rodrigues' formula; second-order Taylor expansion near zero keeps the
// derivative finite at the rest pose.
template <class T>
Mat3T<T> axis_angle_to_matrix(const Vec3T<T>& w) {
    using std::cos;
    using std::sin;
    using std::sqrt;
    Mat3T<T> K;
    K << T(0.0), -w[2], w[1], w[2], T(0.0), -w[0], -w[1], w[0], T(0.0);
    const T th2 = w.squaredNorm();
    if (value_of(th2) < 1e-8) return Mat3T<T>::Identity() + K + T(0.5) * K * K;
    const T th = sqrt(th2);
    return Mat3T<T>::Identity() + (sin(th) / th) * K + ((T(1.0) - cos(th)) / th2) * K * K;
}

}  // namespace hsi
