#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>

namespace prsynth {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Iso3 = Eigen::Isometry3d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / kPi); }

/// Wraps an angle to [-pi, pi].
inline double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

Mat3 rot_x(double a);
Mat3 rot_y(double a);
Mat3 rot_z(double a);
Mat3 skew(const Vec3& v);

Iso3 translation(const Vec3& t);
Iso3 rotation(const Mat3& r);

/// R = Rx(a) * Ry(b) * Rz(c) for abc = (a, b, c).
Mat3 euler_xyz(const Vec3& abc);

/// Maps XYZ Euler-angle rates to the world-frame angular velocity.
Mat3 euler_rate_map(const Vec3& abc);

/// Time derivative of euler_rate_map applied to the rates, i.e. d/dt(T) * rates.
Vec3 euler_rate_map_dot(const Vec3& abc, const Vec3& rates);

/// Rotation vector of R (angle in [0, pi]).
Vec3 so3_log(const Mat3& r);

/// Inverse of the SO(3) left Jacobian at rotation vector phi.
Mat3 so3_left_jacobian_inverse(const Vec3& phi);

}  // namespace prsynth
