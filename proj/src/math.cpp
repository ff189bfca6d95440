#include "prsynth/math.hpp"

namespace prsynth {

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Iso3 translation(const Vec3& t) {
  Iso3 iso = Iso3::Identity();
  iso.translation() = t;
  return iso;
}

Iso3 rotation(const Mat3& r) {
  Iso3 iso = Iso3::Identity();
  iso.linear() = r;
  return iso;
}

Mat3 euler_xyz(const Vec3& abc) { return rot_x(abc.x()) * rot_y(abc.y()) * rot_z(abc.z()); }

Mat3 euler_rate_map(const Vec3& abc) {
  const Mat3 rx = rot_x(abc.x());
  Mat3 t;
  t.col(0) = Vec3::UnitX();
  t.col(1) = rx * Vec3::UnitY();
  t.col(2) = rx * rot_y(abc.y()) * Vec3::UnitZ();
  return t;
}

Vec3 euler_rate_map_dot(const Vec3& abc, const Vec3& rates) {
  const Mat3 rx = rot_x(abc.x());
  const Vec3 col1 = rx * Vec3::UnitY();
  const Vec3 col2 = rx * rot_y(abc.y()) * Vec3::UnitZ();
  const Vec3 w_a = rates.x() * Vec3::UnitX();
  const Vec3 w_ab = w_a + rates.y() * col1;
  return rates.y() * w_a.cross(col1) + rates.z() * w_ab.cross(col2);
}

Vec3 so3_log(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Mat3 so3_left_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  double coeff;
  if (theta < 1e-6) {
    coeff = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    // singular at theta = pi; only reached far from convergence
    const double th = std::min(theta, kPi - 1e-6);
    coeff = 1.0 / (th * th) - (1.0 + std::cos(th)) / (2.0 * th * std::sin(th));
  }
  return Mat3::Identity() - 0.5 * k + coeff * k * k;
}

}  // namespace prsynth
