#include "omnirotor/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "omnirotor/error.hpp"

namespace omnirotor {

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

RotationMatrix RotationMatrix::from_matrix(const Mat3& m, double tol) {
  if (!is_rotation(m, tol)) {
    throw Error(ErrorCode::DegenerateInput, "matrix is not a rotation");
  }
  return RotationMatrix(m, Trusted{});
}

RotationMatrix RotationMatrix::about_x(double angle) {
  return about_axis(Vec3::UnitX(), angle);
}

RotationMatrix RotationMatrix::about_y(double angle) {
  return about_axis(Vec3::UnitY(), angle);
}

RotationMatrix RotationMatrix::about_z(double angle) {
  return about_axis(Vec3::UnitZ(), angle);
}

RotationMatrix RotationMatrix::about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle)) {
    throw Error(ErrorCode::InvalidArgument, "rotation axis must be nonzero and finite");
  }
  const Vec3 u = axis / n;
  // exp_so3 needs dt >= 0; fold the sign into the axis.
  return angle >= 0.0 ? exp_so3(u, angle) : exp_so3(-u, -angle);
}

Mat3 wedge(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m, double tol) {
  if (!((m + m.transpose()).norm() <= tol)) {
    throw Error(ErrorCode::NonSkewInput, "matrix is not skew-symmetric");
  }
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

RotationMatrix exp_so3(const Vec3& omega, double dt) {
  if (dt < 0.0) throw Error(ErrorCode::InvalidArgument, "exp_so3 requires dt >= 0");
  const Vec3 phi = omega * dt;
  const double theta = phi.norm();
  const Mat3 k = wedge(phi);
  double a;  // sin(theta) / theta
  double b;  // (1 - cos(theta)) / theta^2
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return RotationMatrix(Mat3::Identity() + a * k + b * k * k, RotationMatrix::Trusted{});
}

RotationMatrix renormalize(const Mat3& approx) {
  if (!approx.allFinite() || approx.determinant() <= 0.0) {
    throw Error(ErrorCode::DegenerateInput, "renormalize requires det > 0");
  }
  Eigen::JacobiSVD<Mat3> svd(approx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (s(2) <= 1e-12 * s(0)) {
    throw Error(ErrorCode::DegenerateInput, "renormalize input is rank deficient");
  }
  return RotationMatrix(svd.matrixU() * svd.matrixV().transpose(), RotationMatrix::Trusted{});
}

double psi(const RotationMatrix& r, const RotationMatrix& r_d) {
  const double value = 0.5 * (3.0 - (r_d.matrix().transpose() * r.matrix()).trace());
  return std::clamp(value, 0.0, 2.0);
}

Vec3 attitude_error(const RotationMatrix& r, const RotationMatrix& r_d) {
  const Mat3 a = r_d.matrix().transpose() * r.matrix();
  return 0.5 * vee(a - a.transpose());
}

Vec3 angular_velocity_error(const Vec3& omega, const RotationMatrix& r,
                            const RotationMatrix& r_d, const Vec3& omega_d) {
  return omega - r.matrix().transpose() * (r_d.matrix() * omega_d);
}

}  // namespace omnirotor
