#pragma once

// SO(3) primitives used by the plant, controller and stability modules.

#include <Eigen/Dense>

namespace omnirotor {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Orthonormality and determinant tolerance for RotationMatrix.
inline constexpr double kRotationTolerance = 1e-9;
/// Absolute tolerance on ||M + M^T||_F accepted by vee().
inline constexpr double kSkewTolerance = 1e-9;

/// True when R^T R = I and det(R) = 1 within tol.
bool is_rotation(const Mat3& m, double tol = kRotationTolerance);

/// A 3x3 matrix known to lie on SO(3). Construction from an arbitrary
/// matrix is checked; the factory helpers produce valid rotations by
/// construction.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}

  static RotationMatrix identity() { return RotationMatrix(); }
  /// Throws DegenerateInput if `m` is not a rotation within `tol`.
  static RotationMatrix from_matrix(const Mat3& m, double tol = kRotationTolerance);
  static RotationMatrix about_x(double angle);
  static RotationMatrix about_y(double angle);
  static RotationMatrix about_z(double angle);
  /// Rotation by `angle` about the (normalized) `axis`.
  static RotationMatrix about_axis(const Vec3& axis, double angle);

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  RotationMatrix transpose() const { return RotationMatrix(m_.transpose(), Trusted{}); }
  RotationMatrix operator*(const RotationMatrix& rhs) const {
    return RotationMatrix(m_ * rhs.m_, Trusted{});
  }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  struct Trusted {};
  RotationMatrix(const Mat3& m, Trusted) : m_(m) {}

  friend RotationMatrix exp_so3(const Vec3& omega, double dt);
  friend RotationMatrix renormalize(const Mat3& approx);

  Mat3 m_;
};

/// Skew-symmetric matrix with wedge(v) * u == v.cross(u).
Mat3 wedge(const Vec3& v);

/// Inverse of wedge. Throws NonSkewInput when ||M + M^T||_F > tol.
Vec3 vee(const Mat3& m, double tol = kSkewTolerance);

/// Rodrigues formula for exp([omega * dt]^). dt must be non-negative.
RotationMatrix exp_so3(const Vec3& omega, double dt);

/// Nearest rotation (polar projection). Throws DegenerateInput when
/// det <= 0 or the matrix is rank deficient.
RotationMatrix renormalize(const Mat3& approx);

/// Attitude error function 0.5 * tr(I - Rd^T R), clamped to [0, 2].
double psi(const RotationMatrix& r, const RotationMatrix& r_d);

/// e_R = 0.5 * vee(Rd^T R - R^T Rd).
Vec3 attitude_error(const RotationMatrix& r, const RotationMatrix& r_d);

/// e_omega = omega - R^T Rd omega_d.
Vec3 angular_velocity_error(const Vec3& omega, const RotationMatrix& r,
                            const RotationMatrix& r_d, const Vec3& omega_d);

}  // namespace omnirotor
