#pragma once

// Lyapunov certificates for the translational and rotational tracking
// error dynamics, plus a checker that replays a simulated trace against
// the certified exponential envelope.

#include <optional>
#include <vector>

#include "omnirotor/geometry.hpp"

namespace omnirotor {

/// Eigenvalue floor used for positive definiteness.
inline constexpr double kPositiveDefiniteFloor = 1e-12;

/// Symmetrizes, then requires every eigenvalue > kPositiveDefiniteFloor.
bool is_positive_definite(const Mat3& m);
double min_eigenvalue(const Mat3& m);
double max_eigenvalue(const Mat3& m);

/// Bounds for V1 = 1/2 kp|e_p|^2 + 1/2 m|e_v|^2 + 1/2 alpha|e_F|^2 + c1 e_p.e_v
/// in z1 = [|e_p|, |e_v|, |e_F|]:
///   z1'M11 z1 <= V1 <= z1'M12 z1,   dV1/dt <= -z1'W1 z1.
struct TranslationalCertificate {
  double c1 = 0.0;
  Mat3 m11 = Mat3::Zero();
  Mat3 m12 = Mat3::Zero();
  Mat3 w1 = Mat3::Zero();
  bool valid = false;
  double decay_rate = 0.0;  // lambda_min(W1) / lambda_max(M12), 0 when invalid
};

/// Rotational analogue in z2 = [|e_R|, |e_omega|, |e_M|], valid while
/// Psi(R, Rd) <= psi_bar < 2.
struct RotationalCertificate {
  double c2 = 0.0;
  double psi_bar = 0.0;
  double lambda_min = 0.0;  // of J
  double lambda_max = 0.0;
  Mat3 m21 = Mat3::Zero();
  Mat3 m22 = Mat3::Zero();
  Mat3 w2 = Mat3::Zero();
  bool valid = false;
  double decay_rate = 0.0;
};

double v1(const Vec3& e_p, const Vec3& e_v, const Vec3& e_f, double kp, double mass,
          double alpha, double c1);

/// V2 = 1/2 e_w.J e_w + kR Psi + 1/2 alpha|e_M|^2 + c2 e_R.e_w
double v2(const Vec3& e_r, const Vec3& e_omega, const Vec3& e_m, double psi_value, double k_r,
          const Mat3& inertia, double alpha, double c2);

TranslationalCertificate build_translational_certificate(double kp, double kv, double c1,
                                                         double mass, double alpha);

/// Throws InvalidArgument unless 0 <= psi_bar < 2.
///
/// W2 bounds the cross terms of dV2/dt from above:
///   -c2 kR e_R.J^-1 e_R <= -(c2 kR / lambda_max)|e_R|^2
///   -c2 kw e_R.J^-1 e_w <=  (c2 kw / lambda_min)|e_R||e_w|
///    c2 e_R.J^-1 e_M    <=  (c2 / lambda_min)|e_R||e_M|
/// so every off-diagonal entry is non-positive, as in W1.
RotationalCertificate build_rotational_certificate(double k_r, double k_omega, double c2,
                                                   const Mat3& inertia, double alpha,
                                                   double psi_bar);

/// Values along a simulated trajectory.
struct LyapunovTrace {
  std::vector<double> t;
  std::vector<double> v1;
  std::vector<double> v2;
  std::vector<double> v;
  std::vector<Vec3> z1;
  std::vector<Vec3> z2;
  std::vector<double> psi;
};

struct DecayReport {
  bool certified = false;  // both certificates valid
  double beta = 0.0;       // min of the two certified decay rates [1/s]
  double envelope_slack = 1.05;

  bool monotone_ok = true;
  std::optional<double> first_monotone_violation;  // time [s]
  bool envelope_ok = true;
  std::optional<double> first_envelope_violation;
  double worst_envelope_ratio = 0.0;  // max V(t) / (V(0) e^{-beta t})

  bool passed() const { return certified && monotone_ok && envelope_ok; }
};

/// Checks (a) V non-increasing per step within 1e-6 max(V) plus a slack of
/// 1% of dt |dV/dt|, and (b) V(t) <= 1.05 V(0) exp(-beta t).
DecayReport verify_decay(const LyapunovTrace& trace, const TranslationalCertificate& translational,
                         const RotationalCertificate& rotational);

}  // namespace omnirotor
