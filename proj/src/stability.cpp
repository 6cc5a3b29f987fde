#include "omnirotor/stability.hpp"

#include <algorithm>
#include <cmath>

#include "omnirotor/error.hpp"

namespace omnirotor {

namespace {

Vec3 eigenvalues(const Mat3& m) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Mat3>(sym, Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

double min_eigenvalue(const Mat3& m) { return eigenvalues(m).minCoeff(); }
double max_eigenvalue(const Mat3& m) { return eigenvalues(m).maxCoeff(); }

bool is_positive_definite(const Mat3& m) {
  return m.allFinite() && min_eigenvalue(m) > kPositiveDefiniteFloor;
}

double v1(const Vec3& e_p, const Vec3& e_v, const Vec3& e_f, double kp, double mass,
          double alpha, double c1) {
  return 0.5 * kp * e_p.squaredNorm() + 0.5 * mass * e_v.squaredNorm() +
         0.5 * alpha * e_f.squaredNorm() + c1 * e_p.dot(e_v);
}

double v2(const Vec3& e_r, const Vec3& e_omega, const Vec3& e_m, double psi_value, double k_r,
          const Mat3& inertia, double alpha, double c2) {
  return 0.5 * e_omega.dot(inertia * e_omega) + k_r * psi_value +
         0.5 * alpha * e_m.squaredNorm() + c2 * e_r.dot(e_omega);
}

TranslationalCertificate build_translational_certificate(double kp, double kv, double c1,
                                                         double mass, double alpha) {
  TranslationalCertificate c;
  c.c1 = c1;
  c.m11 << kp, -c1, 0.0,
           -c1, mass, 0.0,
           0.0, 0.0, alpha;
  c.m11 *= 0.5;
  c.m12 << kp, c1, 0.0,
           c1, mass, 0.0,
           0.0, 0.0, alpha;
  c.m12 *= 0.5;
  c.w1 << c1 * kp / mass, -c1 * kv / (2.0 * mass), -c1 / (2.0 * mass),
          -c1 * kv / (2.0 * mass), kv - c1, -0.5,
          -c1 / (2.0 * mass), -0.5, 1.0;
  c.valid = is_positive_definite(c.m11) && is_positive_definite(c.m12) &&
            is_positive_definite(c.w1);
  c.decay_rate = c.valid ? min_eigenvalue(c.w1) / max_eigenvalue(c.m12) : 0.0;
  return c;
}

RotationalCertificate build_rotational_certificate(double k_r, double k_omega, double c2,
                                                   const Mat3& inertia, double alpha,
                                                   double psi_bar) {
  if (!(psi_bar >= 0.0 && psi_bar < 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "psi_bar must lie in [0, 2)");
  }
  RotationalCertificate c;
  c.c2 = c2;
  c.psi_bar = psi_bar;
  const Vec3 lambdas = eigenvalues(inertia);
  c.lambda_min = lambdas.minCoeff();
  c.lambda_max = lambdas.maxCoeff();
  const double lm = c.lambda_min;
  const double lM = c.lambda_max;

  c.m21 << k_r, -c2, 0.0,
           -c2, lm, 0.0,
           0.0, 0.0, alpha;
  c.m21 *= 0.5;
  c.m22 << 2.0 * k_r / (2.0 - psi_bar), c2, 0.0,
           c2, lM, 0.0,
           0.0, 0.0, alpha;
  c.m22 *= 0.5;
  c.w2 << c2 * k_r / lM, -c2 * k_omega / (2.0 * lm), -c2 / (2.0 * lm),
          -c2 * k_omega / (2.0 * lm), k_omega - c2, -0.5,
          -c2 / (2.0 * lm), -0.5, 1.0;
  c.valid = is_positive_definite(c.m21) && is_positive_definite(c.m22) &&
            is_positive_definite(c.w2);
  c.decay_rate = c.valid ? min_eigenvalue(c.w2) / max_eigenvalue(c.m22) : 0.0;
  return c;
}

DecayReport verify_decay(const LyapunovTrace& trace, const TranslationalCertificate& translational,
                         const RotationalCertificate& rotational) {
  if (trace.t.empty() || trace.v.size() != trace.t.size()) {
    throw Error(ErrorCode::InvalidArgument, "verify_decay needs a nonempty, consistent trace");
  }
  DecayReport report;
  report.certified = translational.valid && rotational.valid;
  report.beta = std::min(translational.decay_rate, rotational.decay_rate);

  const auto& t = trace.t;
  const auto& v = trace.v;
  const std::size_t n = v.size();
  const double v_max = *std::max_element(v.begin(), v.end());
  const double v0 = v.front();
  constexpr double kAbsoluteFloor = 1e-12;

  for (std::size_t k = 0; k < n; ++k) {
    const double envelope = report.envelope_slack * v0 * std::exp(-report.beta * (t[k] - t[0]));
    if (envelope > 0.0) {
      report.worst_envelope_ratio =
          std::max(report.worst_envelope_ratio, v[k] / (envelope / report.envelope_slack));
    }
    if (v[k] > envelope + kAbsoluteFloor && report.envelope_ok) {
      report.envelope_ok = false;
      report.first_envelope_violation = t[k];
    }
    if (k + 1 < n && report.monotone_ok) {
      const double dt = t[k + 1] - t[k];
      const std::size_t lo = k == 0 ? 0 : k - 1;
      const double rate = std::abs(v[k + 1] - v[lo]) / (t[k + 1] - t[lo]);
      const double tolerance = 1e-6 * v_max + 1e-2 * dt * rate;
      if (v[k + 1] - v[k] > tolerance) {
        report.monotone_ok = false;
        report.first_monotone_violation = t[k + 1];
      }
    }
  }
  return report;
}

}  // namespace omnirotor
