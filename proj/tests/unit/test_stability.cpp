#include <doctest.h>

#include <cmath>
#include <limits>

#include "omnirotor/controller.hpp"
#include "omnirotor/sim.hpp"
#include "omnirotor/stability.hpp"
#include "test_support.hpp"

using namespace omnirotor;
using omnirotor::test::max_abs;
using omnirotor::test::random_rotation;
using omnirotor::test::random_vec;
using omnirotor::test::uniform;

namespace {
const Mat3 kInertia = 0.03 * Mat3::Identity();

double quad(const Mat3& m, const Vec3& z) { return z.dot(m * z); }
}  // namespace

TEST_CASE("positive definiteness") {
  CHECK(is_positive_definite(Mat3::Identity()));
  CHECK_FALSE(is_positive_definite(Eigen::Vector3d(1, 1, -1).asDiagonal().toDenseMatrix()));
  for (int i = 0; i < 100; ++i) {
    const Mat3 a = Mat3::Random();
    CHECK(is_positive_definite(a.transpose() * a + 1e-6 * Mat3::Identity()));
  }
  CHECK(min_eigenvalue(Eigen::Vector3d(3, 1, 2).asDiagonal().toDenseMatrix()) == doctest::Approx(1));
  CHECK(max_eigenvalue(Eigen::Vector3d(3, 1, 2).asDiagonal().toDenseMatrix()) == doctest::Approx(3));
}

TEST_CASE("Lyapunov function examples") {
  const Vec3 z = Vec3::Zero();
  CHECK(v1(z, z, z, 3.0, 1.0, 0.1, 0.1) == 0.0);
  CHECK(v1(Vec3::UnitX(), z, z, 3.0, 1.0, 0.1, 0.1) == doctest::Approx(1.5));
  CHECK(v1(Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitY(), 3.0, 2.0, 0.1, 0.1) ==
        doctest::Approx(1.5 + 1.0 + 0.05 + 0.1));
  CHECK(v2(z, z, z, 0.0, 1.0, kInertia, 0.1, 0.01) == 0.0);
  CHECK(v2(z, Vec3::UnitX(), z, 0.0, 1.0, kInertia, 0.1, 0.01) == doctest::Approx(0.015));
  CHECK(v2(Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitZ(), 0.5, 2.0, kInertia, 0.1, 0.01) ==
        doctest::Approx(0.015 + 1.0 + 0.05 + 0.01));
}

TEST_CASE("translational certificate structure") {
  const TranslationalCertificate c = build_translational_certificate(3.0, 1.0, 0.1, 1.0, 0.1);
  Mat3 m11;
  m11 << 3.0, -0.1, 0, -0.1, 1.0, 0, 0, 0, 0.1;
  CHECK(max_abs(c.m11 - 0.5 * m11) < 1e-15);
  Mat3 m12;
  m12 << 3.0, 0.1, 0, 0.1, 1.0, 0, 0, 0, 0.1;
  CHECK(max_abs(c.m12 - 0.5 * m12) < 1e-15);
  Mat3 w1;
  w1 << 0.3, -0.05, -0.05, -0.05, 0.9, -0.5, -0.05, -0.5, 1.0;
  CHECK(max_abs(c.w1 - w1) < 1e-15);
  CHECK(c.valid);
  CHECK(c.decay_rate == doctest::Approx(min_eigenvalue(w1) / max_eigenvalue(0.5 * m12)));

  const TranslationalCertificate bad = build_translational_certificate(3.0, 1.0, 1.0, 1.0, 0.1);
  CHECK_FALSE(bad.valid);
  CHECK(bad.decay_rate == 0.0);
}

TEST_CASE("rotational certificate structure") {
  const double c2 = 0.01, psi_bar = 1.9;
  const RotationalCertificate c = build_rotational_certificate(1.0, 1.0, c2, kInertia, 0.1, psi_bar);
  Mat3 m21;
  m21 << 1.0, -c2, 0, -c2, 0.03, 0, 0, 0, 0.1;
  CHECK(max_abs(c.m21 - 0.5 * m21) < 1e-15);
  Mat3 m22;
  m22 << 2.0 / (2.0 - psi_bar), c2, 0, c2, 0.03, 0, 0, 0, 0.1;
  CHECK(max_abs(c.m22 - 0.5 * m22) < 1e-13);
  CHECK(c.m21(0, 1) == c.m21(1, 0));
  CHECK(c.valid);

  // Off-diagonal entries of W2 are non-positive, like W1.
  CHECK(c.w2(0, 1) <= 0.0);
  CHECK(c.w2(0, 2) <= 0.0);
  CHECK(c.w2(1, 2) <= 0.0);

  double last = c.decay_rate;
  for (double pb : {1.99, 1.999, 1.9999, 1.99999}) {
    const RotationalCertificate near = build_rotational_certificate(1.0, 1.0, c2, kInertia, 0.1, pb);
    CHECK(near.decay_rate < last);
    last = near.decay_rate;
  }
  CHECK(last < 1e-3);
  CHECK_THROWS_AS(build_rotational_certificate(1.0, 1.0, c2, kInertia, 0.1, 2.0), Error);
  CHECK_THROWS_AS(build_rotational_certificate(1.0, 1.0, c2, kInertia, 0.1, -0.1), Error);
}

TEST_CASE("certificate validity and gain conditions agree with the reference gains") {
  const Gains g{3.0, 1.0, 1.0, 1.0};
  const auto found = find_feasible_constants(g, 1.0, kInertia, 0.1, 1.9);
  REQUIRE(found);
  const TranslationalCertificate t = build_translational_certificate(3, 1, found->c1, 1.0, 0.1);
  CHECK(t.valid);
  CHECK(validate_gains(g, found->c1, found->c2, 1.0, kInertia).translational_ok());
}

TEST_CASE("translational gain inequality implies a positive definite W1") {
  int counterexamples_to_converse = 0;
  for (int i = 0; i < 1000; ++i) {
    const double kp = uniform(0.01, 10.0), kv = uniform(0.01, 5.0), c1 = uniform(0.001, 2.0);
    const double m = uniform(0.2, 5.0);
    const Gains g{kp, kv, 1.0, 1.0};
    const bool ineq = validate_gains(g, c1, 0.01, m, kInertia).translational_ok();
    const TranslationalCertificate c = build_translational_certificate(kp, kv, c1, m, 0.1);
    if (ineq) CHECK(is_positive_definite(c.w1));
    if (!ineq && is_positive_definite(c.w1)) ++counterexamples_to_converse;
  }
  MESSAGE("converse counterexamples (W1 PD without the inequality): " << counterexamples_to_converse);
}

TEST_CASE("Lyapunov sandwich bounds on random errors") {
  const TranslationalCertificate t = build_translational_certificate(3.0, 1.0, 0.1, 1.0, 0.1);
  const RotationalCertificate r = build_rotational_certificate(1.0, 1.0, 0.01, kInertia, 0.1, 1.9);
  REQUIRE(t.valid);
  REQUIRE(r.valid);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 ep = random_vec(), ev = random_vec(), ef = random_vec();
    const Vec3 z1(ep.norm(), ev.norm(), ef.norm());
    const double val1 = v1(ep, ev, ef, 3.0, 1.0, 0.1, 0.1);
    CHECK(quad(t.m11, z1) <= val1 + 1e-12);
    CHECK(val1 <= quad(t.m12, z1) + 1e-12);

    const RotationMatrix a = random_rotation(), b = random_rotation();
    const double p = psi(a, b);
    if (p > 1.9) continue;
    const Vec3 er = attitude_error(a, b), ew = random_vec(), em = random_vec(0.1);
    const Vec3 z2(er.norm(), ew.norm(), em.norm());
    const double val2 = v2(er, ew, em, p, 1.0, kInertia, 0.1, 0.01);
    CHECK(quad(r.m21, z2) <= val2 + 1e-12);
    CHECK(val2 <= quad(r.m22, z2) + 1e-12);
  }
}

TEST_CASE("verify_decay on synthetic traces") {
  const TranslationalCertificate t = build_translational_certificate(3.0, 1.0, 0.1, 1.0, 0.1);
  const RotationalCertificate r = build_rotational_certificate(1.0, 1.0, 0.01, kInertia, 0.1, 1.9);
  const double beta = std::min(t.decay_rate, r.decay_rate);

  LyapunovTrace good;
  for (int k = 0; k <= 1000; ++k) {
    const double time = k * 1e-2;
    good.t.push_back(time);
    good.v.push_back(4.0 * std::exp(-2.0 * beta * time));
  }
  const DecayReport ok = verify_decay(good, t, r);
  CHECK(ok.certified);
  CHECK(ok.beta == doctest::Approx(beta));
  CHECK(ok.passed());
  CHECK(ok.worst_envelope_ratio <= 1.0 + 1e-12);

  LyapunovTrace bump = good;
  bump.v[500] *= 1.5;
  const DecayReport bumped = verify_decay(bump, t, r);
  CHECK_FALSE(bumped.monotone_ok);
  REQUIRE(bumped.first_monotone_violation.has_value());
  CHECK(*bumped.first_monotone_violation == doctest::Approx(5.0));
  CHECK_FALSE(bumped.passed());

  LyapunovTrace slow = good;
  for (std::size_t k = 0; k < slow.t.size(); ++k) slow.v[k] = 4.0 * std::exp(-0.5 * beta * slow.t[k]);
  const DecayReport slowed = verify_decay(slow, t, r);
  CHECK(slowed.monotone_ok);
  CHECK_FALSE(slowed.envelope_ok);
  CHECK(slowed.first_envelope_violation.has_value());

  const TranslationalCertificate invalid = build_translational_certificate(3.0, 1.0, 1.0, 1.0, 0.1);
  CHECK_FALSE(verify_decay(good, invalid, r).passed());
}

TEST_CASE("closed-loop traces respect the certificate bounds") {
  SimConfig cfg;
  cfg.duration = 3.0;
  cfg.initial.position = Vec3(0.5, -0.3, 0.2);
  cfg.initial.attitude = RotationMatrix::about_axis(Vec3(1, 1, 0), 1.0);
  cfg.initial.omega = Vec3(0.3, -0.2, 0.5);
  cfg.initial.warm_start = false;
  const VehicleParams params;
  const Gains gains{3.0, 1.0, 1.0, 1.0};
  const ScenarioResult res = run_scenario(cfg, params, gains);
  REQUIRE(res.translational);
  REQUIRE(res.rotational);
  const TranslationalCertificate& t = *res.translational;
  const RotationalCertificate& r = *res.rotational;
  const LyapunovTrace lt = res.trace.lyapunov();

  for (std::size_t k = 0; k < lt.t.size(); ++k) {
    CHECK(quad(t.m11, lt.z1[k]) <= lt.v1[k] + 1e-9);
    CHECK(lt.v1[k] <= quad(t.m12, lt.z1[k]) + 1e-9);
    if (lt.psi[k] <= r.psi_bar) {
      CHECK(quad(r.m21, lt.z2[k]) <= lt.v2[k] + 1e-9);
      CHECK(lt.v2[k] <= quad(r.m22, lt.z2[k]) + 1e-9);
    }
  }

  // dV/dt <= -z1'W1 z1 - z2'W2 z2 up to discretization error.
  const double dt = cfg.dt;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < lt.t.size(); ++k) {
    const double rate = (lt.v[k + 1] - lt.v[k - 1]) / (2 * dt);
    const double bound = -quad(t.w1, lt.z1[k]) - quad(r.w2, lt.z2[k]);
    worst = std::max(worst, rate - bound);
  }
  MESSAGE("max of dV/dt minus its certified bound: " << worst);
  CHECK(worst <= dt);
  CHECK(res.metrics.decay.has_value());
  CHECK(res.metrics.decay->passed());
}
