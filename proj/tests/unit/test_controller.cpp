#include <doctest.h>

#include <cmath>
#include <numbers>

#include "omnirotor/controller.hpp"
#include "test_support.hpp"

using namespace omnirotor;
using omnirotor::test::max_abs;
using omnirotor::test::random_rotation;
using omnirotor::test::random_vec;

namespace {
const Gains kNominalGains{3.0, 1.0, 1.0, 1.0};
const Mat3 kInertia = 0.03 * Mat3::Identity();
}  // namespace

TEST_CASE("desired force examples") {
  const RotationMatrix id;
  CHECK(max_abs(desired_force(Vec3::Zero(), Vec3::Zero(), id, Vec3::Zero(), kNominalGains, 1.0, 9.81) -
                Vec3(0, 0, 9.81)) < 1e-15);
  const RotationMatrix rx = RotationMatrix::about_x(std::numbers::pi / 2);
  CHECK(max_abs(desired_force(Vec3::Zero(), Vec3::Zero(), rx, Vec3::Zero(), kNominalGains, 1.0, 9.81) -
                Vec3(0, 9.81, 0)) < 1e-14);
  CHECK(max_abs(desired_force(Vec3::UnitX(), Vec3::Zero(), id, Vec3::Zero(), kNominalGains, 1.0, 9.81) -
                Vec3(-3, 0, 9.81)) < 1e-15);
  // Velocity and acceleration terms.
  const Vec3 f = desired_force(Vec3::Zero(), Vec3(0, 2, 0), id, Vec3(1, 0, 0), kNominalGains, 2.0, 9.81);
  CHECK(max_abs(f - Vec3(2, -2, 19.62)) < 1e-14);
}

TEST_CASE("commanded force feedforward") {
  ControllerState s;
  const Vec3 fd(1, 2, 3);
  CHECK(commanded_force(fd, s, 0.1, 1e-3) == fd);
  CHECK(commanded_force(fd, s, 0.1, 1e-3) == fd);

  ControllerState ramp;
  const Vec3 rate(5, -2, 1);
  const double dt = 1e-3, alpha = 0.07;
  for (int k = 0; k < 10; ++k) {
    const Vec3 f = fd + rate * (k * dt);
    const Vec3 cmd = commanded_force(f, ramp, alpha, dt);
    if (k == 0) {
      CHECK(cmd == f);
    } else {
      CHECK(max_abs(cmd - (f + alpha * rate)) < 1e-11);
    }
  }

  ControllerState conv{ControllerMode::Conventional};
  for (int k = 0; k < 5; ++k) {
    const Vec3 f = random_vec(10.0);
    CHECK(commanded_force(f, conv, 0.1, dt) == f);
  }
  CHECK_THROWS_AS(commanded_force(fd, s, 0.1, 0.0), Error);
}

TEST_CASE("commanded moment feedforward") {
  ControllerState s;
  const Vec3 md(0.1, -0.2, 0.3);
  CHECK(commanded_moment(md, s, 0.1, 1e-3) == md);
  CHECK(commanded_moment(md, s, 0.1, 1e-3) == md);

  ControllerState ramp;
  const Vec3 rate(0.5, 0.2, -1);
  for (int k = 0; k < 10; ++k) {
    const Vec3 m = md + rate * (k * 1e-3);
    const Vec3 cmd = commanded_moment(m, ramp, 0.1, 1e-3);
    if (k > 0) CHECK(max_abs(cmd - (m + 0.1 * rate)) < 1e-11);
  }

  ControllerState conv{ControllerMode::Conventional};
  const Vec3 m = random_vec();
  commanded_moment(random_vec(), conv, 0.1, 1e-3);
  CHECK(commanded_moment(m, conv, 0.1, 1e-3) == m);

  // Force and moment histories are independent.
  ControllerState both;
  commanded_force(Vec3(1, 1, 1), both, 0.1, 1e-3);
  CHECK(commanded_moment(md, both, 0.1, 1e-3) == md);
}

TEST_CASE("desired moment examples") {
  const RotationMatrix id;
  const Vec3 z = Vec3::Zero();
  CHECK(desired_moment(z, z, z, id, id, z, z, kNominalGains, kInertia).isZero(0.0));
  CHECK(max_abs(desired_moment(Vec3(0, 0, 0.5), z, z, id, id, z, z, kNominalGains, kInertia) -
                Vec3(0, 0, -0.5)) < 1e-15);
  CHECK(desired_moment(z, z, Vec3::UnitX(), id, id, Vec3::UnitX(), z, kNominalGains, kInertia).norm() <
        1e-15);
}

TEST_CASE("desired moment matches a hand-built oracle") {
  const Mat3 j = Eigen::Vector3d(0.02, 0.03, 0.05).asDiagonal();
  const Gains g{3.0, 1.0, 1.7, 0.6};
  for (int i = 0; i < 200; ++i) {
    const RotationMatrix r = random_rotation(), rd = random_rotation();
    const Vec3 w = random_vec(), wd = random_vec(), wdd = random_vec();
    const Vec3 e_r = attitude_error(r, rd);
    const Vec3 e_w = angular_velocity_error(w, r, rd, wd);
    const Mat3 rtrd = r.matrix().transpose() * rd.matrix();
    const Vec3 expected = -g.k_r * e_r - g.k_omega * e_w + w.cross(j * w) -
                          j * (w.cross(rtrd * wd) - rtrd * wdd);
    CHECK(max_abs(desired_moment(e_r, e_w, w, r, rd, wd, wdd, g, j) - expected) < 1e-12);
  }
}

TEST_CASE("tracking errors and control step") {
  RigidBodyState s;
  s.p = Vec3(1, 2, 3);
  s.v = Vec3(0.1, 0, 0);
  s.r = random_rotation();
  s.omega = random_vec();
  TrajectorySample d;
  d.p_d = Vec3(1, 1, 1);
  d.r_d = random_rotation();
  d.omega_d = random_vec();
  const TrackingErrors e = tracking_errors(s, d);
  CHECK(e.e_p == Vec3(0, 1, 2));
  CHECK(e.e_v == Vec3(0.1, 0, 0));
  CHECK(e.e_r == attitude_error(s.r, d.r_d));
  CHECK(e.e_omega == angular_velocity_error(s.omega, s.r, d.r_d, d.omega_d));

  VehicleParams p;
  ControllerState proposed, conventional{ControllerMode::Conventional};
  const ControlOutput a = control_step(s, d, kNominalGains, p, proposed, 1e-3);
  const ControlOutput b = control_step(s, d, kNominalGains, p, conventional, 1e-3);
  CHECK(a.force_cmd == a.force_d);
  CHECK(a.force_d == b.force_d);
  CHECK(a.moment_d == b.moment_d);

  // With alpha = 0 the two modes coincide at every step.
  p.alpha = 0.0;
  for (int k = 0; k < 5; ++k) {
    s.p += Vec3(0.01, 0, 0);
    s.r = s.r * exp_so3(s.omega, 1e-3);
    const ControlOutput x = control_step(s, d, kNominalGains, p, proposed, 1e-3);
    const ControlOutput y = control_step(s, d, kNominalGains, p, conventional, 1e-3);
    CHECK(x.force_cmd == y.force_cmd);
    CHECK(x.moment_cmd == y.moment_cmd);
  }
}

TEST_CASE("validate gains") {
  const GainReport r = validate_gains(kNominalGains, 0.1, 0.01, 1.0, kInertia);
  // (0.1 + 0.2 - 0.01) / (4 * 0.9 - 1) = 0.29 / 2.6
  CHECK(r.kp_bound == doctest::Approx(0.29 / 2.6).epsilon(1e-12));
  CHECK(r.kp_bound == doctest::Approx(0.112).epsilon(0.01));
  CHECK(r.kv_bound == doctest::Approx(0.35));
  // 0.01 / (0.03 * (4 * 0.99 - 1))
  CHECK(r.k_r_bound == doctest::Approx(0.01 / (0.03 * 2.96)).epsilon(1e-12));
  CHECK(r.valid());

  const GainReport same_c = validate_gains(kNominalGains, 0.1, 0.1, 1.0, kInertia);
  CHECK(same_c.translational_ok());
  CHECK(same_c.k_r_bound == doctest::Approx(0.1 / (0.03 * 2.6)).epsilon(1e-12));
  CHECK_FALSE(same_c.rotational_ok());

  Gains low_kv = kNominalGains;
  low_kv.kv = 0.3;
  const GainReport bad = validate_gains(low_kv, 0.1, 0.01, 1.0, kInertia);
  CHECK_FALSE(bad.kv_ok);
  CHECK_FALSE(bad.valid());

  CHECK_THROWS_AS(validate_gains(kNominalGains, 0.0, 0.01, 1.0, kInertia), Error);
  CHECK_THROWS_AS(validate_gains(kNominalGains, 0.1, -0.01, 1.0, kInertia), Error);
  Gains negative = kNominalGains;
  negative.kp = -1.0;
  CHECK_THROWS_AS(negative.validate(), Error);
}

TEST_CASE("feasible constants for the reference gains") {
  for (double alpha : {0.07, 0.1}) {
    const auto found = find_feasible_constants(kNominalGains, 1.0, kInertia, alpha, 1.9);
    REQUIRE(found.has_value());
    CHECK(found->c1 > 0.0);
    CHECK(found->c1 < kNominalGains.kv - 0.25);
    CHECK(found->c2 > 0.0);
    CHECK(found->c2 < kNominalGains.k_omega - 0.25);
    CHECK(validate_gains(kNominalGains, found->c1, found->c2, 1.0, kInertia).valid());
    CHECK(found->translational.valid);
    CHECK(found->rotational.valid);
    CHECK(found->decay_rate() > 0.0);
  }
}

TEST_CASE("feasible constants are absent for infeasible gains") {
  Gains g = kNominalGains;
  g.kv = 0.2;
  CHECK_FALSE(find_feasible_constants(g, 1.0, kInertia, 0.1, 1.9).has_value());
}
