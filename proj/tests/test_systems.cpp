#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ergmmd/systems.hpp"
#include "support.hpp"

using namespace ergmmd;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

DynamicsModel single2d(double dt = 0.1) {
  DynamicsModel m;
  m.kind = DynamicsKind::single_integrator;
  m.state_dim = m.control_dim = 2;
  m.dt = dt;
  return m;
}

}  // namespace

TEST_CASE("dynamics step") {
  SUBCASE("single integrator") {
    DynamicsModel m = single2d();
    Eigen::VectorXd next = m.step(vec({0, 0}), vec({1, 0}));
    CHECK((next - vec({0.1, 0})).norm() == 0.0);
  }
  SUBCASE("zero control leaves the state unchanged") {
    for (DynamicsKind kind : {DynamicsKind::single_integrator,
                              DynamicsKind::joint_velocity_chain,
                              DynamicsKind::se3_twist_integrator}) {
      DynamicsModel m;
      m.kind = kind;
      m.state_dim = m.control_dim = kind == DynamicsKind::se3_twist_integrator ? 6 : 3;
      m.dt = 0.2;
      Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(m.state_dim, -1.0, 1.0);
      CHECK((m.step(x, Eigen::VectorXd::Zero(m.control_dim)) - x).norm() == 0.0);
    }
  }
  SUBCASE("double integrator hand step") {
    DynamicsModel m;
    m.kind = DynamicsKind::double_integrator;
    m.state_dim = 4;
    m.control_dim = 2;
    m.dt = 0.1;
    Eigen::VectorXd next = m.step(vec({0, 0, 1, 0}), vec({0, 0}));
    CHECK((next - vec({0.1, 0, 1, 0})).norm() < 1e-15);
    // matches the linear form x+ = A x + B u
    Eigen::VectorXd x = vec({0.3, -0.2, 0.5, 0.1}), u = vec({-1.0, 2.0});
    CHECK((m.step(x, u) - (m.state_matrix() * x + m.control_matrix() * u)).norm() < 1e-15);
  }
  SUBCASE("dimension mismatch") {
    DynamicsModel m = single2d();
    CHECK_THROWS_AS(m.step(vec({0, 0, 0}), vec({0, 0})), std::invalid_argument);
  }
}

TEST_CASE("rollout") {
  DynamicsModel m = single2d(0.5);
  SUBCASE("zero controls give a constant trajectory") {
    Trajectory traj = rollout(m, vec({1, 2}), Eigen::MatrixXd::Zero(2, 5));
    for (int t = 0; t < 5; ++t) CHECK((traj.states.col(t) - vec({1, 2})).norm() == 0.0);
  }
  SUBCASE("constant control gives an arithmetic progression") {
    Eigen::MatrixXd controls(2, 4);
    controls.colwise() = Eigen::Vector2d(1.0, -2.0);
    Trajectory traj = rollout(m, vec({0, 0}), controls);
    for (int t = 0; t < 4; ++t) {
      CHECK(traj.states(0, t) == doctest::Approx(0.5 * t));
      CHECK(traj.states(1, t) == doctest::Approx(-1.0 * t));
    }
  }
  SUBCASE("defects vanish exactly for random controls") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::MatrixXd controls(2, 8);
    for (int t = 0; t < 8; ++t) controls.col(t) = Eigen::Vector2d(uni(rng), uni(rng));
    Trajectory traj = rollout(m, vec({0.3, -0.7}), controls);
    ConstraintSet cs;
    cs.blocks.push_back(dynamics_defect_constraint(m, 8));
    auto [eq, ineq] = evaluate_constraints(cs, traj);
    CHECK(eq.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ineq.size() == 0);
  }
}

TEST_CASE("forward kinematics") {
  SUBCASE("zero configuration gives the product of offsets") {
    std::mt19937_64 rng(5);
    SerialChain chain = testing::random_chain(4, rng);
    Pose home = forward_kinematics(chain, Eigen::VectorXd::Zero(4));
    Pose expected = Pose::identity();
    for (const Joint& j : chain.joints) expected = expected * j.offset;
    expected = expected * chain.tip;
    CHECK((home.rotation - expected.rotation).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((home.translation - expected.translation).norm() < 1e-15);
  }
  SUBCASE("planar two-link geometry") {
    SerialChain chain = testing::planar_two_link(1.0, 1.0);
    Pose straight = forward_kinematics(chain, vec({0, 0}));
    CHECK((straight.translation - Vec3(2, 0, 0)).norm() < 1e-15);
    Pose bent = forward_kinematics(chain, vec({M_PI / 2, 0}));
    CHECK((bent.translation - Vec3(0, 2, 0)).norm() < 1e-12);
  }
  SUBCASE("single-joint sensitivity is bounded by the reach") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    SerialChain chain = testing::random_chain(5, rng);
    const double reach = chain.reach();
    const double delta = 1e-3;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd q(5);
      for (int i = 0; i < 5; ++i) q(i) = uni(rng);
      Pose base = forward_kinematics(chain, q);
      for (int i = 0; i < 5; ++i) {
        Eigen::VectorXd qp = q;
        qp(i) += delta;
        Pose moved = forward_kinematics(chain, qp);
        CHECK((moved.translation - base.translation).norm() <= reach * delta * 1.01);
      }
    }
  }
}

TEST_CASE("smoothness cost") {
  SUBCASE("constant trajectory costs nothing") {
    Trajectory traj;
    traj.states = Eigen::MatrixXd::Ones(2, 6);
    traj.controls = Eigen::MatrixXd::Zero(2, 6);
    CHECK(smoothness_cost(traj, 1.0) == 0.0);
  }
  SUBCASE("two states at distance one") {
    Trajectory traj;
    traj.states.resize(2, 2);
    traj.states << 0, 1, 0, 0;
    traj.controls = Eigen::MatrixXd::Zero(2, 2);
    CHECK(smoothness_cost(traj, 1.0) == doctest::Approx(1.0));
  }
  SUBCASE("gradient matches finite differences") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Trajectory traj;
    traj.states.resize(3, 5);
    for (int t = 0; t < 5; ++t)
      for (int r = 0; r < 3; ++r) traj.states(r, t) = uni(rng);
    traj.controls = Eigen::MatrixXd::Zero(3, 5);
    const double w = 0.7, h = 1e-6;
    Eigen::MatrixXd grad = smoothness_cost_gradient(traj, w);
    for (int t = 0; t < 5; ++t) {
      for (int r = 0; r < 3; ++r) {
        Trajectory work = traj;
        work.states(r, t) += h;
        double plus = smoothness_cost(work, w);
        work.states(r, t) -= 2 * h;
        double minus = smoothness_cost(work, w);
        double fd = (plus - minus) / (2 * h);
        CHECK(std::abs(grad(r, t) - fd) / std::max(std::abs(fd), 1.0) < 1e-8);
      }
    }
  }
  SUBCASE("invariant to global translation") {
    Trajectory traj;
    traj.states.resize(2, 4);
    traj.states << 0, 1, 1, 2, 0, 0, 1, 1;
    traj.controls = Eigen::MatrixXd::Zero(2, 4);
    double base = smoothness_cost(traj, 1.3);
    traj.states.colwise() += Eigen::Vector2d(5.0, -3.0);
    CHECK(smoothness_cost(traj, 1.3) == doctest::Approx(base));
  }
}

TEST_CASE("constraint evaluation") {
  DynamicsModel m = single2d();
  const int horizon = 6;
  Eigen::VectorXd lo = vec({-1, -1}), hi = vec({1, 1});

  ConstraintSet cs;
  cs.blocks.push_back(initial_state_constraint(vec({0, 0})));
  cs.blocks.push_back(dynamics_defect_constraint(m, horizon));
  cs.blocks.push_back(control_box_constraint(lo, hi, horizon));

  SUBCASE("feasible rollout satisfies everything") {
    Eigen::MatrixXd controls = Eigen::MatrixXd::Constant(2, horizon, 0.5);
    Trajectory traj = rollout(m, vec({0, 0}), controls);
    auto [eq, ineq] = evaluate_constraints(cs, traj);
    CHECK(eq.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ineq.maxCoeff() <= 0.0);
  }
  SUBCASE("control excess appears as the residual value") {
    Eigen::MatrixXd controls = Eigen::MatrixXd::Zero(2, horizon);
    controls(0, 2) = 1.5;  // exceeds the upper bound by 0.5
    Trajectory traj = rollout(m, vec({0, 0}), controls);
    auto [eq, ineq] = evaluate_constraints(cs, traj);
    (void)eq;
    CHECK(ineq.maxCoeff() == doctest::Approx(0.5));
  }
  SUBCASE("terminal condition residual") {
    ConstraintSet cs2;
    Eigen::VectorXd target = vec({3, 4});
    cs2.blocks.push_back(final_state_constraint(target, horizon));
    Trajectory traj = rollout(m, vec({0, 0}), Eigen::MatrixXd::Zero(2, horizon));
    auto [eq, ineq] = evaluate_constraints(cs2, traj);
    (void)ineq;
    CHECK((eq - (traj.states.col(horizon - 1) - target)).norm() == 0.0);
  }
  SUBCASE("jacobian-transpose products match finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Trajectory traj;
    traj.states.resize(2, horizon);
    traj.controls.resize(2, horizon);
    for (int t = 0; t < horizon; ++t) {
      traj.states.col(t) = Eigen::Vector2d(uni(rng), uni(rng));
      traj.controls.col(t) = Eigen::Vector2d(uni(rng), uni(rng));
    }
    for (const auto& block : cs.blocks) {
      Eigen::VectorXd y(block.dimension);
      for (int i = 0; i < block.dimension; ++i) y(i) = uni(rng);
      Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(2, horizon);
      Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(2, horizon);
      block.add_jacobian_transpose(traj, y, ds, dc);
      // directional finite difference of y . residual
      const double h = 1e-6;
      std::mt19937_64 rng2(13);
      Eigen::MatrixXd vs(2, horizon), vc(2, horizon);
      for (int t = 0; t < horizon; ++t) {
        std::uniform_real_distribution<double> u2(-1.0, 1.0);
        vs.col(t) = Eigen::Vector2d(u2(rng2), u2(rng2));
        vc.col(t) = Eigen::Vector2d(u2(rng2), u2(rng2));
      }
      Trajectory plus = traj, minus = traj;
      plus.states += h * vs;
      plus.controls += h * vc;
      minus.states -= h * vs;
      minus.controls -= h * vc;
      double fd = (y.dot(block.residual(plus)) - y.dot(block.residual(minus))) / (2 * h);
      double analytic = (ds.array() * vs.array()).sum() + (dc.array() * vc.array()).sum();
      CHECK(std::abs(fd - analytic) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}
