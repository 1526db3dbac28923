#include <gtest/gtest.h>

#include <random>

#include "seed6d/plant.hpp"
#include "test_support.hpp"

using namespace seed6d;

namespace {

ToolModel pen(double length = 0.1) {
  ToolModel t;
  t.name = "pen";
  t.contact_points = {Vec3(0, 0, -length)};
  return t;
}

ToolModel blade(double length = 0.1, double half_width = 0.1) {
  ToolModel t;
  t.name = "squeegee";
  t.contact_points = {Vec3(0, half_width, -length), Vec3(0, -half_width, -length)};
  return t;
}

RigidTransform gripper_at(const Vec3& p, const RollPitchYaw& rpy = {}) {
  return {rpy, p, Frame::kWorld, Frame::kGripper};
}

Vec6 coordinates(const RigidTransform& X_TC) {
  Vec6 q;
  q << X_TC.rpy().vector(), X_TC.translation();
  return q;
}

}  // namespace

TEST(Equilibrium, FreeSpaceIsUndeformed) {
  const Equilibrium eq = solve_tool_equilibrium(gripper_at(Vec3(0, 0, 1)), pen(), {}, {});
  EXPECT_LT(coordinates(eq.X_TC).norm(), 1e-14);
  EXPECT_EQ(eq.contact.normal_force, 0.0);
}

TEST(Equilibrium, HangingMassSags) {
  ToolModel tool = pen();
  tool.mass = 0.1;
  const Equilibrium eq = solve_tool_equilibrium(gripper_at(Vec3(0, 0, 1)), tool, {}, {});
  EXPECT_NEAR(eq.X_TC.translation().z(), -0.1 * 9.81 / 300.0, 1e-12);
  EXPECT_LT(eq.X_TC.rpy().vector().norm(), 1e-12);
}

// Two springs in series: bushing k_f and contact k_c.
TEST(Equilibrium, SeriesSpringClosedForm) {
  const double kf = 300.0, kc = 1e4, L = 0.1;
  for (double depth : {0.001, 0.005, 0.02}) {
    const Equilibrium eq =
        solve_tool_equilibrium(gripper_at(Vec3(0, 0, L - depth)), pen(L), {}, {});
    const double expected = kf * kc / (kf + kc) * depth;
    EXPECT_NEAR(eq.contact.normal_force, expected, 1e-9 * expected);
    EXPECT_NEAR(eq.X_TC.translation().z(), expected / kf, 1e-12);
    EXPECT_LT(eq.X_TC.rpy().vector().norm(), 1e-12);
  }
}

TEST(Equilibrium, WrenchBalanceAtSolution) {
  const StiffnessParams k(Vec3(1.5, 2, 3), Vec3(250, 300, 350));
  EnvironmentModel env;
  env.plane_tilt = 5.0 * M_PI / 180.0;
  const Equilibrium eq = solve_tool_equilibrium(
      gripper_at(Vec3(0.01, 0.02, 0.095), RollPitchYaw(0.05, -0.03, 0.2)), blade(), env, k);
  const SpatialForce bushing = stiffness_forward(eq.X_TC, k);
  EXPECT_LT((bushing.vector() - eq.contact.external_T.vector()).norm(), 1e-8);
  EXPECT_GT(eq.contact.normal_force, 0.0);
}

// Oracle: no point on a grid of perturbations around the solution has lower
// energy, over randomized scenarios.
TEST(Equilibrium, IsEnergyMinimumOnGrid) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 50; ++s) {
    const StiffnessParams k(Vec3(1.0 + u(rng) * 0.5, 2.0 + u(rng), 2.0 + u(rng)),
                            Vec3(300 + 100 * u(rng), 300 + 100 * u(rng), 300 + 100 * u(rng)));
    EnvironmentModel env;
    env.plane_tilt = 0.1 * u(rng);
    ToolModel tool = (s % 2 == 0) ? pen() : blade();
    tool.mass = 0.02 * (1.0 + u(rng));
    const RigidTransform X_WT =
        gripper_at(Vec3(0.01 * u(rng), 0.01 * u(rng), 0.1 - 0.006 - 0.004 * u(rng)),
                   RollPitchYaw(0.05 * u(rng), 0.05 * u(rng), 0.3 * u(rng)));
    const Equilibrium eq = solve_tool_equilibrium(X_WT, tool, env, k);
    const Vec6 q = coordinates(eq.X_TC);
    const double e0 = tool_energy(X_WT, eq.X_TC, tool, env, k);
    double lowest = std::numeric_limits<double>::infinity();
    for (double h : {1e-4, 1e-3}) {
      for (int a = 0; a < 6; ++a) {
        for (double sign : {-1.0, 1.0}) {
          Vec6 qp = q;
          qp[a] += sign * h;
          lowest = std::min(lowest, tool_energy(X_WT, detail::ToolEnergy::relative(qp), tool, env, k));
        }
      }
    }
    EXPECT_GE(lowest, e0 - 1e-12) << "scenario " << s;
  }
}

TEST(Equilibrium, ContactForceRisesMonotonicallyWhenLowered) {
  EnvironmentModel env;
  env.plane_tilt = 5.0 * M_PI / 180.0;
  double previous = -1.0;
  RigidTransform guess = RigidTransform::identity();
  for (int i = 0; i <= 40; ++i) {
    const double z = 0.105 - 0.0005 * i;
    const Equilibrium eq = solve_tool_equilibrium(gripper_at(Vec3(0, 0, z)), blade(), env, {}, guess);
    EXPECT_GE(eq.contact.normal_force, previous);
    previous = eq.contact.normal_force;
    guess = eq.X_TC;
  }
  EXPECT_GT(previous, 1.0);
}

TEST(Equilibrium, LevelBladeHasNoRollTorque) {
  const Equilibrium eq = solve_tool_equilibrium(gripper_at(Vec3(0, 0, 0.095)), blade(), {}, {});
  EXPECT_NEAR(eq.contact.torque_x, 0.0, 1e-9);
  EXPECT_NEAR(eq.contact.lambda[0], eq.contact.lambda[1], 1e-9);
}

// Positive roll lifts the +y blade end, so the -y end carries more load and
// the contact torque about C x comes out negative.
TEST(Equilibrium, RollTorqueOpposesGripperRoll) {
  const double roll = 2.0 * M_PI / 180.0;
  const RigidTransform X_WT = gripper_at(Vec3(0, 0, 0.097), RollPitchYaw(roll, 0, 0));
  const Equilibrium eq = solve_tool_equilibrium(X_WT, blade(), {}, {});
  EXPECT_GT(eq.contact.lambda[1], eq.contact.lambda[0]);
  EXPECT_LT(eq.contact.torque_x, 0.0);
  const ContactResult welded = welded_contact(X_WT, blade(), {}, {});
  EXPECT_LT(welded.torque_x, eq.contact.torque_x);
}

TEST(Welded, MatchesRigidGeometry) {
  const double depth = 0.002;
  const ContactResult c = welded_contact(gripper_at(Vec3(0, 0, 0.1 - depth)), pen(), {}, {});
  EXPECT_NEAR(c.normal_force, 1e4 * depth, 1e-9);
}

TEST(Plant, StepIsDeterministicForSeed) {
  PlantConfig cfg;
  cfg.tool = blade();
  cfg.environment.plane_tilt = 0.05;
  auto run = [&](std::uint64_t seed) {
    PlantState s = initial_state(gripper_at(Vec3(0, 0, 0.1)), cfg, seed);
    std::vector<double> trace;
    for (int i = 0; i < 20; ++i) {
      s = step(std::move(s), gripper_at(Vec3(0, 0, 0.1 - 0.0005 * i)), 0.004, cfg);
      trace.push_back(s.contact.normal_force);
      trace.push_back(s.X_WT.translation().x());
    }
    return trace;
  };
  EXPECT_EQ(run(7), run(7));
  EXPECT_NE(run(7), run(8));
}

TEST(Plant, NoiseFreeStepRealizesCommand) {
  PlantConfig cfg;
  cfg.tool = pen();
  cfg.repeatability_sigma = 0.0;
  PlantState s = initial_state(gripper_at(Vec3(0, 0, 0.2)), cfg, 1);
  s = step(std::move(s), gripper_at(Vec3(0.01, 0, 0.098)), 0.004, cfg);
  EXPECT_EQ(s.X_WT.translation(), Vec3(0.01, 0, 0.098));
  EXPECT_DOUBLE_EQ(s.time, 0.004);
  EXPECT_NEAR(s.contact.normal_force, 300.0 * 1e4 / (1e4 + 300.0) * 0.002, 1e-9);
  EXPECT_EQ(observe_relative_pose(s).parent(), Frame::kGripper);
}

TEST(Plant, WeldedModeKeepsRelativePoseIdentity) {
  PlantConfig cfg;
  cfg.tool = pen();
  cfg.welded = true;
  cfg.repeatability_sigma = 0.0;
  PlantState s = initial_state(gripper_at(Vec3(0, 0, 0.099)), cfg, 1);
  EXPECT_EQ(coordinates(s.X_TC), Vec6::Zero());
  EXPECT_NEAR(s.contact.normal_force, 10.0, 1e-9);
}

TEST(Plant, NonFiniteCommandThrows) {
  PlantConfig cfg;
  cfg.tool = pen();
  PlantState s = initial_state(gripper_at(Vec3(0, 0, 0.2)), cfg, 1);
  EXPECT_THROW(step(s, gripper_at(Vec3(NAN, 0, 0)), 0.004, cfg), Error);
}

TEST(StandardNormal, MomentsAreReasonable) {
  std::mt19937_64 rng(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = detail::standard_normal(rng);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}
