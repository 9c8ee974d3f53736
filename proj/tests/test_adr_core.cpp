// Copyright 2026 The adrq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "adrq/adr_core.hpp"

namespace adrq {
namespace {

AdrParams make_params(std::size_t n, double d, double u, double a, double b, double dt = 0.01) {
  AdrParams p;
  p.n_sites = n;
  p.diffusion = d;
  p.velocity = ConstantVelocity{u};
  p.linear_rate = a;
  p.quadratic_rate = b;
  p.dt = dt;
  return p;
}

// Pointwise right-hand side with a site-resolved velocity, written directly
// from the product-rule central difference.
Eigen::VectorXd rhs_oracle(const AdrParams &p, const std::vector<double> &u,
                           const Eigen::VectorXd &phi) {
  const auto n = static_cast<long>(p.n_sites);
  Eigen::VectorXd out(n);
  for (long j = 0; j < n; ++j) {
    const long l = (j - 1 + n) % n, r = (j + 1) % n;
    const double lap = (phi[r] - 2 * phi[j] + phi[l]) / (p.dx * p.dx);
    const double grad_phi = (phi[r] - phi[l]) / (2 * p.dx);
    const double grad_u = (u[r] - u[l]) / (2 * p.dx);
    out[j] = p.diffusion * lap - u[j] * grad_phi - grad_u * phi[j] - p.linear_rate * phi[j];
  }
  return out;
}

// Classical RK4 on dphi/dt = -a phi + b phi^2.
double logistic_rk4(double phi0, double a, double b, double t, std::size_t steps) {
  const auto f = [a, b](double y) { return -a * y + b * y * y; };
  const double h = t / static_cast<double>(steps);
  double y = phi0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

Eigen::VectorXd random_field(std::mt19937_64 &rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(static_cast<long>(n));
  for (auto &x : v)
    x = u(rng);
  return v;
}

TEST(LinearMatrix, DiscreteLaplacianIsCirculant) {
  const Eigen::MatrixXd a = Eigen::MatrixXd(build_linear_matrix(make_params(4, 1, 0, 0, 0)));
  Eigen::MatrixXd expected(4, 4);
  expected << -2, 1, 0, 1,
               1, -2, 1, 0,
               0, 1, -2, 1,
               1, 0, 1, -2;
  EXPECT_EQ(a, expected);
}

TEST(LinearMatrix, AdvectionSplitsOffDiagonals) {
  const Eigen::MatrixXd a = Eigen::MatrixXd(build_linear_matrix(make_params(4, 1, 1, 1, 0)));
  for (int j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(a(j, j), -3.0);
    EXPECT_DOUBLE_EQ(a(j, (j + 3) % 4), 1.5);
    EXPECT_DOUBLE_EQ(a(j, (j + 1) % 4), 0.5);
  }
  EXPECT_DOUBLE_EQ(a(0, 3), 1.5);
  EXPECT_DOUBLE_EQ(a(3, 0), 0.5);
}

TEST(LinearMatrix, RowSumsEqualMinusA) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial);
    const double a = u(rng);
    const Eigen::MatrixXd m =
        Eigen::MatrixXd(build_linear_matrix(make_params(n, u(rng), u(rng) - 1.0, a, 0)));
    for (long j = 0; j < m.rows(); ++j)
      EXPECT_NEAR(m.row(j).sum(), -a, 1e-14);
  }
}

TEST(LinearMatrix, TwoSitesMergeNeighbours) {
  const Eigen::MatrixXd a = Eigen::MatrixXd(build_linear_matrix(make_params(2, 1, 1, 1, 0)));
  EXPECT_DOUBLE_EQ(a(0, 0), -3.0);
  EXPECT_DOUBLE_EQ(a(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(a(1, 0), 2.0);
}

TEST(LinearMatrix, RejectsProfile) {
  AdrParams p = make_params(4, 1, 0, 1, 0);
  p.velocity = VelocityProfile{{0, 1, 0, -1}};
  EXPECT_THROW(build_linear_matrix(p), std::invalid_argument);
}

TEST(LinearMatrixProfile, ConstantProfileMatchesConstantCase) {
  AdrParams p = make_params(7, 0.8, 0.3, 1.2, 0);
  const Eigen::MatrixXd constant = Eigen::MatrixXd(build_linear_matrix(p));
  p.velocity = VelocityProfile{std::vector<double>(7, 0.3)};
  EXPECT_TRUE(Eigen::MatrixXd(build_linear_matrix_profile(p)).isApprox(constant, 1e-15));
}

TEST(LinearMatrixProfile, FluxCorrectionOnDiagonal) {
  AdrParams p = make_params(4, 1, 0, 1, 0);
  p.velocity = VelocityProfile{{0, 1, 0, -1}};
  const Eigen::MatrixXd a = Eigen::MatrixXd(build_linear_matrix_profile(p));
  EXPECT_DOUBLE_EQ(a(0, 0), -4.0);
}

TEST(LinearMatrixProfile, MatchesPointwiseStencil) {
  std::mt19937_64 rng(11);
  AdrParams p = make_params(20, 1, 0, 1, 0);
  const VelocityProfile prof = gaussian_velocity_profile(20, 1.0, 2.5);
  p.velocity = prof;
  const SparseMatrix a = build_linear_matrix_profile(p);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd phi = random_field(rng, 20);
    EXPECT_LT((a * phi - rhs_oracle(p, prof.values, phi)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(LinearMatrixProfile, LengthMismatchThrows) {
  AdrParams p = make_params(4, 1, 0, 1, 0);
  p.velocity = VelocityProfile{{0, 1, 0}};
  EXPECT_THROW(build_linear_matrix_profile(p), std::invalid_argument);
}

TEST(GaussianProfile, PeaksAtCentre) {
  const VelocityProfile prof = gaussian_velocity_profile(20, 1.5, 2.5);
  ASSERT_EQ(prof.values.size(), 20u);
  EXPECT_DOUBLE_EQ(prof.values[10], 1.5);
  EXPECT_NEAR(prof.values[12], 1.5 * std::exp(-4.0 / 12.5), 1e-15);
  EXPECT_DOUBLE_EQ(prof.values[9], prof.values[11]);
}

TEST(Params, ValidationRejectsBadValues) {
  EXPECT_THROW(make_params(4, -1, 0, 1, 0).validate(), std::invalid_argument);
  EXPECT_THROW(make_params(4, 1, 0, 1, 0, 0.0).validate(), std::invalid_argument);
  EXPECT_THROW(make_params(0, 1, 0, 1, 0).validate(), std::invalid_argument);
  EXPECT_THROW(make_params(4, 1, 0, 1, -0.1).validate(), std::invalid_argument);
  EXPECT_NO_THROW(make_params(4, 1, 0, 0, 0).validate());
}

TEST(DerivedNumbers, LambdaIdentities) {
  const AdrParams p = make_params(20, 1, 1, 1, 0.6);
  const CourantNumbers g = courant_numbers(p);
  EXPECT_DOUBLE_EQ(g.diffusion, 0.01);
  EXPECT_DOUBLE_EQ(g.advection, 0.01);
  EXPECT_DOUBLE_EQ(g.reaction, 0.01);
  const DerivedNumbers d = derived_numbers(g);
  EXPECT_NEAR(d.lambda1 + d.lambda2, 2 * g.diffusion, 1e-16);
  EXPECT_NEAR(d.lambda0 + d.lambda1 + d.lambda2, 1 - g.reaction, 1e-16);
  EXPECT_DOUBLE_EQ(d.peclet_cell, 1.0);
  EXPECT_DOUBLE_EQ(d.damkohler_adv, 1.0);
}

TEST(DerivedNumbers, LambdasMatchOnePlusDtA) {
  const AdrParams p = make_params(6, 0.7, 0.4, 1.3, 0, 0.05);
  const DerivedNumbers d = derived_numbers(p);
  const Eigen::MatrixXd l =
      Eigen::MatrixXd::Identity(6, 6) + p.dt * Eigen::MatrixXd(build_linear_matrix(p));
  EXPECT_NEAR(l(2, 2), d.lambda0, 1e-15);
  EXPECT_NEAR(l(2, 3), d.lambda1, 1e-15);
  EXPECT_NEAR(l(2, 1), d.lambda2, 1e-15);
}

TEST(BoxField, CentredBox) {
  const LatticeField phi = box_field(20, {1.0, 5});
  EXPECT_DOUBLE_EQ(phi.sum(), 5.0);
  for (int j = 8; j < 13; ++j)
    EXPECT_DOUBLE_EQ(phi[j], 1.0);
  EXPECT_DOUBLE_EQ(phi[7], 0.0);
  EXPECT_DOUBLE_EQ(phi[13], 0.0);
  EXPECT_THROW(box_field(4, {1.0, 5}), std::invalid_argument);
}

TEST(EulerStep, PureDecay) {
  const AdrParams p = make_params(5, 0, 0, 1, 0);
  const LatticeField next = euler_step_nonlinear(LatticeField::Ones(5), p);
  for (double v : next)
    EXPECT_DOUBLE_EQ(v, 1.0 - p.dt);
}

TEST(EulerStep, SingleSiteLogistic) {
  const AdrParams p = make_params(1, 0, 0, 1, 0.6);
  EXPECT_NEAR(euler_step_nonlinear(LatticeField::Ones(1), p)[0], 0.996, 1e-15);
}

TEST(EulerStep, PeriodicEquivariance) {
  std::mt19937_64 rng(3);
  const AdrParams p = make_params(12, 1, 0.7, 1, 0.6);
  const NonlinearEuler euler(p);
  const LatticeField phi = random_field(rng, 12);
  LatticeField shifted(12);
  for (int j = 0; j < 12; ++j)
    shifted[(j + 5) % 12] = phi[j];
  const LatticeField a = euler.step(phi);
  const LatticeField b = euler.step(shifted);
  for (int j = 0; j < 12; ++j)
    EXPECT_NEAR(b[(j + 5) % 12], a[j], 1e-15);
}

TEST(EulerStep, MassConservedWithoutReaction) {
  std::mt19937_64 rng(5);
  AdrParams p = make_params(16, 1, 0.9, 0, 0);
  LatticeField phi = random_field(rng, 16);
  const NonlinearEuler euler(p);
  for (int s = 0; s < 100; ++s) {
    const double before = phi.sum();
    phi = euler.step(phi);
    EXPECT_NEAR(phi.sum(), before, 1e-12);
  }
  p.velocity = gaussian_velocity_profile(16, 1.0, 2.0);
  const NonlinearEuler profile(p);
  const double before = phi.sum();
  EXPECT_NEAR(profile.step(phi).sum(), before, 1e-12);
}

TEST(EulerStep, LinearCaseIsOnePlusDtA) {
  std::mt19937_64 rng(9);
  const AdrParams p = make_params(10, 1, 1, 1, 0);
  const LatticeField phi = random_field(rng, 10);
  const Eigen::MatrixXd l =
      Eigen::MatrixXd::Identity(10, 10) + p.dt * Eigen::MatrixXd(build_linear_matrix(p));
  EXPECT_LT((euler_step_nonlinear(phi, p) - l * phi).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Logistic, ExactBasics) {
  EXPECT_DOUBLE_EQ(*logistic_exact(0.8, 1.0, 0.6, 0.0), 0.8);
  EXPECT_NEAR(*logistic_exact(0.8, 1.3, 0.0, 2.0), 0.8 * std::exp(-2.6), 1e-15);
  EXPECT_FALSE(logistic_exact(2.0, 1.0, 1.0, 5.0).has_value());
  EXPECT_THROW(logistic_exact(1.0, 0.0, 0.6, 1.0), std::invalid_argument);
}

TEST(Logistic, ExactMatchesRk4) {
  for (double t : {0.5, 1.0, 3.0, 10.0})
    EXPECT_NEAR(*logistic_exact(1.0, 1.0, 0.6, t), logistic_rk4(1.0, 1.0, 0.6, t, 20000), 1e-8);
}

TEST(Logistic, TruncatedZeroOrderIsDecay) {
  EXPECT_DOUBLE_EQ(logistic_carleman_truncated(1.0, 1.0, 0.6, 2.0, 0), std::exp(-2.0));
}

TEST(Logistic, TruncatedMatchesCarlemanOde) {
  // Single-site hierarchy y_k' = -k a y_k + k b y_{k+1}, k = 1..6, y_7 = 0,
  // integrated with RK4 at h = 1e-5. Order 5 of the closed form is y_1.
  const double a = 1.0, b = 0.6, t_end = 2.0, h = 1e-5;
  constexpr int kBlocks = 6;
  using Vec = Eigen::Matrix<double, kBlocks, 1>;
  const auto f = [&](const Vec &y) {
    Vec d;
    for (int k = 1; k <= kBlocks; ++k)
      d[k - 1] = -k * a * y[k - 1] + (k < kBlocks ? k * b * y[k] : 0.0);
    return d;
  };
  Vec y = Vec::Ones();
  const auto steps = static_cast<int>(std::lround(t_end / h));
  for (int s = 0; s < steps; ++s) {
    const Vec k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  EXPECT_NEAR(y[0], logistic_carleman_truncated(1.0, a, b, t_end, 5), 1e-6);
}

TEST(Logistic, TruncationErrorMonotoneAndBounded) {
  const double r = 0.6;
  double previous = 1.0;
  for (std::size_t k = 1; k <= 20; ++k) {
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double t = 0.01 * i;
      const double exact = *logistic_exact(1.0, 1.0, r, t);
      worst = std::max(worst, std::abs(exact - logistic_carleman_truncated(1.0, 1.0, r, t, k)) / exact);
    }
    EXPECT_LT(worst, previous);
    EXPECT_LE(worst, std::pow(r, static_cast<double>(k + 1)) / (1 - r));
    previous = worst;
  }
}

}  // namespace
}  // namespace adrq
