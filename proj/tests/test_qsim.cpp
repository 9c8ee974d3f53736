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
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "adrq/qsim.hpp"

namespace adrq::qsim {
namespace {

std::vector<Complex> random_amplitudes(std::mt19937_64 &rng, std::size_t dim) {
  std::normal_distribution<double> nd;
  std::vector<Complex> v(dim);
  double n2 = 0;
  for (auto &x : v) {
    x = {nd(rng), nd(rng)};
    n2 += std::norm(x);
  }
  for (auto &x : v)
    x /= std::sqrt(n2);
  return v;
}

Register reg(std::size_t offset, std::size_t size) { return {"r", offset, size}; }

TEST(Layout, OrderedDisjointRegisters) {
  RegisterLayout l;
  l.add("value", 1);
  l.add("column", 2);
  l.add("system", 3);
  EXPECT_EQ(l.total_qubits(), 6u);
  EXPECT_EQ(l.at("column").offset, 1u);
  EXPECT_EQ(l.at("system").qubit(2), 5u);
  EXPECT_THROW(l.add("value", 1), std::invalid_argument);
  EXPECT_THROW(l.add("big", 20), std::length_error);
  EXPECT_THROW(l.at("nope"), std::out_of_range);
}

TEST(Gates, HadamardOnZero) {
  StateVector s(1);
  apply_gate(s, {Hadamard{0}, {}});
  EXPECT_NEAR(s.amplitudes()[0].real(), 1 / std::sqrt(2.0), 1e-16);
  EXPECT_NEAR(s.amplitudes()[1].real(), 1 / std::sqrt(2.0), 1e-16);
}

TEST(Gates, RyRotatesZero) {
  StateVector s(1);
  apply_gate(s, {Ry{0, 0.8}, {}});
  EXPECT_NEAR(s.amplitudes()[0].real(), std::cos(0.4), 1e-16);
  EXPECT_NEAR(s.amplitudes()[1].real(), std::sin(0.4), 1e-16);
}

TEST(Gates, QubitZeroIsMostSignificant) {
  StateVector s(3);
  apply_gate(s, {PauliX{0}, {}});
  EXPECT_EQ(s.amplitudes()[4], Complex(1.0, 0.0));
}

TEST(Gates, NegativeControlOnMismatchIsIdentity) {
  StateVector s = StateVector::basis(2, 0b10);
  apply_gate(s, {Ry{1, 1.0}, {{0, false}}});
  EXPECT_EQ(s.amplitudes()[0b10], Complex(1.0, 0.0));
  apply_gate(s, {Ry{1, std::numbers::pi}, {{0, true}}});
  EXPECT_NEAR(std::abs(s.amplitudes()[0b11] - 1.0), 0.0, 1e-15);
}

TEST(Gates, ShiftMatchesIncrementCascade) {
  // Increment on 3 qubits with qubit 0 as MSB: flip q0 if q1 q2 set, flip q1
  // if q2 set, flip q2.
  const std::vector<Gate> cascade = {
      {PauliX{0}, {{1, true}, {2, true}}},
      {PauliX{1}, {{2, true}}},
      {PauliX{2}, {}},
  };
  const Eigen::MatrixXcd expected = to_dense(3, cascade);
  const Eigen::MatrixXcd shift = to_dense(3, {{CyclicShift{reg(0, 3), +1, 1}, {}}});
  EXPECT_TRUE(shift.isApprox(expected));
  for (int c = 0; c < 8; ++c)
    EXPECT_EQ(shift((c + 1) % 8, c), Complex(1.0, 0.0));
  const Eigen::MatrixXcd back = to_dense(3, {{CyclicShift{reg(0, 3), -1, 1}, {}}});
  EXPECT_TRUE((back * shift).isApprox(Eigen::MatrixXcd::Identity(8, 8)));
}

TEST(Gates, ShiftPowerOfRegisterSizeIsIdentity) {
  for (std::size_t k = 1; k <= 4; ++k) {
    std::vector<Gate> gates(std::size_t{1} << k, Gate{CyclicShift{reg(1, k), +1, 1}, {}});
    EXPECT_TRUE(to_dense(k + 1, gates).isApprox(Eigen::MatrixXcd::Identity(2 << k, 2 << k)));
    EXPECT_TRUE(to_dense(k + 1, {{CyclicShift{reg(1, k), -1, std::uint64_t{1} << k}, {}}})
                    .isApprox(Eigen::MatrixXcd::Identity(2 << k, 2 << k)));
  }
}

TEST(Gates, PermutationActsOnRegister) {
  StateVector s = StateVector::basis(3, 0b101);
  apply_gate(s, {Permutation{reg(1, 2), {3, 2, 1, 0}}, {}});
  EXPECT_EQ(s.amplitudes()[0b110], Complex(1.0, 0.0));
  EXPECT_THROW(apply_gate(s, {Permutation{reg(1, 2), {0, 0, 1, 2}}, {}}), std::invalid_argument);
  EXPECT_THROW(apply_gate(s, {Permutation{reg(1, 2), {0, 1}}, {}}), std::invalid_argument);
}

TEST(Gates, InvalidIndicesRejected) {
  StateVector s(2);
  EXPECT_THROW(apply_gate(s, {Hadamard{2}, {}}), std::out_of_range);
  EXPECT_THROW(apply_gate(s, {Hadamard{0}, {{0, true}}}), std::invalid_argument);
  EXPECT_THROW(apply_gate(s, {PauliX{0}, {{1, true}, {1, false}}}), std::invalid_argument);
  EXPECT_THROW(apply_gate(s, {CyclicShift{reg(1, 2), +1, 1}, {}}), std::out_of_range);
  EXPECT_THROW(apply_gate(s, {CyclicShift{reg(0, 1), +1, 1}, {{0, true}}}), std::invalid_argument);
  EXPECT_THROW(apply_gate(s, {CyclicShift{reg(0, 1), 2, 1}, {}}), std::invalid_argument);
}

TEST(Gates, EveryGateIsUnitary) {
  const std::vector<Gate> gates = {
      {Hadamard{2}, {{0, true}, {4, false}}},
      {PauliX{1}, {{3, true}}},
      {Ry{0, 1.234}, {{1, false}, {2, true}}},
      {CyclicShift{reg(2, 3), +1, 3}, {{0, true}}},
      {CyclicShift{reg(1, 4), -1, 1}, {}},
      {Permutation{reg(3, 2), {2, 0, 3, 1}}, {{1, true}}},
  };
  for (const auto &g : gates) {
    const Eigen::MatrixXcd u = to_dense(5, {g});
    EXPECT_LT((u.adjoint() * u - Eigen::MatrixXcd::Identity(32, 32)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gates, NormPreservedAndLinear) {
  std::mt19937_64 rng(13);
  const std::vector<Gate> circuit = {
      {Hadamard{0}, {}}, {Ry{3, 0.7}, {{0, true}}}, {CyclicShift{reg(1, 3), +1, 1}, {{0, false}}},
      {PauliX{4}, {{1, true}, {2, false}}}, {Hadamard{2}, {}}};
  const auto a = random_amplitudes(rng, 32), b = random_amplitudes(rng, 32);
  const Complex alpha{0.3, -0.4}, beta{0.5, 0.2};
  std::vector<Complex> mix(32);
  for (int i = 0; i < 32; ++i)
    mix[i] = alpha * a[i] + beta * b[i];
  StateVector sa(5, a), sb(5, b), sm(5, mix);
  apply_circuit(sa, circuit);
  apply_circuit(sb, circuit);
  apply_circuit(sm, circuit);
  EXPECT_NEAR(sa.norm(), 1.0, 1e-12);
  for (int i = 0; i < 32; ++i)
    EXPECT_LT(std::abs(sm.amplitudes()[i] - (alpha * sa.amplitudes()[i] + beta * sb.amplitudes()[i])), 1e-13);
}

TEST(Postselect, ProductState) {
  std::mt19937_64 rng(19);
  RegisterLayout l;
  l.add("anc", 1);
  l.add("system", 3);
  auto phi = random_amplitudes(rng, 8);
  std::vector<Complex> amps(16, 0.0);
  std::copy(phi.begin(), phi.end(), amps.begin());
  const PostselectResult r = postselect(StateVector(4, amps), l, {{"anc", 0}});
  EXPECT_NEAR(r.probability, 1.0, 1e-14);
  for (int i = 0; i < 8; ++i)
    EXPECT_EQ(r.residual[i], phi[i]);
}

TEST(Postselect, UniformStateHalf) {
  RegisterLayout l;
  l.add("a", 1);
  l.add("b", 1);
  StateVector s(2);
  apply_gate(s, {Hadamard{0}, {}});
  apply_gate(s, {Hadamard{1}, {}});
  const PostselectResult r = postselect(s, l, {{"b", 0}});
  EXPECT_NEAR(r.probability, 0.5, 1e-15);
  ASSERT_EQ(r.residual.size(), 2u);
  const PostselectResult none = postselect(StateVector::basis(2, 3), l, {{"a", 0}, {"b", 0}});
  EXPECT_EQ(none.probability, 0.0);
  EXPECT_THROW(postselect(s, l, {{"a", 2}}), std::out_of_range);
}

TEST(StateVector, Construction) {
  EXPECT_THROW(StateVector(25), std::length_error);
  EXPECT_THROW(StateVector(2, std::vector<Complex>(3)), std::invalid_argument);
  EXPECT_THROW(StateVector::basis(2, 4), std::out_of_range);
  EXPECT_THROW(to_dense(13, {}), std::length_error);
}

}  // namespace
}  // namespace adrq::qsim
