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

/// Block-encoding circuits for one Euler step of the linear part,
/// L = 1 + dt A, and for the quadratic coupling block
///
///   Bhat = | 1   dt B |
///          | 0    1   |
///
/// acting on (u_1, u_2). Both use the sparse-access construction
///   H^m, value oracle, column oracle, H^m
/// so the encoded matrix appears, divided by 2^m, in the block where the
/// value and column ancillas start and end in |0>.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "adrq/adr_core.hpp"
#include "adrq/pauli.hpp"
#include "adrq/qsim.hpp"

namespace adrq {

/// Circulant tridiagonal L = 1 + dt A: lambda0 on the diagonal, lambda1 at
/// column j+1 and lambda2 at column j-1 (periodic).
struct ToeplitzL {
  std::size_t n_sites = 0;
  double lambda0 = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  static ToeplitzL from(std::size_t n_sites, const CourantNumbers &g) {
    const DerivedNumbers d = derived_numbers(g);
    return {n_sites, d.lambda0, d.lambda1, d.lambda2};
  }

  SparseMatrix matrix() const {
    std::vector<Triplet> e;
    const std::size_t n = n_sites;
    for (std::size_t j = 0; j < n; ++j) {
      const auto r = static_cast<int>(j);
      e.emplace_back(r, r, lambda0);
      e.emplace_back(r, static_cast<int>((j + 1) % n), lambda1);
      e.emplace_back(r, static_cast<int>((j + n - 1) % n), lambda2);
    }
    SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(e.begin(), e.end());
    return m;
  }
};

/// Identity plus the entries b dt at (i, N + iN + i), i < N. The system
/// register is padded to 2^{n'} >= N + N^2 and the padding rows also carry
/// the identity.
struct BhatOperator {
  std::size_t n_sites = 0;
  double coupling = 0.0;  // b dt

  static BhatOperator from(std::size_t n_sites, double b, double dt) {
    return {n_sites, b * dt};
  }

  std::size_t carleman_size() const { return n_sites + n_sites * n_sites; }
  std::size_t system_qubits() const { return qubits_for(carleman_size()); }
  std::size_t padded_size() const { return std::size_t{1} << system_qubits(); }

  /// Position of the u_2 entry phi_i phi_i.
  std::uint64_t diagonal_index(std::uint64_t i) const {
    return n_sites + i * n_sites + i;
  }

  SparseMatrix matrix() const {
    std::vector<Triplet> e;
    const std::size_t dim = padded_size();
    for (std::size_t j = 0; j < dim; ++j)
      e.emplace_back(static_cast<int>(j), static_cast<int>(j), 1.0);
    for (std::size_t i = 0; i < n_sites; ++i)
      e.emplace_back(static_cast<int>(i), static_cast<int>(diagonal_index(i)), coupling);
    SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setFromTriplets(e.begin(), e.end());
    m.prune(0.0);
    return m;
  }
};

/// Ry angle whose |0> amplitude equals `value`.
inline double rotation_angle(double value) {
  if (!(std::abs(value) <= 1.0))
    throw std::domain_error("matrix entry " + std::to_string(value) +
                            " has magnitude above 1 and cannot be encoded");
  return 2.0 * std::acos(value);
}

/// Sparse access description. Branch l of basis state |j> is routed to
/// |column(j, l)> with |0>-amplitude value(j, l), so the encoded matrix has
/// M(column(j, l), j) += value(j, l).
struct SparseOracleSpec {
  std::size_t sparsity = 0;
  std::size_t column_qubits = 0;  // ceil(log2 sparsity)
  std::function<std::uint64_t(std::uint64_t, std::uint64_t)> column;
  std::function<double(std::uint64_t, std::uint64_t)> value;

  double angle(std::uint64_t j, std::uint64_t l) const {
    return rotation_angle(value(j, l));
  }
};

/// c(i,0) = c(i,3) = i, c(i,1) = i+1, c(i,2) = i-1 (mod N). The l = 1 branch
/// moves amplitude down one row and so carries the sub-diagonal lambda2; the
/// duplicate l = 3 branch carries 0.
inline SparseOracleSpec oracle_spec(const ToeplitzL &l) {
  const std::size_t n = l.n_sites;
  SparseOracleSpec s;
  s.sparsity = 3;
  s.column_qubits = 2;
  s.column = [n](std::uint64_t j, std::uint64_t b) -> std::uint64_t {
    switch (b) {
      case 1: return (j + 1) % n;
      case 2: return (j + n - 1) % n;
      default: return j;
    }
  };
  s.value = [v = std::array<double, 4>{l.lambda0, l.lambda2, l.lambda1, 0.0}](
                std::uint64_t, std::uint64_t b) { return v[b & 3]; };
  return s;
}

/// Permutation used by the l = 1 branch of Bhat: swap |N + iN + i> with
/// |N + i> (i >= 1), then shift left by N. Sends N + iN + i to i.
inline std::vector<std::uint64_t> bhat_reorder(const BhatOperator &bh) {
  std::vector<std::uint64_t> map(bh.padded_size());
  for (std::uint64_t v = 0; v < map.size(); ++v)
    map[v] = v;
  for (std::uint64_t i = 1; i < bh.n_sites; ++i)
    std::swap(map[bh.diagonal_index(i)], map[bh.n_sites + i]);
  return map;
}

inline SparseOracleSpec oracle_spec(const BhatOperator &bh) {
  const std::vector<std::uint64_t> reorder = bhat_reorder(bh);
  const std::uint64_t dim = bh.padded_size();
  const std::uint64_t n = bh.n_sites;
  SparseOracleSpec s;
  s.sparsity = 2;
  s.column_qubits = 1;
  s.column = [reorder, dim, n](std::uint64_t j, std::uint64_t b) -> std::uint64_t {
    if (b == 0)
      return j;
    return (reorder[j] + dim - n) % dim;
  };
  s.value = [col = s.column, n, c = bh.coupling](std::uint64_t j, std::uint64_t b) {
    if (b == 0)
      return 1.0;
    return col(j, 1) < n ? c : 0.0;
  };
  return s;
}

/// Dense matrix described by an oracle spec over `dim` basis states.
inline Eigen::MatrixXd encoded_matrix(const SparseOracleSpec &spec, std::size_t dim) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
  const std::uint64_t branches = std::uint64_t{1} << spec.column_qubits;
  for (std::uint64_t j = 0; j < dim; ++j)
    for (std::uint64_t l = 0; l < branches; ++l)
      m(static_cast<Eigen::Index>(spec.column(j, l)), static_cast<Eigen::Index>(j)) +=
          spec.value(j, l);
  return m;
}

enum class Applicability { kPass, kBoundary, kFail };

inline const char *to_string(Applicability a) {
  switch (a) {
    case Applicability::kPass: return "pass";
    case Applicability::kBoundary: return "boundary";
    case Applicability::kFail: return "fail";
  }
  return "?";
}

struct ApplicabilityCondition {
  std::string name;
  double value = 0.0;   // |expression|
  double margin = 0.0;  // 1 - value
  Applicability status = Applicability::kPass;
};

struct ApplicabilityReport {
  CourantNumbers courant;
  DerivedNumbers derived;
  std::vector<ApplicabilityCondition> conditions;

  bool all_pass() const {
    for (const auto &c : conditions)
      if (c.status != Applicability::kPass)
        return false;
    return true;
  }
  /// Every entry fits an Ry amplitude (boundary allowed).
  bool encodable() const {
    for (const auto &c : conditions)
      if (c.status == Applicability::kFail)
        return false;
    return true;
  }
};

inline constexpr double kBoundaryTolerance = 1e-15;

/// The four strict inequalities |lambda0|, |lambda1|, |lambda2|, |1 - gamma_r| < 1.
inline ApplicabilityReport check_applicability(const CourantNumbers &g) {
  ApplicabilityReport rep;
  rep.courant = g;
  rep.derived = derived_numbers(g);
  auto add = [&](std::string name, double expr) {
    ApplicabilityCondition c;
    c.name = std::move(name);
    c.value = std::abs(expr);
    c.margin = 1.0 - c.value;
    if (std::abs(c.margin) <= kBoundaryTolerance)
      c.status = Applicability::kBoundary;
    else
      c.status = c.margin > 0.0 ? Applicability::kPass : Applicability::kFail;
    rep.conditions.push_back(std::move(c));
  };
  add("|1 - 2 gamma_d - gamma_r| < 1", rep.derived.lambda0);
  add("|gamma_d - gamma_a/2| < 1", rep.derived.lambda1);
  add("|gamma_d + gamma_a/2| < 1", rep.derived.lambda2);
  add("|1 - gamma_r| < 1", 1.0 - g.reaction);
  return rep;
}

inline ApplicabilityReport check_applicability(const AdrParams &p) {
  return check_applicability(courant_numbers(p));
}

/// Assembled circuit with registers value (1) | column (m) | [flag (1)] | system.
struct BlockEncodingCircuit {
  qsim::RegisterLayout layout;
  std::vector<qsim::Gate> gates;
  std::vector<std::string> ancillas;
  std::size_t column_qubits = 0;

  const qsim::Register &system() const { return layout.at("system"); }
  std::size_t system_dimension() const { return std::size_t{1} << system().size; }
  std::size_t total_qubits() const { return layout.total_qubits(); }
  /// Encoded block is M / 2^m.
  double subnormalisation() const { return static_cast<double>(std::size_t{1} << column_qubits); }
};

namespace detail {
inline void require_power_of_two(std::size_t n, const char *what) {
  if (n < 2 || !std::has_single_bit(n))
    throw std::invalid_argument(std::string(what) + " needs N = 2^n >= 2, got N = " +
                                std::to_string(n));
}
}  // namespace detail

/// Circuit for L with two column qubits. The value oracle is four Ry on the
/// value qubit, one per column pattern; the column oracle is S+ controlled by
/// the low column qubit and S- controlled by the high one, so pattern 11
/// applies both and leaves the row unchanged.
inline BlockEncodingCircuit build_be_circuit_L(const ToeplitzL &l) {
  detail::require_power_of_two(l.n_sites, "build_be_circuit_L");
  const SparseOracleSpec spec = oracle_spec(l);
  BlockEncodingCircuit c;
  const qsim::Register value = c.layout.add("value", 1);
  const qsim::Register column = c.layout.add("column", 2);
  const qsim::Register system =
      c.layout.add("system", static_cast<std::size_t>(std::countr_zero(l.n_sites)));
  c.ancillas = {"value", "column"};
  c.column_qubits = 2;

  for (std::size_t k = 0; k < column.size; ++k)
    c.gates.push_back({qsim::Hadamard{column.qubit(k)}, {}});
  for (std::uint64_t b = 0; b < 4; ++b)
    c.gates.push_back({qsim::Ry{value.qubit(0), spec.angle(0, b)},
                       qsim::register_equals(column, b)});
  c.gates.push_back({qsim::CyclicShift{system, +1, 1}, {{column.qubit(1), true}}});
  c.gates.push_back({qsim::CyclicShift{system, -1, 1}, {{column.qubit(0), true}}});
  for (std::size_t k = 0; k < column.size; ++k)
    c.gates.push_back({qsim::Hadamard{column.qubit(k)}, {}});
  return c;
}

/// Circuit for Bhat with one column qubit and a comparator flag. The l = 1
/// branch first reorders and shifts |N + iN + i> onto |i>, then the flag
/// (index < N, i.e. all high system bits zero) selects Ry(beta) with
/// cos(beta/2) = b dt or Ry(pi); the flag is uncomputed afterwards.
inline BlockEncodingCircuit build_be_circuit_B(const BhatOperator &bh) {
  detail::require_power_of_two(bh.n_sites, "build_be_circuit_B");
  if (!(bh.coupling >= 0.0 && bh.coupling <= 1.0))
    throw std::invalid_argument("b dt = " + std::to_string(bh.coupling) +
                                " must lie in [0, 1]");
  BlockEncodingCircuit c;
  const qsim::Register value = c.layout.add("value", 1);
  const qsim::Register column = c.layout.add("column", 1);
  const qsim::Register flag = c.layout.add("flag", 1);
  const qsim::Register system = c.layout.add("system", bh.system_qubits());
  c.ancillas = {"value", "column", "flag"};
  c.column_qubits = 1;

  const std::vector<qsim::Control> on_branch = {{column.qubit(0), true}};
  const std::size_t low_bits = static_cast<std::size_t>(std::countr_zero(bh.n_sites));
  std::vector<qsim::Control> below_n;
  for (std::size_t k = 0; k < system.size - low_bits; ++k)
    below_n.push_back({system.qubit(k), false});

  c.gates.push_back({qsim::Hadamard{column.qubit(0)}, {}});
  c.gates.push_back({qsim::Permutation{system, bhat_reorder(bh)}, on_branch});
  c.gates.push_back({qsim::CyclicShift{system, -1, bh.n_sites}, on_branch});
  c.gates.push_back({qsim::PauliX{flag.qubit(0)}, below_n});
  c.gates.push_back({qsim::Ry{value.qubit(0), rotation_angle(bh.coupling)},
                     {{column.qubit(0), true}, {flag.qubit(0), true}}});
  c.gates.push_back({qsim::Ry{value.qubit(0), std::numbers::pi},
                     {{column.qubit(0), true}, {flag.qubit(0), false}}});
  c.gates.push_back({qsim::PauliX{flag.qubit(0)}, below_n});
  c.gates.push_back({qsim::Hadamard{column.qubit(0)}, {}});
  return c;
}

struct BlockEncodingResult {
  /// Post-selected system slice; residual * 2^m equals M psi.
  std::vector<Complex> residual;
  double probability = 0.0;
};

/// Runs the circuit on |0...0>_ancillas |psi> and post-selects every ancilla
/// on |0>.
inline BlockEncodingResult simulate_be(const BlockEncodingCircuit &c,
                                       const std::vector<Complex> &psi) {
  const qsim::Register &sys = c.system();
  if (psi.size() != c.system_dimension())
    throw std::invalid_argument("input state has " + std::to_string(psi.size()) +
                                " amplitudes, system register holds " +
                                std::to_string(c.system_dimension()));
  double norm2 = 0.0;
  for (const auto &a : psi)
    norm2 += std::norm(a);
  if (std::abs(norm2 - 1.0) > 1e-10)
    throw std::invalid_argument("input state must be normalised");

  // System is the last register, so |0>_anc |psi> occupies the first block.
  std::vector<Complex> amps(std::size_t{1} << c.total_qubits(), Complex{0.0, 0.0});
  if (sys.offset + sys.size != c.total_qubits())
    throw std::logic_error("system register must be last");
  std::copy(psi.begin(), psi.end(), amps.begin());
  qsim::StateVector state(c.total_qubits(), std::move(amps));
  qsim::apply_circuit(state, c.gates);

  std::map<std::string, std::uint64_t> zeros;
  for (const auto &name : c.ancillas)
    zeros[name] = 0;
  qsim::PostselectResult post = qsim::postselect(state, c.layout, zeros);
  return {std::move(post.residual), post.probability};
}

struct Localized {
  std::size_t site = 0;
};
struct Uniform {};
struct Explicit {
  std::vector<Complex> amplitudes;
};
using InitialState = std::variant<Localized, Uniform, Explicit>;

inline std::vector<Complex> amplitudes_of(const InitialState &init, std::size_t n) {
  std::vector<Complex> c(n, Complex{0.0, 0.0});
  if (const auto *loc = std::get_if<Localized>(&init)) {
    if (loc->site >= n)
      throw std::out_of_range("localized site outside lattice");
    c[loc->site] = 1.0;
  } else if (std::holds_alternative<Uniform>(init)) {
    std::fill(c.begin(), c.end(), Complex{1.0 / std::sqrt(static_cast<double>(n)), 0.0});
  } else {
    c = std::get<Explicit>(init).amplitudes;
    if (c.size() != n)
      throw std::invalid_argument("explicit amplitudes do not match lattice size");
  }
  return c;
}

/// Success probability of the L circuit from its closed-form expansion
///   1/16 sum_i [ |c_i|^2 (l0^2 + l1^2 + l2^2)
///              + (c_i c*_{i+1} + c_i c*_{i-1}) (l0 l1 + l0 l2)
///              + (c_i c*_{i+2} + c_i c*_{i-2}) l1 l2 ].
/// Valid for any N, not only powers of two.
inline double p0_analytic_L(const ToeplitzL &l, const InitialState &init) {
  const std::size_t n = l.n_sites;
  const std::vector<Complex> c = amplitudes_of(init, n);
  const double sq = l.lambda0 * l.lambda0 + l.lambda1 * l.lambda1 + l.lambda2 * l.lambda2;
  const double near = l.lambda0 * l.lambda1 + l.lambda0 * l.lambda2;
  const double far = l.lambda1 * l.lambda2;
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const Complex ci = c[i];
    sum += std::norm(ci) * sq;
    sum += (ci * std::conj(c[(i + 1) % n]) + ci * std::conj(c[(i + n - 1) % n])) * near;
    sum += (ci * std::conj(c[(i + 2) % n]) + ci * std::conj(c[(i + 2 * n - 2) % n])) * far;
  }
  return sum.real() / 16.0;
}

/// Largest success probability of the Bhat circuit over computational-basis
/// inputs, reached on a diagonal u_2 entry: (1 + (b dt)^2) / 4.
inline double p0_basis_max_B(const BhatOperator &bh) {
  return (1.0 + bh.coupling * bh.coupling) / 4.0;
}

}  // namespace adrq
