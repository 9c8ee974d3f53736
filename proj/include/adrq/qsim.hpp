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

/// Small deterministic statevector simulator with the gate set needed by the
/// block-encoding circuits.
///
/// Qubit ordering: registers are laid out in the order they are added, and
/// qubit 0 is the most significant bit of the basis index. Inside a register
/// the first qubit is the most significant bit of the register value.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace adrq::qsim {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 24;

struct Register {
  std::string name;
  std::size_t offset = 0;  // first (most significant) qubit
  std::size_t size = 0;

  std::size_t qubit(std::size_t k) const { return offset + k; }
};

class RegisterLayout {
 public:
  const Register &add(const std::string &name, std::size_t size) {
    if (size == 0)
      throw std::invalid_argument("register '" + name + "' must have at least one qubit");
    if (find(name) != nullptr)
      throw std::invalid_argument("duplicate register '" + name + "'");
    if (total_ + size > kMaxQubits)
      throw std::length_error("layout exceeds " + std::to_string(kMaxQubits) + " qubits");
    registers_.push_back({name, total_, size});
    total_ += size;
    return registers_.back();
  }

  const Register *find(const std::string &name) const {
    for (const auto &r : registers_)
      if (r.name == name)
        return &r;
    return nullptr;
  }

  const Register &at(const std::string &name) const {
    const Register *r = find(name);
    if (r == nullptr)
      throw std::out_of_range("no register named '" + name + "'");
    return *r;
  }

  const std::vector<Register> &registers() const { return registers_; }
  std::size_t total_qubits() const { return total_; }

 private:
  std::vector<Register> registers_;
  std::size_t total_ = 0;
};

struct Control {
  std::size_t qubit = 0;
  bool polarity = true;  // false: fires on |0>
};

struct Hadamard {
  std::size_t target = 0;
};
struct PauliX {
  std::size_t target = 0;
};
/// exp(-i angle Y / 2): |0> -> cos(angle/2)|0> + sin(angle/2)|1>.
struct Ry {
  std::size_t target = 0;
  double angle = 0.0;
};
/// |v> -> |v + direction * power mod 2^size> on a register.
struct CyclicShift {
  Register reg;
  int direction = +1;
  std::uint64_t power = 1;
};
/// |v> -> |map[v]> on a register; map must be a bijection of [0, 2^size).
struct Permutation {
  Register reg;
  std::vector<std::uint64_t> map;
};

using GateOp = std::variant<Hadamard, PauliX, Ry, CyclicShift, Permutation>;

struct Gate {
  GateOp op;
  std::vector<Control> controls;
};

inline Gate controlled(Gate g, const std::vector<Control> &extra) {
  g.controls.insert(g.controls.end(), extra.begin(), extra.end());
  return g;
}

/// Controls that fire when `reg` holds `value`.
inline std::vector<Control> register_equals(const Register &reg, std::uint64_t value) {
  std::vector<Control> c;
  for (std::size_t k = 0; k < reg.size; ++k)
    c.push_back({reg.qubit(k), ((value >> (reg.size - 1 - k)) & 1U) != 0});
  return c;
}

class StateVector {
 public:
  explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits > kMaxQubits)
      throw std::length_error("state exceeds " + std::to_string(kMaxQubits) + " qubits");
    amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amps_[0] = 1.0;
  }

  StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes)
      : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
    if (n_qubits > kMaxQubits)
      throw std::length_error("state exceeds " + std::to_string(kMaxQubits) + " qubits");
    if (amps_.size() != (std::size_t{1} << n_qubits))
      throw std::invalid_argument("amplitude count does not match qubit count");
  }

  static StateVector basis(std::size_t n_qubits, std::uint64_t index) {
    StateVector s(n_qubits);
    if (index >= s.dimension())
      throw std::out_of_range("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
  }

  std::size_t num_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  std::vector<Complex> &amplitudes() { return amps_; }
  const std::vector<Complex> &amplitudes() const { return amps_; }

  double norm() const {
    double s = 0.0;
    for (const auto &a : amps_)
      s += std::norm(a);
    return std::sqrt(s);
  }

  /// Bit mask of a qubit inside the basis index.
  std::uint64_t mask(std::size_t qubit) const {
    return std::uint64_t{1} << (n_qubits_ - 1 - qubit);
  }

 private:
  std::size_t n_qubits_;
  std::vector<Complex> amps_;
};

namespace detail {

inline void check_qubit(const StateVector &s, std::size_t q) {
  if (q >= s.num_qubits())
    throw std::out_of_range("qubit " + std::to_string(q) + " out of range for " +
                            std::to_string(s.num_qubits()) + "-qubit state");
}

inline void check_register(const StateVector &s, const Register &r) {
  if (r.size == 0 || r.offset + r.size > s.num_qubits())
    throw std::out_of_range("register '" + r.name + "' out of range");
}

struct ControlMask {
  std::uint64_t mask = 0;
  std::uint64_t value = 0;
  bool fires(std::uint64_t idx) const { return (idx & mask) == value; }
};

inline ControlMask control_mask(const StateVector &s, const std::vector<Control> &controls) {
  ControlMask m;
  for (const auto &c : controls) {
    check_qubit(s, c.qubit);
    const std::uint64_t bit = s.mask(c.qubit);
    if (m.mask & bit)
      throw std::invalid_argument("qubit used twice as a control");
    m.mask |= bit;
    if (c.polarity)
      m.value |= bit;
  }
  return m;
}

inline std::uint64_t register_shift(const StateVector &s, const Register &r) {
  return s.num_qubits() - r.offset - r.size;
}

inline std::uint64_t register_mask(const StateVector &s, const Register &r) {
  return ((std::uint64_t{1} << r.size) - 1) << register_shift(s, r);
}

template <class Matrix2>
void apply_single(StateVector &s, std::size_t target, const ControlMask &cm,
                  const Matrix2 &u) {
  check_qubit(s, target);
  const std::uint64_t bit = s.mask(target);
  if (cm.mask & bit)
    throw std::invalid_argument("control overlaps target");
  auto &a = s.amplitudes();
  for (std::uint64_t i = 0; i < a.size(); ++i) {
    if ((i & bit) || !cm.fires(i))
      continue;
    const Complex a0 = a[i];
    const Complex a1 = a[i | bit];
    a[i] = u[0][0] * a0 + u[0][1] * a1;
    a[i | bit] = u[1][0] * a0 + u[1][1] * a1;
  }
}

template <class Map>
void apply_register_map(StateVector &s, const Register &r, const ControlMask &cm,
                        Map &&map) {
  check_register(s, r);
  const std::uint64_t rmask = register_mask(s, r);
  if (cm.mask & rmask)
    throw std::invalid_argument("control overlaps target register");
  const std::uint64_t shift = register_shift(s, r);
  const auto &in = s.amplitudes();
  std::vector<Complex> out(in);
  for (std::uint64_t i = 0; i < in.size(); ++i) {
    if (!cm.fires(i))
      continue;
    const std::uint64_t v = (i & rmask) >> shift;
    const std::uint64_t dest = (i & ~rmask) | (map(v) << shift);
    out[dest] = in[i];
  }
  s.amplitudes() = std::move(out);
}

}  // namespace detail

inline void apply_gate(StateVector &s, const Gate &g) {
  const detail::ControlMask cm = detail::control_mask(s, g.controls);
  std::visit(
      [&](const auto &op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Hadamard>) {
          const double h = 1.0 / std::sqrt(2.0);
          const Complex u[2][2] = {{h, h}, {h, -h}};
          detail::apply_single(s, op.target, cm, u);
        } else if constexpr (std::is_same_v<T, PauliX>) {
          const Complex u[2][2] = {{0.0, 1.0}, {1.0, 0.0}};
          detail::apply_single(s, op.target, cm, u);
        } else if constexpr (std::is_same_v<T, Ry>) {
          const double c = std::cos(op.angle / 2.0);
          const double sn = std::sin(op.angle / 2.0);
          const Complex u[2][2] = {{c, -sn}, {sn, c}};
          detail::apply_single(s, op.target, cm, u);
        } else if constexpr (std::is_same_v<T, CyclicShift>) {
          if (op.direction != 1 && op.direction != -1)
            throw std::invalid_argument("shift direction must be +1 or -1");
          const std::uint64_t modulus = std::uint64_t{1} << op.reg.size;
          const std::uint64_t step = op.power % modulus;
          const std::uint64_t delta = op.direction > 0 ? step : (modulus - step) % modulus;
          detail::apply_register_map(s, op.reg, cm, [&](std::uint64_t v) {
            return (v + delta) & (modulus - 1);
          });
        } else {
          const std::uint64_t dim = std::uint64_t{1} << op.reg.size;
          if (op.map.size() != dim)
            throw std::invalid_argument("permutation size does not match register");
          std::vector<bool> seen(dim, false);
          for (auto v : op.map) {
            if (v >= dim || seen[v])
              throw std::invalid_argument("permutation map is not a bijection");
            seen[v] = true;
          }
          detail::apply_register_map(s, op.reg, cm,
                                     [&](std::uint64_t v) { return op.map[v]; });
        }
      },
      g.op);
}

inline void apply_circuit(StateVector &s, const std::vector<Gate> &gates) {
  for (const auto &g : gates)
    apply_gate(s, g);
}

struct PostselectResult {
  /// Slice of the state over the remaining qubits, not renormalised.
  std::vector<Complex> residual;
  double probability = 0.0;
};

/// Projects the named registers onto the given values. Remaining qubits keep
/// their relative order in the residual index.
inline PostselectResult postselect(const StateVector &s, const RegisterLayout &layout,
                                   const std::map<std::string, std::uint64_t> &values) {
  std::uint64_t fixed_mask = 0, fixed_value = 0;
  for (const auto &[name, value] : values) {
    const Register &r = layout.at(name);
    detail::check_register(s, r);
    if (value >= (std::uint64_t{1} << r.size))
      throw std::out_of_range("postselected value does not fit register '" + name + "'");
    fixed_mask |= detail::register_mask(s, r);
    fixed_value |= value << detail::register_shift(s, r);
  }
  std::vector<std::uint64_t> free_bits;
  for (std::size_t q = 0; q < s.num_qubits(); ++q)
    if (!(fixed_mask & s.mask(q)))
      free_bits.push_back(s.mask(q));

  PostselectResult out;
  out.residual.assign(std::size_t{1} << free_bits.size(), Complex{0.0, 0.0});
  for (std::uint64_t k = 0; k < out.residual.size(); ++k) {
    std::uint64_t idx = fixed_value;
    for (std::size_t b = 0; b < free_bits.size(); ++b)
      if ((k >> (free_bits.size() - 1 - b)) & 1U)
        idx |= free_bits[b];
    out.residual[k] = s.amplitudes()[idx];
    out.probability += std::norm(out.residual[k]);
  }
  return out;
}

/// Column c of the result is the circuit applied to basis state |c>.
inline Eigen::MatrixXcd to_dense(std::size_t n_qubits, const std::vector<Gate> &gates) {
  if (n_qubits > 12)
    throw std::length_error("to_dense is limited to 12 qubits");
  const std::size_t dim = std::size_t{1} << n_qubits;
  Eigen::MatrixXcd u(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t c = 0; c < dim; ++c) {
    StateVector s = StateVector::basis(n_qubits, c);
    apply_circuit(s, gates);
    for (std::uint64_t r = 0; r < dim; ++r)
      u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s.amplitudes()[r];
  }
  return u;
}

}  // namespace adrq::qsim
