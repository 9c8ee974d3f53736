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

/// Finite-difference form of the 1D advection-diffusion-reaction equation
///
///   d(phi)/dt = D phi_xx - (U phi)_x - a phi + b phi^2
///
/// on a periodic lattice of N sites, together with the closed-form logistic
/// references used to judge Carleman truncation error.
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace adrq {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Concentration profile over the lattice sites at one instant.
using LatticeField = Eigen::VectorXd;

struct ConstantVelocity {
  double value = 0.0;
};

/// Site-resolved velocity U_j, one entry per lattice site.
struct VelocityProfile {
  std::vector<double> values;
};

using VelocityField = std::variant<ConstantVelocity, VelocityProfile>;

struct AdrParams {
  double diffusion = 1.0;       // D
  double linear_rate = 1.0;     // a
  double quadratic_rate = 0.0;  // b
  double dx = 1.0;
  double dt = 0.01;
  std::size_t n_sites = 20;
  VelocityField velocity = ConstantVelocity{};

  bool has_constant_velocity() const {
    return std::holds_alternative<ConstantVelocity>(velocity);
  }

  void validate() const {
    if (!(diffusion >= 0.0) || !std::isfinite(diffusion))
      throw std::invalid_argument("diffusion must be finite and >= 0");
    if (!(linear_rate >= 0.0) || !std::isfinite(linear_rate))
      throw std::invalid_argument("linear rate a must be finite and >= 0");
    if (!(quadratic_rate >= 0.0) || !std::isfinite(quadratic_rate))
      throw std::invalid_argument("quadratic rate b must be finite and >= 0");
    if (!(dx > 0.0) || !std::isfinite(dx))
      throw std::invalid_argument("dx must be finite and > 0");
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw std::invalid_argument("dt must be finite and > 0");
    if (n_sites < 1)
      throw std::invalid_argument("n_sites must be >= 1");
    if (const auto *profile = std::get_if<VelocityProfile>(&velocity)) {
      if (profile->values.size() != n_sites)
        throw std::invalid_argument(
            "velocity profile has " + std::to_string(profile->values.size()) +
            " entries, expected " + std::to_string(n_sites));
      for (double u : profile->values)
        if (!std::isfinite(u))
          throw std::invalid_argument("velocity profile has non-finite entry");
    } else if (!std::isfinite(std::get<ConstantVelocity>(velocity).value)) {
      throw std::invalid_argument("velocity must be finite");
    }
  }
};

/// Per-step strengths of diffusion, advection and linear reaction.
struct CourantNumbers {
  double diffusion = 0.0;  // dt D / dx^2
  double advection = 0.0;  // dt U / dx
  double reaction = 0.0;   // a dt
};

/// Courant numbers of a parameter set. For a velocity profile the advective
/// number uses the peak |U_j|.
inline CourantNumbers courant_numbers(const AdrParams &p) {
  double u = 0.0;
  if (const auto *c = std::get_if<ConstantVelocity>(&p.velocity)) {
    u = c->value;
  } else {
    for (double v : std::get<VelocityProfile>(p.velocity).values)
      u = std::max(u, std::abs(v));
  }
  return {p.dt * p.diffusion / (p.dx * p.dx), p.dt * u / p.dx,
          p.linear_rate * p.dt};
}

struct DerivedNumbers {
  double peclet_cell = 0.0;     // gamma_a / gamma_d
  double damkohler_adv = 0.0;   // gamma_a / gamma_r
  double damkohler_diff = 0.0;  // gamma_d / gamma_r
  double lambda0 = 1.0;         // diagonal of 1 + dt A
  double lambda1 = 0.0;         // super-diagonal (column j+1)
  double lambda2 = 0.0;         // sub-diagonal (column j-1)
};

namespace detail {
inline double safe_ratio(double num, double den) {
  if (den != 0.0)
    return num / den;
  if (num == 0.0)
    return std::nan("");
  return std::copysign(INFINITY, num);
}
}  // namespace detail

inline DerivedNumbers derived_numbers(const CourantNumbers &g) {
  DerivedNumbers d;
  d.peclet_cell = detail::safe_ratio(g.advection, g.diffusion);
  d.damkohler_adv = detail::safe_ratio(g.advection, g.reaction);
  d.damkohler_diff = detail::safe_ratio(g.diffusion, g.reaction);
  d.lambda0 = 1.0 - 2.0 * g.diffusion - g.reaction;
  d.lambda1 = g.diffusion - 0.5 * g.advection;
  d.lambda2 = g.diffusion + 0.5 * g.advection;
  return d;
}

inline DerivedNumbers derived_numbers(const AdrParams &p) {
  return derived_numbers(courant_numbers(p));
}

/// Box of constant height centred on site N/2.
struct InitialBox {
  double height = 1.0;
  std::size_t width = 5;
};

/// Occupies sites [N/2 - w/2, N/2 - w/2 + w).
inline LatticeField box_field(std::size_t n_sites, const InitialBox &box) {
  if (box.width == 0 || box.width > n_sites)
    throw std::invalid_argument("box width must satisfy 0 < w <= N");
  LatticeField phi = LatticeField::Zero(static_cast<Eigen::Index>(n_sites));
  const std::size_t start = n_sites / 2 - box.width / 2;
  for (std::size_t k = 0; k < box.width; ++k)
    phi[static_cast<Eigen::Index>((start + k) % n_sites)] = box.height;
  return phi;
}

/// Nonlinearity strength R = phi_max b / a.
inline double nonlinearity_strength(double phi_max, double a, double b) {
  return phi_max * b / a;
}

/// U_j = peak exp(-(j - N/2)^2 / (2 sigma^2)).
inline VelocityProfile gaussian_velocity_profile(std::size_t n_sites,
                                                 double peak, double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("gaussian profile width must be > 0");
  VelocityProfile profile;
  profile.values.resize(n_sites);
  const double centre = static_cast<double>(n_sites / 2);
  for (std::size_t j = 0; j < n_sites; ++j) {
    const double x = static_cast<double>(j) - centre;
    profile.values[j] = peak * std::exp(-x * x / (2.0 * sigma * sigma));
  }
  return profile;
}

namespace detail {

// Central-difference stencil for row j. Duplicate columns (N <= 2) are summed
// by setFromTriplets.
inline SparseMatrix assemble_stencil(const AdrParams &p,
                                     const std::vector<double> &velocity) {
  const std::size_t n = p.n_sites;
  const double diff = p.diffusion / (p.dx * p.dx);
  const bool profile = !p.has_constant_velocity();
  std::vector<Triplet> entries;
  entries.reserve(3 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t left = (j + n - 1) % n;
    const std::size_t right = (j + 1) % n;
    const double u = velocity[j];
    double diag = -2.0 * diff - p.linear_rate;
    if (profile)
      diag -= (velocity[right] - velocity[left]) / (2.0 * p.dx);
    const auto row = static_cast<int>(j);
    entries.emplace_back(row, row, diag);
    entries.emplace_back(row, static_cast<int>(left), diff + u / (2.0 * p.dx));
    entries.emplace_back(row, static_cast<int>(right), diff - u / (2.0 * p.dx));
  }
  SparseMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(entries.begin(), entries.end());
  a.prune(0.0);
  a.makeCompressed();
  return a;
}

}  // namespace detail

/// Linear operator A for a constant velocity U:
///   A(j,j) = -2D/dx^2 - a,  A(j,j-1) = D/dx^2 + U/(2dx),  A(j,j+1) = D/dx^2 - U/(2dx)
/// with periodic wrap.
inline SparseMatrix build_linear_matrix(const AdrParams &p) {
  p.validate();
  if (!p.has_constant_velocity())
    throw std::invalid_argument(
        "build_linear_matrix needs a constant velocity; use "
        "build_linear_matrix_profile for a velocity profile");
  const double u = std::get<ConstantVelocity>(p.velocity).value;
  return detail::assemble_stencil(p, std::vector<double>(p.n_sites, u));
}

/// Linear operator for a site-resolved velocity U_j. The flux-divergence
/// correction -(U_{j+1} - U_{j-1})/(2dx) lands on the diagonal.
inline SparseMatrix build_linear_matrix_profile(const AdrParams &p) {
  p.validate();
  const auto *profile = std::get_if<VelocityProfile>(&p.velocity);
  if (profile == nullptr)
    throw std::invalid_argument(
        "build_linear_matrix_profile needs a velocity profile");
  return detail::assemble_stencil(p, profile->values);
}

inline SparseMatrix linear_matrix(const AdrParams &p) {
  return p.has_constant_velocity() ? build_linear_matrix(p)
                                   : build_linear_matrix_profile(p);
}

/// Forward-Euler integrator of the nonlinear lattice equation. Caches A.
class NonlinearEuler {
 public:
  explicit NonlinearEuler(const AdrParams &params)
      : dt_(params.dt), b_(params.quadratic_rate), a_(linear_matrix(params)) {}

  LatticeField step(const LatticeField &phi) const {
    if (phi.size() != a_.rows())
      throw std::invalid_argument("field length does not match lattice size");
    LatticeField rhs = a_ * phi;
    rhs.array() += b_ * phi.array().square();
    return phi + dt_ * rhs;
  }

  const SparseMatrix &linear_operator() const { return a_; }

 private:
  double dt_;
  double b_;
  SparseMatrix a_;
};

/// phi + dt (A phi + b phi^2), phi^2 taken per site.
inline LatticeField euler_step_nonlinear(const LatticeField &phi,
                                         const AdrParams &params) {
  return NonlinearEuler(params).step(phi);
}

/// Exact solution of d(phi)/dt = -a phi + b phi^2:
///   phi0 e^{-at} / (1 - R (1 - e^{-at})),  R = b phi0 / a.
/// Empty once the denominator reaches zero (finite-time blow-up for R >= 1).
inline std::optional<double> logistic_exact(double phi0, double a, double b,
                                            double t) {
  if (!(a > 0.0))
    throw std::invalid_argument("logistic_exact needs a > 0");
  const double decay = std::exp(-a * t);
  const double r = b * phi0 / a;
  const double denom = 1.0 - r * (1.0 - decay);
  if (!(denom > 0.0))
    return std::nullopt;
  return phi0 * decay / denom;
}

/// Carleman closed form of the logistic truncated at order K:
///   phi0 e^{-at} sum_{k=0}^{K} [R (1 - e^{-at})]^k.
/// Order K is the u_1 component of the single-site hierarchy with K + 1
/// tensor blocks.
inline double logistic_carleman_truncated(double phi0, double a, double b,
                                          double t, std::size_t order) {
  if (!(a > 0.0))
    throw std::invalid_argument("logistic_carleman_truncated needs a > 0");
  const double decay = std::exp(-a * t);
  const double x = (b * phi0 / a) * (1.0 - decay);
  double sum = 0.0;
  double term = 1.0;
  for (std::size_t k = 0; k <= order; ++k) {
    sum += term;
    term *= x;
  }
  return phi0 * decay * sum;
}

}  // namespace adrq
