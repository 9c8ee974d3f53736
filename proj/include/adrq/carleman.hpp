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

/// Truncated Carleman embedding of the lattice ADR equation.
///
/// The state stacks the tensor powers u_k = phi^{(x)k} for k = 1..K, each
/// stored row-major in its multi-index (i_1 slowest). The generator C has
/// diagonal blocks sum_legs 1 (x) A (x) 1 and super-diagonal blocks
/// sum_legs 1 (x) B (x) 1 with the 1-sparse B_{ijk} = b d_ij d_jk.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adrq/adr_core.hpp"

namespace adrq {

inline std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base)
      throw std::overflow_error("integer power overflows size_t");
    r *= base;
  }
  return r;
}

/// sum_{k=1}^{K} N^k
inline std::size_t carleman_dimension(std::size_t n_sites, std::size_t order) {
  std::size_t total = 0;
  for (std::size_t k = 1; k <= order; ++k)
    total += int_pow(n_sites, k);
  return total;
}

class CarlemanState {
 public:
  CarlemanState(std::size_t n_sites, std::size_t order)
      : n_sites_(n_sites), order_(order) {
    if (order < 1)
      throw std::invalid_argument("Carleman order must be >= 1");
    if (n_sites < 1)
      throw std::invalid_argument("Carleman state needs n_sites >= 1");
    offsets_.resize(order + 1);
    offsets_[0] = 0;
    for (std::size_t k = 1; k <= order; ++k)
      offsets_[k] = offsets_[k - 1] + int_pow(n_sites, k);
    data_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offsets_[order]));
  }

  std::size_t n_sites() const { return n_sites_; }
  std::size_t order() const { return order_; }
  std::size_t size() const { return offsets_.back(); }

  /// Offset of block k (1-based) inside the flat vector.
  std::size_t block_offset(std::size_t k) const { return offsets_.at(k - 1); }
  std::size_t block_size(std::size_t k) const {
    return offsets_.at(k) - offsets_.at(k - 1);
  }

  auto block(std::size_t k) {
    return data_.segment(static_cast<Eigen::Index>(block_offset(k)),
                         static_cast<Eigen::Index>(block_size(k)));
  }
  auto block(std::size_t k) const {
    return data_.segment(static_cast<Eigen::Index>(block_offset(k)),
                         static_cast<Eigen::Index>(block_size(k)));
  }

  /// The u_1 block, i.e. the Carleman estimate of the field.
  LatticeField field() const { return block(1); }

  Eigen::VectorXd &data() { return data_; }
  const Eigen::VectorXd &data() const { return data_; }

  bool same_shape(const CarlemanState &o) const {
    return n_sites_ == o.n_sites_ && order_ == o.order_;
  }

 private:
  std::size_t n_sites_;
  std::size_t order_;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd data_;
};

/// u_k = phi^{(x)k} for k = 1..K.
inline CarlemanState initial_carleman_state(const LatticeField &phi,
                                            std::size_t order) {
  const auto n = static_cast<std::size_t>(phi.size());
  CarlemanState u(n, order);
  u.block(1) = phi;
  for (std::size_t k = 2; k <= order; ++k) {
    const std::size_t prev_size = u.block_size(k - 1);
    const double *prev = u.data().data() + u.block_offset(k - 1);
    double *cur = u.data().data() + u.block_offset(k);
    for (std::size_t idx = 0; idx < prev_size; ++idx)
      for (std::size_t i = 0; i < n; ++i)
        cur[idx * n + i] = prev[idx] * phi[static_cast<Eigen::Index>(i)];
  }
  return u;
}

class CarlemanOperator {
 public:
  CarlemanOperator(SparseMatrix linear, double quadratic_rate,
                   std::size_t order)
      : a_(std::move(linear)), b_(quadratic_rate), order_(order) {
    if (a_.rows() != a_.cols())
      throw std::invalid_argument("linear operator must be square");
    if (order < 1)
      throw std::invalid_argument("Carleman order must be >= 1");
    a_.makeCompressed();
  }

  CarlemanOperator(const AdrParams &params, std::size_t order)
      : CarlemanOperator(linear_matrix(params), params.quadratic_rate, order) {}

  std::size_t n_sites() const { return static_cast<std::size_t>(a_.rows()); }
  std::size_t order() const { return order_; }
  std::size_t dimension() const { return carleman_dimension(n_sites(), order_); }
  double quadratic_rate() const { return b_; }
  const SparseMatrix &linear() const { return a_; }

  /// out = C u without materialising any N^k x N^k block.
  void apply(const CarlemanState &u, CarlemanState &out) const {
    check_shape(u);
    if (!out.same_shape(u))
      throw std::invalid_argument("output state shape mismatch");
    out.data().setZero();
    const std::size_t n = n_sites();
    const double *src = u.data().data();
    double *dst = out.data().data();
    for (std::size_t k = 1; k <= order_; ++k) {
      const double *uk = src + u.block_offset(k);
      double *ok = dst + out.block_offset(k);
      for (std::size_t leg = 0; leg < k; ++leg)
        apply_leg(uk, ok, int_pow(n, leg), int_pow(n, k - 1 - leg));
      if (k < order_ && b_ != 0.0) {
        const double *next = src + u.block_offset(k + 1);
        for (std::size_t leg = 0; leg < k; ++leg)
          apply_quadratic_leg(next, ok, int_pow(n, leg),
                              int_pow(n, k - 1 - leg));
      }
    }
  }

  CarlemanState apply(const CarlemanState &u) const {
    CarlemanState out(u.n_sites(), u.order());
    apply(u, out);
    return out;
  }

  /// Explicit sparse C. Only sensible for small N^K.
  SparseMatrix assemble() const {
    const std::size_t n = n_sites();
    const CarlemanState shape(n, order_);
    std::vector<Triplet> entries;
    for (std::size_t k = 1; k <= order_; ++k) {
      const std::size_t row0 = shape.block_offset(k);
      for (std::size_t leg = 0; leg < k; ++leg) {
        const std::size_t outer = int_pow(n, leg);
        const std::size_t stride = int_pow(n, k - 1 - leg);
        for (std::size_t h = 0; h < outer; ++h)
          for (Eigen::Index r = 0; r < a_.outerSize(); ++r)
            for (SparseMatrix::InnerIterator it(a_, r); it; ++it)
              for (std::size_t lo = 0; lo < stride; ++lo)
                entries.emplace_back(
                    static_cast<int>(row0 + (h * n + static_cast<std::size_t>(r)) * stride + lo),
                    static_cast<int>(row0 + (h * n + static_cast<std::size_t>(it.col())) * stride + lo),
                    it.value());
        if (k < order_ && b_ != 0.0) {
          const std::size_t col0 = shape.block_offset(k + 1);
          for (std::size_t h = 0; h < outer; ++h)
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t lo = 0; lo < stride; ++lo)
                entries.emplace_back(
                    static_cast<int>(row0 + (h * n + i) * stride + lo),
                    static_cast<int>(col0 + ((h * n + i) * n + i) * stride + lo),
                    b_);
        }
      }
    }
    const auto dim = static_cast<Eigen::Index>(shape.size());
    SparseMatrix c(dim, dim);
    c.setFromTriplets(entries.begin(), entries.end());
    c.prune(0.0);
    c.makeCompressed();
    return c;
  }

 private:
  void check_shape(const CarlemanState &u) const {
    if (u.n_sites() != n_sites() || u.order() != order_)
      throw std::invalid_argument(
          "Carleman state shape (N=" + std::to_string(u.n_sites()) +
          ", K=" + std::to_string(u.order()) + ") does not match operator (N=" +
          std::to_string(n_sites()) + ", K=" + std::to_string(order_) + ")");
  }

  // A acting on one tensor leg: the block is viewed as [outer][N][stride].
  void apply_leg(const double *in, double *out, std::size_t outer,
                 std::size_t stride) const {
    const std::size_t n = n_sites();
    const int *row_ptr = a_.outerIndexPtr();
    const int *cols = a_.innerIndexPtr();
    const double *vals = a_.valuePtr();
    if (stride == 1) {
      for (std::size_t h = 0; h < outer; ++h) {
        const double *x = in + h * n;
        double *o = out + h * n;
        for (std::size_t r = 0; r < n; ++r) {
          double acc = 0.0;
          for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
            acc += vals[p] * x[cols[p]];
          o[r] += acc;
        }
      }
      return;
    }
    for (std::size_t h = 0; h < outer; ++h) {
      const std::size_t base = h * n;
      for (std::size_t r = 0; r < n; ++r) {
        double *o = out + (base + r) * stride;
        for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
          const double v = vals[p];
          const double *x = in + (base + static_cast<std::size_t>(cols[p])) * stride;
          for (std::size_t lo = 0; lo < stride; ++lo)
            o[lo] += v * x[lo];
        }
      }
    }
  }

  // B on one leg of u_{k+1}: picks entries whose leg and the following leg
  // carry the same index.
  void apply_quadratic_leg(const double *next, double *out, std::size_t outer,
                           std::size_t stride) const {
    const std::size_t n = n_sites();
    for (std::size_t h = 0; h < outer; ++h)
      for (std::size_t i = 0; i < n; ++i) {
        double *o = out + (h * n + i) * stride;
        const double *x = next + ((h * n + i) * n + i) * stride;
        for (std::size_t lo = 0; lo < stride; ++lo)
          o[lo] += b_ * x[lo];
      }
  }

  SparseMatrix a_;
  double b_;
  std::size_t order_;
};

/// u + dt C u
inline CarlemanState euler_step_carleman(const CarlemanState &u,
                                         const CarlemanOperator &op,
                                         double dt) {
  CarlemanState out = op.apply(u);
  out.data() = u.data() + dt * out.data();
  return out;
}

/// In-place Euler stepper that reuses one scratch buffer.
class CarlemanEuler {
 public:
  CarlemanEuler(const CarlemanOperator &op, double dt)
      : op_(op), dt_(dt), scratch_(op.n_sites(), op.order()) {}

  void step(CarlemanState &u) {
    op_.apply(u, scratch_);
    u.data() += dt_ * scratch_.data();
  }

 private:
  const CarlemanOperator &op_;
  double dt_;
  CarlemanState scratch_;
};

/// Sites with |phi_Eul| below this are left out of relative errors.
inline constexpr double kRelativeErrorGuard = 1e-12;

/// Field trajectories from the nonlinear Euler scheme and from the Euler
/// scheme applied to the truncated Carleman system, one entry per step
/// including t = 0.
struct TrajectoryPair {
  std::vector<LatticeField> euler;
  std::vector<LatticeField> carleman;
  /// First step with a non-finite value in either trajectory, if any.
  std::optional<std::size_t> overflow_step;
};

inline TrajectoryPair run_trajectories(const AdrParams &params,
                                       const LatticeField &phi0,
                                       std::size_t order,
                                       std::size_t n_steps) {
  params.validate();
  if (static_cast<std::size_t>(phi0.size()) != params.n_sites)
    throw std::invalid_argument("initial field length does not match n_sites");
  const NonlinearEuler nonlinear(params);
  const CarlemanOperator op(nonlinear.linear_operator(), params.quadratic_rate,
                            order);
  CarlemanEuler carleman(op, params.dt);

  TrajectoryPair out;
  out.euler.reserve(n_steps + 1);
  out.carleman.reserve(n_steps + 1);
  LatticeField phi = phi0;
  CarlemanState u = initial_carleman_state(phi0, order);
  out.euler.push_back(phi);
  out.carleman.push_back(u.field());
  for (std::size_t s = 1; s <= n_steps; ++s) {
    phi = nonlinear.step(phi);
    carleman.step(u);
    out.euler.push_back(phi);
    out.carleman.push_back(u.field());
    if (!phi.allFinite() || !out.carleman.back().allFinite()) {
      out.overflow_step = s;
      break;
    }
  }
  return out;
}

struct RelativeErrorSeries {
  /// Delta_R per step; steps with no admitted site hold 0.
  std::vector<double> series;
  std::size_t t_star_index = 0;
  double max_error = 0.0;
  /// Relative error averaged over admitted sites at t*.
  double mean_error_at_t_star = 0.0;
  /// Steps where every site fell below the guard.
  std::vector<std::size_t> degenerate_steps;
};

/// Delta_R(t) = max_j |phi_Eul - phi_Carl| / |phi_Eul| over sites with
/// |phi_Eul| >= guard. t* is the first step reaching the maximum.
inline RelativeErrorSeries relative_error_series(
    const std::vector<LatticeField> &reference,
    const std::vector<LatticeField> &approx,
    double guard = kRelativeErrorGuard) {
  if (reference.size() != approx.size())
    throw std::invalid_argument("trajectories must have equal length");
  RelativeErrorSeries out;
  out.series.resize(reference.size(), 0.0);
  for (std::size_t s = 0; s < reference.size(); ++s) {
    const LatticeField &ref = reference[s];
    const LatticeField &apx = approx[s];
    if (ref.size() != apx.size())
      throw std::invalid_argument("trajectory fields differ in length");
    bool any = false;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < ref.size(); ++j) {
      if (std::abs(ref[j]) < guard)
        continue;
      any = true;
      worst = std::max(worst, std::abs(ref[j] - apx[j]) / std::abs(ref[j]));
    }
    if (!any)
      out.degenerate_steps.push_back(s);
    out.series[s] = worst;
    if (worst > out.max_error) {
      out.max_error = worst;
      out.t_star_index = s;
    }
  }
  if (!reference.empty()) {
    const LatticeField &ref = reference[out.t_star_index];
    const LatticeField &apx = approx[out.t_star_index];
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < ref.size(); ++j) {
      if (std::abs(ref[j]) < guard)
        continue;
      sum += std::abs(ref[j] - apx[j]) / std::abs(ref[j]);
      ++count;
    }
    out.mean_error_at_t_star = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }
  return out;
}

struct ConvergenceRow {
  std::size_t order = 0;
  double max_error = 0.0;
  double mean_error = 0.0;
  std::size_t t_star_index = 0;
  bool overflow = false;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// Least-squares slope of log(max error) against K; NaN with fewer than two
  /// positive errors.
  double log_slope = std::nan("");
};

inline double log_linear_slope(const std::vector<ConvergenceRow> &rows) {
  std::vector<double> xs, ys;
  for (const auto &r : rows)
    if (r.max_error > 0.0 && std::isfinite(r.max_error)) {
      xs.push_back(static_cast<double>(r.order));
      ys.push_back(std::log(r.max_error));
    }
  if (xs.size() < 2)
    return std::nan("");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

inline ConvergenceStudy convergence_study(const AdrParams &params,
                                          const LatticeField &phi0,
                                          const std::vector<std::size_t> &orders,
                                          std::size_t n_steps) {
  if (!std::is_sorted(orders.begin(), orders.end()))
    throw std::invalid_argument("Carleman orders must be ascending");
  ConvergenceStudy study;
  for (std::size_t k : orders) {
    const TrajectoryPair run = run_trajectories(params, phi0, k, n_steps);
    const RelativeErrorSeries err = relative_error_series(run.euler, run.carleman);
    study.rows.push_back({k, err.max_error, err.mean_error_at_t_star,
                          err.t_star_index, run.overflow_step.has_value()});
  }
  study.log_slope = log_linear_slope(study.rows);
  return study;
}

}  // namespace adrq
