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

/// Named numerical studies driven by a key-value config. Each runner writes
/// CSV files into an output directory and reports an exit status:
/// 0 success, 1 an internal tolerance failed, 2 invalid configuration.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "adrq/adr_core.hpp"
#include "adrq/block_encoding.hpp"
#include "adrq/carleman.hpp"
#include "adrq/config.hpp"
#include "adrq/csv.hpp"
#include "adrq/parallel.hpp"
#include "adrq/pauli.hpp"

namespace adrq::experiments {

enum ExitCode : int { kSuccess = 0, kToleranceFailure = 1, kInvalidConfig = 2 };

struct ExperimentConfig {
  std::string experiment = "convergence";

  double diffusion = 1.0;
  double velocity = 1.0;
  double linear_rate = 1.0;
  double quadratic_rate = 0.6;
  double dx = 1.0;
  double dt = 0.01;
  std::size_t n_sites = 20;
  std::string velocity_kind = "constant";  // constant | gaussian
  double gaussian_peak = 1.0;
  double gaussian_sigma = 0.0;  // 0 means N/8

  std::vector<std::size_t> orders = {1, 2, 3, 4, 5};
  std::size_t n_steps = 1000;

  std::string init_kind = "box";  // box | localized | uniform
  double init_height = 1.0;
  std::size_t init_width = 5;
  std::size_t init_site = 0;  // localized site; defaults to N/2

  std::vector<std::size_t> pauli_sites = {2, 3, 4, 5, 6};
  std::size_t pauli_order = 3;
  std::vector<std::size_t> pauli_qubits = {2, 3, 4, 5, 6};
  std::vector<double> epsilons = {1e-1, 1e-2, 1e-3};
  std::size_t curve_points = 200;
  std::size_t max_qubits = 10;

  std::size_t p0_sites = 100;
  std::vector<double> gamma_adv;
  std::vector<double> gamma_diff;
  std::vector<double> gamma_re = {0.01};
  std::size_t p0_site = 0;  // defaults to N/2
  bool p0_simulate = false;

  std::uint64_t seed = 20240601;
  std::vector<std::size_t> be_l_sizes = {2, 4, 8};
  std::vector<std::size_t> be_b_sizes = {2, 4};
  std::size_t param_draws = 50;
  std::size_t states = 20;
  std::vector<double> b_dt = {0.0, 0.006, 0.5};

  std::string out_dir = "out";
  std::size_t trajectory_stride = 10;

  /// Every effective value, defaults included, in read order.
  std::vector<std::pair<std::string, std::string>> echo;

  static ExperimentConfig from(KeyValueConfig kv);

  AdrParams adr_params(std::size_t n) const {
    AdrParams p;
    p.diffusion = diffusion;
    p.linear_rate = linear_rate;
    p.quadratic_rate = quadratic_rate;
    p.dx = dx;
    p.dt = dt;
    p.n_sites = n;
    if (velocity_kind == "gaussian") {
      const double sigma = gaussian_sigma > 0.0 ? gaussian_sigma : static_cast<double>(n) / 8.0;
      p.velocity = gaussian_velocity_profile(n, gaussian_peak, sigma);
    } else {
      p.velocity = ConstantVelocity{velocity};
    }
    return p;
  }

  LatticeField initial_field() const {
    if (init_kind == "box")
      return box_field(n_sites, {init_height, init_width});
    LatticeField phi = LatticeField::Zero(static_cast<Eigen::Index>(n_sites));
    if (init_kind == "localized")
      phi[static_cast<Eigen::Index>(init_site)] = init_height;
    else
      phi.setConstant(init_height);
    return phi;
  }
};

namespace detail {

inline std::string join_sizes(const std::vector<std::size_t> &v) {
  if (v.empty())
    return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string join_doubles(const std::vector<double> &v) {
  if (v.empty())
    return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + format_double(v[i]);
  return s;
}

inline bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from(KeyValueConfig kv) {
  ExperimentConfig c;
  auto rec = [&c](const std::string &k, std::string v) { c.echo.emplace_back(k, std::move(v)); };
  auto str = [&](const std::string &k, std::string &field) {
    field = kv.get_string(k, field);
    rec(k, field);
  };
  auto dbl = [&](const std::string &k, double &field) {
    field = kv.get_double(k, field);
    rec(k, format_double(field));
  };
  auto sz = [&](const std::string &k, std::size_t &field) {
    field = kv.get_size(k, field);
    rec(k, std::to_string(field));
  };
  auto dbls = [&](const std::string &k, std::vector<double> &field) {
    field = kv.get_doubles(k, field);
    rec(k, detail::join_doubles(field));
  };
  auto szs = [&](const std::string &k, std::vector<std::size_t> &field) {
    field = kv.get_sizes(k, field);
    rec(k, detail::join_sizes(field));
  };

  str("experiment", c.experiment);
  dbl("adr.D", c.diffusion);
  dbl("adr.U", c.velocity);
  dbl("adr.a", c.linear_rate);
  dbl("adr.b", c.quadratic_rate);
  dbl("adr.dx", c.dx);
  dbl("adr.dt", c.dt);
  sz("adr.N", c.n_sites);
  str("adr.velocity", c.velocity_kind);
  dbl("adr.gaussian.peak", c.gaussian_peak);
  if (!kv.has("adr.gaussian.sigma"))
    c.gaussian_sigma = static_cast<double>(c.n_sites) / 8.0;
  dbl("adr.gaussian.sigma", c.gaussian_sigma);

  if (kv.has("carleman.K") && !kv.has("carleman.K_list"))
    c.orders = {kv.get_size("carleman.K", 5)};
  else
    kv.get_size("carleman.K", 5);
  szs("carleman.K_list", c.orders);
  sz("run.n_steps", c.n_steps);

  str("init.kind", c.init_kind);
  dbl("init.height", c.init_height);
  sz("init.width", c.init_width);
  c.init_site = c.n_sites / 2;
  sz("init.site", c.init_site);

  szs("pauli.N_list", c.pauli_sites);
  sz("pauli.K", c.pauli_order);
  szs("pauli.q_list", c.pauli_qubits);
  dbls("pauli.epsilon", c.epsilons);
  sz("pauli.curve_points", c.curve_points);
  sz("pauli.max_qubits", c.max_qubits);

  sz("p0.N", c.p0_sites);
  c.gamma_adv = kv.get_doubles("p0.gamma_adv", {});
  if (c.gamma_adv.empty())
    for (int i = 0; i <= 20; ++i)
      c.gamma_adv.push_back(i / 20.0);
  rec("p0.gamma_adv", detail::join_doubles(c.gamma_adv));
  c.gamma_diff = kv.get_doubles("p0.gamma_diff", {});
  if (c.gamma_diff.empty())
    for (int i = 0; i <= 20; ++i)
      c.gamma_diff.push_back(i / 40.0);
  rec("p0.gamma_diff", detail::join_doubles(c.gamma_diff));
  dbls("p0.gamma_re", c.gamma_re);
  c.p0_site = c.p0_sites / 2;
  sz("p0.site", c.p0_site);
  c.p0_simulate = kv.get_bool("p0.simulate", c.p0_simulate);
  rec("p0.simulate", c.p0_simulate ? "true" : "false");

  c.seed = kv.get_size("be.seed", c.seed);
  rec("be.seed", std::to_string(c.seed));
  szs("be.L_sizes", c.be_l_sizes);
  szs("be.B_sizes", c.be_b_sizes);
  sz("be.param_draws", c.param_draws);
  sz("be.states", c.states);
  dbls("be.b_dt", c.b_dt);

  str("output.dir", c.out_dir);
  sz("output.trajectory_stride", c.trajectory_stride);

  if (const auto unused = kv.unused_keys(); !unused.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto &k : unused)
      msg += " " + k;
    throw ConfigError(msg);
  }
  if (c.velocity_kind != "constant" && c.velocity_kind != "gaussian")
    throw ConfigError("adr.velocity must be 'constant' or 'gaussian'");
  if (c.init_kind != "box" && c.init_kind != "localized" && c.init_kind != "uniform")
    throw ConfigError("init.kind must be 'box', 'localized' or 'uniform'");
  if (c.init_kind == "localized" && c.init_site >= c.n_sites)
    throw ConfigError("init.site must be < adr.N");
  if (c.orders.empty() || std::find(c.orders.begin(), c.orders.end(), 0) != c.orders.end())
    throw ConfigError("carleman.K_list entries must be >= 1");
  if (!std::is_sorted(c.orders.begin(), c.orders.end()))
    throw ConfigError("carleman.K_list must be ascending");
  if (c.trajectory_stride == 0)
    throw ConfigError("output.trajectory_stride must be >= 1");
  for (double e : c.epsilons)
    if (!(e > 0.0 && e < 1.0))
      throw ConfigError("pauli.epsilon entries must lie in (0, 1)");
  if (c.p0_site >= c.p0_sites)
    throw ConfigError("p0.site must be < p0.N");
  try {
    c.adr_params(c.n_sites).validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(std::string("invalid ADR parameters: ") + e.what());
  }
  return c;
}

struct Outcome {
  int status = kSuccess;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> messages;

  void fail(std::string why) {
    status = std::max(status, static_cast<int>(kToleranceFailure));
    messages.push_back(std::move(why));
  }
};

inline void add_config_meta(CsvTable &t, const ExperimentConfig &c, const std::string &run) {
  t.add_meta("run", run);
  for (const auto &[k, v] : c.echo)
    t.add_meta(k, v);
}

inline void add_physics_meta(CsvTable &t, const AdrParams &p) {
  const CourantNumbers g = courant_numbers(p);
  const DerivedNumbers d = derived_numbers(g);
  t.add_meta("gamma_diff", g.diffusion);
  t.add_meta("gamma_adv", g.advection);
  t.add_meta("gamma_re", g.reaction);
  t.add_meta("peclet_cell", d.peclet_cell);
  t.add_meta("damkohler_adv", d.damkohler_adv);
  t.add_meta("damkohler_diff", d.damkohler_diff);
  if (const auto *prof = std::get_if<VelocityProfile>(&p.velocity))
    t.add_meta("velocity_profile", detail::join_doubles(prof->values));
}

/// Relative error of the order-K logistic closed form against the exact
/// logistic, per step. NaN once the exact solution has blown up.
inline std::vector<double> logistic_closed_form_error(double phi0, double a, double b, double dt,
                                                      std::size_t order, std::size_t n_steps) {
  std::vector<double> out(n_steps + 1);
  for (std::size_t s = 0; s <= n_steps; ++s) {
    const double t = dt * static_cast<double>(s);
    const auto exact = logistic_exact(phi0, a, b, t);
    if (!exact || *exact == 0.0) {
      out[s] = std::nan("");
      continue;
    }
    out[s] = std::abs(*exact - logistic_carleman_truncated(phi0, a, b, t, order)) / std::abs(*exact);
  }
  return out;
}

/// Single-site comparison of the nonlinear Euler map and the Euler-stepped
/// K-block Carleman hierarchy.
inline RelativeErrorSeries logistic_euler_error(double phi0, double a, double b, double dt,
                                                std::size_t order, std::size_t n_steps) {
  AdrParams single;
  single.diffusion = 0.0;
  single.linear_rate = a;
  single.quadratic_rate = b;
  single.dt = dt;
  single.n_sites = 1;
  single.velocity = ConstantVelocity{0.0};
  LatticeField phi(1);
  phi[0] = phi0;
  const TrajectoryPair run = run_trajectories(single, phi, order, n_steps);
  return relative_error_series(run.euler, run.carleman);
}

inline double nan_max(const std::vector<double> &v) {
  double m = 0.0;
  for (double x : v)
    if (std::isfinite(x))
      m = std::max(m, x);
  return m;
}

inline Outcome run_convergence(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  Outcome res;
  const AdrParams params = cfg.adr_params(cfg.n_sites);
  const LatticeField phi0 = cfg.initial_field();
  const double phi_max = phi0.maxCoeff();
  const double strength = nonlinearity_strength(phi_max, cfg.linear_rate, cfg.quadratic_rate);

  struct PerOrder {
    TrajectoryPair run;
    RelativeErrorSeries err;
    std::vector<double> logistic_err;
    RelativeErrorSeries logistic_euler;
  };
  std::vector<PerOrder> results(cfg.orders.size());
  parallel_for(cfg.orders.size(), [&](std::size_t i) {
    const std::size_t k = cfg.orders[i];
    PerOrder &r = results[i];
    r.run = run_trajectories(params, phi0, k, cfg.n_steps);
    r.err = relative_error_series(r.run.euler, r.run.carleman);
    r.logistic_err = logistic_closed_form_error(phi_max, cfg.linear_rate, cfg.quadratic_rate,
                                                cfg.dt, k, cfg.n_steps);
    r.logistic_euler = logistic_euler_error(phi_max, cfg.linear_rate, cfg.quadratic_rate, cfg.dt,
                                            k, cfg.n_steps);
  });

  CsvTable summary({"K", "max_rel_err", "mean_rel_err", "t_star", "logistic_rel_err",
                    "logistic_euler_rel_err", "overflow"});
  add_config_meta(summary, cfg, "convergence");
  add_physics_meta(summary, params);
  summary.add_meta("nonlinearity_R", strength);
  summary.add_meta("relative_error_guard", kRelativeErrorGuard);

  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < cfg.orders.size(); ++i) {
    const std::size_t k = cfg.orders[i];
    const PerOrder &r = results[i];
    const bool overflow = r.run.overflow_step.has_value();
    rows.push_back({k, r.err.max_error, r.err.mean_error_at_t_star, r.err.t_star_index, overflow});
    CsvTable::Row row;
    row << k << r.err.max_error << r.err.mean_error_at_t_star
        << cfg.dt * static_cast<double>(r.err.t_star_index) << nan_max(r.logistic_err)
        << r.logistic_euler.max_error << overflow;
    summary.add_row(row);
    if (overflow) {
      summary.add_meta("overflow_K" + std::to_string(k),
                       "non-finite value at step " + std::to_string(*r.run.overflow_step));
      res.fail("K=" + std::to_string(k) + ": trajectory overflowed at step " +
               std::to_string(*r.run.overflow_step));
    }

    CsvTable traj({"step", "t", "site", "phi_euler", "phi_carleman"});
    add_config_meta(traj, cfg, "convergence/trajectory");
    traj.add_meta("K", std::to_string(k));
    for (std::size_t s = 0; s < r.run.euler.size(); s += cfg.trajectory_stride)
      for (Eigen::Index j = 0; j < r.run.euler[s].size(); ++j) {
        CsvTable::Row tr;
        tr << s << cfg.dt * static_cast<double>(s) << static_cast<std::size_t>(j)
           << r.run.euler[s][j] << r.run.carleman[s][j];
        traj.add_row(tr);
      }
    const auto tpath = out / ("trajectory_K" + std::to_string(k) + ".csv");
    traj.write(tpath);
    res.files.push_back(tpath);

    CsvTable errs({"step", "t", "delta_r", "logistic_rel_err", "logistic_euler_rel_err"});
    add_config_meta(errs, cfg, "convergence/errors");
    errs.add_meta("K", std::to_string(k));
    for (std::size_t s = 0; s < r.err.series.size(); ++s) {
      CsvTable::Row er;
      er << s << cfg.dt * static_cast<double>(s) << r.err.series[s]
         << (s < r.logistic_err.size() ? r.logistic_err[s] : std::nan(""))
         << (s < r.logistic_euler.series.size() ? r.logistic_euler.series[s] : std::nan(""));
      errs.add_row(er);
    }
    const auto epath = out / ("errors_K" + std::to_string(k) + ".csv");
    errs.write(epath);
    res.files.push_back(epath);
  }
  summary.add_meta("log_slope", log_linear_slope(rows));
  const auto spath = out / "convergence.csv";
  summary.write(spath);
  res.files.insert(res.files.begin(), spath);
  return res;
}

/// m values at which a truncation curve is sampled: every m up to 64, then
/// geometric steps, always ending at the full term count.
inline std::vector<std::size_t> curve_grid(std::size_t terms, std::size_t points) {
  std::vector<std::size_t> m;
  for (std::size_t i = 0; i <= std::min<std::size_t>(terms, 64); ++i)
    m.push_back(i);
  if (terms > 64 && points > 0) {
    const double ratio = std::pow(static_cast<double>(terms) / 64.0, 1.0 / static_cast<double>(points));
    double x = 64.0;
    for (std::size_t i = 0; i < points; ++i) {
      x *= ratio;
      const auto v = static_cast<std::size_t>(std::llround(x));
      if (v > m.back() && v <= terms)
        m.push_back(v);
    }
    if (m.back() != terms)
      m.push_back(terms);
  }
  return m;
}

inline Outcome run_pauli_scaling(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  Outcome res;
  struct Case {
    std::string matrix;
    std::size_t n_sites;
    std::size_t order;
    PauliExpansion exp;
  };
  std::vector<Case> cases;
  for (std::size_t n : cfg.pauli_sites) {
    const std::size_t q = qubits_for(carleman_dimension(n, cfg.pauli_order));
    if (q > cfg.max_qubits)
      throw ConfigError("Carleman matrix for N=" + std::to_string(n) + ", K=" +
                        std::to_string(cfg.pauli_order) + " needs " + std::to_string(q) +
                        " qubits, above the cap pauli.max_qubits=" + std::to_string(cfg.max_qubits));
    cases.push_back({"carleman", n, cfg.pauli_order, {}});
  }
  for (std::size_t q : cfg.pauli_qubits) {
    if (q > cfg.max_qubits || q < 1)
      throw ConfigError("linear-operator case q=" + std::to_string(q) +
                        " outside [1, pauli.max_qubits=" + std::to_string(cfg.max_qubits) + "]");
    cases.push_back({"linear", std::size_t{1} << q, 1, {}});
  }
  parallel_for(cases.size(), [&](std::size_t i) {
    Case &c = cases[i];
    const AdrParams p = cfg.adr_params(c.n_sites);
    const SparseMatrix m = c.matrix == "carleman" ? CarlemanOperator(p, c.order).assemble()
                                                  : linear_matrix(p);
    c.exp = decompose(pad_to_power_of_two(m).matrix);
  });

  CsvTable dist({"matrix", "N", "K", "q", "m", "m_fraction", "d"});
  CsvTable mstar({"matrix", "N", "K", "q", "nonzeros", "terms", "epsilon", "m_star", "m_star_fraction"});
  add_config_meta(dist, cfg, "pauli/distance");
  add_config_meta(mstar, cfg, "pauli/mstar");
  for (const Case &c : cases) {
    const double nnz = static_cast<double>(c.exp.source_nonzeros);
    for (std::size_t m : curve_grid(c.exp.terms.size(), cfg.curve_points)) {
      CsvTable::Row r;
      r << c.matrix << c.n_sites << c.order << c.exp.qubits << m << static_cast<double>(m) / nnz
        << truncation_distance(c.exp, m);
      dist.add_row(r);
    }
    for (double eps : cfg.epsilons) {
      const std::size_t ms = terms_for_epsilon(c.exp, eps);
      CsvTable::Row r;
      r << c.matrix << c.n_sites << c.order << c.exp.qubits << c.exp.source_nonzeros
        << c.exp.terms.size() << eps << ms << static_cast<double>(ms) / nnz;
      mstar.add_row(r);
    }
  }
  const auto dpath = out / "pauli_distance.csv";
  const auto mpath = out / "pauli_mstar.csv";
  dist.write(dpath);
  mstar.write(mpath);
  res.files = {dpath, mpath};
  return res;
}

inline Outcome run_p0_scan(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  Outcome res;
  const std::size_t n = cfg.p0_sites;
  if (cfg.p0_simulate && (!detail::is_pow2(n) || n > 32))
    throw ConfigError("p0.simulate needs p0.N a power of two <= 32");

  struct Point {
    double adv, diff, re;
    bool applicable = false;
    double loc = 0, uni = 0, loc_sim = 0, uni_sim = 0;
  };
  std::vector<Point> points;
  for (double re : cfg.gamma_re)
    for (double diff : cfg.gamma_diff)
      for (double adv : cfg.gamma_adv)
        points.push_back({adv, diff, re});

  parallel_for(points.size(), [&](std::size_t i) {
    Point &pt = points[i];
    const CourantNumbers g{pt.diff, pt.adv, pt.re};
    pt.applicable = check_applicability(g).all_pass();
    if (!pt.applicable)
      return;
    const ToeplitzL l = ToeplitzL::from(n, g);
    pt.loc = p0_analytic_L(l, Localized{cfg.p0_site});
    pt.uni = p0_analytic_L(l, Uniform{});
    if (cfg.p0_simulate) {
      const BlockEncodingCircuit circ = build_be_circuit_L(l);
      pt.loc_sim = simulate_be(circ, amplitudes_of(Localized{cfg.p0_site}, n)).probability;
      pt.uni_sim = simulate_be(circ, amplitudes_of(Uniform{}, n)).probability;
    }
  });

  std::vector<std::string> cols = {"gamma_adv", "gamma_diff", "gamma_re", "applicable",
                                   "p0_localized", "p0_uniform"};
  if (cfg.p0_simulate) {
    cols.push_back("p0_localized_sim");
    cols.push_back("p0_uniform_sim");
  }
  CsvTable t(cols);
  add_config_meta(t, cfg, "p0scan");
  double worst = 0.0;
  for (const Point &pt : points) {
    CsvTable::Row r;
    r << pt.adv << pt.diff << pt.re << pt.applicable;
    if (pt.applicable) {
      r << pt.loc << pt.uni;
      if (cfg.p0_simulate) {
        r << pt.loc_sim << pt.uni_sim;
        worst = std::max({worst, std::abs(pt.loc - pt.loc_sim), std::abs(pt.uni - pt.uni_sim)});
      }
    } else {
      r << "" << "";
      if (cfg.p0_simulate)
        r << "" << "";
    }
    t.add_row(r);
  }
  if (cfg.p0_simulate) {
    t.add_meta("max_abs_sim_minus_analytic", worst);
    if (worst > 1e-12)
      res.fail("simulated p0 differs from the analytic expansion by " + format_double(worst));
  }
  const auto path = out / "p0_scan.csv";
  t.write(path);
  res.files = {path};
  return res;
}

inline std::vector<Complex> random_state(std::mt19937_64 &rng, std::size_t dim) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Complex> v(dim);
  double norm2 = 0.0;
  for (auto &x : v) {
    x = {nd(rng), nd(rng)};
    norm2 += std::norm(x);
  }
  const double s = 1.0 / std::sqrt(norm2);
  for (auto &x : v)
    x *= s;
  return v;
}

/// Valid Courant triple drawn uniformly from a box, rejecting draws that
/// break any strict applicability condition.
inline CourantNumbers random_courant(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> diff(0.0, 0.5), adv(0.0, 1.0), re(0.0, 0.1);
  for (;;) {
    const CourantNumbers g{diff(rng), adv(rng), re(rng)};
    if (check_applicability(g).all_pass())
      return g;
  }
}

inline double max_component_error(const std::vector<Complex> &residual, double scale,
                                  const SparseMatrix &m, const std::vector<Complex> &psi) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(psi.size()));
  for (std::size_t i = 0; i < psi.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = psi[i];
  const Eigen::VectorXcd mv = m.cast<Complex>() * v;
  double worst = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i)
    worst = std::max(worst, std::abs(residual[i] * scale - mv[static_cast<Eigen::Index>(i)]));
  return worst;
}

inline constexpr double kComponentTolerance = 1e-11;
inline constexpr double kProbabilityTolerance = 1e-12;

inline Outcome run_be_verify(const ExperimentConfig &cfg, const std::filesystem::path &out) {
  for (std::size_t n : cfg.be_l_sizes)
    if (!detail::is_pow2(n) || n > 32)
      throw ConfigError("be.L_sizes entries must be powers of two in [2, 32]");
  for (std::size_t n : cfg.be_b_sizes)
    if (!detail::is_pow2(n) || n > 8)
      throw ConfigError("be.B_sizes entries must be powers of two in [2, 8]");
  for (double c : cfg.b_dt)
    if (!(c >= 0.0 && c <= 1.0))
      throw ConfigError("be.b_dt entries must lie in [0, 1]");

  Outcome res;
  std::mt19937_64 rng(cfg.seed);
  CsvTable t({"case", "N", "draw", "state", "gamma_diff", "gamma_adv", "gamma_re", "b_dt",
              "max_component_err", "p0_sim", "p0_analytic"});
  add_config_meta(t, cfg, "beverify");
  t.add_meta("component_tolerance", kComponentTolerance);
  t.add_meta("probability_tolerance", kProbabilityTolerance);

  auto check = [&](const std::string &what, double err, double p_sim, double p_an) {
    if (err > kComponentTolerance)
      res.fail(what + ": component error " + format_double(err));
    if (std::isfinite(p_an) && std::abs(p_sim - p_an) > kProbabilityTolerance)
      res.fail(what + ": probability mismatch " + format_double(p_sim) + " vs " + format_double(p_an));
  };

  for (std::size_t n : cfg.be_l_sizes) {
    for (std::size_t d = 0; d < cfg.param_draws; ++d) {
      const CourantNumbers g = random_courant(rng);
      const ToeplitzL l = ToeplitzL::from(n, g);
      const BlockEncodingCircuit circ = build_be_circuit_L(l);
      const SparseMatrix lm = l.matrix();
      for (std::size_t s = 0; s < cfg.states; ++s) {
        const std::vector<Complex> psi = random_state(rng, n);
        const BlockEncodingResult r = simulate_be(circ, psi);
        const double err = max_component_error(r.residual, circ.subnormalisation(), lm, psi);
        const double p_an = p0_analytic_L(l, Explicit{psi});
        CsvTable::Row row;
        row << "L" << n << d << s << g.diffusion << g.advection << g.reaction << std::nan("")
            << err << r.probability << p_an;
        t.add_row(row);
        check("L N=" + std::to_string(n), err, r.probability, p_an);
      }
    }
    // dt = 0: identity block, probability 1/16 for every input.
    const ToeplitzL id = ToeplitzL::from(n, {0.0, 0.0, 0.0});
    const BlockEncodingCircuit circ = build_be_circuit_L(id);
    const std::vector<Complex> psi = random_state(rng, n);
    const BlockEncodingResult r = simulate_be(circ, psi);
    const double err = max_component_error(r.residual, circ.subnormalisation(), id.matrix(), psi);
    CsvTable::Row row;
    row << "L_dt0" << n << std::size_t{0} << std::size_t{0} << 0.0 << 0.0 << 0.0 << std::nan("")
        << err << r.probability << 1.0 / 16.0;
    t.add_row(row);
    check("L dt=0 N=" + std::to_string(n), err, r.probability, 1.0 / 16.0);
  }

  for (std::size_t n : cfg.be_b_sizes) {
    for (double coupling : cfg.b_dt) {
      const BhatOperator bh{n, coupling};
      const BlockEncodingCircuit circ = build_be_circuit_B(bh);
      const SparseMatrix bm = bh.matrix();
      for (std::size_t s = 0; s < cfg.states; ++s) {
        const std::vector<Complex> psi = random_state(rng, bh.padded_size());
        const BlockEncodingResult r = simulate_be(circ, psi);
        const double err = max_component_error(r.residual, circ.subnormalisation(), bm, psi);
        Eigen::VectorXcd v(static_cast<Eigen::Index>(psi.size()));
        for (std::size_t i = 0; i < psi.size(); ++i)
          v[static_cast<Eigen::Index>(i)] = psi[i];
        const double p_an = (bm.cast<Complex>() * v).squaredNorm() / 4.0;
        CsvTable::Row row;
        row << "B" << n << std::size_t{0} << s << std::nan("") << std::nan("") << std::nan("")
            << coupling << err << r.probability << p_an;
        t.add_row(row);
        check("B N=" + std::to_string(n), err, r.probability, p_an);
      }
      // Best computational-basis input: a diagonal u_2 entry.
      std::vector<Complex> basis(bh.padded_size(), Complex{0.0, 0.0});
      basis[bh.diagonal_index(0)] = 1.0;
      const BlockEncodingResult r = simulate_be(circ, basis);
      const double err = max_component_error(r.residual, circ.subnormalisation(), bm, basis);
      CsvTable::Row row;
      row << "B_basis_max" << n << std::size_t{0} << std::size_t{0} << std::nan("") << std::nan("")
          << std::nan("") << coupling << err << r.probability << p0_basis_max_B(bh);
      t.add_row(row);
      check("B basis max N=" + std::to_string(n), err, r.probability, p0_basis_max_B(bh));
    }
  }

  const auto path = out / "be_verify.csv";
  t.write(path);
  res.files = {path};
  return res;
}

}  // namespace adrq::experiments
