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

/// Tensor-Pauli decomposition of sparse real matrices.
///
/// A Pauli string is written i^{|x&z|} X^x Z^z with bit masks x, z. Its entry
/// (r, c) is non-zero only when r ^ c == x, so the coefficients of every
/// string sharing one x mask come out of a single Walsh-Hadamard transform of
/// the matrix diagonal f_x(c) = M(c ^ x, c). Qubit 0 is the most significant
/// index bit and the leftmost label character.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "adrq/adr_core.hpp"

namespace adrq {

using Complex = std::complex<double>;

struct PauliString {
  std::string labels;
  Complex coefficient;
};

/// Pauli terms of a padded matrix sorted by |coefficient| descending, ties
/// broken by label order.
struct PauliExpansion {
  std::size_t qubits = 0;
  std::vector<PauliString> terms;
  double source_norm = 0.0;  // Frobenius norm of the padded matrix
  std::size_t source_nonzeros = 0;
  /// tail_energy[m] = 2^q sum_{i >= m} |alpha_i|^2, size terms + 1.
  std::vector<double> tail_energy;
};

struct PaddedMatrix {
  SparseMatrix matrix;
  std::size_t qubits = 0;
};

inline std::size_t qubits_for(std::size_t n) {
  std::size_t q = 0;
  while ((std::size_t{1} << q) < n)
    ++q;
  return q;
}

/// Embeds M in the top-left corner of a 2^q x 2^q zero matrix,
/// q = ceil(log2 n).
inline PaddedMatrix pad_to_power_of_two(const SparseMatrix &m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("pad_to_power_of_two needs a non-empty square matrix");
  PaddedMatrix out;
  out.qubits = qubits_for(static_cast<std::size_t>(m.rows()));
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << out.qubits);
  if (dim == m.rows()) {
    out.matrix = m;
  } else {
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(m.nonZeros()));
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(m, r); it; ++it)
        entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    out.matrix.resize(dim, dim);
    out.matrix.setFromTriplets(entries.begin(), entries.end());
  }
  out.matrix.makeCompressed();
  return out;
}

inline std::string pauli_label(std::uint64_t x, std::uint64_t z, std::size_t q) {
  std::string s(q, 'I');
  for (std::size_t k = 0; k < q; ++k) {
    const std::uint64_t bit = std::uint64_t{1} << (q - 1 - k);
    const bool xb = (x & bit) != 0;
    const bool zb = (z & bit) != 0;
    s[k] = xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
  }
  return s;
}

/// Inverse of pauli_label: returns {x mask, z mask}.
inline std::pair<std::uint64_t, std::uint64_t> pauli_masks(const std::string &labels) {
  std::uint64_t x = 0, z = 0;
  const std::size_t q = labels.size();
  for (std::size_t k = 0; k < q; ++k) {
    const std::uint64_t bit = std::uint64_t{1} << (q - 1 - k);
    switch (labels[k]) {
      case 'I': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default: throw std::invalid_argument("invalid Pauli label '" + labels + "'");
    }
  }
  return {x, z};
}

/// In-place unnormalised Walsh-Hadamard transform, length a power of two.
inline void walsh_hadamard(std::vector<double> &f) {
  const std::size_t n = f.size();
  for (std::size_t h = 1; h < n; h <<= 1)
    for (std::size_t i = 0; i < n; i += h << 1)
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = f[j];
        const double b = f[j + h];
        f[j] = a + b;
        f[j + h] = a - b;
      }
}

inline constexpr double kPauliZeroThreshold = 1e-14;

inline double frobenius_norm(const SparseMatrix &m) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      s += it.value() * it.value();
  return std::sqrt(s);
}

/// alpha_s = Tr(P_s^dagger M) / 2^q for every string with |alpha_s| above
/// 1e-14 ||M||_F. Cost O(#masks q 2^q).
inline PauliExpansion decompose(const SparseMatrix &padded) {
  const auto dim = static_cast<std::size_t>(padded.rows());
  if (padded.rows() != padded.cols() || !std::has_single_bit(dim))
    throw std::invalid_argument("decompose needs a square matrix of size 2^q");
  PauliExpansion exp;
  exp.qubits = static_cast<std::size_t>(std::countr_zero(dim));
  exp.source_norm = frobenius_norm(padded);

  std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, double>>> by_mask;
  for (Eigen::Index r = 0; r < padded.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(padded, r); it; ++it) {
      if (it.value() == 0.0)
        continue;
      ++exp.source_nonzeros;
      const auto row = static_cast<std::uint64_t>(it.row());
      const auto col = static_cast<std::uint64_t>(it.col());
      by_mask[row ^ col].emplace_back(col, it.value());
    }

  const double threshold = kPauliZeroThreshold * exp.source_norm;
  const double scale = 1.0 / static_cast<double>(dim);
  static const Complex minus_i_pow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  std::vector<double> f(dim);
  for (const auto &[x, entries] : by_mask) {
    std::fill(f.begin(), f.end(), 0.0);
    for (const auto &[col, value] : entries)
      f[col] += value;
    walsh_hadamard(f);
    for (std::uint64_t z = 0; z < dim; ++z) {
      if (std::abs(f[z]) * scale <= threshold)
        continue;
      const Complex alpha = minus_i_pow[std::popcount(x & z) & 3] * (f[z] * scale);
      exp.terms.push_back({pauli_label(x, z, exp.qubits), alpha});
    }
  }

  std::sort(exp.terms.begin(), exp.terms.end(),
            [](const PauliString &a, const PauliString &b) {
              const double ma = std::abs(a.coefficient);
              const double mb = std::abs(b.coefficient);
              if (ma != mb)
                return ma > mb;
              return a.labels < b.labels;
            });

  exp.tail_energy.assign(exp.terms.size() + 1, 0.0);
  for (std::size_t i = exp.terms.size(); i-- > 0;)
    exp.tail_energy[i] = exp.tail_energy[i + 1] +
                         std::norm(exp.terms[i].coefficient) * static_cast<double>(dim);
  return exp;
}

/// d(m) = ||M - sum_{i<m} alpha_i P_i||_F / ||M||_F, via Parseval.
inline double truncation_distance(const PauliExpansion &exp, std::size_t m) {
  if (m > exp.terms.size())
    throw std::out_of_range("truncation_distance: m = " + std::to_string(m) +
                            " exceeds term count " + std::to_string(exp.terms.size()));
  if (exp.source_norm == 0.0)
    return 0.0;
  return std::sqrt(std::max(0.0, exp.tail_energy[m])) / exp.source_norm;
}

/// Smallest m with d(m) < epsilon.
inline std::size_t terms_for_epsilon(const PauliExpansion &exp, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  std::size_t lo = 0, hi = exp.terms.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (truncation_distance(exp, mid) < epsilon)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

/// Dense matrix of a single Pauli string.
inline Eigen::MatrixXcd pauli_matrix(const std::string &labels) {
  const auto [x, z] = pauli_masks(labels);
  const std::size_t dim = std::size_t{1} << labels.size();
  static const Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Complex phase = i_pow[std::popcount(x & z) & 3];
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (std::uint64_t c = 0; c < dim; ++c) {
    const double sign = (std::popcount(z & c) & 1) ? -1.0 : 1.0;
    p(static_cast<Eigen::Index>(c ^ x), static_cast<Eigen::Index>(c)) = phase * sign;
  }
  return p;
}

/// sum over the first m terms, as a dense matrix.
inline Eigen::MatrixXcd reconstruct(const PauliExpansion &exp, std::size_t m) {
  m = std::min(m, exp.terms.size());
  const std::size_t dim = std::size_t{1} << exp.qubits;
  static const Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
  for (std::size_t t = 0; t < m; ++t) {
    const auto [x, z] = pauli_masks(exp.terms[t].labels);
    const Complex w = exp.terms[t].coefficient * i_pow[std::popcount(x & z) & 3];
    for (std::uint64_t c = 0; c < dim; ++c) {
      const double sign = (std::popcount(z & c) & 1) ? -1.0 : 1.0;
      out(static_cast<Eigen::Index>(c ^ x), static_cast<Eigen::Index>(c)) += w * sign;
    }
  }
  return out;
}

}  // namespace adrq
