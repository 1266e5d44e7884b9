// Copyright 2026 The peershield Authors.
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

// Dense simplex solver for two-player zero-sum matrix games, templated on
// the scalar type. With `Rational` every pivot is exact.

#ifndef PEERSHIELD_LP_H_
#define PEERSHIELD_LP_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace peershield {

using Rational = boost::multiprecision::cpp_rational;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Entries smaller than this are treated as zero during pivoting.
template <typename Scalar>
Scalar PivotTolerance() {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return Scalar(1e-11);
  } else {
    return Scalar(0);
  }
}

template <typename Scalar>
struct ZeroSumSolution {
  VectorX<Scalar> row_strategy;  // maximizer
  VectorX<Scalar> col_strategy;  // minimizer
  Scalar value;
  int pivots = 0;
};

// Solves max_x min_y x' P y over the simplices. The payoff is shifted to be
// >= 1 and the column player's program
//   max 1'y  s.t.  P y <= 1, y >= 0
// is run from the all-slack basis. Its optimum is 1 / value and the row
// player's strategy is read off the slack reduced costs. Dantzig pricing,
// switching to Bland's rule after every degenerate pivot, which rules out
// cycling.
template <typename Derived>
ZeroSumSolution<typename Derived::Scalar> SolveZeroSum(const Eigen::MatrixBase<Derived>& payoff) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = payoff.rows();
  const Eigen::Index n = payoff.cols();
  if (m == 0 || n == 0) throw std::invalid_argument("empty payoff matrix");
  const Scalar tol = PivotTolerance<Scalar>();
  const Scalar shift = Scalar(1) - payoff.minCoeff();

  const Eigen::Index rhs = n + m;
  MatrixX<Scalar> t = MatrixX<Scalar>::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = payoff + MatrixX<Scalar>::Constant(m, n, shift);
  for (Eigen::Index i = 0; i < m; ++i) {
    t(i, n + i) = Scalar(1);
    t(i, rhs) = Scalar(1);
  }
  t.row(m).head(n).setConstant(Scalar(-1));

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  ZeroSumSolution<Scalar> out;
  const long max_pivots = 200 * static_cast<long>(n + m) + 1000;
  // Leaving row: lexicographic minimum of (rhs, slack block) / pivot column.
  // The slack block holds the basis inverse, so this is the textbook
  // perturbation rule and cannot cycle. Comparisons use tol for doubles.
  auto lex_less = [&](Eigen::Index a, Eigen::Index b, Eigen::Index enter) {
    const Scalar ra = t(a, rhs) / t(a, enter);
    const Scalar rb = t(b, rhs) / t(b, enter);
    if (ra < rb - tol) return true;
    if (rb < ra - tol) return false;
    for (Eigen::Index k = n; k < n + m; ++k) {
      const Scalar va = t(a, k) / t(a, enter);
      const Scalar vb = t(b, k) / t(b, enter);
      if (va < vb - tol) return true;
      if (vb < va - tol) return false;
    }
    return false;
  };
  for (;;) {
    Eigen::Index enter = -1;
    Scalar best = -tol;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < best) {
        enter = j;
        best = t(m, j);
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) <= tol) continue;
      if (leave < 0 || lex_less(i, leave, enter)) leave = i;
    }
    if (leave < 0) throw std::runtime_error("zero-sum program unbounded; payoff not positive");
    if (++out.pivots > max_pivots) throw std::runtime_error("simplex pivot limit reached");

    const Scalar pivot = t(leave, enter);
    t.row(leave) /= pivot;
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const Scalar f = t(i, enter);
      if (f != Scalar(0)) t.row(i) -= f * t.row(leave);
    }
    if constexpr (std::is_floating_point_v<Scalar>) {
      // rounding can push a degenerate rhs just below zero
      for (Eigen::Index i = 0; i < m; ++i) t(i, rhs) = std::max(t(i, rhs), Scalar(0));
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  const Scalar total = t(m, rhs);
  out.col_strategy = VectorX<Scalar>::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = basis[static_cast<std::size_t>(i)];
    if (j < n) out.col_strategy(j) = t(i, rhs) / total;
  }
  out.row_strategy = t.row(m).segment(n, m).transpose() / total;
  if constexpr (std::is_floating_point_v<Scalar>) {
    // Clean sub-tolerance negatives left by rounding.
    out.col_strategy = out.col_strategy.cwiseMax(Scalar(0));
    out.row_strategy = out.row_strategy.cwiseMax(Scalar(0));
    out.col_strategy /= out.col_strategy.sum();
    out.row_strategy /= out.row_strategy.sum();
  }
  out.value = Scalar(1) / total - shift;
  return out;
}

}  // namespace peershield

#endif  // PEERSHIELD_LP_H_
