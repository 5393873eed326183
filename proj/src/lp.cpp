#include "contextua/lp.hpp"

#include <cmath>
#include <limits>

namespace contextua::lp {

FeasibilityResult solve_feasibility(const RealMatrix& a, const RealVector& b, double tol) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m) throw Error("solve_feasibility: dimension mismatch");
  constexpr double kPivotEps = 1e-12;

  // Tableau [A | I | b] with the phase-one objective row appended.
  RealVector sign = RealVector::Ones(m);
  RealMatrix t = RealMatrix::Zero(m + 1, n + m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b(i) < 0) sign(i) = -1.0;
    t.row(i).head(n) = sign(i) * a.row(i);
    t(i, n + i) = 1.0;
    t(i, n + m) = sign(i) * b(i);
  }
  for (Eigen::Index j = 0; j < n; ++j) t(m, j) = -t.col(j).head(m).sum();
  t(m, n + m) = -t.col(n + m).head(m).sum();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  FeasibilityResult result;
  while (true) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > kPivotEps) {
        const double ratio = t(i, n + m) / t(i, enter);
        if (ratio < best - kPivotEps ||
            (std::abs(ratio - best) <= kPivotEps && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction; cannot happen for phase one

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    ++result.pivots;
  }

  result.infeasibility = -t(m, n + m);
  result.feasible = result.infeasibility <= tol;
  result.x = RealVector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index var = basis[static_cast<std::size_t>(i)];
    if (var < n) result.x(var) = std::max(0.0, t(i, n + m));
  }
  // Reduced cost of artificial i is 1 - y_i.
  result.y = RealVector(m);
  for (Eigen::Index i = 0; i < m; ++i) result.y(i) = sign(i) * (1.0 - t(m, n + i));
  return result;
}

}  // namespace contextua::lp
