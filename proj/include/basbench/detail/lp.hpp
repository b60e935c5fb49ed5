#pragma once

// Dense two-phase simplex for small LPs in standard form
//   minimize c'x  subject to  A x = b,  x >= 0.
// Bland's rule keeps it cycle-free; sizes here are tens of columns.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace basbench::detail {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Eigen::VectorXd x;
};

class Tableau {
 public:
  Tableau(Eigen::MatrixXd t, std::vector<Eigen::Index> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  // Minimize the objective stored in the last row over columns [0, ncols).
  // Returns false when unbounded.
  bool run(Eigen::Index ncols, double tol) {
    const Eigen::Index rows = t_.rows() - 1;
    const Eigen::Index rhs = t_.cols() - 1;
    for (int iter = 0; iter < 10000; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < ncols; ++j) {
        if (t_(rows, j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (t_(i, enter) > tol) {
          const double ratio = t_(i, rhs) / t_(i, enter);
          if (ratio < best - tol || (std::abs(ratio - best) <= tol && leave >= 0 && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[r] = c;
  }

  Eigen::MatrixXd& table() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

inline LpResult solve_standard_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                  double tol = 1e-10) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  LpResult res;
  // Phase 1 tableau: [A | I | b], objective = sum of artificials.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = b(i) < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = s * A.row(i);
    t(i, n + i) = 1.0;
    t(i, n + m) = s * b(i);
  }
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    basis[static_cast<std::size_t>(i)] = n + i;
    t.row(m) -= t.row(i);
  }
  for (Eigen::Index i = 0; i < m; ++i) t(m, n + i) = 0.0;
  Tableau tab(std::move(t), std::move(basis));
  tab.run(n + m, tol);
  if (-tab.table()(m, n + m) > 1e-8 * (1.0 + b.cwiseAbs().sum())) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  // Drive remaining artificials out of the basis.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.table()(i, j)) > tol) {
        tab.pivot(i, j);
        break;
      }
    }
  }
  // Phase 2: drop artificial columns, install the real objective.
  Eigen::MatrixXd t2(m + 1, n + 1);
  t2.topLeftCorner(m, n) = tab.table().topLeftCorner(m, n);
  t2.col(n).head(m) = tab.table().col(n + m).head(m);
  t2.row(m).head(n) = c.transpose();
  t2(m, n) = 0.0;
  std::vector<Eigen::Index> basis2 = tab.basis();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bj = basis2[static_cast<std::size_t>(i)];
    if (bj < n) {
      t2.row(m) -= t2(m, bj) * t2.row(i);
    } else {
      // Redundant row: all zeros on real columns; keep it inert.
      t2.row(i).setZero();
      basis2[static_cast<std::size_t>(i)] = -1;
    }
  }
  // Remove inert rows.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis2[static_cast<std::size_t>(i)] >= 0) keep.push_back(i);
  }
  Eigen::MatrixXd t3(static_cast<Eigen::Index>(keep.size()) + 1, n + 1);
  std::vector<Eigen::Index> basis3;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    t3.row(static_cast<Eigen::Index>(r)) = t2.row(keep[r]);
    basis3.push_back(basis2[static_cast<std::size_t>(keep[r])]);
  }
  t3.row(static_cast<Eigen::Index>(keep.size())) = t2.row(m);
  Tableau tab2(std::move(t3), std::move(basis3));
  if (!tab2.run(n, tol)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.x = Eigen::VectorXd::Zero(n);
  const auto& T = tab2.table();
  for (std::size_t r = 0; r < tab2.basis().size(); ++r) {
    res.x(tab2.basis()[r]) = T(static_cast<Eigen::Index>(r), n);
  }
  res.value = c.dot(res.x);
  return res;
}

}  // namespace basbench::detail
