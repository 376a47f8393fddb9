#pragma once

// Front end for cone-program solves: backend dispatch plus an independent
// certificate check. Whatever a backend reports, the status returned here
// is decided by re-evaluating the residuals on the original problem data.

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "admm_solver.hpp"
#include "cone_program.hpp"
#include "ipm_solver.hpp"

namespace sparsekit {

enum class Backend { IPM, ADMM };

struct SolveOptions {
  double tol_solver = 1e-7;
  int max_iters = 50000;
  Backend backend = Backend::IPM;
};

namespace detail {

struct SplitMap {
  // Original row -> list of (new row in the cone part, coefficient). Zero
  // cone rows map into the equality part instead.
  std::vector<std::vector<std::pair<int, double>>> cone_targets;
  std::vector<int> eq_target;  // -1 when the row is not an equality
  int n_eq = 0;
  int n_lc = 0;
  std::vector<int> soc_dims;
  int n_cone_rows = 0;
};

// Classify rows: zero cone rows become equalities; nonnegative rows and
// one-dimensional second-order cones form the LP block; rotated cones are
// rotated into plain second-order cones.
inline SplitMap make_split_map(const ConeProgram& p) {
  SplitMap map;
  const int m = p.num_rows();
  map.cone_targets.assign(m, {});
  map.eq_target.assign(m, -1);
  int at = 0;
  std::vector<std::pair<int, const ConeBlock*>> cone_blocks;
  for (const auto& blk : p.cone_spec) {
    if (blk.kind == ConeKind::ZERO) {
      for (int i = 0; i < blk.dim; ++i) map.eq_target[at + i] = map.n_eq++;
    } else {
      cone_blocks.emplace_back(at, &blk);
    }
    at += blk.dim;
  }
  // LP rows first.
  int out = 0;
  for (auto& [start, blk] : cone_blocks) {
    if (blk->kind == ConeKind::NONNEG || blk->dim == 1) {
      for (int i = 0; i < blk->dim; ++i)
        map.cone_targets[start + i].push_back({out++, 1.0});
      map.n_lc += blk->dim;
    }
  }
  const double r2 = std::sqrt(0.5);
  for (auto& [start, blk] : cone_blocks) {
    if (blk->kind == ConeKind::NONNEG || blk->dim == 1) continue;
    if (blk->kind == ConeKind::SOC) {
      for (int i = 0; i < blk->dim; ++i)
        map.cone_targets[start + i].push_back({out + i, 1.0});
    } else {  // RSOC
      map.cone_targets[start].push_back({out, r2});
      map.cone_targets[start].push_back({out + 1, r2});
      map.cone_targets[start + 1].push_back({out, r2});
      map.cone_targets[start + 1].push_back({out + 1, -r2});
      for (int i = 2; i < blk->dim; ++i)
        map.cone_targets[start + i].push_back({out + i, 1.0});
    }
    map.soc_dims.push_back(blk->dim);
    out += blk->dim;
  }
  map.n_cone_rows = out;
  return map;
}

}  // namespace detail

inline SolverResult solve(const ConeProgram& p, const SolveOptions& opt = SolveOptions()) {
  p.validate();
  const int n = p.num_vars;
  const int m = p.num_rows();

  SolverResult res;
  if (opt.backend == Backend::ADMM) {
    admm::Solution sol = admm::solve(p, opt.tol_solver, opt.max_iters);
    res.primal = sol.z;
    res.slack = sol.s;
    res.dual = sol.y;
    res.iterations = sol.iterations;
  } else {
    const detail::SplitMap map = detail::make_split_map(p);
    std::vector<Eigen::Triplet<double>> ta, tg;
    for (int k = 0; k < p.eq_matrix.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(p.eq_matrix, k); it; ++it) {
        const int r = static_cast<int>(it.row());
        if (map.eq_target[r] >= 0) {
          ta.emplace_back(map.eq_target[r], it.col(), it.value());
        } else {
          for (const auto& [nr, cf] : map.cone_targets[r])
            tg.emplace_back(nr, it.col(), cf * it.value());
        }
      }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(map.n_eq);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(map.n_cone_rows);
    for (int r = 0; r < m; ++r) {
      if (map.eq_target[r] >= 0) {
        b(map.eq_target[r]) = p.eq_rhs(r);
      } else {
        for (const auto& [nr, cf] : map.cone_targets[r]) h(nr) += cf * p.eq_rhs(r);
      }
    }
    Eigen::SparseMatrix<double> A(map.n_eq, n), G(map.n_cone_rows, n);
    A.setFromTriplets(ta.begin(), ta.end());
    G.setFromTriplets(tg.begin(), tg.end());

    ipm::Settings st;
    st.feastol = st.abstol = st.reltol = std::max(opt.tol_solver / 10.0, 1e-9);
    st.feastol_inacc = st.abstol_inacc = st.reltol_inacc = std::max(opt.tol_solver, 1e-6);
    st.max_iters = std::min(opt.max_iters, st.max_iters);
    ipm::Solver solver(A, b, G, h, p.objective, map.n_lc, map.soc_dims, st);
    ipm::Solution sol = solver.solve();

    res.primal = sol.x;
    res.slack = Eigen::VectorXd::Zero(m);
    res.dual = Eigen::VectorXd::Zero(m);
    res.iterations = sol.iterations;
    // Scatter duals and slacks back to the original row order; the rotation
    // used for rotated cones is symmetric orthogonal, so the same
    // coefficients map solver-space vectors back.
    for (int r = 0; r < m; ++r) {
      if (map.eq_target[r] >= 0) {
        res.dual(r) = sol.y(map.eq_target[r]);
      } else {
        for (const auto& [nr, cf] : map.cone_targets[r]) {
          res.dual(r) += cf * sol.z(nr);
          res.slack(r) += cf * sol.s(nr);
        }
      }
    }
  }

  // Certificate check against the original data.
  if (!res.primal.allFinite() || !res.dual.allFinite() || !res.slack.allFinite()) {
    res.status = SolveStatus::NUMERICAL_FAILURE;
    return res;
  }
  const Eigen::VectorXd eq_res = p.eq_matrix * res.primal + res.slack - p.eq_rhs;
  double cone_viol = 0.0, dual_viol = 0.0;
  int at = 0;
  for (const auto& blk : p.cone_spec) {
    cone_viol = std::max(cone_viol, cone_violation(blk.kind, res.slack.segment(at, blk.dim)));
    dual_viol =
        std::max(dual_viol, dual_cone_violation(blk.kind, res.dual.segment(at, blk.dim)));
    at += blk.dim;
  }
  const double hnorm1 = 1.0 + p.eq_rhs.norm();
  const double cnorm1 = 1.0 + p.objective.norm();
  res.primal_residual = std::max(eq_res.norm(), cone_viol) / hnorm1;
  res.dual_residual =
      std::max((p.eq_matrix.transpose() * res.dual + p.objective).norm(), dual_viol) / cnorm1;
  const double pobj = p.objective.dot(res.primal);
  const double dobj = -p.eq_rhs.dot(res.dual);
  res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  res.objective = pobj + p.obj_offset;
  res.status = (res.primal_residual <= opt.tol_solver && res.dual_residual <= opt.tol_solver &&
                res.gap <= opt.tol_solver)
                   ? SolveStatus::OPTIMAL
                   : SolveStatus::MAX_ITERS;
  return res;
}

}  // namespace sparsekit
