#pragma once

// Operator-splitting reference backend. Alternates a linear solve against
// the affine constraint with projections onto the cone product; the dual
// iterate lands in the dual cone by the Moreau decomposition. Slow but
// simple, kept as a cross-check for the interior-point backend.

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "cone_program.hpp"

namespace sparsekit {
namespace admm {

struct Settings {
  double rho = 1.0;
  double sigma = 1e-6;       // proximal term, keeps the normal matrix definite
  double relax = 1.6;        // over-relaxation
  int check_every = 25;
};

struct Solution {
  Eigen::VectorXd z, s, y;
  int iterations = 0;
  bool finite = true;
};

inline Eigen::VectorXd project_onto_cones(const ConeProgram& p, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  int at = 0;
  for (const auto& blk : p.cone_spec) {
    out.segment(at, blk.dim) = project_cone(blk.kind, v.segment(at, blk.dim));
    at += blk.dim;
  }
  return out;
}

inline Solution solve(const ConeProgram& p, double tol, int max_iters,
                      Settings st = Settings()) {
  const int n = p.num_vars;
  const int m = p.num_rows();
  const Eigen::SparseMatrix<double>& G = p.eq_matrix;
  const Eigen::SparseMatrix<double> Gt = G.transpose();
  const Eigen::VectorXd& h = p.eq_rhs;
  const Eigen::VectorXd& c = p.objective;

  Eigen::SparseMatrix<double> M = (st.rho * (Gt * G)).pruned();
  for (int j = 0; j < n; ++j) M.coeffRef(j, j) += st.sigma;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(M);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);

  Solution sol;
  const double hnorm1 = 1.0 + h.norm();
  const double cnorm1 = 1.0 + c.norm();
  int it = 0;
  for (; it < max_iters; ++it) {
    const Eigen::VectorXd rhs = -c + st.rho * (Gt * (h - s - u)) + st.sigma * z;
    z = ldlt.solve(rhs);
    const Eigen::VectorXd gz = G * z;
    const Eigen::VectorXd gz_rel = st.relax * gz + (1.0 - st.relax) * (h - s);
    s = project_onto_cones(p, h - gz_rel - u);
    u += gz_rel + s - h;

    if ((it + 1) % st.check_every == 0 || it + 1 == max_iters) {
      const Eigen::VectorXd y = st.rho * u;
      const double pres = (gz + s - h).norm() / hnorm1;
      const double dres = (Gt * y + c).norm() / cnorm1;
      const double pobj = c.dot(z);
      const double dobj = -h.dot(y);
      const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (!std::isfinite(pres) || !std::isfinite(dres)) {
        sol.finite = false;
        break;
      }
      if (pres <= tol && dres <= tol && gap <= tol) {
        ++it;
        break;
      }
    }
  }
  sol.z = z;
  sol.s = s;
  sol.y = st.rho * u;
  sol.iterations = it;
  if (!sol.z.allFinite() || !sol.s.allFinite() || !sol.y.allFinite()) sol.finite = false;
  return sol;
}

}  // namespace admm
}  // namespace sparsekit
