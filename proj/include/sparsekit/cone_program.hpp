#pragma once

// Standard-form cone program
//
//   minimize    c'z
//   subject to  G z + s = h,   s in K
//
// where K is an ordered product of zero, nonnegative, second-order and
// rotated second-order cone blocks partitioning the rows of G.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sparsekit {

enum class ConeKind { ZERO, NONNEG, SOC, RSOC };

struct ConeBlock {
  ConeKind kind;
  int dim;
};

struct ConeProgram {
  int num_vars = 0;
  Eigen::VectorXd objective;                   // c
  Eigen::SparseMatrix<double> eq_matrix;       // G
  Eigen::VectorXd eq_rhs;                      // h
  std::vector<ConeBlock> cone_spec;
  double obj_offset = 0.0;                     // reported value is c'z + obj_offset

  int num_rows() const { return static_cast<int>(eq_rhs.size()); }

  void validate() const {
    if (objective.size() != num_vars) throw std::invalid_argument("cone program: objective size");
    if (eq_matrix.rows() != num_rows() || eq_matrix.cols() != num_vars)
      throw std::invalid_argument("cone program: matrix shape");
    int total = 0;
    for (const auto& b : cone_spec) {
      if (b.dim < 1) throw std::invalid_argument("cone program: empty cone block");
      if (b.kind == ConeKind::RSOC && b.dim < 3)
        throw std::invalid_argument("cone program: rotated cone needs dim >= 3");
      total += b.dim;
    }
    if (total != num_rows()) throw std::invalid_argument("cone program: cone dims do not cover rows");
  }
};

enum class SolveStatus { OPTIMAL, MAX_ITERS, NUMERICAL_FAILURE };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::OPTIMAL: return "optimal";
    case SolveStatus::MAX_ITERS: return "max_iters";
    case SolveStatus::NUMERICAL_FAILURE: return "numerical_failure";
  }
  return "?";
}

struct SolverResult {
  SolveStatus status = SolveStatus::NUMERICAL_FAILURE;
  Eigen::VectorXd primal;   // z
  Eigen::VectorXd slack;    // s, row order of the program
  Eigen::VectorXd dual;     // one multiplier per row, row order of the program
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();  // c'z + offset
};

// Euclidean projection onto a single cone block.
inline Eigen::VectorXd project_cone(ConeKind kind, const Eigen::VectorXd& v) {
  const int d = static_cast<int>(v.size());
  switch (kind) {
    case ConeKind::ZERO:
      return Eigen::VectorXd::Zero(d);
    case ConeKind::NONNEG:
      return v.cwiseMax(0.0);
    case ConeKind::SOC: {
      if (d < 1) throw std::invalid_argument("project_cone: empty block");
      if (d == 1) return v.cwiseMax(0.0);
      const double t = v(0);
      const double r = v.tail(d - 1).norm();
      if (r <= t) return v;
      if (r <= -t) return Eigen::VectorXd::Zero(d);
      Eigen::VectorXd p(d);
      const double a = 0.5 * (t + r);
      p(0) = a;
      p.tail(d - 1) = (a / r) * v.tail(d - 1);
      return p;
    }
    case ConeKind::RSOC: {
      if (d < 3) throw std::invalid_argument("project_cone: rotated block needs dim >= 3");
      // Rotate to a plain second-order cone, project, rotate back. The
      // rotation is symmetric orthogonal, so the same map returns.
      const double r2 = std::sqrt(0.5);
      Eigen::VectorXd u(d);
      u(0) = r2 * (v(0) + v(1));
      u(1) = r2 * (v(0) - v(1));
      u.tail(d - 2) = v.tail(d - 2);
      Eigen::VectorXd pu = project_cone(ConeKind::SOC, u);
      Eigen::VectorXd p(d);
      p(0) = r2 * (pu(0) + pu(1));
      p(1) = r2 * (pu(0) - pu(1));
      p.tail(d - 2) = pu.tail(d - 2);
      return p;
    }
  }
  throw std::invalid_argument("project_cone: unknown cone");
}

// Distance of v from the cone; used by feasibility checks.
inline double cone_violation(ConeKind kind, const Eigen::VectorXd& v) {
  return (v - project_cone(kind, v)).norm();
}

// Membership check for the dual cone. Zero rows have free duals; the other
// three cones are self-dual.
inline double dual_cone_violation(ConeKind kind, const Eigen::VectorXd& v) {
  if (kind == ConeKind::ZERO) return 0.0;
  return cone_violation(kind, v);
}

}  // namespace sparsekit
