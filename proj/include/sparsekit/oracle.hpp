#pragma once

// Brute-force l0 ground truth on small instances: feasibility of T
// restricted to a support, and exhaustive support enumeration.

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "instance.hpp"
#include "solver.hpp"

namespace sparsekit {

// True iff T contains a point supported on S (zero-based indices):
// min { ||y - A_S x_S||_2 : B_S x_S <= b } <= eps_noise + 1e-7.
// Cast as min r s.t. (r; y - A_S x_S) in SOC, B_S x_S <= b.
inline bool support_feasible(const Instance& inst, const std::vector<int>& S,
                             const SolveOptions& opt = SolveOptions()) {
  inst.validate();
  const int m = inst.m(), l = inst.l();
  const int k = static_cast<int>(S.size());
  for (int j : S)
    if (j < 0 || j >= inst.n()) throw std::out_of_range("support_feasible: index");

  if (k == 0) {
    double v = std::max(0.0, inst.y.norm() - inst.eps_noise);
    if (l > 0) v = std::max(v, (-inst.b).maxCoeff());
    return v <= 1e-7;
  }

  // Variables (x_S, r); rows: SOC(1+m) then the l inequalities.
  ConeProgram p;
  p.num_vars = k + 1;
  p.objective = Eigen::VectorXd::Zero(k + 1);
  p.objective(k) = 1.0;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(1 + m + l, k + 1);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(1 + m + l);
  G(0, k) = -1.0;
  for (int c = 0; c < k; ++c) G.block(1, c, m, 1) = inst.A.col(S[c]);
  h.segment(1, m) = inst.y;
  for (int c = 0; c < k; ++c) G.block(1 + m, c, l, 1) = inst.B.col(S[c]);
  h.tail(l) = inst.b;
  p.eq_matrix = G.sparseView();
  p.eq_rhs = h;
  p.cone_spec = {{ConeKind::SOC, 1 + m}};
  if (l > 0) p.cone_spec.push_back({ConeKind::NONNEG, l});

  const SolverResult r = solve(p, opt);
  if (r.status == SolveStatus::NUMERICAL_FAILURE)
    throw std::runtime_error("support_feasible: cone solve failed");
  return r.objective <= inst.eps_noise + 1e-7;
}

struct OracleResult {
  bool found = false;
  int k_star = -1;
  std::vector<int> witness_support;  // zero-based
};

// Smallest support cardinality with a feasible point, enumerating
// cardinalities ascending. Within a cardinality the enumeration order is
// reverse lexicographic, fixed for witness reproducibility.
inline OracleResult l0_min(const Instance& inst, int max_card,
                           const SolveOptions& opt = SolveOptions()) {
  inst.validate();
  const int n = inst.n();
  if (n > 20) throw std::invalid_argument("l0_min: n > 20 not supported");
  if (max_card < 0 || max_card > n) throw std::invalid_argument("l0_min: max_card");

  OracleResult out;
  for (int card = 0; card <= max_card; ++card) {
    // Subsets of size card in descending order of their index bitmask.
    std::vector<int> S(card);
    for (int i = 0; i < card; ++i) S[i] = n - card + i;
    while (true) {
      if (support_feasible(inst, S, opt)) {
        out.found = true;
        out.k_star = card;
        out.witness_support = S;
        return out;
      }
      // Step to the previous combination in lexicographic order.
      int i = card - 1;
      while (i >= 0 && S[i] == (i == 0 ? 0 : S[i - 1] + 1)) --i;
      if (i < 0) break;
      --S[i];
      for (int j = i + 1; j < card; ++j) S[j] = n - card + j;
    }
  }
  return out;
}

}  // namespace sparsekit
