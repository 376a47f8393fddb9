#pragma once

// Optimality diagnostics for the weighted l1 relaxation: KKT residuals,
// the complementarity gap between |x| and lam6, and the constructive
// strictly-complementary-pair procedure (averaging n auxiliary solves).

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "instance.hpp"
#include "modeling.hpp"
#include "solver.hpp"

namespace sparsekit {

// Thresholded support count: |v_i| > scale * max(1, ||v||_inf).
inline int count_nonzeros(const Eigen::VectorXd& v, double scale = 1e-5) {
  if (v.size() == 0) return 0;
  const double thr = scale * std::max(1.0, v.lpNorm<Eigen::Infinity>());
  int k = 0;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > thr) ++k;
  return k;
}

struct KktReport {
  double stationarity_x = 0.0;
  double stationarity_gamma = 0.0;
  double stationarity_t = 0.0;
  double comp_soc = 0.0;
  double comp_ineq = 0.0;
  double comp_t_minus_x = 0.0;
  double comp_t_plus_x = 0.0;
  double comp_t = 0.0;
  double feasibility = 0.0;
  double max_residual = 0.0;
  bool gamma_grad_skipped = false;  // norm gradient undefined at gamma = 0
};

inline KktReport kkt_check(const Instance& inst, const Weight& w, const PrimalTriple& p,
                           const DualVars& d) {
  KktReport r;
  const Eigen::VectorXd& x = p.x;
  const Eigen::VectorXd& t = p.t;
  const Eigen::VectorXd& g = p.gamma;
  const double gnorm = g.norm();

  double feas = std::max(0.0, gnorm - inst.eps_noise);
  feas = std::max(feas, ((inst.y - inst.A * x) - g).lpNorm<Eigen::Infinity>());
  if (inst.l() > 0) feas = std::max(feas, std::max(0.0, (inst.B * x - inst.b).maxCoeff()));
  feas = std::max(feas, std::max(0.0, (x.cwiseAbs() - t).maxCoeff()));
  r.feasibility = feas;

  r.comp_soc = std::abs(d.lam1 * (inst.eps_noise - gnorm));
  if (inst.l() > 0)
    r.comp_ineq = (d.lam2.array() * (inst.b - inst.B * x).array()).abs().maxCoeff();
  r.comp_t_minus_x = (d.lam4.array() * (t - x).array()).abs().maxCoeff();
  r.comp_t_plus_x = (d.lam5.array() * (t + x).array()).abs().maxCoeff();
  r.comp_t = (d.lam6.array() * t.array()).abs().maxCoeff();

  Eigen::VectorXd sx = -inst.A.transpose() * d.lam3 + d.lam4 - d.lam5;
  if (inst.l() > 0) sx += inst.B.transpose() * d.lam2;
  r.stationarity_x = sx.lpNorm<Eigen::Infinity>();
  if (gnorm > 1e-12 * std::max(1.0, inst.eps_noise)) {
    r.stationarity_gamma = (d.lam1 * g / gnorm - d.lam3).lpNorm<Eigen::Infinity>();
  } else {
    r.gamma_grad_skipped = true;
  }
  r.stationarity_t = (w.w - d.lam4 - d.lam5 - d.lam6).lpNorm<Eigen::Infinity>();

  for (double v : {r.stationarity_x, r.stationarity_gamma, r.stationarity_t, r.comp_soc,
                   r.comp_ineq, r.comp_t_minus_x, r.comp_t_plus_x, r.comp_t, r.feasibility})
    r.max_residual = std::max(r.max_residual, v);
  return r;
}

struct ComplementarityReport {
  double gap = 0.0;      // max_i |x_i| (lam6)_i
  int support_sum = 0;   // thresholded ||x||_0 + ||lam6||_0
  int bound = 0;         // n, the upper bound from strict complementarity
};

inline ComplementarityReport complementarity_gap(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& lam6) {
  if (x.size() != lam6.size()) throw std::invalid_argument("complementarity_gap: sizes");
  if (lam6.size() > 0 && lam6.minCoeff() < 0)
    throw std::invalid_argument("complementarity_gap: lam6 must be nonnegative");
  ComplementarityReport r;
  r.bound = static_cast<int>(x.size());
  if (x.size() > 0) r.gap = (x.cwiseAbs().array() * lam6.array()).maxCoeff();
  r.support_sum = count_nonzeros(x) + count_nonzeros(lam6);
  return r;
}

struct StrictPair {
  PrimalTriple primal;
  DualVars dual;
  double min_sum = 0.0;           // min_i (t_i + (lam6)_i)
  std::vector<int> P_star;        // { i : t_i > strict_tol }, zero-based
  std::vector<int> Q_star;        // { i : (lam6)_i > strict_tol }, zero-based
  double z_star = 0.0;
  double gap = 0.0;               // primal-dual gap of the averaged pair
  double strict_tol = 0.0;
  bool strict = false;            // min_sum > strict_tol
};

// Builds a strictly complementary optimal pair by averaging the n auxiliary
// solutions: for each coordinate either a primal optimum with t_j > 0
// (case 1) or a rescaled auxiliary dual with (lam6)_j > 0 (case 2).
inline StrictPair strict_pair_construct(const Instance& inst, const Weight& w,
                                        const SolveOptions& opt = SolveOptions()) {
  inst.validate();
  const int n = inst.n();
  w.validate(n);
  if (w.w.minCoeff() <= 0.0)
    throw std::runtime_error("strict_pair_construct: Assumption 1 needs w > 0");

  const SolverResult base = solve(build_weighted_l1(inst, w), opt);
  if (base.status != SolveStatus::OPTIMAL)
    throw std::runtime_error("strict_pair_construct: base weighted l1 solve failed");
  const double z_star = base.objective;
  if (!std::isfinite(z_star) || z_star < -1e-9)
    throw std::runtime_error("strict_pair_construct: Assumption 1 needs 0 <= Z* < inf");
  const PrimalTriple base_primal = extract_primal(inst, base);
  const DualVars base_dual = extract_dual(inst, w, base);
  // Numerical Slater check: the optimum sits strictly inside the noise ball.
  if (!(base_primal.gamma.norm() < inst.eps_noise - 1e-8))
    throw std::runtime_error(
        "strict_pair_construct: Assumption 1 interior check failed (||gamma|| near eps)");

  PrimalTriple avg;
  avg.x = Eigen::VectorXd::Zero(n);
  avg.t = Eigen::VectorXd::Zero(n);
  avg.gamma = Eigen::VectorXd::Zero(inst.m());
  DualVars davg;
  davg.lam2 = Eigen::VectorXd::Zero(inst.l());
  davg.lam3 = Eigen::VectorXd::Zero(inst.m());
  davg.lam4 = Eigen::VectorXd::Zero(n);
  davg.lam5 = Eigen::VectorXd::Zero(n);
  davg.lam6 = Eigen::VectorXd::Zero(n);

  for (int j = 0; j < n; ++j) {
    const SolverResult aux = solve(build_aux_tj(inst, w, z_star, j), opt);
    if (aux.status != SolveStatus::OPTIMAL)
      throw std::runtime_error("strict_pair_construct: auxiliary solve " + std::to_string(j) +
                               " failed");
    const PrimalTriple aux_primal = extract_primal(inst, aux);
    const double xi_star = aux.objective;  // value of min -t_j over the level set
    const double case_tol = 1e-6 * std::max(1.0, aux_primal.t.lpNorm<Eigen::Infinity>());
    if (xi_star < -case_tol) {
      // Case 1: some optimal solution has t_j > 0; pair it with any base dual.
      avg.x += aux_primal.x;
      avg.t += aux_primal.t;
      avg.gamma += aux_primal.gamma;
      davg.lam1 += base_dual.lam1;
      davg.lam2 += base_dual.lam2;
      davg.lam3 += base_dual.lam3;
      davg.lam4 += base_dual.lam4;
      davg.lam5 += base_dual.lam5;
      davg.lam6 += base_dual.lam6;
    } else {
      // Case 2: t_j = 0 on the whole optimal face; the auxiliary dual scaled
      // by tau gives a base dual with (lam6)_j > 0.
      const AuxDual a = extract_aux_dual(inst, w, aux);
      if (a.tau <= 1e-9)
        throw std::runtime_error("strict_pair_construct: tau vanished in case 2 (solver "
                                 "failure, the proof excludes tau = 0)");
      avg.x += base_primal.x;
      avg.t += base_primal.t;
      avg.gamma += base_primal.gamma;
      davg.lam1 += a.mu.lam1 / a.tau;
      davg.lam2 += a.mu.lam2 / a.tau;
      davg.lam3 += a.mu.lam3 / a.tau;
      davg.lam4 += a.mu.lam4 / a.tau;
      davg.lam5 += a.mu.lam5 / a.tau;
      Eigen::VectorXd lam6p = a.mu.lam6;
      lam6p(j) += 1.0;
      davg.lam6 += lam6p / a.tau;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  avg.x *= inv_n;
  avg.t *= inv_n;
  avg.gamma *= inv_n;
  davg.lam1 *= inv_n;
  davg.lam2 *= inv_n;
  davg.lam3 *= inv_n;
  davg.lam4 *= inv_n;
  davg.lam5 *= inv_n;
  davg.lam6 *= inv_n;
  davg.lam6 = davg.lam6.cwiseMax(0.0);

  StrictPair out;
  out.primal = avg;
  out.dual = davg;
  out.z_star = z_star;
  out.gap = std::abs(w.w.dot(avg.t) - davg.dual_objective(inst));
  out.strict_tol = 1e-6 * std::max({1.0, avg.t.lpNorm<Eigen::Infinity>(),
                                    davg.lam6.lpNorm<Eigen::Infinity>()});
  out.min_sum = (avg.t + davg.lam6).minCoeff();
  out.strict = out.min_sum > out.strict_tol;
  for (int i = 0; i < n; ++i) {
    if (avg.t(i) > out.strict_tol) out.P_star.push_back(i);
    if (davg.lam6(i) > out.strict_tol) out.Q_star.push_back(i);
  }
  return out;
}

}  // namespace sparsekit
