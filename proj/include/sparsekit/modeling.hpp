#pragma once

// Builders that turn the sparse-recovery problems into cone programs:
// the weighted l1 relaxation and its dual extraction, the auxiliary
// problems of the strict-complementarity construction, and the
// dual-density relaxations with the fraction merit represented exactly
// through rotated second-order cones. A sequential-linearization fallback
// covers the merit families without an exact conic form.

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "instance.hpp"
#include "merit.hpp"
#include "solver.hpp"

namespace sparsekit {

// ---- weighted l1 ----
//
// Variables (x, t, gamma); rows in order:
//   [eq]    A x + gamma = y                     (m zero rows)
//   [ineq]  B x <= b                            (l nonneg rows)
//   [ball]  (eps; gamma) in SOC                 (m+1 rows)
//   [t-x]   t - x >= 0                          (n)
//   [t+x]   t + x >= 0                          (n)
//   [t]     t >= 0                              (n, kept explicit so its
//                                                multiplier realizes lam6)

inline ConeProgram build_weighted_l1(const Instance& inst, const Weight& weight) {
  inst.validate();
  const int m = inst.m(), n = inst.n(), l = inst.l();
  weight.validate(n);

  ConeProgram p;
  p.num_vars = 2 * n + m;
  p.objective = Eigen::VectorXd::Zero(p.num_vars);
  p.objective.segment(n, n) = weight.w;

  const int rows = m + l + (m + 1) + 3 * n;
  p.eq_rhs = Eigen::VectorXd::Zero(rows);
  std::vector<Eigen::Triplet<double>> t;
  int r = 0;
  for (int i = 0; i < m; ++i, ++r) {
    for (int j = 0; j < n; ++j)
      if (inst.A(i, j) != 0.0) t.emplace_back(r, j, inst.A(i, j));
    t.emplace_back(r, 2 * n + i, 1.0);
    p.eq_rhs(r) = inst.y(i);
  }
  for (int i = 0; i < l; ++i, ++r) {
    for (int j = 0; j < n; ++j)
      if (inst.B(i, j) != 0.0) t.emplace_back(r, j, inst.B(i, j));
    p.eq_rhs(r) = inst.b(i);
  }
  p.eq_rhs(r++) = inst.eps_noise;
  for (int i = 0; i < m; ++i, ++r) t.emplace_back(r, 2 * n + i, -1.0);
  for (int j = 0; j < n; ++j, ++r) {
    t.emplace_back(r, j, 1.0);
    t.emplace_back(r, n + j, -1.0);
  }
  for (int j = 0; j < n; ++j, ++r) {
    t.emplace_back(r, j, -1.0);
    t.emplace_back(r, n + j, -1.0);
  }
  for (int j = 0; j < n; ++j, ++r) t.emplace_back(r, n + j, -1.0);

  p.eq_matrix.resize(rows, p.num_vars);
  p.eq_matrix.setFromTriplets(t.begin(), t.end());
  p.cone_spec = {{ConeKind::ZERO, m}};
  if (l > 0) p.cone_spec.push_back({ConeKind::NONNEG, l});
  p.cone_spec.push_back({ConeKind::SOC, m + 1});
  p.cone_spec.push_back({ConeKind::NONNEG, 3 * n});
  return p;
}

inline PrimalTriple extract_primal(const Instance& inst, const SolverResult& result) {
  const int m = inst.m(), n = inst.n();
  PrimalTriple pt;
  pt.x = result.primal.head(n);
  pt.t = result.primal.segment(n, n);
  pt.gamma = result.primal.tail(m);
  return pt;
}

inline DualVars extract_dual(const Instance& inst, const Weight& weight,
                             const SolverResult& result) {
  if (result.status != SolveStatus::OPTIMAL)
    throw std::runtime_error("extract_dual: solve did not reach optimality");
  const int m = inst.m(), n = inst.n(), l = inst.l();
  DualVars d;
  int r = m;  // skip the equality block
  d.lam2 = result.dual.segment(r, l);
  r += l;
  d.lam1 = result.dual(r++);
  // The paper orients lam3 so the dual objective carries +lam3'y; that is
  // the negative of the cone-block tail multiplier in this row layout.
  d.lam3 = -result.dual.segment(r, m);
  r += m;
  d.lam4 = result.dual.segment(r, n);
  r += n;
  d.lam5 = result.dual.segment(r, n);
  r += n;
  d.lam6 = result.dual.segment(r, n);
  (void)weight;
  return d;
}

// ---- auxiliary problems of the strict-complementarity construction ----
//
// Same rows as the weighted l1 build plus one nonneg row  w't <= z_star;
// objective -t_j. The multiplier of the extra row is tau.

inline ConeProgram build_aux_tj(const Instance& inst, const Weight& weight, double z_star,
                                int j) {
  const int n = inst.n();
  if (j < 0 || j >= n) throw std::out_of_range("build_aux_tj: index");
  ConeProgram p = build_weighted_l1(inst, weight);
  p.objective.setZero();
  p.objective(n + j) = -1.0;
  const int rows = p.num_rows();
  p.eq_matrix.conservativeResize(rows + 1, p.num_vars);
  for (int k = 0; k < n; ++k)
    if (weight.w(k) != 0.0) p.eq_matrix.insert(rows, n + k) = weight.w(k);
  p.eq_rhs.conservativeResize(rows + 1);
  p.eq_rhs(rows) = z_star;
  p.cone_spec.push_back({ConeKind::NONNEG, 1});
  return p;
}

struct AuxDual {
  DualVars mu;
  double tau = 0.0;
};

inline AuxDual extract_aux_dual(const Instance& inst, const Weight& weight,
                                const SolverResult& result) {
  AuxDual a;
  a.mu = extract_dual(inst, weight, result);
  a.tau = result.dual(result.dual.size() - 1);
  return a;
}

// ---- dual-density relaxations ----

enum class DdaVariant { I, II, III };

enum class WeightRuleKind { BOX, INVERSE };

struct WeightSetRule {
  WeightRuleKind variant = WeightRuleKind::INVERSE;
  double M = 10.0;
  double M_star = 10.0;   // BOX only
  double sigma2 = 0.1;    // INVERSE only
  Eigen::VectorXd anchor;

  void validate(int n) const {
    if (anchor.size() != n) throw std::invalid_argument("weight rule: anchor size");
    if (variant == WeightRuleKind::BOX && !(1.0 <= M && M <= M_star))
      throw std::invalid_argument("weight rule: box needs 1 <= M <= M_star");
    if (variant == WeightRuleKind::INVERSE && !(sigma2 > 0))
      throw std::invalid_argument("weight rule: sigma2 must be positive");
  }

  // Violation of w in W^k, for postcondition checks.
  double violation(const Eigen::VectorXd& w) const {
    double v = -std::min(0.0, w.minCoeff());
    if (variant == WeightRuleKind::BOX) {
      v = std::max(v, anchor.dot(w) - M);
      v = std::max(v, (w.array() - M_star).maxCoeff());
    } else {
      for (int i = 0; i < w.size(); ++i)
        v = std::max(v, w(i) - M / (std::abs(anchor(i)) + sigma2));
    }
    return v;
  }
};

struct DensityConfig {
  double alpha = 1e-8;        // variants I, II
  double gamma_bound = 1.0;   // variant III
  double sigma1 = 0.1;        // variant III surrogate shift
  MeritFunction merit{MeritFamily::FRACTION, 1e-15};
};

namespace detail {

// Variable offsets of the density programs.
struct DensityLayout {
  int n, m, l;
  bool with_u, with_psi;
  int ow = 0, o1, o2, o3, o4, o5, o6, ou, opsi, ov, num_vars;

  DensityLayout(const Instance& inst, bool u, bool psi)
      : n(inst.n()), m(inst.m()), l(inst.l()), with_u(u), with_psi(psi) {
    o1 = n;
    o2 = o1 + 1;
    o3 = o2 + l;
    o4 = o3 + m;
    o5 = o4 + n;
    o6 = o5 + n;
    ou = o6 + n;
    opsi = ou + (with_u ? n : 0);
    ov = opsi + 1;
    num_vars = with_psi ? ov + 1 : opsi;
  }
};

// Coefficients of the dual objective -lam1*eps - lam2'b + lam3'y as a row
// of G (so that G z = dual objective).
inline void add_dobj_row(std::vector<Eigen::Triplet<double>>& t, int row,
                         const DensityLayout& lay, const Instance& inst, double scale = 1.0) {
  if (inst.eps_noise != 0.0) t.emplace_back(row, lay.o1, -scale * inst.eps_noise);
  for (int i = 0; i < lay.l; ++i)
    if (inst.b(i) != 0.0) t.emplace_back(row, lay.o2 + i, -scale * inst.b(i));
  for (int i = 0; i < lay.m; ++i)
    if (inst.y(i) != 0.0) t.emplace_back(row, lay.o3 + i, scale * inst.y(i));
}

struct DensityBuild {
  ConeProgram program;
  DensityLayout layout;
};

// Shared part of all density programs: lam in D(w), w >= 0, optional
// rotated-cone epigraph u_i >= 1/(lam6_i + eps), optional weight-set rows.
// Variant rows and the objective are appended by the callers.
inline DensityBuild density_base(const Instance& inst, bool with_u, bool with_psi,
                                 double eps_merit,
                                 const std::optional<WeightSetRule>& rule) {
  inst.validate();
  DensityLayout lay(inst, with_u, with_psi);
  const int n = lay.n, m = lay.m, l = lay.l;
  if (rule) rule->validate(n);

  std::vector<Eigen::Triplet<double>> t;
  std::vector<double> h;
  std::vector<ConeBlock> cones;
  int r = 0;
  auto push_rows = [&](ConeKind kind, int dim) {
    cones.push_back({kind, dim});
    h.resize(h.size() + dim, 0.0);
  };

  // B'lam2 - A'lam3 + lam4 - lam5 = 0
  push_rows(ConeKind::ZERO, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < l; ++i)
      if (inst.B(i, j) != 0.0) t.emplace_back(r + j, lay.o2 + i, inst.B(i, j));
    for (int i = 0; i < m; ++i)
      if (inst.A(i, j) != 0.0) t.emplace_back(r + j, lay.o3 + i, -inst.A(i, j));
    t.emplace_back(r + j, lay.o4 + j, 1.0);
    t.emplace_back(r + j, lay.o5 + j, -1.0);
  }
  r += n;

  // w = lam4 + lam5 + lam6
  push_rows(ConeKind::ZERO, n);
  for (int j = 0; j < n; ++j) {
    t.emplace_back(r + j, lay.ow + j, 1.0);
    t.emplace_back(r + j, lay.o4 + j, -1.0);
    t.emplace_back(r + j, lay.o5 + j, -1.0);
    t.emplace_back(r + j, lay.o6 + j, -1.0);
  }
  r += n;

  // ||lam3|| <= lam1
  push_rows(ConeKind::SOC, m + 1);
  t.emplace_back(r, lay.o1, -1.0);
  for (int i = 0; i < m; ++i) t.emplace_back(r + 1 + i, lay.o3 + i, -1.0);
  r += m + 1;

  // sign constraints
  if (l > 0) {
    push_rows(ConeKind::NONNEG, l);
    for (int i = 0; i < l; ++i) t.emplace_back(r + i, lay.o2 + i, -1.0);
    r += l;
  }
  push_rows(ConeKind::NONNEG, 3 * n);
  for (int j = 0; j < 3 * n; ++j) t.emplace_back(r + j, lay.o4 + j, -1.0);
  r += 3 * n;
  push_rows(ConeKind::NONNEG, n);
  for (int j = 0; j < n; ++j) t.emplace_back(r + j, lay.ow + j, -1.0);
  r += n;

  // u_i (lam6_i + eps) >= 1 through (u_i, (lam6_i + eps)/2, 1) in RSOC
  if (with_u) {
    for (int j = 0; j < n; ++j) {
      push_rows(ConeKind::RSOC, 3);
      t.emplace_back(r, lay.ou + j, -1.0);
      t.emplace_back(r + 1, lay.o6 + j, -0.5);
      h[r + 1] = eps_merit / 2.0;
      h[r + 2] = 1.0;
      r += 3;
    }
  }

  if (rule) {
    if (rule->variant == WeightRuleKind::BOX) {
      push_rows(ConeKind::NONNEG, 1);
      for (int j = 0; j < n; ++j)
        if (rule->anchor(j) != 0.0) t.emplace_back(r, lay.ow + j, rule->anchor(j));
      h[r] = rule->M;
      r += 1;
      push_rows(ConeKind::NONNEG, n);
      for (int j = 0; j < n; ++j) {
        t.emplace_back(r + j, lay.ow + j, 1.0);
        h[r + j] = rule->M_star;
      }
      r += n;
    } else {
      push_rows(ConeKind::NONNEG, n);
      for (int j = 0; j < n; ++j) {
        t.emplace_back(r + j, lay.ow + j, 1.0);
        h[r + j] = rule->M / (std::abs(rule->anchor(j)) + rule->sigma2);
      }
      r += n;
    }
  }

  DensityBuild out{ConeProgram{}, lay};
  out.program.num_vars = lay.num_vars;
  out.program.objective = Eigen::VectorXd::Zero(lay.num_vars);
  out.program.eq_rhs = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<int>(h.size()));
  out.program.eq_matrix.resize(r, lay.num_vars);
  out.program.eq_matrix.setFromTriplets(t.begin(), t.end());
  out.program.cone_spec = std::move(cones);
  return out;
}

// Appends rows to an existing program.
inline void append_rows(ConeProgram& p, const std::vector<Eigen::Triplet<double>>& extra,
                        const std::vector<double>& rhs,
                        const std::vector<ConeBlock>& cones) {
  const int r0 = p.num_rows();
  const int add = static_cast<int>(rhs.size());
  Eigen::SparseMatrix<double> G(r0 + add, p.num_vars);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(p.eq_matrix.nonZeros() + extra.size());
  for (int k = 0; k < p.eq_matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(p.eq_matrix, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (const auto& e : extra) t.emplace_back(e.row() + r0, e.col(), e.value());
  G.setFromTriplets(t.begin(), t.end());
  p.eq_matrix = std::move(G);
  p.eq_rhs.conservativeResize(r0 + add);
  for (int i = 0; i < add; ++i) p.eq_rhs(r0 + i) = rhs[i];
  for (const auto& c : cones) p.cone_spec.push_back(c);
}

}  // namespace detail

// Exact conic build of the dual-density problem (fraction merit only).
// Pass a weight-set rule to get the corresponding reweighted subproblem.
inline ConeProgram build_density_program(DdaVariant variant, const Instance& inst,
                                         const DensityConfig& cfg,
                                         const std::optional<WeightSetRule>& rule,
                                         bool cap_dobj_at_one) {
  if (!cfg.merit.soc_exact())
    throw std::invalid_argument(
        "build_density_program: merit has no exact conic form, use solve_nonconic");
  cfg.merit.validate();
  if (variant != DdaVariant::III && !(cfg.alpha > 0))
    throw std::invalid_argument("build_density_program: alpha must be positive");
  if (variant == DdaVariant::III && !(cfg.sigma1 > 0))
    throw std::invalid_argument("build_density_program: sigma1 must be positive");
  const double eps = cfg.merit.eps_merit;
  const bool with_psi = variant == DdaVariant::III;
  auto [p, lay] = detail::density_base(inst, true, with_psi, eps, rule);
  const int n = lay.n;

  std::vector<Eigen::Triplet<double>> t;
  std::vector<double> h;
  std::vector<ConeBlock> cones;

  switch (variant) {
    case DdaVariant::I: {
      // max dobj + alpha (n - eps sum u)  s.t.  dobj <= 1
      detail::add_dobj_row(t, 0, lay, inst);
      h.push_back(1.0);
      cones.push_back({ConeKind::NONNEG, 1});
      p.objective(lay.o1) = inst.eps_noise;
      for (int i = 0; i < lay.l; ++i) p.objective(lay.o2 + i) = inst.b(i);
      for (int i = 0; i < lay.m; ++i) p.objective(lay.o3 + i) = -inst.y(i);
      for (int j = 0; j < n; ++j) p.objective(lay.ou + j) = cfg.alpha * eps;
      p.obj_offset = -cfg.alpha * static_cast<double>(n);
      break;
    }
    case DdaVariant::II: {
      // max dobj  s.t.  dobj <= alpha (n - eps sum u)
      detail::add_dobj_row(t, 0, lay, inst);
      for (int j = 0; j < n; ++j) t.emplace_back(0, lay.ou + j, cfg.alpha * eps);
      h.push_back(cfg.alpha * static_cast<double>(n));
      cones.push_back({ConeKind::NONNEG, 1});
      if (cap_dobj_at_one) {
        detail::add_dobj_row(t, 1, lay, inst);
        h.push_back(1.0);
        cones.push_back({ConeKind::NONNEG, 1});
      }
      p.objective(lay.o1) = inst.eps_noise;
      for (int i = 0; i < lay.l; ++i) p.objective(lay.o2 + i) = inst.b(i);
      for (int i = 0; i < lay.m; ++i) p.objective(lay.o3 + i) = -inst.y(i);
      break;
    }
    case DdaVariant::III: {
      // max dobj  s.t.  dobj + v <= gamma_bound,
      //                 v (psi + sigma1) >= 1,  psi <= n - eps sum u
      int r = 0;
      for (int j = 0; j < n; ++j) t.emplace_back(r, lay.ou + j, eps);
      t.emplace_back(r, lay.opsi, 1.0);
      h.push_back(static_cast<double>(n));
      cones.push_back({ConeKind::NONNEG, 1});
      ++r;
      t.emplace_back(r, lay.ov, -1.0);
      t.emplace_back(r + 1, lay.opsi, -0.5);
      h.push_back(0.0);
      h.push_back(cfg.sigma1 / 2.0);
      h.push_back(1.0);
      cones.push_back({ConeKind::RSOC, 3});
      r += 3;
      detail::add_dobj_row(t, r, lay, inst);
      t.emplace_back(r, lay.ov, 1.0);
      h.push_back(cfg.gamma_bound);
      cones.push_back({ConeKind::NONNEG, 1});
      p.objective(lay.o1) = inst.eps_noise;
      for (int i = 0; i < lay.l; ++i) p.objective(lay.o2 + i) = inst.b(i);
      for (int i = 0; i < lay.m; ++i) p.objective(lay.o3 + i) = -inst.y(i);
      break;
    }
  }
  detail::append_rows(p, t, h, cones);
  return p;
}

inline ConeProgram build_dda(DdaVariant variant, const Instance& inst,
                             const DensityConfig& cfg) {
  return build_density_program(variant, inst, cfg, std::nullopt, false);
}

// DRA table: I/II anchor DDA(I)'s relaxation, III/IV anchor DDA(II)'s,
// V/VI anchor DDA(III)'s; odd variants use the box rule, even the inverse
// rule. Variants I/II keep the dual-objective cap.
enum class DraVariant { I, II, III, IV, V, VI };

inline DdaVariant dra_base(DraVariant v) {
  switch (v) {
    case DraVariant::I:
    case DraVariant::II: return DdaVariant::I;
    case DraVariant::III:
    case DraVariant::IV: return DdaVariant::II;
    default: return DdaVariant::III;
  }
}

inline WeightRuleKind dra_rule_kind(DraVariant v) {
  switch (v) {
    case DraVariant::I:
    case DraVariant::III:
    case DraVariant::V: return WeightRuleKind::BOX;
    default: return WeightRuleKind::INVERSE;
  }
}

inline ConeProgram build_dra_subproblem(DraVariant variant, const Instance& inst,
                                        const WeightSetRule& rule, const DensityConfig& cfg) {
  return build_density_program(dra_base(variant), inst, cfg, rule, false);
}

// ---- solving the density programs ----

struct DensitySolution {
  Weight w;
  DualVars lam;
  Eigen::VectorXd u;       // empty on the linearized path
  double objective = 0.0;  // value of the maximization
  SolveStatus status = SolveStatus::NUMERICAL_FAILURE;
  bool used_eps_floor = false;
  int linearization_iters = 0;
};

namespace detail {

inline DensitySolution extract_density(const DensityLayout& lay, const SolverResult& res) {
  DensitySolution out;
  out.w.w = res.primal.segment(lay.ow, lay.n).cwiseMax(0.0);
  out.lam.lam1 = res.primal(lay.o1);
  out.lam.lam2 = res.primal.segment(lay.o2, lay.l);
  out.lam.lam3 = res.primal.segment(lay.o3, lay.m);
  out.lam.lam4 = res.primal.segment(lay.o4, lay.n).cwiseMax(0.0);
  out.lam.lam5 = res.primal.segment(lay.o5, lay.n).cwiseMax(0.0);
  out.lam.lam6 = res.primal.segment(lay.o6, lay.n).cwiseMax(0.0);
  if (lay.with_u) out.u = res.primal.segment(lay.ou, lay.n);
  out.objective = -res.objective;
  out.status = res.status;
  return out;
}

}  // namespace detail

// Exact path with the documented conditioning floor: Table 3's
// eps_merit = 1e-15 can defeat double precision, in which case the solve is
// retried once with eps = 1e-8 and the substitution is flagged.
constexpr double kEpsFloor = 1e-8;

inline DensitySolution solve_density(DdaVariant variant, const Instance& inst,
                                     const DensityConfig& cfg,
                                     const std::optional<WeightSetRule>& rule,
                                     bool cap_dobj_at_one,
                                     const SolveOptions& opt = SolveOptions()) {
  DensityConfig c = cfg;
  ConeProgram p = build_density_program(variant, inst, c, rule, cap_dobj_at_one);
  SolverResult res = solve(p, opt);
  bool floored = false;
  if (res.status != SolveStatus::OPTIMAL && c.merit.eps_merit < kEpsFloor) {
    c.merit.eps_merit = kEpsFloor;
    p = build_density_program(variant, inst, c, rule, cap_dobj_at_one);
    const SolverResult res2 = solve(p, opt);
    if (res2.status == SolveStatus::OPTIMAL ||
        (res2.primal.allFinite() && !res.primal.allFinite()) ||
        (res2.primal.allFinite() && res2.primal_residual < res.primal_residual)) {
      res = res2;
      floored = true;
    }
  }
  if (!res.primal.allFinite())
    throw std::runtime_error("solve_density: subproblem returned non-finite iterate");
  detail::DensityLayout lay(inst, true, variant == DdaVariant::III);
  DensitySolution out = detail::extract_density(lay, res);
  out.used_eps_floor = floored;
  return out;
}

// ---- sequential linearization fallback (merits without a conic form) ----
//
// Linearizes the merit (and, for variant III, the surrogate) at the current
// lam6 iterate, solves the resulting cone program, and damps the
// linearization point toward the new iterate whenever the true nonlinear
// constraint is violated. Accepts the fraction merit too, which gives an
// independent cross-check of the exact conic path.

inline DensitySolution solve_nonconic(DdaVariant variant, const Instance& inst,
                                      const DensityConfig& cfg,
                                      const std::optional<WeightSetRule>& rule = std::nullopt,
                                      bool cap_dobj_at_one = false,
                                      const SolveOptions& opt = SolveOptions()) {
  cfg.merit.validate();
  const int n = inst.n();
  const double tol_true = 1e-6;
  const int max_inner = 20;
  const double theta = 0.5;

  const Surrogate surrogate{SurrogateKind::J3_INVPSI, cfg.sigma1, cfg.merit};
  Eigen::VectorXd anchor6 = Eigen::VectorXd::Zero(n);
  std::optional<DensitySolution> last_good;
  int inner = 0;
  for (; inner < max_inner; ++inner) {
    const double psi0 = merit_value(cfg.merit, anchor6);
    const Eigen::VectorXd g = merit_gradient(cfg.merit, anchor6);
    // Tangent of the concave merit at the anchor: psi_hat >= psi everywhere.
    const double kappa0 = psi0 - g.dot(anchor6);

    // The tangent psi_hat over-estimates the concave merit and is unbounded
    // above, so every use of it is paired with the valid global bound
    // Psi <= n to keep the subproblems bounded.
    const bool epigraph = variant == DdaVariant::I;
    auto [p, lay] = detail::density_base(inst, false, epigraph, cfg.merit.eps_merit, rule);
    std::vector<Eigen::Triplet<double>> t;
    std::vector<double> h;
    std::vector<ConeBlock> cones;
    int row = 0;
    p.objective(lay.o1) = inst.eps_noise;
    for (int i = 0; i < lay.l; ++i) p.objective(lay.o2 + i) = inst.b(i);
    for (int i = 0; i < lay.m; ++i) p.objective(lay.o3 + i) = -inst.y(i);
    switch (variant) {
      case DdaVariant::I: {
        // Epigraph z <= min(psi_hat, n), maximize dobj + alpha z.
        p.objective(lay.opsi) = -cfg.alpha;
        t.emplace_back(row, lay.opsi, 1.0);
        for (int j = 0; j < n; ++j)
          if (g(j) != 0.0) t.emplace_back(row, lay.o6 + j, -g(j));
        h.push_back(kappa0);
        cones.push_back({ConeKind::NONNEG, 1});
        ++row;
        t.emplace_back(row, lay.opsi, 1.0);
        h.push_back(static_cast<double>(n));
        cones.push_back({ConeKind::NONNEG, 1});
        ++row;
        detail::add_dobj_row(t, row, lay, inst);
        h.push_back(1.0);
        cones.push_back({ConeKind::NONNEG, 1});
        ++row;
        // Unused slack variable of the layout, pinned.
        t.emplace_back(row, lay.ov, 1.0);
        h.push_back(0.0);
        cones.push_back({ConeKind::ZERO, 1});
        ++row;
        break;
      }
      case DdaVariant::II: {
        detail::add_dobj_row(t, row, lay, inst);
        for (int j = 0; j < n; ++j)
          if (g(j) != 0.0) t.emplace_back(row, lay.o6 + j, -cfg.alpha * g(j));
        h.push_back(cfg.alpha * kappa0);
        cones.push_back({ConeKind::NONNEG, 1});
        ++row;
        detail::add_dobj_row(t, row, lay, inst);
        h.push_back(cfg.alpha * static_cast<double>(n));
        cones.push_back({ConeKind::NONNEG, 1});
        ++row;
        if (cap_dobj_at_one) {
          detail::add_dobj_row(t, row, lay, inst);
          h.push_back(1.0);
          cones.push_back({ConeKind::NONNEG, 1});
          ++row;
        }
        break;
      }
      case DdaVariant::III: {
        // Tangent of the convex surrogate underestimates it: a relaxation,
        // tightened by the damping loop and the bound f >= 1/(n + sigma1).
        const double f0 = surrogate_value(surrogate, anchor6);
        const Eigen::VectorXd fg = surrogate_gradient(surrogate, anchor6);
        detail::add_dobj_row(t, row, lay, inst);
        for (int j = 0; j < n; ++j)
          if (fg(j) != 0.0) t.emplace_back(row, lay.o6 + j, fg(j));
        h.push_back(cfg.gamma_bound - f0 + fg.dot(anchor6));
        cones.push_back({ConeKind::NONNEG, 1});
        ++row;
        detail::add_dobj_row(t, row, lay, inst);
        h.push_back(cfg.gamma_bound - 1.0 / (static_cast<double>(n) + cfg.sigma1));
        cones.push_back({ConeKind::NONNEG, 1});
        ++row;
        break;
      }
    }
    // Without a weight-set rule lam6 is unbounded; a trust region around the
    // anchor keeps the tangent rows active so the fixed point of the
    // iteration satisfies the true constraint exactly. The region widens as
    // the anchor grows, so iterates can still run toward the supremum.
    if (!rule) {
      for (int j = 0; j < n; ++j) {
        t.emplace_back(row, lay.o6 + j, 1.0);
        h.push_back(anchor6(j) + 10.0 * (1.0 + anchor6(j)));
        cones.push_back({ConeKind::NONNEG, 1});
        ++row;
      }
    }
    detail::append_rows(p, t, h, cones);
    const SolverResult res = solve(p, opt);
    if (!res.primal.allFinite()) break;
    DensitySolution cand = detail::extract_density(lay, res);
    cand.status = res.status;

    // True-constraint check at the candidate.
    const Eigen::VectorXd lam6 = cand.lam.lam6;
    const double dobj = cand.lam.dual_objective(inst);
    double viol = 0.0;
    if (variant == DdaVariant::II)
      viol = dobj - cfg.alpha * merit_value(cfg.merit, lam6);
    else if (variant == DdaVariant::III)
      viol = dobj + surrogate_value(surrogate, lam6) - cfg.gamma_bound;
    if (variant == DdaVariant::I)
      cand.objective = dobj + cfg.alpha * merit_value(cfg.merit, lam6);
    else
      cand.objective = dobj;

    const bool feasible = viol <= tol_true;
    if (feasible) last_good = cand;
    const double move = (lam6 - anchor6).lpNorm<Eigen::Infinity>();
    if (feasible && move <= 1e-7 * std::max(1.0, anchor6.lpNorm<Eigen::Infinity>())) {
      ++inner;
      break;
    }
    // Damp toward the new point on violation, otherwise re-linearize there.
    anchor6 = feasible ? lam6 : (theta * anchor6 + (1.0 - theta) * lam6).eval();
  }
  if (!last_good)
    throw std::runtime_error("solve_nonconic: no feasible iterate found");
  last_good->linearization_iters = inner;
  return *last_good;
}

}  // namespace sparsekit
