#pragma once

// The three algorithm families on top of the builders: reweighted l1 (RA,
// with CWB and ARCTAN as merit presets), the one-step dual-density
// algorithms DDA(I)-(III), and the dual-density reweighted algorithms
// DRA(I)-(VI), plus the plain l1 baseline and the default constant table.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "duality.hpp"
#include "instance.hpp"
#include "modeling.hpp"
#include "solver.hpp"

namespace sparsekit {

enum class AlgoVariant {
  RA,
  DDA_I,
  DDA_II,
  DDA_III,
  DRA_I,
  DRA_II,
  DRA_III,
  DRA_IV,
  DRA_V,
  DRA_VI,
  L1,
  CWB,
  ARCTAN_RA,
};

inline bool is_dra(AlgoVariant v) {
  return v >= AlgoVariant::DRA_I && v <= AlgoVariant::DRA_VI;
}
inline bool is_dda(AlgoVariant v) {
  return v >= AlgoVariant::DDA_I && v <= AlgoVariant::DDA_III;
}

inline DraVariant to_dra(AlgoVariant v) {
  switch (v) {
    case AlgoVariant::DRA_I: return DraVariant::I;
    case AlgoVariant::DRA_II: return DraVariant::II;
    case AlgoVariant::DRA_III: return DraVariant::III;
    case AlgoVariant::DRA_IV: return DraVariant::IV;
    case AlgoVariant::DRA_V: return DraVariant::V;
    default: break;
  }
  if (v == AlgoVariant::DRA_VI) return DraVariant::VI;
  throw std::invalid_argument("to_dra: not a DRA variant");
}

inline DdaVariant to_dda(AlgoVariant v) {
  switch (v) {
    case AlgoVariant::DDA_I: return DdaVariant::I;
    case AlgoVariant::DDA_II: return DdaVariant::II;
    case AlgoVariant::DDA_III: return DdaVariant::III;
    default: break;
  }
  if (is_dra(v)) return dra_base(to_dra(v));
  throw std::invalid_argument("to_dda: variant has no dual-density step");
}

inline const char* algo_name(AlgoVariant v) {
  switch (v) {
    case AlgoVariant::RA: return "ra";
    case AlgoVariant::DDA_I: return "dda1";
    case AlgoVariant::DDA_II: return "dda2";
    case AlgoVariant::DDA_III: return "dda3";
    case AlgoVariant::DRA_I: return "dra1";
    case AlgoVariant::DRA_II: return "dra2";
    case AlgoVariant::DRA_III: return "dra3";
    case AlgoVariant::DRA_IV: return "dra4";
    case AlgoVariant::DRA_V: return "dra5";
    case AlgoVariant::DRA_VI: return "dra6";
    case AlgoVariant::L1: return "l1";
    case AlgoVariant::CWB: return "cwb";
    case AlgoVariant::ARCTAN_RA: return "arctan";
  }
  return "unknown";
}

inline AlgoVariant algo_from_name(const std::string& name) {
  for (AlgoVariant v : {AlgoVariant::RA, AlgoVariant::DDA_I, AlgoVariant::DDA_II,
                        AlgoVariant::DDA_III, AlgoVariant::DRA_I, AlgoVariant::DRA_II,
                        AlgoVariant::DRA_III, AlgoVariant::DRA_IV, AlgoVariant::DRA_V,
                        AlgoVariant::DRA_VI, AlgoVariant::L1, AlgoVariant::CWB,
                        AlgoVariant::ARCTAN_RA})
    if (name == algo_name(v)) return v;
  throw std::invalid_argument("unknown algorithm name: " + name);
}

struct AlgorithmConfig {
  AlgoVariant variant = AlgoVariant::L1;
  double alpha = 1e-5;
  double gamma_bound = 1.0;
  double M = 10.0;
  double M_star = 10.0;
  double sigma1 = 0.1;
  double sigma2 = 0.1;
  MeritFunction merit{MeritFamily::FRACTION, 1e-15};
  int k_max = 5;
  double zero_threshold = 1e-5;
  bool early_stop = false;  // optional ||x^k - x^{k-1}||_inf <= 1e-8 stop
  SolveOptions solve_options;

  // Default constant table per algorithm.
  static AlgorithmConfig defaults_for(AlgoVariant v) {
    AlgorithmConfig c;
    c.variant = v;
    switch (v) {
      case AlgoVariant::DDA_I:
      case AlgoVariant::DRA_I:
        c.alpha = 1e-8;
        c.M = 100;
        c.M_star = 1000;
        break;
      case AlgoVariant::DRA_II:
        c.alpha = 1e-8;
        c.M = 100;
        c.sigma2 = 0.1;
        break;
      case AlgoVariant::DDA_II:
      case AlgoVariant::DRA_III:
        c.alpha = 1e-5;
        c.M = 10;
        c.M_star = 10;
        break;
      case AlgoVariant::DRA_IV:
        c.alpha = 1e-5;
        c.M = 10;
        c.sigma2 = 0.1;
        break;
      case AlgoVariant::DDA_III:
      case AlgoVariant::DRA_V:
        c.gamma_bound = 1.0;
        c.M = 10;
        c.M_star = 10;
        c.sigma1 = 0.1;
        break;
      case AlgoVariant::DRA_VI:
        c.gamma_bound = 1.0;
        c.M = 10;
        c.sigma1 = 0.1;
        c.sigma2 = 0.1;
        break;
      case AlgoVariant::RA:
        c.merit = MeritFunction{MeritFamily::FRACTION, 1e-1};
        break;
      case AlgoVariant::CWB:
        c.merit = MeritFunction{MeritFamily::CWB_LOG, 1e-1};
        break;
      case AlgoVariant::ARCTAN_RA:
        c.merit = MeritFunction{MeritFamily::ARCTAN, 1e-1};
        break;
      case AlgoVariant::L1:
        break;
    }
    return c;
  }

  void validate() const {
    // k_max = 0 is allowed so a DRA run degenerates to its DDA initial step.
    if (k_max < 0) throw std::invalid_argument("config: k_max >= 0 required");
    if (zero_threshold <= 0) throw std::invalid_argument("config: zero_threshold");
    merit.validate();
    if (is_dda(variant) || is_dra(variant)) {
      const DdaVariant base = to_dda(variant);
      if (base != DdaVariant::III && !(alpha > 0))
        throw std::invalid_argument("config: alpha must be positive");
      if (base == DdaVariant::III && !(gamma_bound > 0 && sigma1 > 0))
        throw std::invalid_argument("config: gamma_bound and sigma1 must be positive");
    }
    if (is_dra(variant)) {
      if (dra_rule_kind(to_dra(variant)) == WeightRuleKind::BOX) {
        if (!(1.0 <= M && M <= M_star))
          throw std::invalid_argument("config: box rule needs 1 <= M <= M_star");
      } else if (!(M > 0 && sigma2 > 0)) {
        throw std::invalid_argument("config: inverse rule needs M, sigma2 > 0");
      }
    }
  }

  DensityConfig density() const {
    DensityConfig d;
    d.alpha = alpha;
    d.gamma_bound = gamma_bound;
    d.sigma1 = sigma1;
    d.merit = merit;
    return d;
  }

  WeightSetRule rule_at(const Eigen::VectorXd& anchor) const {
    WeightSetRule r;
    r.variant = dra_rule_kind(to_dra(variant));
    r.M = M;
    r.M_star = M_star;
    r.sigma2 = sigma2;
    r.anchor = anchor;
    return r;
  }
};

struct IterateRecord {
  Eigen::VectorXd w;
  Eigen::VectorXd x;
  Eigen::VectorXd lam6;
  double objective = 0.0;       // weighted l1 value w' t at the iterate
  SolveStatus status = SolveStatus::NUMERICAL_FAILURE;
  bool used_eps_floor = false;  // weight solve fell back to the eps floor
};

struct RunTrace {
  std::vector<IterateRecord> iterates;
  Eigen::VectorXd final_x;
  int final_sparsity = 0;
};

namespace detail {

struct WeightedSolve {
  Eigen::VectorXd x;
  Eigen::VectorXd lam6;
  double objective = 0.0;
  SolveStatus status = SolveStatus::NUMERICAL_FAILURE;
};

inline WeightedSolve weighted_l1_min(const Instance& inst, const Weight& w,
                                     const SolveOptions& opt) {
  const SolverResult r = solve(build_weighted_l1(inst, w), opt);
  WeightedSolve out;
  out.status = r.status;
  out.objective = r.objective;
  if (!r.primal.allFinite())
    throw std::runtime_error("weighted l1 subproblem returned non-finite iterate");
  out.x = extract_primal(inst, r).x;
  out.lam6 = r.status == SolveStatus::OPTIMAL
                 ? extract_dual(inst, w, r).lam6.cwiseMax(0.0).eval()
                 : Eigen::VectorXd::Zero(inst.n()).eval();
  return out;
}

inline void finalize(RunTrace& tr, double zero_threshold) {
  if (tr.iterates.empty()) throw std::runtime_error("algorithm produced no iterate");
  tr.final_x = tr.iterates.back().x;
  tr.final_sparsity = count_nonzeros(tr.final_x, zero_threshold);
}

}  // namespace detail

// Algorithm 1: iterate weighted l1 solves with w^{k+1} = grad Psi(|x^k|).
inline RunTrace ra_solve(const Instance& inst, const MeritFunction& merit, const Weight& w0,
                         int k_max, const AlgorithmConfig& cfg = AlgorithmConfig()) {
  inst.validate();
  merit.validate();
  w0.validate(inst.n());
  if (k_max < 1) throw std::invalid_argument("ra_solve: k_max >= 1");
  RunTrace tr;
  Weight w = w0;
  for (int k = 1; k <= k_max; ++k) {
    const auto s = detail::weighted_l1_min(inst, w, cfg.solve_options);
    tr.iterates.push_back({w.w, s.x, s.lam6, s.objective, s.status, false});
    if (s.status != SolveStatus::OPTIMAL) break;  // truncate with status
    if (cfg.early_stop && tr.iterates.size() >= 2) {
      const auto& prev = tr.iterates[tr.iterates.size() - 2];
      if ((s.x - prev.x).lpNorm<Eigen::Infinity>() <= 1e-8) break;
    }
    w.w = merit_gradient(merit, s.x.cwiseAbs());
  }
  detail::finalize(tr, cfg.zero_threshold);
  return tr;
}

struct DdaResult {
  Weight w0;
  Eigen::VectorXd lam6;
  Eigen::VectorXd x0;
  double objective = 0.0;  // weighted l1 value at x0
  SolveStatus weight_status = SolveStatus::NUMERICAL_FAILURE;
  SolveStatus l1_status = SolveStatus::NUMERICAL_FAILURE;
  bool used_eps_floor = false;
};

namespace detail {

inline DensitySolution density_step(DdaVariant base, const Instance& inst,
                                    const AlgorithmConfig& cfg,
                                    const std::optional<WeightSetRule>& rule) {
  if (cfg.merit.soc_exact())
    return solve_density(base, inst, cfg.density(), rule, false, cfg.solve_options);
  return solve_nonconic(base, inst, cfg.density(), rule, false, cfg.solve_options);
}

}  // namespace detail

// Algorithm 2: one dual-density solve for w0, then one weighted l1 solve.
inline DdaResult dda_solve(AlgoVariant variant, const Instance& inst,
                           const AlgorithmConfig& cfg) {
  inst.validate();
  cfg.validate();
  const DdaVariant base = to_dda(variant);
  const DensitySolution d = detail::density_step(base, inst, cfg, std::nullopt);
  DdaResult out;
  out.w0 = d.w;
  out.lam6 = d.lam.lam6.cwiseMax(0.0);
  out.weight_status = d.status;
  out.used_eps_floor = d.used_eps_floor;
  const auto s = detail::weighted_l1_min(inst, out.w0, cfg.solve_options);
  if (s.status != SolveStatus::OPTIMAL)
    throw std::runtime_error("dda_solve: weighted l1 step failed");
  out.x0 = s.x;
  out.objective = s.objective;
  out.l1_status = s.status;
  return out;
}

// Algorithm 3: DDA initialization, then k_max reweighted rounds with the
// weight set anchored at the previous iterate. Any subproblem failure ends
// the trace with that status; the last good iterate is kept.
inline RunTrace dra_solve(AlgoVariant variant, const Instance& inst,
                          const AlgorithmConfig& cfg) {
  inst.validate();
  cfg.validate();
  if (!is_dra(variant)) throw std::invalid_argument("dra_solve: not a DRA variant");
  const DdaVariant base = to_dda(variant);
  RunTrace tr;

  const DdaResult init = dda_solve(variant, inst, cfg);
  tr.iterates.push_back({init.w0.w, init.x0, init.lam6, init.objective, init.weight_status,
                         init.used_eps_floor});

  Eigen::VectorXd anchor = init.x0;
  for (int k = 1; k <= cfg.k_max; ++k) {
    IterateRecord rec;
    try {
      const DensitySolution d = detail::density_step(base, inst, cfg, cfg.rule_at(anchor));
      const auto s = detail::weighted_l1_min(inst, d.w, cfg.solve_options);
      rec = {d.w.w, s.x, d.lam.lam6.cwiseMax(0.0), s.objective, s.status, d.used_eps_floor};
      if (s.status != SolveStatus::OPTIMAL) {
        tr.iterates.push_back(rec);
        break;
      }
    } catch (const std::exception&) {
      break;  // keep the last good iterate
    }
    tr.iterates.push_back(rec);
    if (cfg.early_stop && (rec.x - anchor).lpNorm<Eigen::Infinity>() <= 1e-8) break;
    anchor = rec.x;
  }
  detail::finalize(tr, cfg.zero_threshold);
  return tr;
}

// Eq. (3): unit-weight special case.
inline Eigen::VectorXd l1_solve(const Instance& inst,
                                const SolveOptions& opt = SolveOptions()) {
  inst.validate();
  const Weight w{Eigen::VectorXd::Ones(inst.n())};
  const auto s = detail::weighted_l1_min(inst, w, opt);
  if (s.status != SolveStatus::OPTIMAL) throw std::runtime_error("l1_solve: solver failed");
  return s.x;
}

// Uniform driver used by the experiment harness and the CLI.
inline RunTrace run_algorithm(const Instance& inst, const AlgorithmConfig& cfg) {
  switch (cfg.variant) {
    case AlgoVariant::L1: {
      RunTrace tr;
      const Weight w{Eigen::VectorXd::Ones(inst.n())};
      const auto s = detail::weighted_l1_min(inst, w, cfg.solve_options);
      tr.iterates.push_back({w.w, s.x, s.lam6, s.objective, s.status, false});
      detail::finalize(tr, cfg.zero_threshold);
      return tr;
    }
    case AlgoVariant::RA:
    case AlgoVariant::CWB:
    case AlgoVariant::ARCTAN_RA: {
      const Weight w0{Eigen::VectorXd::Ones(inst.n())};
      return ra_solve(inst, cfg.merit, w0, cfg.k_max, cfg);
    }
    case AlgoVariant::DDA_I:
    case AlgoVariant::DDA_II:
    case AlgoVariant::DDA_III: {
      const DdaResult r = dda_solve(cfg.variant, inst, cfg);
      RunTrace tr;
      tr.iterates.push_back(
          {r.w0.w, r.x0, r.lam6, r.objective, r.l1_status, r.used_eps_floor});
      detail::finalize(tr, cfg.zero_threshold);
      return tr;
    }
    default:
      return dra_solve(cfg.variant, inst, cfg);
  }
}

}  // namespace sparsekit
