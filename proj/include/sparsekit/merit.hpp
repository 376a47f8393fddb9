#pragma once

// Concave merit functions approximating the support count of a nonnegative
// vector, their gradients, and the convex surrogate functions built from
// them. All functions are pure.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace sparsekit {

enum class MeritFamily { LOG, FRACTION, POWER, ARCTAN, CWB_LOG };

inline const char* merit_family_name(MeritFamily f) {
  switch (f) {
    case MeritFamily::LOG: return "log";
    case MeritFamily::FRACTION: return "fraction";
    case MeritFamily::POWER: return "power";
    case MeritFamily::ARCTAN: return "arctan";
    case MeritFamily::CWB_LOG: return "cwb_log";
  }
  return "?";
}

struct MeritFunction {
  MeritFamily family = MeritFamily::FRACTION;
  double eps_merit = 1e-2;

  // Only the fraction family admits an exact rotated-cone epigraph.
  bool soc_exact() const { return family == MeritFamily::FRACTION; }

  void validate() const {
    if (!(eps_merit > 0)) throw std::domain_error("merit: eps_merit must be positive");
    if ((family == MeritFamily::LOG || family == MeritFamily::POWER) && !(eps_merit < 1))
      throw std::domain_error("merit: log/power require eps_merit < 1");
  }
};

namespace detail {

// pow(eps, 1/eps); underflows to 0 for small eps, which is the correct limit.
inline double power_shift(double eps) { return std::exp(std::log(eps) / eps); }

inline void check_nonneg(const Eigen::VectorXd& s) {
  for (int i = 0; i < s.size(); ++i)
    if (s(i) < 0) throw std::domain_error("merit: argument has a negative component");
}

}  // namespace detail

// One summand phi_eps(s_i) of the merit function.
inline double merit_term(const MeritFunction& m, double s) {
  const double e = m.eps_merit;
  switch (m.family) {
    case MeritFamily::LOG:
      return 1.0 - std::log(s + e) / std::log(e);
    case MeritFamily::FRACTION:
      return s / (s + e);
    case MeritFamily::POWER:
      return std::pow(s + detail::power_shift(e), e);
    case MeritFamily::ARCTAN:
      return (2.0 / M_PI) * std::atan(s / e);
    case MeritFamily::CWB_LOG:
      return std::log(s + e);
  }
  return 0.0;
}

inline double merit_term_grad(const MeritFunction& m, double s) {
  const double e = m.eps_merit;
  switch (m.family) {
    case MeritFamily::LOG:
      return -1.0 / ((s + e) * std::log(e));
    case MeritFamily::FRACTION:
      return e / ((s + e) * (s + e));
    case MeritFamily::POWER:
      return e * std::pow(s + detail::power_shift(e), e - 1.0);
    case MeritFamily::ARCTAN:
      return (2.0 / M_PI) * e / (s * s + e * e);
    case MeritFamily::CWB_LOG:
      return 1.0 / (s + e);
  }
  return 0.0;
}

inline double merit_value(const MeritFunction& m, const Eigen::VectorXd& s) {
  m.validate();
  detail::check_nonneg(s);
  double v = 0.0;
  for (int i = 0; i < s.size(); ++i) v += merit_term(m, s(i));
  return v;
}

inline Eigen::VectorXd merit_gradient(const MeritFunction& m, const Eigen::VectorXd& s) {
  m.validate();
  detail::check_nonneg(s);
  Eigen::VectorXd g(s.size());
  for (int i = 0; i < s.size(); ++i) g(i) = merit_term_grad(m, s(i));
  return g;
}

enum class SurrogateKind { J1_EXP, J2_NEGLOG, J3_INVPSI, J4_MEAN_INV };

struct Surrogate {
  SurrogateKind kind = SurrogateKind::J3_INVPSI;
  double sigma1 = 0.1;
  MeritFunction merit;

  void validate() const {
    merit.validate();
    if ((kind == SurrogateKind::J3_INVPSI || kind == SurrogateKind::J4_MEAN_INV) && !(sigma1 > 0))
      throw std::domain_error("surrogate: sigma1 must be positive");
  }
};

inline double surrogate_value(const Surrogate& f, const Eigen::VectorXd& lam6) {
  f.validate();
  detail::check_nonneg(lam6);
  switch (f.kind) {
    case SurrogateKind::J1_EXP:
      return std::exp(-merit_value(f.merit, lam6));
    case SurrogateKind::J2_NEGLOG: {
      const double p = merit_value(f.merit, lam6) + f.sigma1;
      if (!(p > 0)) throw std::domain_error("surrogate: log argument not positive");
      return -std::log(p);
    }
    case SurrogateKind::J3_INVPSI:
      return 1.0 / (merit_value(f.merit, lam6) + f.sigma1);
    case SurrogateKind::J4_MEAN_INV: {
      double v = 0.0;
      for (int i = 0; i < lam6.size(); ++i) v += 1.0 / (merit_term(f.merit, lam6(i)) + f.sigma1);
      return v / static_cast<double>(lam6.size());
    }
  }
  return 0.0;
}

inline Eigen::VectorXd surrogate_gradient(const Surrogate& f, const Eigen::VectorXd& lam6) {
  f.validate();
  detail::check_nonneg(lam6);
  const Eigen::VectorXd gpsi = merit_gradient(f.merit, lam6);
  switch (f.kind) {
    case SurrogateKind::J1_EXP:
      return -std::exp(-merit_value(f.merit, lam6)) * gpsi;
    case SurrogateKind::J2_NEGLOG:
      return -gpsi / (merit_value(f.merit, lam6) + f.sigma1);
    case SurrogateKind::J3_INVPSI: {
      const double p = merit_value(f.merit, lam6) + f.sigma1;
      return -gpsi / (p * p);
    }
    case SurrogateKind::J4_MEAN_INV: {
      Eigen::VectorXd g(lam6.size());
      for (int i = 0; i < lam6.size(); ++i) {
        const double p = merit_term(f.merit, lam6(i)) + f.sigma1;
        g(i) = -gpsi(i) / (p * p) / static_cast<double>(lam6.size());
      }
      return g;
    }
  }
  return Eigen::VectorXd::Zero(lam6.size());
}

}  // namespace sparsekit
