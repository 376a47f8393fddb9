#pragma once

// Primal-dual interior-point method for the split standard form
//
//   minimize    c'x
//   subject to  A x = b
//               G x + s = h,   s in K = R^l_+  x  SOC(q1) x ... x SOC(qN)
//
// using the homogeneous self-dual embedding with Nesterov-Todd scalings and
// a Mehrotra predictor-corrector. The KKT system
//
//       [ dI   A'    G'    ]
//       [ A   -dI    0     ]
//       [ G    0   -W^2-dI ]
//
// is factored with a sparse LDL' (AMD ordering reused across iterations)
// and solved with iterative refinement against the unregularized system.
// Second-order cone scaling blocks are stored dense; block sizes here stay
// small (a few tens of rows), so the fill-in is acceptable and the expanded
// sparse representation of the scaling is not needed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace sparsekit {
namespace ipm {

struct Settings {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  double feastol_inacc = 1e-4;
  double abstol_inacc = 5e-5;
  double reltol_inacc = 5e-5;
  int max_iters = 100;
  int nitref = 9;              // refinement steps per KKT solve
  double linsysacc = 1e-14;
  double irerrfact = 6.0;      // stop refining when error shrinks slower than this
  double deltastat = 7e-8;     // static regularization
  double step_scale = 0.99;    // fraction of max step taken
  double stepmin = 1e-6;
  double stepmax = 0.999;
  double sigmamin = 1e-4;
  double sigmamax = 1.0;
  double safeguard = 500.0;    // backtrack when pres grows by this factor
  int equil_iters = 3;
};

enum class ExitCode { OPTIMAL, CLOSE_TO_OPTIMAL, MAX_ITERS, NUMERICS };

struct Solution {
  ExitCode code = ExitCode::NUMERICS;
  Eigen::VectorXd x, y, z, s;   // y: equality duals, z/s: cone duals and slacks
  int iterations = 0;
};

class Solver {
 public:
  Solver(Eigen::SparseMatrix<double> A, Eigen::VectorXd b,
         Eigen::SparseMatrix<double> G, Eigen::VectorXd h,
         Eigen::VectorXd c, int n_lc, std::vector<int> soc_dims,
         Settings settings = Settings())
      : A_(std::move(A)), b_(std::move(b)), G_(std::move(G)), h_(std::move(h)),
        c_(std::move(c)), n_lc_(n_lc), soc_dims_(std::move(soc_dims)), st_(settings) {
    n_ = static_cast<int>(c_.size());
    p_ = static_cast<int>(b_.size());
    m_ = static_cast<int>(h_.size());
    dim_ = n_ + p_ + m_;
    so_.resize(soc_dims_.size());
    int start = n_lc_;
    for (std::size_t k = 0; k < soc_dims_.size(); ++k) {
      so_[k].start = start;
      so_[k].dim = soc_dims_[k];
      start += soc_dims_[k];
    }
  }

  Solution solve() {
    equilibrate();
    At_ = A_.transpose();
    Gt_ = G_.transpose();
    build_kkt();

    Solution sol;
    ldlt_.analyzePattern(K_);
    set_initial_scalings();
    if (!factorize()) return fail(sol);

    // Initial point: primal from min ||Gx-h|| s.t. Ax=b, dual from
    // min ||z|| s.t. G'z + A'y + c = 0, both pushed into the cone interior.
    Eigen::VectorXd rhs1(dim_), rhs2(dim_);
    rhs1.setZero();
    rhs1.segment(n_, p_) = b_;
    rhs1.tail(m_) = h_;
    Eigen::VectorXd dx1(n_), dy1(p_), dz1(m_);
    solve_kkt(rhs1, dx1, dy1, dz1, true);
    x_ = dx1;
    s_ = bring_to_cone(-dz1);

    rhs2.setZero();
    rhs2.head(n_) = -c_;
    Eigen::VectorXd dx2(n_), dy2(p_), dz2(m_);
    solve_kkt(rhs2, dx2, dy2, dz2, true);
    y_ = dy2;
    z_ = bring_to_cone(dz2);

    rhs1.head(n_) = -c_;
    tau_ = 1.0;
    kap_ = 1.0;

    const double resx0 = std::max(1.0, c_.norm());
    const double resy0 = std::max(1.0, b_.norm());
    const double resz0 = std::max(1.0, h_.norm());
    const double cone_degree = static_cast<double>(n_lc_ + so_.size()) + 1.0;

    double pres_prev = std::numeric_limits<double>::max();
    Iterate best;
    bool have_best = false;
    ExitCode code = ExitCode::MAX_ITERS;
    lambda_.resize(m_);

    int iter = 0;
    for (;; ++iter) {
      // Residuals of the homogeneous embedding.
      Eigen::VectorXd rx = -(Gt_ * z_);
      if (p_ > 0) rx -= At_ * y_;
      rx -= tau_ * c_;
      Eigen::VectorXd ry = (p_ > 0) ? Eigen::VectorXd(A_ * x_ - tau_ * b_)
                                    : Eigen::VectorXd(0);
      Eigen::VectorXd rz = s_ + G_ * x_ - tau_ * h_;
      const double cx = c_.dot(x_);
      const double by = (p_ > 0) ? b_.dot(y_) : 0.0;
      const double hz = h_.dot(z_);
      const double rt = kap_ + cx + by + hz;

      const double nx = x_.norm(), ny = y_.norm(), nz = z_.norm(), ns = s_.norm();
      const double gap = s_.dot(z_);
      const double mu = (gap + kap_ * tau_) / cone_degree;
      const double pcost = cx / tau_;
      const double dcost = -(hz + by) / tau_;
      double relgap = std::numeric_limits<double>::infinity();
      if (pcost < 0.0)
        relgap = gap / (-pcost);
      else if (dcost > 0.0)
        relgap = gap / dcost;
      const double nry = (p_ > 0) ? ry.norm() / std::max(resy0 + nx, 1.0) : 0.0;
      const double nrz = rz.norm() / std::max(resz0 + nx + ns, 1.0);
      const double pres = std::max(nry, nrz) / tau_;
      const double dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / tau_;

      cur_ = Iterate{x_, y_, z_, s_, tau_, kap_, pres, dres, gap, relgap, iter};

      if (iter > 0 && (pres > st_.safeguard * pres_prev || gap < 0.0)) {
        restore(best, have_best);
        code = converged(st_.feastol_inacc, st_.abstol_inacc, st_.reltol_inacc)
                   ? ExitCode::CLOSE_TO_OPTIMAL
                   : ExitCode::NUMERICS;
        break;
      }
      pres_prev = pres;

      if (converged(st_.feastol, st_.abstol, st_.reltol)) {
        code = ExitCode::OPTIMAL;
        break;
      }
      if (!std::isfinite(pcost) || !std::isfinite(gap)) {
        restore(best, have_best);
        code = converged(st_.feastol_inacc, st_.abstol_inacc, st_.reltol_inacc)
                   ? ExitCode::CLOSE_TO_OPTIMAL
                   : ExitCode::NUMERICS;
        break;
      }
      if (iter >= st_.max_iters) {
        if (have_best && better(best, cur_)) restore(best, true);
        code = converged(st_.feastol_inacc, st_.abstol_inacc, st_.reltol_inacc)
                   ? ExitCode::CLOSE_TO_OPTIMAL
                   : ExitCode::MAX_ITERS;
        break;
      }
      if (!have_best || better(cur_, best)) {
        best = cur_;
        have_best = true;
      }

      if (!update_scalings()) {
        restore(best, have_best);
        code = converged(st_.feastol_inacc, st_.abstol_inacc, st_.reltol_inacc)
                   ? ExitCode::CLOSE_TO_OPTIMAL
                   : ExitCode::NUMERICS;
        break;
      }
      update_kkt_scalings();
      if (!factorize()) {
        restore(best, have_best);
        code = ExitCode::NUMERICS;
        break;
      }

      solve_kkt(rhs1, dx1, dy1, dz1, false);
      const double dtau_denom =
          kap_ / tau_ - c_.dot(dx1) - ((p_ > 0) ? b_.dot(dy1) : 0.0) - h_.dot(dz1);
      if (!std::isfinite(dtau_denom) || dtau_denom == 0.0) {
        restore(best, have_best);
        code = ExitCode::NUMERICS;
        break;
      }

      // Affine (predictor) direction.
      rhs2.head(n_) = rx;
      if (p_ > 0) rhs2.segment(n_, p_) = -ry;
      rhs2.tail(m_) = s_ - rz;
      solve_kkt(rhs2, dx2, dy2, dz2, false);
      const double dtauaff =
          (rt - kap_ + c_.dot(dx2) + ((p_ > 0) ? b_.dot(dy2) : 0.0) + h_.dot(dz2)) /
          dtau_denom;
      Eigen::VectorXd dzaff = dz2 + dtauaff * dz1;
      Eigen::VectorXd W_dzaff = scale(dzaff);
      Eigen::VectorXd dsaff_by_W = -W_dzaff - lambda_;
      const double dkapaff = -kap_ - kap_ / tau_ * dtauaff;
      const double step_aff =
          line_search(dsaff_by_W, W_dzaff, tau_, dtauaff, kap_, dkapaff);

      const double sigma =
          std::clamp(std::pow(1.0 - step_aff, 3), st_.sigmamin, st_.sigmamax);

      // Combined (corrector) direction.
      Eigen::VectorXd ds1 = conic_product(lambda_, lambda_);
      Eigen::VectorXd ds2 = conic_product(dsaff_by_W, W_dzaff);
      const double sigmamu = sigma * mu;
      ds1 += ds2;
      for (int i = 0; i < n_lc_; ++i) ds1(i) -= sigmamu;
      for (const auto& sc : so_) ds1(sc.start) -= sigmamu;
      Eigen::VectorXd lam_div_ds = conic_division(lambda_, ds1);
      Eigen::VectorXd W_lam_div_ds = scale(lam_div_ds);
      const double one_minus_sigma = 1.0 - sigma;
      rhs2.head(n_) = one_minus_sigma * rx;
      if (p_ > 0) rhs2.segment(n_, p_) = -one_minus_sigma * ry;
      rhs2.tail(m_) = -one_minus_sigma * rz + W_lam_div_ds;
      solve_kkt(rhs2, dx2, dy2, dz2, false);

      const double bkap = kap_ * tau_ + dkapaff * dtauaff - sigmamu;
      const double dtau = (one_minus_sigma * rt - bkap / tau_ + c_.dot(dx2) +
                           ((p_ > 0) ? b_.dot(dy2) : 0.0) + h_.dot(dz2)) /
                          dtau_denom;
      dx2 += dtau * dx1;
      if (p_ > 0) dy2 += dtau * dy1;
      dz2 += dtau * dz1;
      Eigen::VectorXd W_dz = scale(dz2);
      Eigen::VectorXd ds_by_W = -(lam_div_ds + W_dz);
      const double dkap = -(bkap + kap_ * dtau) / tau_;

      const double step =
          st_.step_scale * line_search(ds_by_W, W_dz, tau_, dtau, kap_, dkap);
      Eigen::VectorXd ds = scale(ds_by_W);

      x_ += step * dx2;
      if (p_ > 0) y_ += step * dy2;
      z_ += step * dz2;
      s_ += step * ds;
      kap_ += step * dkap;
      tau_ += step * dtau;

      if (iter > 0 && step <= st_.stepmin * st_.step_scale) {
        restore(best, have_best);
        code = converged(st_.feastol_inacc, st_.abstol_inacc, st_.reltol_inacc)
                   ? ExitCode::CLOSE_TO_OPTIMAL
                   : ExitCode::NUMERICS;
        ++iter;
        break;
      }
    }

    sol.code = code;
    sol.iterations = iter;
    // Undo the homogenization and the equilibration.
    sol.x = (x_ / tau_).cwiseQuotient(dcol_);
    sol.y = Eigen::VectorXd(p_);
    for (int i = 0; i < p_; ++i) sol.y(i) = y_(i) / tau_ / erow_a_(i);
    sol.z = Eigen::VectorXd(m_);
    sol.s = Eigen::VectorXd(m_);
    for (int i = 0; i < m_; ++i) {
      sol.z(i) = z_(i) / tau_ / erow_g_(i);
      sol.s(i) = s_(i) / tau_ * erow_g_(i);
    }
    return sol;
  }

 private:
  struct SOCone {
    int start = 0;
    int dim = 0;
    double eta2 = 1.0;   // eta^2
    double a = 1.0;      // scaling point head; (a, q) has unit hyperbolic norm
    Eigen::VectorXd q;
  };

  struct Iterate {
    Eigen::VectorXd x, y, z, s;
    double tau = 1.0, kap = 1.0;
    double pres = std::numeric_limits<double>::max();
    double dres = std::numeric_limits<double>::max();
    double gap = std::numeric_limits<double>::max();
    double relgap = std::numeric_limits<double>::max();
    int iter = 0;
  };

  static bool better(const Iterate& a, const Iterate& b) {
    const double sa = std::max(a.pres, a.dres);
    const double sb = std::max(b.pres, b.dres);
    if (!std::isfinite(sa)) return false;
    if (!std::isfinite(sb)) return true;
    return sa + std::min(a.relgap, 1.0) < sb + std::min(b.relgap, 1.0);
  }

  void restore(const Iterate& best, bool have) {
    if (!have) return;
    x_ = best.x;
    y_ = best.y;
    z_ = best.z;
    s_ = best.s;
    tau_ = best.tau;
    kap_ = best.kap;
    cur_ = best;
  }

  bool converged(double feastol, double abstol, double reltol) const {
    const double cx = c_.dot(cur_.x);
    const double byhz = ((p_ > 0) ? b_.dot(cur_.y) : 0.0) + h_.dot(cur_.z);
    return (-cx > 0.0 || -byhz >= -abstol) && cur_.pres < feastol &&
           cur_.dres < feastol && (cur_.gap < abstol || cur_.relgap < reltol);
  }

  Solution fail(Solution sol) const {
    sol.code = ExitCode::NUMERICS;
    sol.x = Eigen::VectorXd::Zero(n_);
    sol.y = Eigen::VectorXd::Zero(p_);
    sol.z = Eigen::VectorXd::Zero(m_);
    sol.s = Eigen::VectorXd::Zero(m_);
    return sol;
  }

  // Ruiz-style equilibration on the stacked matrix [A; G]. Rows belonging
  // to one second-order cone share a single scale so the cone is preserved.
  void equilibrate() {
    dcol_ = Eigen::VectorXd::Ones(n_);
    erow_a_ = Eigen::VectorXd::Ones(p_);
    erow_g_ = Eigen::VectorXd::Ones(m_);
    for (int it = 0; it < st_.equil_iters; ++it) {
      Eigen::VectorXd ra = Eigen::VectorXd::Zero(p_);
      Eigen::VectorXd rg = Eigen::VectorXd::Zero(m_);
      Eigen::VectorXd cc = Eigen::VectorXd::Zero(n_);
      for (int k = 0; k < A_.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator i(A_, k); i; ++i) {
          const double v = std::abs(i.value());
          ra(i.row()) = std::max(ra(i.row()), v);
          cc(i.col()) = std::max(cc(i.col()), v);
        }
      for (int k = 0; k < G_.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator i(G_, k); i; ++i) {
          const double v = std::abs(i.value());
          rg(i.row()) = std::max(rg(i.row()), v);
          cc(i.col()) = std::max(cc(i.col()), v);
        }
      for (const auto& sc : so_) {
        const double blockmax = rg.segment(sc.start, sc.dim).maxCoeff();
        rg.segment(sc.start, sc.dim).setConstant(blockmax);
      }
      auto scale_of = [](double v) { return v > 0.0 ? std::sqrt(v) : 1.0; };
      for (int i = 0; i < p_; ++i) ra(i) = scale_of(ra(i));
      for (int i = 0; i < m_; ++i) rg(i) = scale_of(rg(i));
      for (int j = 0; j < n_; ++j) cc(j) = scale_of(cc(j));
      for (int k = 0; k < A_.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator i(A_, k); i; ++i)
          i.valueRef() /= ra(i.row()) * cc(i.col());
      for (int k = 0; k < G_.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator i(G_, k); i; ++i)
          i.valueRef() /= rg(i.row()) * cc(i.col());
      erow_a_ = erow_a_.cwiseProduct(ra);
      erow_g_ = erow_g_.cwiseProduct(rg);
      dcol_ = dcol_.cwiseProduct(cc);
    }
    b_ = b_.cwiseQuotient(erow_a_);
    h_ = h_.cwiseQuotient(erow_g_);
    c_ = c_.cwiseQuotient(dcol_);
  }

  Eigen::VectorXd bring_to_cone(const Eigen::VectorXd& r) const {
    double alpha = -0.99;
    for (int i = 0; i < n_lc_; ++i)
      if (r(i) <= 0.0) alpha = std::max(alpha, -r(i));
    for (const auto& sc : so_) {
      const double cres = r(sc.start) - r.segment(sc.start + 1, sc.dim - 1).norm();
      if (cres <= 0.0) alpha = std::max(alpha, -cres);
    }
    alpha += 1.0;
    Eigen::VectorXd s = r;
    for (int i = 0; i < n_lc_; ++i) s(i) += alpha;
    for (const auto& sc : so_) s(sc.start) += alpha;
    return s;
  }

  bool update_scalings() {
    lp_v_ = s_.head(n_lc_).cwiseQuotient(z_.head(n_lc_));
    if ((lp_v_.array() <= 0.0).any()) return false;
    lp_w_ = lp_v_.cwiseSqrt();
    for (auto& sc : so_) {
      const auto sk = s_.segment(sc.start, sc.dim);
      const auto zk = z_.segment(sc.start, sc.dim);
      const double sres = sk(0) * sk(0) - sk.tail(sc.dim - 1).squaredNorm();
      const double zres = zk(0) * zk(0) - zk.tail(sc.dim - 1).squaredNorm();
      if (sres <= 0.0 || zres <= 0.0) return false;
      const double snorm = std::sqrt(sres);
      const double znorm = std::sqrt(zres);
      const Eigen::VectorXd skbar = sk / snorm;
      const Eigen::VectorXd zkbar = zk / znorm;
      sc.eta2 = snorm / znorm;
      double gamma = std::sqrt(0.5 * (1.0 + skbar.dot(zkbar)));
      sc.a = (0.5 / gamma) * (skbar(0) + zkbar(0));
      sc.q = (0.5 / gamma) * (skbar.tail(sc.dim - 1) - zkbar.tail(sc.dim - 1));
    }
    lambda_ = scale(z_);
    return true;
  }

  // lambda = W * u (Nesterov-Todd scaling applied to a cone vector).
  Eigen::VectorXd scale(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(m_);
    out.head(n_lc_) = lp_w_.cwiseProduct(u.head(n_lc_));
    for (const auto& sc : so_) {
      const double eta = std::sqrt(sc.eta2);
      const auto u1 = u.segment(sc.start + 1, sc.dim - 1);
      const double zeta = sc.q.dot(u1);
      const double factor = u(sc.start) + zeta / (1.0 + sc.a);
      out(sc.start) = eta * (sc.a * u(sc.start) + zeta);
      out.segment(sc.start + 1, sc.dim - 1) = eta * (u1 + factor * sc.q);
    }
    return out;
  }

  // y += W^2 * u with W^2 = eta^2 (2 wb wb' - J), wb = (a; q).
  void scale2_add(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    out.head(n_lc_) += lp_v_.cwiseProduct(u.head(n_lc_));
    for (const auto& sc : so_) {
      const auto u0 = u(sc.start);
      const auto u1 = u.segment(sc.start + 1, sc.dim - 1);
      const double wtu = sc.a * u0 + sc.q.dot(u1);
      out(sc.start) += sc.eta2 * (2.0 * sc.a * wtu - u0);
      out.segment(sc.start + 1, sc.dim - 1) += sc.eta2 * (2.0 * wtu * sc.q + u1);
    }
  }

  // Jordan product u o v on the cone product.
  Eigen::VectorXd conic_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd w(m_);
    w.head(n_lc_) = u.head(n_lc_).cwiseProduct(v.head(n_lc_));
    for (const auto& sc : so_) {
      const auto uk = u.segment(sc.start, sc.dim);
      const auto vk = v.segment(sc.start, sc.dim);
      w(sc.start) = uk.dot(vk);
      w.segment(sc.start + 1, sc.dim - 1) =
          uk(0) * vk.tail(sc.dim - 1) + vk(0) * uk.tail(sc.dim - 1);
    }
    return w;
  }

  // Jordan division v = u \ w.
  Eigen::VectorXd conic_division(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const {
    Eigen::VectorXd v(m_);
    v.head(n_lc_) = w.head(n_lc_).cwiseQuotient(u.head(n_lc_));
    for (const auto& sc : so_) {
      const double u0 = u(sc.start);
      const double w0 = w(sc.start);
      const auto u1 = u.segment(sc.start + 1, sc.dim - 1);
      const auto w1 = w.segment(sc.start + 1, sc.dim - 1);
      const double rho = u0 * u0 - u1.squaredNorm();
      const double zeta = u1.dot(w1);
      const double factor = (zeta / u0 - w0) / rho;
      v(sc.start) = (u0 * w0 - zeta) / rho;
      v.segment(sc.start + 1, sc.dim - 1) = factor * u1 + w1 / u0;
    }
    return v;
  }

  // Largest step keeping lambda + alpha*ds and lambda + alpha*dz in the cone
  // (all in scaled space) and tau, kappa positive.
  double line_search(const Eigen::VectorXd& ds, const Eigen::VectorXd& dz,
                     double tau, double dtau, double kap, double dkap) const {
    double alpha = 10.0;
    if (n_lc_ > 0) {
      const double rhomin = ds.head(n_lc_).cwiseQuotient(lambda_.head(n_lc_)).minCoeff();
      const double sigmin = dz.head(n_lc_).cwiseQuotient(lambda_.head(n_lc_)).minCoeff();
      const double worst = std::min(rhomin, sigmin);
      alpha = worst < 0.0 ? 1.0 / (-worst) : 1e13;
    }
    const double tstep = -tau / dtau;
    const double kstep = -kap / dkap;
    if (tstep > 0.0) alpha = std::min(alpha, tstep);
    if (kstep > 0.0) alpha = std::min(alpha, kstep);
    for (const auto& sc : so_) {
      const auto lk = lambda_.segment(sc.start, sc.dim);
      const double lknorm2 = lk(0) * lk(0) - lk.tail(sc.dim - 1).squaredNorm();
      if (lknorm2 <= 0.0) continue;
      const double lknorm = std::sqrt(lknorm2);
      const Eigen::VectorXd lkbar = lk / lknorm;
      const double inv = 1.0 / lknorm;
      auto cone_norm = [&](const Eigen::VectorXd& d) {
        const auto d1 = d.segment(sc.start + 1, sc.dim - 1);
        const double lk_d = lkbar(0) * d(sc.start) - lkbar.tail(sc.dim - 1).dot(d1);
        const double factor = (lk_d + d(sc.start)) / (lkbar(0) + 1.0);
        const Eigen::VectorXd rho1 = inv * (d1 - factor * lkbar.tail(sc.dim - 1));
        return rho1.norm() - inv * lk_d;
      };
      const double conic_step = std::max({0.0, cone_norm(ds), cone_norm(dz)});
      if (conic_step != 0.0) alpha = std::min(alpha, 1.0 / conic_step);
    }
    return std::clamp(alpha, st_.stepmin, st_.stepmax);
  }

  void build_kkt() {
    std::vector<Eigen::Triplet<double>> trip;
    // Upper triangle of the quasidefinite KKT matrix.
    for (int j = 0; j < n_; ++j) trip.emplace_back(j, j, st_.deltastat);
    for (int j = n_; j < n_ + p_; ++j) trip.emplace_back(j, j, -st_.deltastat);
    for (int k = 0; k < At_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator i(At_, k); i; ++i)
        trip.emplace_back(i.row(), n_ + i.col(), i.value());
    for (int k = 0; k < Gt_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator i(Gt_, k); i; ++i)
        trip.emplace_back(i.row(), n_ + p_ + i.col(), i.value());
    scaling_coords_.clear();
    for (int i = 0; i < n_lc_; ++i) {
      const int r = n_ + p_ + i;
      scaling_coords_.emplace_back(r, r);
      trip.emplace_back(r, r, -1.0);
    }
    for (const auto& sc : so_) {
      for (int i = 0; i < sc.dim; ++i)
        for (int j = i; j < sc.dim; ++j) {
          const int r = n_ + p_ + sc.start;
          scaling_coords_.emplace_back(r + i, r + j);
          trip.emplace_back(r + i, r + j, i == j ? -1.0 : 0.0);
        }
    }
    K_.resize(dim_, dim_);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();
    // Resolve value-array positions of the mutable scaling entries once.
    scaling_pos_.clear();
    for (const auto& [r, col] : scaling_coords_) {
      const int* begin = K_.innerIndexPtr() + K_.outerIndexPtr()[col];
      const int* end = K_.innerIndexPtr() + K_.outerIndexPtr()[col + 1];
      const int* it = std::lower_bound(begin, end, r);
      scaling_pos_.push_back(static_cast<int>(it - K_.innerIndexPtr()));
    }
  }

  void set_initial_scalings() {
    std::size_t p = 0;
    for (int i = 0; i < n_lc_; ++i) K_.valuePtr()[scaling_pos_[p++]] = -1.0;
    for (const auto& sc : so_)
      for (int i = 0; i < sc.dim; ++i)
        for (int j = i; j < sc.dim; ++j)
          K_.valuePtr()[scaling_pos_[p++]] = (i == j) ? -1.0 : 0.0;
  }

  void update_kkt_scalings() {
    std::size_t p = 0;
    for (int i = 0; i < n_lc_; ++i)
      K_.valuePtr()[scaling_pos_[p++]] = -lp_v_(i) - st_.deltastat;
    for (const auto& sc : so_) {
      for (int i = 0; i < sc.dim; ++i) {
        const double wi = (i == 0) ? sc.a : sc.q(i - 1);
        for (int j = i; j < sc.dim; ++j) {
          const double wj = (j == 0) ? sc.a : sc.q(j - 1);
          double v = 2.0 * wi * wj;
          if (i == j) v -= (i == 0) ? 1.0 : -1.0;
          v *= sc.eta2;
          K_.valuePtr()[scaling_pos_[p++]] = -v - (i == j ? st_.deltastat : 0.0);
        }
      }
    }
  }

  bool factorize() {
    ldlt_.factorize(K_);
    return ldlt_.info() == Eigen::Success;
  }

  // KKT solve with iterative refinement; in initialize mode the (3,3) block
  // is -I instead of the scaling.
  int solve_kkt(const Eigen::VectorXd& rhs, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                Eigen::VectorXd& dz, bool initialize) {
    Eigen::VectorXd x = ldlt_.solve(rhs);
    const double threshold = (1.0 + rhs.lpNorm<Eigen::Infinity>()) * st_.linsysacc;
    double nerr_prev = std::numeric_limits<double>::max();
    Eigen::VectorXd x_ref(dim_);
    const auto bx = rhs.head(n_);
    const auto by = rhs.segment(n_, p_);
    const auto bz = rhs.tail(m_);
    int k;
    for (k = 0;; ++k) {
      const auto cx = x.head(n_);
      const auto cy = x.segment(n_, p_);
      const auto cz = x.tail(m_);
      Eigen::VectorXd ex = bx - Gt_ * cz - st_.deltastat * cx;
      if (p_ > 0) ex -= At_ * cy;
      Eigen::VectorXd ey(p_);
      if (p_ > 0) ey = by - A_ * cx + st_.deltastat * cy;
      Eigen::VectorXd ez = bz - G_ * cx;
      if (initialize) {
        ez += cz;
      } else {
        scale2_add(cz, ez);
        ez += st_.deltastat * cz;
      }
      double nerr = std::max(ex.lpNorm<Eigen::Infinity>(), ez.lpNorm<Eigen::Infinity>());
      if (p_ > 0) nerr = std::max(nerr, ey.lpNorm<Eigen::Infinity>());
      if (k > 0 && nerr > nerr_prev) {
        x -= x_ref;
        --k;
        break;
      }
      if (k == st_.nitref || nerr < threshold ||
          (k > 0 && nerr_prev < st_.irerrfact * nerr))
        break;
      nerr_prev = nerr;
      Eigen::VectorXd e(dim_);
      e << ex, ey, ez;
      x_ref = ldlt_.solve(e);
      x += x_ref;
    }
    dx = x.head(n_);
    dy = x.segment(n_, p_);
    dz = x.tail(m_);
    return k;
  }

  Eigen::SparseMatrix<double> A_, G_, At_, Gt_;
  Eigen::VectorXd b_, h_, c_;
  int n_lc_;
  std::vector<int> soc_dims_;
  Settings st_;
  int n_ = 0, p_ = 0, m_ = 0, dim_ = 0;

  std::vector<SOCone> so_;
  Eigen::VectorXd dcol_, erow_a_, erow_g_;
  Eigen::VectorXd lp_v_, lp_w_, lambda_;
  Eigen::VectorXd x_, y_, z_, s_;
  double tau_ = 1.0, kap_ = 1.0;
  Iterate cur_;

  Eigen::SparseMatrix<double> K_;
  std::vector<std::pair<int, int>> scaling_coords_;
  std::vector<int> scaling_pos_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper> ldlt_;
};

}  // namespace ipm
}  // namespace sparsekit
