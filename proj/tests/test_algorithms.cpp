#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <sparsekit/algorithms.hpp>
#include <sparsekit/oracle.hpp>
#include <sparsekit/random.hpp>

using namespace sparsekit;

namespace {

Weight ones_weight(int n) { return Weight{Eigen::VectorXd::Ones(n)}; }

Instance zero_rhs_instance() {
  Instance inst = example1();
  inst.y.setZero();
  inst.b = Eigen::VectorXd::Ones(inst.l());
  return inst;
}

}  // namespace

TEST_CASE("ra with the cwb update recovers a 2-sparse point") {
  const Instance inst = example1();
  const MeritFunction merit{MeritFamily::CWB_LOG, 0.1};
  const RunTrace tr = ra_solve(inst, merit, ones_weight(4), 5);
  CHECK(tr.final_sparsity <= 2);
  for (const auto& it : tr.iterates) CHECK(inst.violation(it.x) <= 1e-6);
}

TEST_CASE("first ra iterate is the plain l1 solution") {
  const Instance inst = example1();
  const MeritFunction merit{MeritFamily::FRACTION, 0.1};
  const RunTrace tr = ra_solve(inst, merit, ones_weight(4), 1);
  const Eigen::VectorXd x1 = l1_solve(inst);
  CHECK((tr.final_x - x1).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("zero right-hand side keeps every iterate at zero") {
  const Instance inst = zero_rhs_instance();
  const MeritFunction merit{MeritFamily::FRACTION, 0.1};
  const RunTrace tr = ra_solve(inst, merit, ones_weight(4), 3);
  for (const auto& it : tr.iterates) CHECK(it.x.lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(l1_solve(inst).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("ra traces are deterministic") {
  const Instance inst = example1();
  const MeritFunction merit{MeritFamily::ARCTAN, 0.1};
  const RunTrace a = ra_solve(inst, merit, ones_weight(4), 3);
  const RunTrace b = ra_solve(inst, merit, ones_weight(4), 3);
  REQUIRE(a.iterates.size() == b.iterates.size());
  CHECK(a.final_x == b.final_x);
  for (std::size_t k = 0; k < a.iterates.size(); ++k)
    CHECK(a.iterates[k].w == b.iterates[k].w);
}

TEST_CASE("dda output is feasible for every variant") {
  const Instance inst = example1();
  for (AlgoVariant v : {AlgoVariant::DDA_I, AlgoVariant::DDA_II, AlgoVariant::DDA_III}) {
    const AlgorithmConfig cfg = AlgorithmConfig::defaults_for(v);
    const DdaResult r = dda_solve(v, inst, cfg);
    CHECK((inst.y - inst.A * r.x0).norm() <= inst.eps_noise + 1e-6);
    CHECK((inst.B * r.x0 - inst.b).maxCoeff() <= 1e-6);
    CHECK(r.w0.w.minCoeff() >= 0.0);
    CHECK(r.lam6.minCoeff() >= 0.0);
  }
}

TEST_CASE("dda(III) sparsity vs the oracle value") {
  const Instance inst = example1();
  const AlgorithmConfig cfg = AlgorithmConfig::defaults_for(AlgoVariant::DDA_III);
  const DdaResult r = dda_solve(AlgoVariant::DDA_III, inst, cfg);
  const int s = count_nonzeros(r.x0, cfg.zero_threshold);
  CHECK(s >= 2);  // oracle minimum
  CHECK(s <= 4);
  CHECK(l0_min(inst, 4).k_star == 2);
}

TEST_CASE("theorem 3 complementarity holds for a re-solved pair") {
  const Instance inst = example1();
  const AlgorithmConfig cfg = AlgorithmConfig::defaults_for(AlgoVariant::DDA_III);
  const DdaResult r = dda_solve(AlgoVariant::DDA_III, inst, cfg);
  // Re-solve with the same weight: the fresh optimal pair is complementary.
  const SolverResult rs = solve(build_weighted_l1(inst, r.w0), cfg.solve_options);
  REQUIRE(rs.status == SolveStatus::OPTIMAL);
  const Eigen::VectorXd x = extract_primal(inst, rs).x;
  const Eigen::VectorXd lam6 = extract_dual(inst, r.w0, rs).lam6.cwiseMax(0.0);
  const double scale = 1.0 + x.lpNorm<Eigen::Infinity>() * lam6.lpNorm<Eigen::Infinity>();
  CHECK(complementarity_gap(x, lam6).gap <= 1e-5 * scale);
}

TEST_CASE("dra with k_max zero degenerates to dda") {
  const Instance inst = example1();
  AlgorithmConfig cfg = AlgorithmConfig::defaults_for(AlgoVariant::DRA_VI);
  cfg.k_max = 0;
  const RunTrace tr = dra_solve(AlgoVariant::DRA_VI, inst, cfg);
  const DdaResult r = dda_solve(AlgoVariant::DRA_VI, inst, cfg);
  REQUIRE(tr.iterates.size() == 1);
  CHECK((tr.final_x - r.x0).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK((tr.iterates[0].w - r.w0.w).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("dra iterates stay feasible and weights obey their set") {
  const Instance inst = example1();
  for (AlgoVariant v : {AlgoVariant::DRA_II, AlgoVariant::DRA_III, AlgoVariant::DRA_VI}) {
    AlgorithmConfig cfg = AlgorithmConfig::defaults_for(v);
    cfg.k_max = 2;
    const RunTrace tr = dra_solve(v, inst, cfg);
    REQUIRE(!tr.iterates.empty());
    for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
      CHECK(inst.violation(tr.iterates[k].x) <= 1e-6);
      if (k >= 1) {
        const WeightSetRule rule = cfg.rule_at(tr.iterates[k - 1].x);
        CHECK(rule.violation(tr.iterates[k].w) <= 1e-6);
      }
    }
    CHECK(tr.final_sparsity >= 2);  // no algorithm beats the oracle minimum
    CHECK(static_cast<int>(tr.iterates.size()) <= cfg.k_max + 1);
  }
}

TEST_CASE("l1 baseline objective bound from the known feasible point") {
  const Instance inst = example1();
  const Eigen::VectorXd x = l1_solve(inst);
  CHECK(inst.violation(x) <= 1e-6);
  CHECK(x.lpNorm<1>() <= 3.0 + 1e-6);
}

TEST_CASE("sparsity floor on a small random instance") {
  RandomStream rng(2024);
  Instance inst;
  inst.A = rng.gaussian_matrix(5, 8);
  inst.B.resize(0, 8);
  inst.b.resize(0);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(8);
  x0(2) = 1.2;
  x0(6) = -0.8;
  inst.y = inst.A * x0;
  inst.eps_noise = 1e-3;
  const OracleResult oracle = l0_min(inst, 8);
  REQUIRE(oracle.found);
  for (AlgoVariant v : {AlgoVariant::L1, AlgoVariant::CWB, AlgoVariant::ARCTAN_RA,
                        AlgoVariant::DDA_III, AlgoVariant::DRA_IV, AlgoVariant::DRA_VI}) {
    AlgorithmConfig cfg = AlgorithmConfig::defaults_for(v);
    cfg.k_max = 2;
    const RunTrace tr = run_algorithm(inst, cfg);
    CHECK(tr.final_sparsity >= oracle.k_star);
    CHECK(inst.violation(tr.final_x) <= 1e-6);
  }
}

TEST_CASE("config validation") {
  AlgorithmConfig cfg = AlgorithmConfig::defaults_for(AlgoVariant::DRA_I);
  CHECK(cfg.alpha == 1e-8);
  CHECK(cfg.M == 100);
  CHECK(cfg.M_star == 1000);
  CHECK(cfg.merit.family == MeritFamily::FRACTION);
  CHECK(cfg.merit.eps_merit == 1e-15);
  CHECK_NOTHROW(cfg.validate());
  cfg.M_star = 1;  // breaks 1 <= M <= M_star
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  AlgorithmConfig bad = AlgorithmConfig::defaults_for(AlgoVariant::DDA_II);
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = AlgorithmConfig::defaults_for(AlgoVariant::RA);
  bad.k_max = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
