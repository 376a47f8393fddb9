#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <sparsekit/merit.hpp>
#include <sparsekit/random.hpp>

using namespace sparsekit;

namespace {

MeritFunction make(MeritFamily f, double eps) { return MeritFunction{f, eps}; }

const MeritFamily kCountingFamilies[] = {MeritFamily::LOG, MeritFamily::FRACTION,
                                         MeritFamily::POWER, MeritFamily::ARCTAN};

Eigen::VectorXd random_positive(RandomStream& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * rng.next_uniform();
  return v;
}

}  // namespace

TEST_CASE("fraction value by direct substitution") {
  Eigen::VectorXd s(2);
  s << 1, 1;
  CHECK(merit_value(make(MeritFamily::FRACTION, 1.0), s) == doctest::Approx(1.0));
}

TEST_CASE("zero vector gives zero for fraction and arctan") {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(3);
  CHECK(merit_value(make(MeritFamily::FRACTION, 0.5), s) == doctest::Approx(0.0));
  CHECK(merit_value(make(MeritFamily::ARCTAN, 0.5), s) == doctest::Approx(0.0));
}

TEST_CASE("fraction approaches the support count") {
  Eigen::VectorXd s(3);
  s << 2, 0, 3;
  const double v = merit_value(make(MeritFamily::FRACTION, 1e-8), s);
  CHECK(std::abs(v - 2.0) < 1e-6);
}

TEST_CASE("gradient closed forms at simple points") {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
  const Eigen::VectorXd g = merit_gradient(make(MeritFamily::ARCTAN, 1.0), z);
  for (int i = 0; i < 4; ++i) CHECK(g(i) == doctest::Approx(2.0 / M_PI));

  Eigen::VectorXd one(1);
  one << 1;
  CHECK(merit_gradient(make(MeritFamily::FRACTION, 1.0), one)(0) == doctest::Approx(0.25));
  CHECK(merit_gradient(make(MeritFamily::CWB_LOG, 1.0), one)(0) == doctest::Approx(0.5));
}

TEST_CASE("negative component rejected") {
  Eigen::VectorXd s(2);
  s << 1, -0.5;
  CHECK_THROWS_AS(merit_value(make(MeritFamily::FRACTION, 0.1), s), std::domain_error);
  CHECK_THROWS_AS(merit_gradient(make(MeritFamily::ARCTAN, 0.1), s), std::domain_error);
}

TEST_CASE("parameter validation") {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(merit_value(make(MeritFamily::FRACTION, 0.0), s), std::domain_error);
  CHECK_THROWS_AS(merit_value(make(MeritFamily::LOG, 1.5), s), std::domain_error);
  CHECK_THROWS_AS(merit_value(make(MeritFamily::POWER, 2.0), s), std::domain_error);
}

TEST_CASE("gradient matches central finite differences") {
  RandomStream rng(41);
  const double h = 1e-6;
  for (MeritFamily fam : kCountingFamilies) {
    // Moderate eps keeps the finite-difference stencil well conditioned.
    for (double eps : {0.7, 0.3, 0.05}) {
      const MeritFunction m = make(fam, eps);
      for (int rep = 0; rep < 20; ++rep) {
        const Eigen::VectorXd s = random_positive(rng, 6, 0.1, 10.0);
        const Eigen::VectorXd g = merit_gradient(m, s);
        for (int i = 0; i < s.size(); ++i) {
          Eigen::VectorXd sp = s, sm = s;
          sp(i) += h;
          sm(i) -= h;
          const double fd = (merit_value(m, sp) - merit_value(m, sm)) / (2 * h);
          CHECK(std::abs(fd - g(i)) <= 1e-5 * std::max(1.0, std::abs(g(i))));
        }
      }
    }
  }
}

TEST_CASE("P1: approximation error shrinks monotonically with eps") {
  RandomStream rng(7);
  const double eps_grid[] = {1e-2, 1e-4, 1e-8};
  for (MeritFamily fam : kCountingFamilies) {
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd s = random_positive(rng, 5, 0.5, 5.0);
      s(rep % 5) = 0.0;
      const double l0 = 4.0;
      double prev = std::numeric_limits<double>::infinity();
      for (double eps : eps_grid) {
        const double err = std::abs(merit_value(make(fam, eps), s) - l0);
        CHECK(err <= prev + 1e-12);
        prev = err;
      }
      // Log converges only at a 1/log(eps) rate; tightness at eps=1e-8 is a
      // fraction/arctan property.
      if (fam == MeritFamily::FRACTION || fam == MeritFamily::ARCTAN) CHECK(prev < 1e-5);
    }
  }
}

TEST_CASE("P3: concavity along random segments") {
  RandomStream rng(11);
  for (MeritFamily fam : kCountingFamilies) {
    const MeritFunction m = make(fam, 0.3);
    for (int rep = 0; rep < 1000; ++rep) {
      const Eigen::VectorXd a = random_positive(rng, 4, 0.0, 8.0);
      const Eigen::VectorXd b = random_positive(rng, 4, 0.0, 8.0);
      const double th = rng.next_uniform();
      const double mid = merit_value(m, th * a + (1 - th) * b);
      CHECK(mid >= th * merit_value(m, a) + (1 - th) * merit_value(m, b) - 1e-10);
    }
  }
}

TEST_CASE("P3: gradient strictly positive") {
  RandomStream rng(13);
  for (MeritFamily fam : {MeritFamily::LOG, MeritFamily::FRACTION, MeritFamily::POWER,
                          MeritFamily::ARCTAN, MeritFamily::CWB_LOG}) {
    const MeritFunction m = make(fam, 0.2);
    for (int rep = 0; rep < 50; ++rep) {
      const Eigen::VectorXd s = random_positive(rng, 5, 0.0, 20.0);
      CHECK((merit_gradient(m, s).array() > 0.0).all());
    }
  }
}

TEST_CASE("surrogate values at zero") {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  Surrogate j3{SurrogateKind::J3_INVPSI, 0.1, make(MeritFamily::FRACTION, 0.5)};
  CHECK(surrogate_value(j3, z) == doctest::Approx(10.0));
  Surrogate j1{SurrogateKind::J1_EXP, 0.1, make(MeritFamily::FRACTION, 0.5)};
  CHECK(surrogate_value(j1, z) == doctest::Approx(1.0));
}

TEST_CASE("J4 dominates J3") {
  RandomStream rng(17);
  Surrogate j3{SurrogateKind::J3_INVPSI, 0.1, make(MeritFamily::FRACTION, 0.5)};
  Surrogate j4{SurrogateKind::J4_MEAN_INV, 0.1, make(MeritFamily::FRACTION, 0.5)};
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd v = random_positive(rng, 6, 0.0, 4.0);
    CHECK(surrogate_value(j4, v) >= surrogate_value(j3, v) - 1e-12);
  }
}

TEST_CASE("surrogates are convex along random segments") {
  RandomStream rng(19);
  for (SurrogateKind kind : {SurrogateKind::J1_EXP, SurrogateKind::J2_NEGLOG,
                             SurrogateKind::J3_INVPSI, SurrogateKind::J4_MEAN_INV}) {
    Surrogate f{kind, 0.1, make(MeritFamily::FRACTION, 0.5)};
    for (int rep = 0; rep < 1000; ++rep) {
      const Eigen::VectorXd a = random_positive(rng, 4, 0.0, 6.0);
      const Eigen::VectorXd b = random_positive(rng, 4, 0.0, 6.0);
      const double th = rng.next_uniform();
      const double mid = surrogate_value(f, th * a + (1 - th) * b);
      CHECK(mid <= th * surrogate_value(f, a) + (1 - th) * surrogate_value(f, b) + 1e-10);
    }
  }
}

TEST_CASE("surrogate gradient matches finite differences") {
  RandomStream rng(23);
  const double h = 1e-6;
  for (SurrogateKind kind : {SurrogateKind::J1_EXP, SurrogateKind::J2_NEGLOG,
                             SurrogateKind::J3_INVPSI, SurrogateKind::J4_MEAN_INV}) {
    Surrogate f{kind, 0.1, make(MeritFamily::FRACTION, 0.5)};
    for (int rep = 0; rep < 10; ++rep) {
      const Eigen::VectorXd v = random_positive(rng, 5, 0.2, 5.0);
      const Eigen::VectorXd g = surrogate_gradient(f, v);
      for (int i = 0; i < v.size(); ++i) {
        Eigen::VectorXd vp = v, vm = v;
        vp(i) += h;
        vm(i) -= h;
        const double fd = (surrogate_value(f, vp) - surrogate_value(f, vm)) / (2 * h);
        CHECK(std::abs(fd - g(i)) <= 1e-5 * std::max(1.0, std::abs(g(i))));
      }
    }
  }
}

TEST_CASE("counter rng is a pure function of the key") {
  RandomStream a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RandomStream c = RandomStream(9).derive(4);
  RandomStream d = RandomStream(9).derive(4);
  CHECK(c.next_gaussian() == d.next_gaussian());
  CHECK(RandomStream(9).derive(4).next_u64() != RandomStream(9).derive(5).next_u64());
}

TEST_CASE("gaussian draws have sane moments") {
  RandomStream rng(31);
  const int n = 20000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_gaussian();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}
