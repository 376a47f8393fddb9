#pragma once

// Problem data for the feasible set T = { x : ||y - Ax||_2 <= eps, Bx <= b }
// plus the primal/dual variable bundles of its weighted l1 relaxation,
// JSON (de)serialization, and the built-in example1 fixture.

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace sparsekit {

struct Instance {
  Eigen::MatrixXd A;   // m x n
  Eigen::MatrixXd B;   // l x n, l may be 0
  Eigen::VectorXd y;   // m
  Eigen::VectorXd b;   // l
  double eps_noise = 0.0;

  int m() const { return static_cast<int>(A.rows()); }
  int n() const { return static_cast<int>(A.cols()); }
  int l() const { return static_cast<int>(B.rows()); }

  void validate() const {
    if (y.size() != A.rows()) throw std::invalid_argument("instance: y size");
    if (B.rows() > 0 && B.cols() != A.cols()) throw std::invalid_argument("instance: B shape");
    if (b.size() != B.rows()) throw std::invalid_argument("instance: b size");
    if (eps_noise < 0) throw std::invalid_argument("instance: negative noise radius");
  }

  // Feasibility violation of a point, scaled like the solver tolerances.
  double violation(const Eigen::VectorXd& x) const {
    double v = std::max(0.0, (y - A * x).norm() - eps_noise);
    if (l() > 0) v = std::max(v, (B * x - b).maxCoeff());
    return std::max(v, 0.0);
  }
};

struct Weight {
  Eigen::VectorXd w;

  void validate(int n) const {
    if (w.size() != n) throw std::invalid_argument("weight: size");
    if (!w.allFinite()) throw std::invalid_argument("weight: non-finite entry");
    if ((w.array() < 0.0).any()) throw std::invalid_argument("weight: negative entry");
  }
};

struct PrimalTriple {
  Eigen::VectorXd x, t, gamma;
};

struct DualVars {
  double lam1 = 0.0;
  Eigen::VectorXd lam2, lam3, lam4, lam5, lam6;

  // Residual of membership in the dual feasible set D(w).
  double feasibility_violation(const Instance& inst, const Eigen::VectorXd& w) const {
    double v = std::max(0.0, lam3.norm() - lam1);
    Eigen::VectorXd stat = -inst.A.transpose() * lam3 + lam4 - lam5;
    if (inst.l() > 0) stat += inst.B.transpose() * lam2;
    v = std::max(v, stat.lpNorm<Eigen::Infinity>());
    v = std::max(v, (lam4 + lam5 + lam6 - w).lpNorm<Eigen::Infinity>());
    for (const auto* vec : {&lam2, &lam4, &lam5, &lam6})
      if (vec->size() > 0) v = std::max(v, -vec->minCoeff());
    return v;
  }

  double dual_objective(const Instance& inst) const {
    double v = -lam1 * inst.eps_noise + lam3.dot(inst.y);
    if (inst.l() > 0) v -= lam2.dot(inst.b);
    return v;
  }
};

// The 3x4 fixture used throughout the tests and the CLI.
inline Instance example1() {
  Instance inst;
  inst.A.resize(3, 4);
  inst.A << 1, 0, -2, 5,
            0, 1, 4, -9,
            1, 0, -2, 5;
  inst.B.resize(3, 4);
  inst.B << -0.5, 0, 1, -2.5,
            0.5, -0.5, -1, 2,
            -3, -3, -2, 3;
  inst.y.resize(3);
  inst.y << 1, -1, 1;
  inst.b.resize(3);
  inst.b << -0.5, 1, -1;
  inst.eps_noise = 0.1;
  return inst;
}

// ---- JSON round trip (row-major dense matrices) ----

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
  return arr;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int rows, int cols) {
  if (static_cast<int>(j.size()) != rows * cols)
    throw std::invalid_argument("instance json: matrix entry count");
  Eigen::MatrixXd M(rows, cols);
  int k = 0;
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) M(i, c) = j.at(k++).get<double>();
  return M;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j.at(i).get<double>();
  return v;
}

struct InstanceFile {
  Instance inst;
  std::optional<Eigen::VectorXd> x_star;
  std::optional<std::uint64_t> seed;
};

inline nlohmann::json instance_to_json(const Instance& inst,
                                       const std::optional<Eigen::VectorXd>& x_star = {},
                                       const std::optional<std::uint64_t>& seed = {}) {
  nlohmann::json j;
  j["m"] = inst.m();
  j["n"] = inst.n();
  j["l"] = inst.l();
  j["A"] = matrix_to_json(inst.A);
  j["B"] = matrix_to_json(inst.B);
  j["y"] = vector_to_json(inst.y);
  j["b"] = vector_to_json(inst.b);
  j["eps_noise"] = inst.eps_noise;
  j["x_star"] = x_star ? vector_to_json(*x_star) : nlohmann::json();
  if (seed) j["seed"] = *seed;
  return j;
}

inline InstanceFile instance_from_json(const nlohmann::json& j) {
  InstanceFile f;
  const int m = j.at("m").get<int>();
  const int n = j.at("n").get<int>();
  const int l = j.at("l").get<int>();
  f.inst.A = matrix_from_json(j.at("A"), m, n);
  f.inst.B = l > 0 ? matrix_from_json(j.at("B"), l, n) : Eigen::MatrixXd(0, n);
  f.inst.y = vector_from_json(j.at("y"));
  f.inst.b = l > 0 ? vector_from_json(j.at("b")) : Eigen::VectorXd(0);
  f.inst.eps_noise = j.at("eps_noise").get<double>();
  if (j.contains("x_star") && !j.at("x_star").is_null())
    f.x_star = vector_from_json(j.at("x_star"));
  if (j.contains("seed") && !j.at("seed").is_null())
    f.seed = j.at("seed").get<std::uint64_t>();
  f.inst.validate();
  return f;
}

}  // namespace sparsekit
