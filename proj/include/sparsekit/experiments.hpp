#pragma once

// Phase-transition experiment harness: random instance generation,
// the recovery success criterion, sparsity sweeps with shared instances
// across algorithms, and CSV/SVG emission.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "algorithms.hpp"
#include "instance.hpp"
#include "random.hpp"

namespace sparsekit {

enum class SweepCase { N1, N2, CUSTOM };

struct SweepSpec {
  SweepCase kase = SweepCase::N1;
  int m = 50, n = 200, l = 0;  // CUSTOM dims; N1/N2 override below
  int sparsity_min = 5;
  int sparsity_max = 25;
  int trials_per_level = 200;
  double eps_noise = 1e-4;
  std::vector<AlgorithmConfig> algorithms;
  std::uint64_t seed = 0;
  bool reject_outside = false;  // redraw while |c1| > 1 puts x* outside T
  bool include_timing = false;  // off by default: keeps CSV byte-identical
  int threads = 1;

  int dim_m() const { return kase == SweepCase::CUSTOM ? m : 50; }
  int dim_n() const { return kase == SweepCase::CUSTOM ? n : 200; }
  int dim_l() const {
    if (kase == SweepCase::N1) return 0;
    if (kase == SweepCase::N2) return 50;
    return l;
  }

  void validate() const {
    if (trials_per_level < 1) throw std::invalid_argument("sweep: trials >= 1");
    if (sparsity_min < 0 || sparsity_min > sparsity_max)
      throw std::invalid_argument("sweep: bad sparsity range");
    if (sparsity_max >= dim_m()) throw std::invalid_argument("sweep: sparsity max < m");
    if (algorithms.empty()) throw std::invalid_argument("sweep: no algorithms");
    if (threads < 1) throw std::invalid_argument("sweep: threads >= 1");
    for (const auto& a : algorithms) a.validate();
  }
};

struct GeneratedInstance {
  Instance inst;
  Eigen::VectorXd x_star;
  double realized_residual = 0.0;  // |c1| * eps_noise, may exceed eps_noise
};

// Random instance with a planted k-sparse point: y = Ax* + (c1 eps/||c||) c,
// b = Bx* + d with d >= 0. Deterministic in the stream state.
inline GeneratedInstance generate_instance(int m, int n, int l, int k, double eps_noise,
                                           RandomStream rng) {
  if (k > n || k < 0) throw std::invalid_argument("generate_instance: sparsity");
  GeneratedInstance g;
  g.inst.A = rng.gaussian_matrix(m, n);
  g.inst.B = l > 0 ? rng.gaussian_matrix(l, n) : Eigen::MatrixXd(0, n);

  // Uniform k-subset by partial Fisher-Yates.
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  g.x_star = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < k; ++i) g.x_star(idx[i]) = rng.next_gaussian();

  const Eigen::VectorXd c = rng.gaussian_vector(m);
  const double c1 = rng.next_gaussian();
  g.inst.y = g.inst.A * g.x_star;
  const double cnorm = c.norm();
  if (cnorm > 0) g.inst.y += (c1 * eps_noise / cnorm) * c;
  g.realized_residual = std::abs(c1) * eps_noise;

  if (l > 0) {
    Eigen::VectorXd d(l);
    for (int i = 0; i < l; ++i) d(i) = std::abs(rng.next_gaussian());
    g.inst.b = g.inst.B * g.x_star + d;
  } else {
    g.inst.b.resize(0);
  }
  g.inst.eps_noise = eps_noise;
  return g;
}

inline bool success(const Eigen::VectorXd& x_found, const Eigen::VectorXd& x_star) {
  const double ref = x_star.norm();
  if (ref == 0.0) throw std::invalid_argument("success: zero reference point");
  return (x_found - x_star).norm() / ref <= 1e-5;
}

struct TrialRecord {
  int sparsity = 0;
  int trial = 0;
  double realized_residual = 0.0;
  // Per algorithm, aligned with SweepSpec::algorithms.
  std::vector<double> rel_error;
  std::vector<int> sparsity_found;
  std::vector<double> seconds;
  std::vector<bool> succeeded;
  std::vector<bool> failed;  // solver threw; recorded, never aborts the sweep
};

struct AggregateRow {
  std::string algorithm;
  int sparsity = 0;
  int trials = 0;
  int successes = 0;
  double rate = 0.0;
  double mean_seconds = 0.0;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<AggregateRow> rows;      // algorithm-major, sparsity ascending
  std::vector<TrialRecord> records;    // canonical (sparsity, trial) order
};

// Instance stream for trial t at sparsity k: derive(seed) -> k -> t.
// The rejection loop extends the chain with an attempt counter.
inline GeneratedInstance sweep_instance(const SweepSpec& spec, int k, int t) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    RandomStream rng = RandomStream(spec.seed)
                           .derive(static_cast<std::uint64_t>(k))
                           .derive(static_cast<std::uint64_t>(t))
                           .derive(attempt);
    GeneratedInstance g =
        generate_instance(spec.dim_m(), spec.dim_n(), spec.dim_l(), k, spec.eps_noise, rng);
    if (!spec.reject_outside || g.realized_residual <= spec.eps_noise) return g;
  }
}

inline SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const int levels = spec.sparsity_max - spec.sparsity_min + 1;
  const int trials = spec.trials_per_level;
  const int nalg = static_cast<int>(spec.algorithms.size());

  SweepResult out;
  out.spec = spec;
  out.records.resize(static_cast<std::size_t>(levels) * trials);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int job = next.fetch_add(1);
      if (job >= levels * trials) return;
      const int k = spec.sparsity_min + job / trials;
      const int t = job % trials;
      const GeneratedInstance g = sweep_instance(spec, k, t);
      TrialRecord rec;
      rec.sparsity = k;
      rec.trial = t;
      rec.realized_residual = g.realized_residual;
      rec.rel_error.assign(nalg, std::numeric_limits<double>::infinity());
      rec.sparsity_found.assign(nalg, -1);
      rec.seconds.assign(nalg, 0.0);
      rec.succeeded.assign(nalg, false);
      rec.failed.assign(nalg, false);
      for (int a = 0; a < nalg; ++a) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const RunTrace tr = run_algorithm(g.inst, spec.algorithms[a]);
          rec.rel_error[a] = (tr.final_x - g.x_star).norm() / g.x_star.norm();
          rec.sparsity_found[a] = tr.final_sparsity;
          rec.succeeded[a] = success(tr.final_x, g.x_star);
        } catch (const std::exception&) {
          rec.failed[a] = true;
        }
        if (spec.include_timing) {
          const auto t1 = std::chrono::steady_clock::now();
          rec.seconds[a] = std::chrono::duration<double>(t1 - t0).count();
        }
      }
      out.records[job] = std::move(rec);
    }
  };

  if (spec.threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < spec.threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Canonical aggregation, independent of completion order.
  for (int a = 0; a < nalg; ++a) {
    for (int kl = 0; kl < levels; ++kl) {
      AggregateRow row;
      row.algorithm = algo_name(spec.algorithms[a].variant);
      row.sparsity = spec.sparsity_min + kl;
      row.trials = trials;
      double sec = 0.0;
      for (int t = 0; t < trials; ++t) {
        const TrialRecord& rec = out.records[static_cast<std::size_t>(kl) * trials + t];
        if (rec.succeeded[a]) ++row.successes;
        sec += rec.seconds[a];
      }
      row.rate = static_cast<double>(row.successes) / trials;
      row.mean_seconds = sec / trials;
      out.rows.push_back(row);
    }
  }
  return out;
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string case_name(SweepCase c) {
  switch (c) {
    case SweepCase::N1: return "n1";
    case SweepCase::N2: return "n2";
    default: return "custom";
  }
}

}  // namespace detail

// Header comment lines echoing the effective configuration.
inline std::string sweep_config_echo(const SweepSpec& spec) {
  std::ostringstream os;
  os << "# case=" << detail::case_name(spec.kase) << " m=" << spec.dim_m()
     << " n=" << spec.dim_n() << " l=" << spec.dim_l() << " eps_noise="
     << detail::fixed6(spec.eps_noise) << "\n";
  os << "# sparsity=" << spec.sparsity_min << ".." << spec.sparsity_max
     << " trials=" << spec.trials_per_level << " seed=" << spec.seed
     << " reject_outside=" << (spec.reject_outside ? 1 : 0)
     << " timing=" << (spec.include_timing ? 1 : 0) << "\n";
  for (const auto& a : spec.algorithms) {
    os << "# algorithm=" << algo_name(a.variant) << " alpha=" << a.alpha
       << " gamma_bound=" << a.gamma_bound << " M=" << a.M << " M_star=" << a.M_star
       << " sigma1=" << a.sigma1 << " sigma2=" << a.sigma2
       << " eps_merit=" << a.merit.eps_merit << " k_max=" << a.k_max << "\n";
  }
  return os.str();
}

inline void emit_csv(const SweepResult& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_csv: cannot write " + path);
  f << sweep_config_echo(r.spec);
  f << "algorithm,sparsity,trials,successes,rate,mean_seconds\n";
  for (const auto& row : r.rows)
    f << row.algorithm << ',' << row.sparsity << ',' << row.trials << ','
      << row.successes << ',' << detail::fixed6(row.rate) << ','
      << detail::fixed6(row.mean_seconds) << '\n';
  if (!f) throw std::runtime_error("emit_csv: write failed for " + path);
}

// Static success-rate chart, one polyline per algorithm.
inline void emit_svg(const SweepResult& r, const std::string& path) {
  const double W = 640, H = 420, L = 60, R = 20, T = 30, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  const int k0 = r.spec.sparsity_min, k1 = r.spec.sparsity_max;
  const int nalg = static_cast<int>(r.spec.algorithms.size());
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  auto px = [&](int k) {
    return k1 > k0 ? L + pw * (k - k0) / static_cast<double>(k1 - k0) : L + pw / 2;
  };
  auto py = [&](double rate) { return T + ph * (1.0 - rate); };

  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_svg: cannot write " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  f << "<line x1=\"" << L << "\" y1=\"" << T + ph << "\" x2=\"" << L + pw << "\" y2=\""
    << T + ph << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << T + ph
    << "\" stroke=\"black\"/>\n";
  f << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-size=\"13\">sparsity</text>\n";
  f << "<text x=\"16\" y=\"" << T + ph / 2
    << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
    << T + ph / 2 << ")\">success rate</text>\n";
  for (int g = 0; g <= 5; ++g) {
    const double rate = g / 5.0;
    f << "<text x=\"" << L - 8 << "\" y=\"" << py(rate) + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << detail::fixed6(rate).substr(0, 3)
      << "</text>\n";
  }
  for (int k = k0; k <= k1; ++k)
    f << "<text x=\"" << px(k) << "\" y=\"" << T + ph + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << k << "</text>\n";
  for (int a = 0; a < nalg; ++a) {
    const std::string name = algo_name(r.spec.algorithms[a].variant);
    std::ostringstream pts;
    for (const auto& row : r.rows)
      if (row.algorithm == name) pts << px(row.sparsity) << ',' << py(row.rate) << ' ';
    const char* color = palette[a % 10];
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
      << pts.str() << "\"/>\n";
    f << "<text x=\"" << L + pw - 8 << "\" y=\"" << T + 16 + 16 * a
      << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << name
      << "</text>\n";
  }
  f << "</svg>\n";
  if (!f) throw std::runtime_error("emit_svg: write failed for " + path);
}

inline void emit_results(const SweepResult& r, const std::string& csv_path,
                         const std::string& svg_path) {
  emit_csv(r, csv_path);
  emit_svg(r, svg_path);
}

}  // namespace sparsekit
