#pragma once

// Shared test utilities: brute-force probability oracles computed by joint
// enumeration (independent of the library's adjustment routines), a dense
// Gauss-Jordan inverse for checking linear solvers, tweaked gallery variants,
// filesystem scratch helpers, and the calibration goldens parser.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/gallery.hpp"
#include "cmdp/linalg.hpp"
#include "cmdp/mdp.hpp"

namespace testutil {

inline std::string source_dir() {
#ifdef CMDP_SOURCE_DIR
  return CMDP_SOURCE_DIR;
#else
  return ".";
#endif
}

/// Fresh scratch directory under the system temp root, unique per call.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static int counter = 0;
  auto p = std::filesystem::temp_directory_path() /
           ("cmdp_test_" + tag + "_" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parse data/goldens.txt: one `key value` pair per significant line.
inline std::map<std::string, double> read_goldens() {
  auto path = std::filesystem::path(source_dir()) / "data" / "goldens.txt";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open goldens file " + path.string());
  std::map<std::string, double> g;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ss(line);
    std::string key;
    double val;
    if (ss >> key >> val) g[key] = val;
  }
  return g;
}

inline double golden(const std::map<std::string, double>& g, const std::string& key) {
  auto it = g.find(key);
  if (it == g.end()) throw std::runtime_error("missing golden: " + key);
  return it->second;
}

// ---------------------------------------------------------------------------
// Dense inverse oracle.

/// Gauss-Jordan inverse with partial pivoting. Independent of cmdp::Cholesky.
inline cmdp::Mat gauss_jordan_inverse(const cmdp::Mat& A) {
  const int n = A.rows;
  std::vector<std::vector<double>> aug(n, std::vector<double>(2 * n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug[i][j] = A(i, j);
    aug[i][n + i] = 1.0;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
    std::swap(aug[col], aug[piv]);
    const double d = aug[col][col];
    if (std::abs(d) < 1e-300) throw std::runtime_error("singular matrix in test oracle");
    for (int j = 0; j < 2 * n; ++j) aug[col][j] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = aug[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < 2 * n; ++j) aug[r][j] -= f * aug[col][j];
    }
  }
  cmdp::Mat inv(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = aug[i][n + j];
  return inv;
}

/// Random symmetric positive definite matrix lambda*I + sum of outer products.
inline cmdp::Mat random_spd(int d, double lambda, std::mt19937& gen, int vecs = 0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  cmdp::Mat A(d, d, 0.0);
  for (int i = 0; i < d; ++i) A(i, i) = lambda;
  const int m = vecs > 0 ? vecs : 3 * d;
  for (int k = 0; k < m; ++k) {
    std::vector<double> x(static_cast<size_t>(d));
    for (auto& v : x) v = u(gen);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) A(i, j) += x[i] * x[j];
  }
  return A;
}

// ---------------------------------------------------------------------------
// Brute-force causal-quantity oracles by joint enumeration.
//
// These walk the full generative factorization of one logged step and never
// call the library's adjustment or Bayes routines, so agreement is evidence
// rather than tautology.

/// Observational next-state conditional P(s'|h,s,a) for a backdoor instance:
///   sum_w p(w|s) nu(a|s,w) P(s'|s,a,w) / sum_w p(w|s) nu(a|s,w).
inline cmdp::Vec bf_conditional_next(const cmdp::ConfoundedMDP& m, int h, int s, int a) {
  cmdp::Vec num(m.nS, 0.0);
  double den = 0.0;
  for (int w = 0; w < m.nW; ++w) {
    const double pw = m.cf(h, s, w) * m.bh(h, s, w, a);
    den += pw;
    for (int sp = 0; sp < m.nS; ++sp) num[sp] += pw * m.tr(h, s, a, w, sp);
  }
  if (den <= 0.0) throw std::runtime_error("zero support in bf_conditional_next");
  for (auto& v : num) v /= den;
  return num;
}

/// Observational reward conditional E[r|h,s,a] for a backdoor instance.
inline double bf_conditional_reward(const cmdp::ConfoundedMDP& m, int h, int s, int a) {
  double num = 0.0, den = 0.0;
  for (int w = 0; w < m.nW; ++w) {
    const double pw = m.cf(h, s, w) * m.bh(h, s, w, a);
    den += pw;
    num += pw * m.rw(h, s, a, w);
  }
  if (den <= 0.0) throw std::runtime_error("zero support in bf_conditional_reward");
  return num / den;
}

/// Interventional next-state law P(s'|h,s,do(a)) by direct w-marginalization.
inline cmdp::Vec bf_backdoor_next(const cmdp::ConfoundedMDP& m, int h, int s, int a) {
  cmdp::Vec out(m.nS, 0.0);
  for (int w = 0; w < m.nW; ++w)
    for (int sp = 0; sp < m.nS; ++sp) out[sp] += m.cf(h, s, w) * m.tr(h, s, a, w, sp);
  return out;
}

inline double bf_backdoor_reward(const cmdp::ConfoundedMDP& m, int h, int s, int a) {
  double out = 0.0;
  for (int w = 0; w < m.nW; ++w) out += m.cf(h, s, w) * m.rw(h, s, a, w);
  return out;
}

/// Frontdoor interventional law by the generative factorization:
///   P(s'|s,do(a)) = sum_m P(m|s,a) sum_w p(w|s) P(s'|s,m,w).
inline cmdp::Vec bf_frontdoor_next(const cmdp::ConfoundedMDP& m, int h, int s, int a) {
  cmdp::Vec out(m.nS, 0.0);
  for (int mm = 0; mm < m.nM; ++mm)
    for (int w = 0; w < m.nW; ++w)
      for (int sp = 0; sp < m.nS; ++sp)
        out[sp] += m.it(h, s, a, mm) * m.cf(h, s, w) * m.ft(h, s, mm, w, sp);
  return out;
}

/// Observational P(s'|h,s,a,m) for a frontdoor instance. The mediator draw is
/// w-independent given (s,a), so it cancels from the Bayes weight:
///   sum_w p(w) nu(a|w) ft(s'|s,m,w) / sum_w p(w) nu(a|w).
inline cmdp::Vec bf_am_conditional(const cmdp::ConfoundedMDP& m, int h, int s, int a, int mm) {
  cmdp::Vec num(m.nS, 0.0);
  double den = 0.0;
  for (int w = 0; w < m.nW; ++w) {
    const double pw = m.cf(h, s, w) * m.bh(h, s, w, a);
    den += pw;
    for (int sp = 0; sp < m.nS; ++sp) num[sp] += pw * m.ft(h, s, mm, w, sp);
  }
  if (den <= 0.0) throw std::runtime_error("zero support in bf_am_conditional");
  for (auto& v : num) v /= den;
  return num;
}

// ---------------------------------------------------------------------------
// Gallery variants.

/// BD-2 with the confounding broken: behavior made uniform over actions so
/// the logged action carries no information about w. Conditionals then equal
/// causal effects.
inline cmdp::ConfoundedMDP make_bd2_unconfounded() {
  auto m = cmdp::gallery_get("BD-2");
  m.name = "BD-2-flat";
  for (auto& v : m.behavior) v = 1.0 / m.nA;
  cmdp::validate_or_throw(m);
  return m;
}

/// Three confounder values collapsing onto two observed classes. When the
/// behavior is constant within each class, logged u-aggregation recovers the
/// full w-sum adjustment exactly; when it varies within a class it does not.
inline cmdp::ConfoundedMDP make_obs3(bool class_constant_behavior) {
  cmdp::ConfoundedMDP m;
  m.name = class_constant_behavior ? "OBS-3" : "OBS-3-bad";
  m.mode = cmdp::AdjustMode::backdoor;
  m.H = 2;
  m.nS = 2;
  m.nA = 2;
  m.nW = 3;
  m.nU = 2;
  m.obs_map = {0, 1, 1};
  m.init = {0.6, 0.4};
  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  m.conf.assign(hs * m.nW, 0.0);
  m.behavior.assign(hs * m.nW * m.nA, 0.0);
  m.trans.assign(hs * m.nA * m.nW * m.nS, 0.0);
  m.reward.assign(hs * m.nA * m.nW, 0.0);
  for (int h = 0; h < m.H; ++h)
    for (int s = 0; s < m.nS; ++s) {
      m.conf[m.icf(h, s, 0)] = 0.5;
      m.conf[m.icf(h, s, 1)] = 0.2 + 0.1 * s;
      m.conf[m.icf(h, s, 2)] = 0.3 - 0.1 * s;
      for (int w = 0; w < m.nW; ++w) {
        double p0;
        if (class_constant_behavior) {
          p0 = (w == 0) ? 0.8 : 0.3;  // same within class u=1 (w in {1,2})
        } else {
          p0 = 0.8 - 0.25 * w;  // 0.8, 0.55, 0.3: varies within class u=1
        }
        m.behavior[m.ibh(h, s, w, 0)] = p0;
        m.behavior[m.ibh(h, s, w, 1)] = 1.0 - p0;
        for (int a = 0; a < m.nA; ++a) {
          m.reward[m.irw(h, s, a, w)] = 0.1 + 0.2 * a + 0.15 * w + 0.05 * s;
          const double q = 0.15 + 0.2 * a + 0.18 * w + 0.07 * s;
          m.trans[m.itr(h, s, a, w, 0)] = q;
          m.trans[m.itr(h, s, a, w, 1)] = 1.0 - q;
        }
      }
    }
  cmdp::validate_or_throw(m);
  return m;
}

/// All deterministic policies over a small instance.
inline std::vector<cmdp::Policy> all_deterministic_policies(const cmdp::ConfoundedMDP& m) {
  const int cells = m.H * m.nS;
  long total = 1;
  for (int i = 0; i < cells; ++i) total *= m.nA;
  std::vector<cmdp::Policy> out;
  out.reserve(static_cast<size_t>(total));
  for (long code = 0; code < total; ++code) {
    cmdp::Policy pol{m.H, m.nS, std::vector<int>(static_cast<size_t>(cells), 0)};
    long c = code;
    for (int i = 0; i < cells; ++i) {
      pol.act[i] = static_cast<int>(c % m.nA);
      c /= m.nA;
    }
    out.push_back(std::move(pol));
  }
  return out;
}

}  // namespace testutil
