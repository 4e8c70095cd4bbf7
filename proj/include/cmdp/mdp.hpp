/**
 * @file mdp.hpp
 * @brief Tabular confounded MDPs: types, validation, samplers, exact causal oracles.
 *
 * The model is an episodic structural causal model. At step h in state s a
 * confounder w is drawn from conf(h,s,.). Offline, a logging policy picks
 * a ~ behavior(h,s,w,.), so w confounds both the realized reward and the next
 * state; the logged record carries only the summary u = obs_map[w] (backdoor
 * mode) or the mediator m (frontdoor mode). Online, the agent intervenes:
 * do(a) cuts the w -> a arrow while w keeps acting on reward and transition.
 *
 * Everything here is exact arithmetic over the tables, no sampling: these
 * oracles define ground truth for regret accounting and for the adjusted
 * feature construction.
 */
#ifndef CMDP_MDP_HPP
#define CMDP_MDP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/errors.hpp"
#include "cmdp/linalg.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

enum class AdjustMode { backdoor, frontdoor };

inline const char* to_string(AdjustMode m) {
  return m == AdjustMode::backdoor ? "backdoor" : "frontdoor";
}

inline AdjustMode adjust_mode_from_string(const std::string& s) {
  if (s == "backdoor") return AdjustMode::backdoor;
  if (s == "frontdoor") return AdjustMode::frontdoor;
  throw ValidationError("unknown adjustment mode: " + s);
}

/**
 * Tabular confounded MDP. Flat tables with explicit index order:
 *   conf     [h][s][w]          P(w | s) at step h
 *   behavior [h][s][w][a]       logging policy nu(a | s, w)
 *   trans    [h][s][a][w][s']   backdoor transition kernel
 *   reward   [h][s][a][w]       backdoor realized reward in [0,1]
 *   itrans   [h][s][a][m]       frontdoor mediator kernel
 *   ftrans   [h][s][m][w][s']   frontdoor transition kernel (no direct a -> s')
 *   freward  [h][s][a]          frontdoor deterministic reward in [0,1]
 * Backdoor instances leave the frontdoor tables empty and vice versa.
 */
struct ConfoundedMDP {
  std::string name;
  AdjustMode mode = AdjustMode::backdoor;
  int H = 0, nS = 0, nA = 0, nW = 0;
  int nU = 0;                // observed-summary alphabet, backdoor mode
  int nM = 0;                // mediator alphabet, frontdoor mode
  std::vector<int> obs_map;  // size nW, surjective onto [0, nU)
  Vec init;                  // size nS, initial state distribution

  Vec conf, behavior, trans, reward;
  Vec itrans, ftrans, freward;

  // Index helpers. The checked state/action arguments use check_* below.
  size_t icf(int h, int s, int w) const { return (static_cast<size_t>(h) * nS + s) * nW + w; }
  size_t ibh(int h, int s, int w, int a) const { return icf(h, s, w) * nA + a; }
  size_t itr(int h, int s, int a, int w, int sp) const {
    return (((static_cast<size_t>(h) * nS + s) * nA + a) * nW + w) * nS + sp;
  }
  size_t irw(int h, int s, int a, int w) const {
    return ((static_cast<size_t>(h) * nS + s) * nA + a) * nW + w;
  }
  size_t iit(int h, int s, int a, int m) const {
    return ((static_cast<size_t>(h) * nS + s) * nA + a) * nM + m;
  }
  size_t ift(int h, int s, int m, int w, int sp) const {
    return (((static_cast<size_t>(h) * nS + s) * nM + m) * nW + w) * nS + sp;
  }
  size_t ifr(int h, int s, int a) const { return (static_cast<size_t>(h) * nS + s) * nA + a; }

  double cf(int h, int s, int w) const { return conf[icf(h, s, w)]; }
  double bh(int h, int s, int w, int a) const { return behavior[ibh(h, s, w, a)]; }
  double tr(int h, int s, int a, int w, int sp) const { return trans[itr(h, s, a, w, sp)]; }
  double rw(int h, int s, int a, int w) const { return reward[irw(h, s, a, w)]; }
  double it(int h, int s, int a, int m) const { return itrans[iit(h, s, a, m)]; }
  double ft(int h, int s, int m, int w, int sp) const { return ftrans[ift(h, s, m, w, sp)]; }
  double fr(int h, int s, int a) const { return freward[ifr(h, s, a)]; }

  void check_hsa(int h, int s, int a) const {
    if (h < 0 || h >= H) throw std::out_of_range("step index h out of range");
    if (s < 0 || s >= nS) throw std::out_of_range("state index out of range");
    if (a < 0 || a >= nA) throw std::out_of_range("action index out of range");
  }
  void check_m(int m) const {
    if (m < 0 || m >= nM) throw std::out_of_range("mediator index out of range");
  }
  void check_u(int u) const {
    if (u < 0 || u >= nU) throw std::out_of_range("observed-summary index out of range");
  }

  bool backdoor() const { return mode == AdjustMode::backdoor; }
};

/// One logged step. o is the observed summary u (backdoor) or mediator m
/// (frontdoor); sp is the realized next state, kept so regression pools can
/// be built without re-pairing adjacent records.
struct Step {
  int s = 0, a = 0, o = 0;
  double r = 0.0;
  int sp = 0;
};

struct Trajectory {
  std::vector<Step> steps;  // length H
};

/// Deterministic policy, one action per (h, s).
struct Policy {
  int H = 0, nS = 0;
  std::vector<int> act;  // act[h * nS + s]
  int at(int h, int s) const { return act[static_cast<size_t>(h) * nS + s]; }
};

/// Stochastic policy over actions per (h, s); used for uniform exploration
/// and policy-evaluation oracles.
struct StochPolicy {
  int H = 0, nS = 0, nA = 0;
  Vec p;  // p[(h * nS + s) * nA + a]
  double at(int h, int s, int a) const {
    return p[(static_cast<size_t>(h) * nS + s) * nA + a];
  }
  static StochPolicy uniform(int H, int nS, int nA) {
    StochPolicy sp{H, nS, nA, Vec(static_cast<size_t>(H) * nS * nA, 1.0 / nA)};
    return sp;
  }
  static StochPolicy from(const Policy& pol, int nA) {
    StochPolicy sp{pol.H, pol.nS, nA, Vec(static_cast<size_t>(pol.H) * pol.nS * nA, 0.0)};
    for (int h = 0; h < pol.H; ++h)
      for (int s = 0; s < pol.nS; ++s)
        sp.p[(static_cast<size_t>(h) * pol.nS + s) * nA + pol.at(h, s)] = 1.0;
    return sp;
  }
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string where;
  double residual = 0.0;
};

namespace detail {
inline void check_row(std::vector<Violation>& out, const Vec& v, size_t off, int n,
                      const std::string& where) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = v[off + i];
    if (p < 0.0 || !(std::isfinite(p)))
      out.push_back({where + " has negative or non-finite entry", p});
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) out.push_back({where + " row sum", sum - 1.0});
}
inline void check_unit(std::vector<Violation>& out, double x, const std::string& where) {
  if (!(x >= 0.0 && x <= 1.0)) out.push_back({where + " outside [0,1]", x});
}
inline std::string idx(std::initializer_list<int> xs) {
  std::string s = "[";
  bool first = true;
  for (int x : xs) {
    if (!first) s += ",";
    s += std::to_string(x);
    first = false;
  }
  return s + "]";
}
}  // namespace detail

/// Structural checks: table sizes, row-stochasticity within 1e-12, rewards in
/// [0,1], obs_map surjective. Returns one entry per violation; empty == valid.
inline std::vector<Violation> validate(const ConfoundedMDP& m) {
  using detail::check_row;
  using detail::check_unit;
  using detail::idx;
  std::vector<Violation> out;
  if (m.H <= 0 || m.nS <= 0 || m.nA <= 0 || m.nW <= 0) {
    out.push_back({"dimensions must be positive", 0.0});
    return out;
  }
  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  if (m.init.size() != static_cast<size_t>(m.nS))
    out.push_back({"init size", static_cast<double>(m.init.size())});
  else
    check_row(out, m.init, 0, m.nS, "init");
  if (m.conf.size() != hs * m.nW) out.push_back({"conf size", static_cast<double>(m.conf.size())});
  if (m.behavior.size() != hs * m.nW * m.nA)
    out.push_back({"behavior size", static_cast<double>(m.behavior.size())});
  if (!out.empty() && out.back().where.find("size") != std::string::npos) return out;

  for (int h = 0; h < m.H; ++h)
    for (int s = 0; s < m.nS; ++s) {
      check_row(out, m.conf, m.icf(h, s, 0), m.nW, "conf" + idx({h, s}));
      for (int w = 0; w < m.nW; ++w)
        check_row(out, m.behavior, m.ibh(h, s, w, 0), m.nA, "behavior" + idx({h, s, w}));
    }

  if (m.backdoor()) {
    if (m.nU <= 0 || m.obs_map.size() != static_cast<size_t>(m.nW)) {
      out.push_back({"obs_map size or nU", static_cast<double>(m.obs_map.size())});
      return out;
    }
    std::vector<int> hit(m.nU, 0);
    for (int w = 0; w < m.nW; ++w) {
      if (m.obs_map[w] < 0 || m.obs_map[w] >= m.nU) {
        out.push_back({"obs_map" + idx({w}) + " out of range", static_cast<double>(m.obs_map[w])});
        return out;
      }
      hit[m.obs_map[w]] = 1;
    }
    for (int u = 0; u < m.nU; ++u)
      if (!hit[u]) out.push_back({"obs_map not surjective at u=" + std::to_string(u), 0.0});
    if (m.trans.size() != hs * m.nA * m.nW * m.nS || m.reward.size() != hs * m.nA * m.nW) {
      out.push_back({"backdoor table size", 0.0});
      return out;
    }
    for (int h = 0; h < m.H; ++h)
      for (int s = 0; s < m.nS; ++s)
        for (int a = 0; a < m.nA; ++a)
          for (int w = 0; w < m.nW; ++w) {
            check_row(out, m.trans, m.itr(h, s, a, w, 0), m.nS, "trans" + idx({h, s, a, w}));
            check_unit(out, m.rw(h, s, a, w), "reward" + idx({h, s, a, w}));
          }
  } else {
    if (m.nM <= 0) {
      out.push_back({"nM must be positive in frontdoor mode", 0.0});
      return out;
    }
    if (m.itrans.size() != hs * m.nA * m.nM || m.ftrans.size() != hs * m.nM * m.nW * m.nS ||
        m.freward.size() != hs * m.nA) {
      out.push_back({"frontdoor table size", 0.0});
      return out;
    }
    for (int h = 0; h < m.H; ++h)
      for (int s = 0; s < m.nS; ++s) {
        for (int a = 0; a < m.nA; ++a) {
          check_row(out, m.itrans, m.iit(h, s, a, 0), m.nM, "itrans" + idx({h, s, a}));
          check_unit(out, m.fr(h, s, a), "freward" + idx({h, s, a}));
        }
        for (int mm = 0; mm < m.nM; ++mm)
          for (int w = 0; w < m.nW; ++w)
            check_row(out, m.ftrans, m.ift(h, s, mm, w, 0), m.nS, "ftrans" + idx({h, s, mm, w}));
      }
  }
  return out;
}

inline void validate_or_throw(const ConfoundedMDP& m) {
  auto v = validate(m);
  if (!v.empty())
    throw ValidationError("instance '" + m.name + "' invalid: " + v.front().where +
                          " (residual " + std::to_string(v.front().residual) + "; " +
                          std::to_string(v.size()) + " violation(s))");
}

// ---------------------------------------------------------------------------
// Exact oracles, backdoor granularity

/// P(u | s) at step h: mass of the observed summary class.
inline Vec obs_marginal(const ConfoundedMDP& m, int h, int s) {
  m.check_hsa(h, s, 0);
  Vec p(m.nU, 0.0);
  for (int w = 0; w < m.nW; ++w) p[m.obs_map[w]] += m.cf(h, s, w);
  return p;
}

/**
 * Observational next-state law P(s' | s, a, u) by exact Bayes over the latent
 * w within the u-class. Conditioning on the logged action keeps the behavior
 * weighting nu(a | s, w); that is what offline data estimates. If the class
 * has mass but the behavior never plays a there, the interventional class
 * average is used instead; a zero-mass class falls back to uniform. Both
 * fallbacks only affect coordinates that carry zero weight downstream.
 */
inline Vec u_conditional_next_dist(const ConfoundedMDP& m, int h, int s, int a, int u) {
  m.check_hsa(h, s, a);
  m.check_u(u);
  Vec p(m.nS, 0.0);
  double den_beh = 0.0, den_cls = 0.0;
  for (int w = 0; w < m.nW; ++w) {
    if (m.obs_map[w] != u) continue;
    den_beh += m.cf(h, s, w) * m.bh(h, s, w, a);
    den_cls += m.cf(h, s, w);
  }
  if (den_beh > 0.0) {
    for (int w = 0; w < m.nW; ++w) {
      if (m.obs_map[w] != u) continue;
      const double wt = m.cf(h, s, w) * m.bh(h, s, w, a) / den_beh;
      for (int sp = 0; sp < m.nS; ++sp) p[sp] += wt * m.tr(h, s, a, w, sp);
    }
  } else if (den_cls > 0.0) {
    for (int w = 0; w < m.nW; ++w) {
      if (m.obs_map[w] != u) continue;
      const double wt = m.cf(h, s, w) / den_cls;
      for (int sp = 0; sp < m.nS; ++sp) p[sp] += wt * m.tr(h, s, a, w, sp);
    }
  } else {
    for (int sp = 0; sp < m.nS; ++sp) p[sp] = 1.0 / m.nS;
  }
  return p;
}

/// E[r | s, a, u], same Bayes weighting and fallbacks as the kernel above.
inline double u_conditional_reward(const ConfoundedMDP& m, int h, int s, int a, int u) {
  m.check_hsa(h, s, a);
  m.check_u(u);
  double num = 0.0, den_beh = 0.0, den_cls = 0.0, num_cls = 0.0;
  for (int w = 0; w < m.nW; ++w) {
    if (m.obs_map[w] != u) continue;
    const double base = m.cf(h, s, w);
    const double wb = base * m.bh(h, s, w, a);
    num += wb * m.rw(h, s, a, w);
    den_beh += wb;
    num_cls += base * m.rw(h, s, a, w);
    den_cls += base;
  }
  if (den_beh > 0.0) return num / den_beh;
  if (den_cls > 0.0) return num_cls / den_cls;
  return 0.0;
}

/// Backdoor-adjusted kernel through the observed summary:
/// sum_u P(u|s) P(s'|s,a,u). Coincides with the direct confounder average
/// whenever u blocks the confounding path (see tests for a counterexample
/// when it does not).
inline Vec backdoor_adjusted_next_dist(const ConfoundedMDP& m, int h, int s, int a) {
  const Vec pu = obs_marginal(m, h, s);
  Vec p(m.nS, 0.0);
  for (int u = 0; u < m.nU; ++u) {
    if (pu[u] == 0.0) continue;
    const Vec c = u_conditional_next_dist(m, h, s, a, u);
    for (int sp = 0; sp < m.nS; ++sp) p[sp] += pu[u] * c[sp];
  }
  return p;
}

inline double backdoor_adjusted_reward(const ConfoundedMDP& m, int h, int s, int a) {
  const Vec pu = obs_marginal(m, h, s);
  double r = 0.0;
  for (int u = 0; u < m.nU; ++u)
    if (pu[u] > 0.0) r += pu[u] * u_conditional_reward(m, h, s, a, u);
  return r;
}

// ---------------------------------------------------------------------------
// Frontdoor oracles

/// P(s' | s, do(m)): average the mediator kernel over the confounder prior.
inline Vec mediator_do_next_dist(const ConfoundedMDP& m, int h, int s, int mm) {
  m.check_hsa(h, s, 0);
  m.check_m(mm);
  Vec p(m.nS, 0.0);
  for (int w = 0; w < m.nW; ++w) {
    const double wt = m.cf(h, s, w);
    for (int sp = 0; sp < m.nS; ++sp) p[sp] += wt * m.ft(h, s, mm, w, sp);
  }
  return p;
}

/// Observational P(s' | s, a, m): Bayes over w given the logged action.
/// The mediator draw is w-independent given (s, a), so conditioning on m
/// does not move the posterior over w.
inline Vec am_conditional_next_dist(const ConfoundedMDP& m, int h, int s, int a, int mm) {
  m.check_hsa(h, s, a);
  m.check_m(mm);
  double den = 0.0;
  for (int w = 0; w < m.nW; ++w) den += m.cf(h, s, w) * m.bh(h, s, w, a);
  if (den <= 0.0)
    throw std::domain_error("am_conditional_next_dist: behavior support is zero at (s,a)");
  Vec p(m.nS, 0.0);
  for (int w = 0; w < m.nW; ++w) {
    const double wt = m.cf(h, s, w) * m.bh(h, s, w, a) / den;
    for (int sp = 0; sp < m.nS; ++sp) p[sp] += wt * m.ft(h, s, mm, w, sp);
  }
  return p;
}

/// Marginal behavior nu~(a | s) = sum_w P(w|s) nu(a|s,w).
inline Vec behavior_marginal(const ConfoundedMDP& m, int h, int s) {
  m.check_hsa(h, s, 0);
  Vec p(m.nA, 0.0);
  for (int w = 0; w < m.nW; ++w)
    for (int a = 0; a < m.nA; ++a) p[a] += m.cf(h, s, w) * m.bh(h, s, w, a);
  return p;
}

enum class FrontdoorRoute {
  direct,    // sum_m P(m|s,a) sum_w P(w|s) P(s'|s,m,w)
  mediator,  // sum_m P(m|s,a) E_{a'~nu~}[ P(s'|s,a',m) ]
};

/// Interventional kernel for frontdoor instances, by either identification
/// route. The two must agree exactly; tests enforce 1e-12.
inline Vec frontdoor_next_dist(const ConfoundedMDP& m, int h, int s, int a,
                               FrontdoorRoute route = FrontdoorRoute::direct) {
  m.check_hsa(h, s, a);
  if (m.backdoor()) throw std::domain_error("frontdoor_next_dist: instance is backdoor mode");
  Vec p(m.nS, 0.0);
  if (route == FrontdoorRoute::direct) {
    for (int mm = 0; mm < m.nM; ++mm) {
      const double pm = m.it(h, s, a, mm);
      if (pm == 0.0) continue;
      const Vec d = mediator_do_next_dist(m, h, s, mm);
      for (int sp = 0; sp < m.nS; ++sp) p[sp] += pm * d[sp];
    }
  } else {
    const Vec nu = behavior_marginal(m, h, s);
    for (int mm = 0; mm < m.nM; ++mm) {
      const double pm = m.it(h, s, a, mm);
      if (pm == 0.0) continue;
      for (int ap = 0; ap < m.nA; ++ap) {
        if (nu[ap] == 0.0) continue;
        const Vec c = am_conditional_next_dist(m, h, s, ap, mm);
        for (int sp = 0; sp < m.nS; ++sp) p[sp] += pm * nu[ap] * c[sp];
      }
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Mode-dispatched causal and observational estimands

/// Interventional next-state law P(s' | s, do(a)).
inline Vec causal_next_dist(const ConfoundedMDP& m, int h, int s, int a) {
  m.check_hsa(h, s, a);
  if (m.backdoor()) {
    Vec p(m.nS, 0.0);
    for (int w = 0; w < m.nW; ++w) {
      const double wt = m.cf(h, s, w);
      for (int sp = 0; sp < m.nS; ++sp) p[sp] += wt * m.tr(h, s, a, w, sp);
    }
    return p;
  }
  return frontdoor_next_dist(m, h, s, a, FrontdoorRoute::direct);
}

/// Interventional mean reward R(s, a) = E[r | s, do(a)].
inline double causal_reward(const ConfoundedMDP& m, int h, int s, int a) {
  m.check_hsa(h, s, a);
  if (!m.backdoor()) return m.fr(h, s, a);
  double r = 0.0;
  for (int w = 0; w < m.nW; ++w) r += m.cf(h, s, w) * m.rw(h, s, a, w);
  return r;
}

/**
 * Observational (confounded) next-state law P(s' | s, a) under the logging
 * policy. Throws std::domain_error when the behavior policy never plays a at
 * (h, s): the conditional estimand does not exist there.
 */
inline Vec conditional_next_dist(const ConfoundedMDP& m, int h, int s, int a) {
  m.check_hsa(h, s, a);
  double den = 0.0;
  for (int w = 0; w < m.nW; ++w) den += m.cf(h, s, w) * m.bh(h, s, w, a);
  if (den <= 0.0)
    throw std::domain_error("conditional_next_dist: behavior support is zero at (s,a)");
  Vec p(m.nS, 0.0);
  for (int w = 0; w < m.nW; ++w) {
    const double wt = m.cf(h, s, w) * m.bh(h, s, w, a) / den;
    if (wt == 0.0) continue;
    if (m.backdoor()) {
      for (int sp = 0; sp < m.nS; ++sp) p[sp] += wt * m.tr(h, s, a, w, sp);
    } else {
      for (int mm = 0; mm < m.nM; ++mm) {
        const double pm = m.it(h, s, a, mm);
        if (pm == 0.0) continue;
        for (int sp = 0; sp < m.nS; ++sp) p[sp] += wt * pm * m.ft(h, s, mm, w, sp);
      }
    }
  }
  return p;
}

/// Observational mean reward E[r | s, a]; same zero-support contract.
inline double conditional_reward(const ConfoundedMDP& m, int h, int s, int a) {
  m.check_hsa(h, s, a);
  double den = 0.0, num = 0.0;
  for (int w = 0; w < m.nW; ++w) {
    const double wb = m.cf(h, s, w) * m.bh(h, s, w, a);
    den += wb;
    if (m.backdoor()) num += wb * m.rw(h, s, a, w);
  }
  if (den <= 0.0)
    throw std::domain_error("conditional_reward: behavior support is zero at (s,a)");
  if (!m.backdoor()) return m.fr(h, s, a);  // reward is a deterministic function of (s,a)
  return num / den;
}

// ---------------------------------------------------------------------------
// Planning oracles

struct OptimalValues {
  Mat V;                    // (H+1) x nS, V(H, .) = 0
  std::vector<Mat> Q;       // per h: nS x nA
  std::vector<Mat> Vhalf;   // frontdoor only, per h: nS x nM, post-mediator value
  Policy pol;               // greedy, ties to the lowest action index
};

/**
 * Exact backward induction over the interventional model. Greedy ties break
 * toward the lowest action index; this same rule is used by the learners so
 * oracle and learner policies are comparable.
 */
inline OptimalValues optimal_values(const ConfoundedMDP& m) {
  OptimalValues out;
  out.V = Mat(m.H + 1, m.nS, 0.0);
  out.Q.assign(m.H, Mat(m.nS, m.nA, 0.0));
  if (!m.backdoor()) out.Vhalf.assign(m.H, Mat(m.nS, m.nM, 0.0));
  out.pol = Policy{m.H, m.nS, std::vector<int>(static_cast<size_t>(m.H) * m.nS, 0)};
  for (int h = m.H - 1; h >= 0; --h) {
    for (int s = 0; s < m.nS; ++s) {
      if (!m.backdoor()) {
        for (int mm = 0; mm < m.nM; ++mm) {
          const Vec d = mediator_do_next_dist(m, h, s, mm);
          double v = 0.0;
          for (int sp = 0; sp < m.nS; ++sp) v += d[sp] * out.V(h + 1, sp);
          out.Vhalf[h](s, mm) = v;
        }
      }
      int best = 0;
      double best_q = -1.0;
      for (int a = 0; a < m.nA; ++a) {
        double q = causal_reward(m, h, s, a);
        if (m.backdoor()) {
          const Vec d = causal_next_dist(m, h, s, a);
          for (int sp = 0; sp < m.nS; ++sp) q += d[sp] * out.V(h + 1, sp);
        } else {
          for (int mm = 0; mm < m.nM; ++mm) q += m.it(h, s, a, mm) * out.Vhalf[h](s, mm);
        }
        out.Q[h](s, a) = q;
        if (q > best_q + 1e-15) {
          best_q = q;
          best = a;
        }
      }
      out.pol.act[static_cast<size_t>(h) * m.nS + s] = best;
      out.V(h, s) = best_q;
    }
  }
  return out;
}

/// Exact evaluation of a stochastic policy under the interventional model.
/// Returns the (H+1) x nS value table; V(H, .) = 0.
inline Mat evaluate_policy(const ConfoundedMDP& m, const StochPolicy& pi) {
  if (pi.H != m.H || pi.nS != m.nS || pi.nA != m.nA)
    throw ValidationError("evaluate_policy: policy shape does not match instance");
  Mat V(m.H + 1, m.nS, 0.0);
  for (int h = m.H - 1; h >= 0; --h)
    for (int s = 0; s < m.nS; ++s) {
      double v = 0.0;
      for (int a = 0; a < m.nA; ++a) {
        const double w = pi.at(h, s, a);
        if (w == 0.0) continue;
        double q = causal_reward(m, h, s, a);
        const Vec d = causal_next_dist(m, h, s, a);
        for (int sp = 0; sp < m.nS; ++sp) q += d[sp] * V(h + 1, sp);
        v += w * q;
      }
      V(h, s) = v;
    }
  return V;
}

inline Mat evaluate_policy(const ConfoundedMDP& m, const Policy& pol) {
  return evaluate_policy(m, StochPolicy::from(pol, m.nA));
}

/// Value of a policy at the instance's initial distribution.
inline double value_at_init(const ConfoundedMDP& m, const Mat& V) {
  double v = 0.0;
  for (int s = 0; s < m.nS; ++s) v += m.init[s] * V(0, s);
  return v;
}

// ---------------------------------------------------------------------------
// Samplers. Draw order is pinned and documented so that seeds reproduce:
// offline episode: s1, then per step (w, a, [m], s'); online step: (w, [m], s').

inline int sample_initial_state(const ConfoundedMDP& m, Xoshiro256ss& rng) {
  return rng.categorical(m.init);
}

/// One logged episode under the behavior policy. Backdoor records carry
/// u = obs_map[w]; frontdoor records carry the mediator. Realized rewards are
/// the table values, deterministic given (s, a, w).
inline Trajectory sample_offline_episode(const ConfoundedMDP& m, Xoshiro256ss& rng) {
  Trajectory t;
  t.steps.resize(m.H);
  int s = sample_initial_state(m, rng);
  for (int h = 0; h < m.H; ++h) {
    Step& st = t.steps[h];
    st.s = s;
    const int w = rng.categorical(&m.conf[m.icf(h, s, 0)], m.nW);
    st.a = rng.categorical(&m.behavior[m.ibh(h, s, w, 0)], m.nA);
    if (m.backdoor()) {
      st.o = m.obs_map[w];
      st.r = m.rw(h, s, st.a, w);
      st.sp = rng.categorical(&m.trans[m.itr(h, s, st.a, w, 0)], m.nS);
    } else {
      st.o = rng.categorical(&m.itrans[m.iit(h, s, st.a, 0)], m.nM);
      st.r = m.fr(h, s, st.a);
      st.sp = rng.categorical(&m.ftrans[m.ift(h, s, st.o, w, 0)], m.nS);
    }
    s = st.sp;
  }
  return t;
}

struct OnlineStep {
  double r = 0.0;
  int sp = 0;
  int m = -1;  // realized mediator, frontdoor mode only
};

/// One interventional step do(a): the confounder is drawn but never revealed.
inline OnlineStep sample_online_step(const ConfoundedMDP& m, int h, int s, int a,
                                     Xoshiro256ss& rng) {
  m.check_hsa(h, s, a);
  OnlineStep out;
  const int w = rng.categorical(&m.conf[m.icf(h, s, 0)], m.nW);
  if (m.backdoor()) {
    out.r = m.rw(h, s, a, w);
    out.sp = rng.categorical(&m.trans[m.itr(h, s, a, w, 0)], m.nS);
  } else {
    out.m = rng.categorical(&m.itrans[m.iit(h, s, a, 0)], m.nM);
    out.r = m.fr(h, s, a);
    out.sp = rng.categorical(&m.ftrans[m.ift(h, s, out.m, w, 0)], m.nS);
  }
  return out;
}

}  // namespace cmdp

#endif  // CMDP_MDP_HPP
