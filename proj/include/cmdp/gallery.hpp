/**
 * @file gallery.hpp
 * @brief Built-in instance gallery.
 *
 * Each instance is constructed in code with exact double literals so tests
 * can pin derived quantities. Design note that matters for learning runs:
 * fitted Q-values are truncated at H-h steps-to-go, so every instance meant
 * for regret or optimism experiments (BD-2, TRAP-2-H2, FD-2, CANON) has
 * final-step rewards identically zero, which keeps the truncation above the
 * true optimal values. TRAP-2 and CH-2 are oracle/enumeration fixtures and
 * keep nonzero last-step rewards.
 *
 * default_beta_scale values were calibrated with the audit CLI: smallest c on
 * the grid {0.0125,0.025,0.05,0.1,0.2,0.4,0.8,1.6} whose optimism-violation
 * rates, averaged over seeds 1-3, stay at or below 5% per side in every cell
 * of n in {0,100} x K in {100,500}. The n=0 column matters: a scale that
 * passes with offline data can still break optimism in the pure-online
 * regime, where the learner then locks into a suboptimal arm and regret
 * grows linearly. Values are mirrored in data/goldens.txt; a unit test keeps
 * the two in sync. TRAP-2 and CH-2 carry a nominal 0.05: their nonzero
 * final-step rewards sit above the truncation cap, so the audit saturates
 * there at any scale and the ladder does not apply (see tools/calibrate.sh).
 */
#ifndef CMDP_GALLERY_HPP
#define CMDP_GALLERY_HPP

#include <cstdio>
#include <string>
#include <vector>

#include "cmdp/errors.hpp"
#include "cmdp/mdp.hpp"

namespace cmdp {

struct GalleryEntry {
  std::string name;
  std::string summary;
  double default_beta_scale;
};

namespace gallery_detail {

inline void fill_uniform_rows(Vec& v, size_t rows, int n) {
  v.assign(rows * n, 1.0 / n);
}

/// Two-armed single-state trap: the confounder sets which arm pays and the
/// logging policy matches it 90% of the time, so both arms look like 0.9
/// conditionally while paying 0.5 causally.
inline ConfoundedMDP make_trap2() {
  ConfoundedMDP m;
  m.name = "TRAP-2";
  m.mode = AdjustMode::backdoor;
  m.H = 1; m.nS = 1; m.nA = 2; m.nW = 2; m.nU = 2;
  m.obs_map = {0, 1};
  m.init = {1.0};
  m.conf = {0.5, 0.5};
  m.behavior = {0.9, 0.1,   // w=0
                0.1, 0.9};  // w=1
  m.trans = {1.0, 1.0, 1.0, 1.0};  // single state
  m.reward = {1.0, 0.0,   // a=0 pays iff w=0
              0.0, 1.0};  // a=1 pays iff w=1
  return m;
}

/// Trap with a state transition and a second step. The risky arm (a=1) pays 1
/// only when the confounder cooperates; the logging policy mostly plays it
/// exactly then, so conditionally a=1 looks like 0.9 against a true 0.5,
/// while the safe arm is a flat 0.6. Step 2 is neutral (zero reward).
inline ConfoundedMDP make_trap2_h2() {
  ConfoundedMDP m;
  m.name = "TRAP-2-H2";
  m.mode = AdjustMode::backdoor;
  m.H = 2; m.nS = 2; m.nA = 2; m.nW = 2; m.nU = 2;
  m.obs_map = {0, 1};
  m.init = {1.0, 0.0};
  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  m.conf.assign(hs * m.nW, 0.5);
  m.behavior.assign(hs * m.nW * m.nA, 0.0);
  m.trans.assign(hs * m.nA * m.nW * m.nS, 0.0);
  m.reward.assign(hs * m.nA * m.nW, 0.0);
  for (int s = 0; s < m.nS; ++s) {
    // h = 0: confounded logging, trap rewards, confounded transition.
    m.behavior[m.ibh(0, s, 0, 0)] = 0.9; m.behavior[m.ibh(0, s, 0, 1)] = 0.1;
    m.behavior[m.ibh(0, s, 1, 0)] = 0.1; m.behavior[m.ibh(0, s, 1, 1)] = 0.9;
    for (int w = 0; w < 2; ++w) {
      m.reward[m.irw(0, s, 0, w)] = 0.6;
      m.reward[m.irw(0, s, 1, w)] = (w == 1) ? 1.0 : 0.0;
      m.trans[m.itr(0, s, 0, w, 0)] = 0.5; m.trans[m.itr(0, s, 0, w, 1)] = 0.5;
      m.trans[m.itr(0, s, 1, w, w)] = 1.0;
    }
    // h = 1: uniform logging, zero reward, uniform transition.
    for (int w = 0; w < 2; ++w) {
      m.behavior[m.ibh(1, s, w, 0)] = 0.5; m.behavior[m.ibh(1, s, w, 1)] = 0.5;
      for (int a = 0; a < 2; ++a) {
        m.trans[m.itr(1, s, a, w, 0)] = 0.5; m.trans[m.itr(1, s, a, w, 1)] = 0.5;
      }
    }
  }
  return m;
}

/// Two-state backdoor workhorse. At (h<=1, s=0, a=0) the next-state law is
/// P(s'=1) = 0.2 / 0.8 under w = 0 / 1 with a uniform confounder, giving a
/// causal 0.5 while the 0.9/0.1 logging policy drags the conditional to 0.26.
inline ConfoundedMDP make_bd2() {
  ConfoundedMDP m;
  m.name = "BD-2";
  m.mode = AdjustMode::backdoor;
  m.H = 3; m.nS = 2; m.nA = 2; m.nW = 2; m.nU = 2;
  m.obs_map = {0, 1};
  m.init = {0.5, 0.5};
  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  m.conf.assign(hs * m.nW, 0.5);
  m.behavior.assign(hs * m.nW * m.nA, 0.5);
  m.trans.assign(hs * m.nA * m.nW * m.nS, 0.5);
  m.reward.assign(hs * m.nA * m.nW, 0.0);
  // P(s'=1 | s, a, w) for the two active steps.
  const double p1[2][2][2] = {{{0.2, 0.8}, {0.6, 0.6}},   // s=0: a=0 confounded, a=1 flat
                              {{0.3, 0.5}, {0.7, 0.9}}};  // s=1
  const double rw[2][2][2] = {{{0.7, 0.3}, {0.1, 0.3}},   // s=0: R=0.5 / 0.2
                              {{0.4, 0.4}, {0.8, 0.6}}};  // s=1: R=0.4 / 0.7
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < m.nS; ++s) {
      m.behavior[m.ibh(h, s, 0, 0)] = 0.9; m.behavior[m.ibh(h, s, 0, 1)] = 0.1;
      m.behavior[m.ibh(h, s, 1, 0)] = 0.1; m.behavior[m.ibh(h, s, 1, 1)] = 0.9;
      for (int a = 0; a < m.nA; ++a)
        for (int w = 0; w < m.nW; ++w) {
          m.trans[m.itr(h, s, a, w, 1)] = p1[s][a][w];
          m.trans[m.itr(h, s, a, w, 0)] = 1.0 - p1[s][a][w];
          m.reward[m.irw(h, s, a, w)] = rw[s][a][w];
        }
    }
  return m;  // h = 2 stays uniform with zero reward
}

/// Two-step chain used by planning tests; small enough that all 16
/// deterministic policies can be enumerated. Nonzero rewards at both steps.
inline ConfoundedMDP make_ch2() {
  ConfoundedMDP m;
  m.name = "CH-2";
  m.mode = AdjustMode::backdoor;
  m.H = 2; m.nS = 2; m.nA = 2; m.nW = 2; m.nU = 2;
  m.obs_map = {0, 1};
  m.init = {0.5, 0.5};
  m.conf = {0.3, 0.7, 0.6, 0.4,
            0.3, 0.7, 0.6, 0.4};
  m.behavior = {0.8, 0.2, 0.3, 0.7, 0.5, 0.5, 0.2, 0.8,
                0.8, 0.2, 0.3, 0.7, 0.5, 0.5, 0.2, 0.8};
  const double p1[2][2][2] = {{{0.1, 0.6}, {0.8, 0.3}},
                              {{0.4, 0.9}, {0.5, 0.7}}};
  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  m.trans.assign(hs * m.nA * m.nW * m.nS, 0.0);
  for (int h = 0; h < m.H; ++h)
    for (int s = 0; s < m.nS; ++s)
      for (int a = 0; a < m.nA; ++a)
        for (int w = 0; w < m.nW; ++w) {
          m.trans[m.itr(h, s, a, w, 1)] = p1[s][a][w];
          m.trans[m.itr(h, s, a, w, 0)] = 1.0 - p1[s][a][w];
        }
  m.reward = {0.2, 0.5, 0.7, 0.1, 0.45, 0.65, 0.3, 0.9,
              0.1, 0.8, 0.55, 0.35, 0.25, 0.75, 0.6, 0.2};
  return m;
}

/// Frontdoor workhorse: mediator carries the whole effect of the action,
/// the confounder skews both the logging policy and the mediator kernel's
/// effect on s'. Last step neutral.
inline ConfoundedMDP make_fd2() {
  ConfoundedMDP m;
  m.name = "FD-2";
  m.mode = AdjustMode::frontdoor;
  m.H = 3; m.nS = 2; m.nA = 2; m.nW = 2; m.nM = 2;
  m.init = {0.5, 0.5};
  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  m.conf.assign(hs * m.nW, 0.0);
  m.behavior.assign(hs * m.nW * m.nA, 0.5);
  m.itrans.assign(hs * m.nA * m.nM, 0.5);
  m.ftrans.assign(hs * m.nM * m.nW * m.nS, 0.5);
  m.freward.assign(hs * m.nA, 0.0);
  for (int h = 0; h < m.H; ++h) {
    m.conf[m.icf(h, 0, 0)] = 0.5; m.conf[m.icf(h, 0, 1)] = 0.5;
    m.conf[m.icf(h, 1, 0)] = 0.4; m.conf[m.icf(h, 1, 1)] = 0.6;
  }
  const double beh[2][2][2] = {{{0.85, 0.15}, {0.15, 0.85}},   // s=0: w=0, w=1
                               {{0.7, 0.3}, {0.25, 0.75}}};    // s=1
  const double med[2][2][2] = {{{0.8, 0.2}, {0.3, 0.7}},       // s=0: a=0, a=1
                               {{0.6, 0.4}, {0.2, 0.8}}};      // s=1
  const double fp1[2][2][2] = {{{0.1, 0.5}, {0.7, 0.9}},       // s=0: m=0/1, w=0/1
                               {{0.3, 0.6}, {0.8, 0.4}}};      // s=1
  const double rew[2][2][2] = {{{0.3, 0.6}, {0.5, 0.2}},       // h=0: (s,a)
                               {{0.4, 0.1}, {0.2, 0.55}}};     // h=1
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < m.nS; ++s) {
      for (int w = 0; w < m.nW; ++w)
        for (int a = 0; a < m.nA; ++a) m.behavior[m.ibh(h, s, w, a)] = beh[s][w][a];
      for (int a = 0; a < m.nA; ++a) {
        for (int mm = 0; mm < m.nM; ++mm) m.itrans[m.iit(h, s, a, mm)] = med[s][a][mm];
        m.freward[m.ifr(h, s, a)] = rew[h][s][a];
      }
      for (int mm = 0; mm < m.nM; ++mm)
        for (int w = 0; w < m.nW; ++w) {
          m.ftrans[m.ift(h, s, mm, w, 1)] = fp1[s][mm][w];
          m.ftrans[m.ift(h, s, mm, w, 0)] = 1.0 - fp1[s][mm][w];
        }
    }
  return m;  // h = 2 stays uniform with zero reward
}

/// Canonical-basis probe: no confounding (nW = 1), uniform logging, uniform
/// transitions, zero reward. Adjusted features are exactly the canonical
/// basis of R^d and uniform play visits each basis vector uniformly, so
/// information-gain predictions can be checked in closed form.
inline ConfoundedMDP make_canon(int d, int H) {
  if (d < 2 || d % 2 != 0)
    throw ValidationError("CANON(d,H): d must be even and at least 2");
  if (H < 1) throw ValidationError("CANON(d,H): H must be positive");
  ConfoundedMDP m;
  char buf[48];
  std::snprintf(buf, sizeof buf, "CANON(%d,%d)", d, H);
  m.name = buf;
  m.mode = AdjustMode::backdoor;
  m.H = H; m.nS = 2; m.nA = d / 2; m.nW = 1; m.nU = 1;
  m.obs_map = {0};
  m.init = {0.5, 0.5};
  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  m.conf.assign(hs * m.nW, 1.0);
  gallery_detail::fill_uniform_rows(m.behavior, hs * m.nW, m.nA);
  gallery_detail::fill_uniform_rows(m.trans, hs * m.nA * m.nW, m.nS);
  m.reward.assign(hs * m.nA * m.nW, 0.0);
  return m;
}

}  // namespace gallery_detail

/// Registry of built-in instances. CANON is a template; concrete instances
/// are named CANON(d,H) with even d.
inline const std::vector<GalleryEntry>& gallery_list() {
  static const std::vector<GalleryEntry> entries = {
      {"TRAP-2", "1-step, 1-state, 2-arm trap: causal 0.5 vs conditional 0.9", 0.05},
      {"TRAP-2-H2", "2-step trap with state transition; naive offline pooling walks into it", 0.025},
      {"BD-2", "2-state 3-step backdoor workhorse for regret and audit runs", 0.05},
      {"CH-2", "2-step chain for planning oracles; all 16 policies enumerable", 0.05},
      {"FD-2", "2-state 3-step frontdoor instance with binary mediator", 0.1},
      {"CANON(d,H)", "canonical-basis probe, even d; e.g. CANON(4,2)", 0.0125},
  };
  return entries;
}

/// Default bonus scale for an instance (calibration record; see file header).
inline double gallery_default_beta_scale(const std::string& name) {
  for (const auto& e : gallery_list())
    if (e.name == name) return e.default_beta_scale;
  if (name.rfind("CANON(", 0) == 0) return gallery_default_beta_scale("CANON(d,H)");
  return 0.05;
}

/// True when gallery_get(name) would succeed.
inline bool gallery_has(const std::string& name) {
  for (const auto& e : gallery_list())
    if (e.name == name && name.find('(') == std::string::npos) return true;
  if (name.rfind("CANON(", 0) == 0 && !name.empty() && name.back() == ')') {
    int d = 0, H = 0;
    return std::sscanf(name.c_str(), "CANON(%d,%d)", &d, &H) == 2;
  }
  return false;
}

/// Build a gallery instance by name; throws ValidationError for unknown names.
inline ConfoundedMDP gallery_get(const std::string& name) {
  using namespace gallery_detail;
  if (name == "TRAP-2") return make_trap2();
  if (name == "TRAP-2-H2") return make_trap2_h2();
  if (name == "BD-2") return make_bd2();
  if (name == "CH-2") return make_ch2();
  if (name == "FD-2") return make_fd2();
  if (name.rfind("CANON(", 0) == 0 && name.back() == ')') {
    int d = 0, H = 0;
    if (std::sscanf(name.c_str(), "CANON(%d,%d)", &d, &H) == 2) return make_canon(d, H);
    throw ValidationError("could not parse CANON spec: " + name);
  }
  throw ValidationError("unknown gallery instance: " + name);
}

}  // namespace cmdp

#endif  // CMDP_GALLERY_HPP
