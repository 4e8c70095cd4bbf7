/**
 * @file features.hpp
 * @brief Adjusted linear embeddings of tabular confounded MDPs.
 *
 * Canonical one-hot construction. Backdoor mode embeds (s, a, u) tuples:
 *   phi(s,a,u) = e_{(s,a,u)},           d = nS * nA * nU,
 *   psi(s,a)   = sum_u P(u|s) phi(s,a,u),
 *   mu_h(s')[(s,a,u)] = P(s'|s,a,u),    theta_h[(s,a,u)] = E[r|s,a,u],
 * so <phi, mu(s')> reproduces the observational conditional and <psi, mu(s')>
 * the adjusted (interventional) kernel. Frontdoor mode embeds twice:
 *   stage 1 over (s, m, w): rho one-hot, psi1(s,m) = E_w rho(s,m,w),
 *     phi1(s,a,m)[(s,m,w)] = P(w|s) nu(a|s,w) / nu~(a|s)  (posterior of w),
 *     mu1_h(s')[(s,m,w)] = P(s'|s,m,w);
 *   stage 2 over (s, a): gamma one-hot, mubar_h(m)[(s,a)] = P(m|s,a),
 *     theta2_h[(s,a)] = r_h(s,a).
 * Feature tables are built from the instance's ground-truth logging and
 * confounder distributions (oracle features); runs record that provenance.
 */
#ifndef CMDP_FEATURES_HPP
#define CMDP_FEATURES_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "cmdp/linalg.hpp"
#include "cmdp/mdp.hpp"

namespace cmdp {

struct FeatureMap {
  int H = 0, nS = 0, nA = 0, nU = 0, d = 0;
  std::vector<Vec> psi_tab;   // [(h*nS+s)*nA+a] -> dense psi, dim d
  std::vector<Mat> mu;        // per h: d x nS
  std::vector<Vec> theta;     // per h: d

  size_t phi_index(int s, int a, int u) const {
    return (static_cast<size_t>(s) * nA + a) * nU + u;
  }
  Vec phi(int s, int a, int u) const {
    Vec x(d, 0.0);
    x[phi_index(s, a, u)] = 1.0;
    return x;
  }
  const Vec& psi(int h, int s, int a) const {
    return psi_tab[(static_cast<size_t>(h) * nS + s) * nA + a];
  }
};

inline FeatureMap build_backdoor_features(const ConfoundedMDP& m) {
  if (!m.backdoor())
    throw ValidationError("build_backdoor_features: instance is frontdoor mode");
  FeatureMap f;
  f.H = m.H; f.nS = m.nS; f.nA = m.nA; f.nU = m.nU;
  f.d = m.nS * m.nA * m.nU;
  f.psi_tab.assign(static_cast<size_t>(m.H) * m.nS * m.nA, Vec());
  f.mu.assign(m.H, Mat(f.d, m.nS, 0.0));
  f.theta.assign(m.H, Vec(f.d, 0.0));
  for (int h = 0; h < m.H; ++h)
    for (int s = 0; s < m.nS; ++s) {
      const Vec pu = obs_marginal(m, h, s);
      for (int a = 0; a < m.nA; ++a) {
        Vec psi(f.d, 0.0);
        for (int u = 0; u < m.nU; ++u) {
          const size_t i = f.phi_index(s, a, u);
          psi[i] = pu[u];
          const Vec cond = u_conditional_next_dist(m, h, s, a, u);
          for (int sp = 0; sp < m.nS; ++sp) f.mu[h](static_cast<int>(i), sp) = cond[sp];
          f.theta[h][i] = u_conditional_reward(m, h, s, a, u);
        }
        f.psi_tab[(static_cast<size_t>(h) * m.nS + s) * m.nA + a] = std::move(psi);
      }
    }
  return f;
}

struct FrontdoorFeatureMap {
  int H = 0, nS = 0, nA = 0, nM = 0, nW = 0, d1 = 0, d2 = 0;
  std::vector<Vec> psi1_tab;  // [(h*nS+s)*nM+m] -> dim d1
  std::vector<Vec> phi1_tab;  // [((h*nS+s)*nA+a)*nM+m] -> dim d1
  std::vector<Mat> mu1;       // per h: d1 x nS
  std::vector<Mat> mubar;     // per h: d2 x nM
  std::vector<Vec> theta2;    // per h: d2

  size_t rho_index(int s, int mm, int w) const {
    return (static_cast<size_t>(s) * nM + mm) * nW + w;
  }
  size_t gamma_index(int s, int a) const { return static_cast<size_t>(s) * nA + a; }
  Vec gamma(int s, int a) const {
    Vec x(d2, 0.0);
    x[gamma_index(s, a)] = 1.0;
    return x;
  }
  const Vec& psi1(int h, int s, int mm) const {
    return psi1_tab[(static_cast<size_t>(h) * nS + s) * nM + mm];
  }
  const Vec& phi1(int h, int s, int a, int mm) const {
    return phi1_tab[((static_cast<size_t>(h) * nS + s) * nA + a) * nM + mm];
  }
};

inline FrontdoorFeatureMap build_frontdoor_features(const ConfoundedMDP& m) {
  if (m.backdoor())
    throw ValidationError("build_frontdoor_features: instance is backdoor mode");
  FrontdoorFeatureMap f;
  f.H = m.H; f.nS = m.nS; f.nA = m.nA; f.nM = m.nM; f.nW = m.nW;
  f.d1 = m.nS * m.nM * m.nW;
  f.d2 = m.nS * m.nA;
  f.psi1_tab.assign(static_cast<size_t>(m.H) * m.nS * m.nM, Vec());
  f.phi1_tab.assign(static_cast<size_t>(m.H) * m.nS * m.nA * m.nM, Vec());
  f.mu1.assign(m.H, Mat(f.d1, m.nS, 0.0));
  f.mubar.assign(m.H, Mat(f.d2, m.nM, 0.0));
  f.theta2.assign(m.H, Vec(f.d2, 0.0));
  for (int h = 0; h < m.H; ++h)
    for (int s = 0; s < m.nS; ++s) {
      const Vec numar = behavior_marginal(m, h, s);
      for (int mm = 0; mm < m.nM; ++mm) {
        Vec psi(f.d1, 0.0);
        for (int w = 0; w < m.nW; ++w) {
          const size_t i = f.rho_index(s, mm, w);
          psi[i] = m.cf(h, s, w);
          for (int sp = 0; sp < m.nS; ++sp)
            f.mu1[h](static_cast<int>(i), sp) = m.ft(h, s, mm, w, sp);
        }
        f.psi1_tab[(static_cast<size_t>(h) * m.nS + s) * m.nM + mm] = std::move(psi);
      }
      for (int a = 0; a < m.nA; ++a) {
        // Posterior of w given the logged action; prior when the logging
        // policy never plays a here (such features never occur in data).
        Vec post(m.nW, 0.0);
        if (numar[a] > 0.0) {
          for (int w = 0; w < m.nW; ++w) post[w] = m.cf(h, s, w) * m.bh(h, s, w, a) / numar[a];
        } else {
          for (int w = 0; w < m.nW; ++w) post[w] = m.cf(h, s, w);
        }
        for (int mm = 0; mm < m.nM; ++mm) {
          Vec phi(f.d1, 0.0);
          for (int w = 0; w < m.nW; ++w) phi[f.rho_index(s, mm, w)] = post[w];
          f.phi1_tab[((static_cast<size_t>(h) * m.nS + s) * m.nA + a) * m.nM + mm] =
              std::move(phi);
        }
        const size_t g = f.gamma_index(s, a);
        for (int mm = 0; mm < m.nM; ++mm)
          f.mubar[h](static_cast<int>(g), mm) = m.it(h, s, a, mm);
        f.theta2[h][g] = m.fr(h, s, a);
      }
    }
  return f;
}

// ---------------------------------------------------------------------------
// Realizability diagnostics

/// Worst-case errors of the linear identities against the exact oracles, plus
/// the norm budget the regression analysis assumes. All quantities are exact
/// enumerations; tests pin them at 1e-12. The worst_* strings name the
/// identity and index tuple where each maximum was attained.
struct RealizabilityReport {
  double max_kernel_err = 0.0;   // <., mu> identities vs oracle kernels
  double max_reward_err = 0.0;   // theta identities vs oracle rewards
  double max_q_err = 0.0;        // linear representation of optimal values
  double max_feature_norm = 0.0; // max ||psi||_2, ||phi||_2 (contract: <= 1)
  double mu_l1_sq_sum_max = 0.0; // max_h sum_i ||mu_{i,h}||_1^2 (budget: <= d)
  double theta_norm_max = 0.0;   // max_h ||theta_h||_2 (budget: <= sqrt(d))
  std::string worst_kernel, worst_reward, worst_q;
  int d_budget = 0;
  bool norms_ok = false;
  bool ok(double tol) const {
    return max_kernel_err <= tol && max_reward_err <= tol && max_q_err <= tol && norms_ok;
  }
};

namespace feature_detail {

/// Track a running max and remember which identity/tuple attained it.
/// `identity` names its own tuple layout, e.g. "phi-kernel (h,s,a,u,sp)".
inline void track(double err, double& max_err, std::string& label, const char* identity,
                  std::initializer_list<int> tuple) {
  if (err < max_err || (err == max_err && !label.empty())) return;
  max_err = err;
  label = identity;
  label += " = (";
  bool first = true;
  for (int t : tuple) {
    if (!first) label += ",";
    label += std::to_string(t);
    first = false;
  }
  label += ")";
}
inline void norm_budget(const std::vector<Mat>& mus, const std::vector<Vec>& thetas,
                        RealizabilityReport& rep) {
  for (const auto& mu : mus) {
    double sum = 0.0;
    for (int i = 0; i < mu.rows; ++i) {
      double l1 = 0.0;
      for (int sp = 0; sp < mu.cols; ++sp) l1 += std::abs(mu(i, sp));
      sum += l1 * l1;
    }
    rep.mu_l1_sq_sum_max = std::max(rep.mu_l1_sq_sum_max, sum);
  }
  for (const auto& th : thetas) rep.theta_norm_max = std::max(rep.theta_norm_max, norm2(th));
}
}  // namespace feature_detail

inline RealizabilityReport check_realizability(const ConfoundedMDP& m, const FeatureMap& f) {
  RealizabilityReport rep;
  rep.d_budget = f.d;
  const OptimalValues ov = optimal_values(m);
  for (int h = 0; h < m.H; ++h) {
    // Induced weight for the optimal Q at step h: theta + mu V*_{h+1}.
    Vec wstar = f.theta[h];
    for (int i = 0; i < f.d; ++i)
      for (int sp = 0; sp < m.nS; ++sp) wstar[i] += f.mu[h](i, sp) * ov.V(h + 1, sp);
    for (int s = 0; s < m.nS; ++s)
      for (int a = 0; a < m.nA; ++a) {
        const Vec& psi = f.psi(h, s, a);
        rep.max_feature_norm = std::max(rep.max_feature_norm, norm2(psi));
        const Vec causal = causal_next_dist(m, h, s, a);
        for (int sp = 0; sp < m.nS; ++sp) {
          double dotv = 0.0;
          for (int i = 0; i < f.d; ++i) dotv += psi[i] * f.mu[h](i, sp);
          feature_detail::track(std::abs(dotv - causal[sp]), rep.max_kernel_err,
                                rep.worst_kernel, "psi-kernel (h,s,a,sp)", {h, s, a, sp});
        }
        feature_detail::track(std::abs(dot(psi, f.theta[h]) - causal_reward(m, h, s, a)),
                              rep.max_reward_err, rep.worst_reward, "psi-reward (h,s,a)",
                              {h, s, a});
        feature_detail::track(std::abs(dot(psi, wstar) - ov.Q[h](s, a)), rep.max_q_err,
                              rep.worst_q, "qstar (h,s,a)", {h, s, a});
        for (int u = 0; u < m.nU; ++u) {
          const Vec phi = f.phi(s, a, u);
          rep.max_feature_norm = std::max(rep.max_feature_norm, norm2(phi));
          const Vec cond = u_conditional_next_dist(m, h, s, a, u);
          for (int sp = 0; sp < m.nS; ++sp) {
            double dotv = 0.0;
            for (int i = 0; i < f.d; ++i) dotv += phi[i] * f.mu[h](i, sp);
            feature_detail::track(std::abs(dotv - cond[sp]), rep.max_kernel_err,
                                  rep.worst_kernel, "phi-kernel (h,s,a,u,sp)",
                                  {h, s, a, u, sp});
          }
          feature_detail::track(
              std::abs(dot(phi, f.theta[h]) - u_conditional_reward(m, h, s, a, u)),
              rep.max_reward_err, rep.worst_reward, "phi-reward (h,s,a,u)", {h, s, a, u});
        }
      }
  }
  feature_detail::norm_budget(f.mu, f.theta, rep);
  rep.norms_ok = rep.max_feature_norm <= 1.0 + 1e-12 &&
                 rep.mu_l1_sq_sum_max <= rep.d_budget + 1e-9 &&
                 rep.theta_norm_max <= std::sqrt(static_cast<double>(rep.d_budget)) + 1e-12;
  return rep;
}

inline RealizabilityReport check_realizability(const ConfoundedMDP& m,
                                               const FrontdoorFeatureMap& f) {
  RealizabilityReport rep;
  rep.d_budget = f.d1;
  const OptimalValues ov = optimal_values(m);
  for (int h = 0; h < m.H; ++h) {
    Vec w1star(f.d1, 0.0);
    for (int i = 0; i < f.d1; ++i)
      for (int sp = 0; sp < m.nS; ++sp) w1star[i] += f.mu1[h](i, sp) * ov.V(h + 1, sp);
    for (int s = 0; s < m.nS; ++s) {
      const Vec numar = behavior_marginal(m, h, s);
      for (int mm = 0; mm < m.nM; ++mm) {
        const Vec& psi = f.psi1(h, s, mm);
        rep.max_feature_norm = std::max(rep.max_feature_norm, norm2(psi));
        const Vec dod = mediator_do_next_dist(m, h, s, mm);
        for (int sp = 0; sp < m.nS; ++sp) {
          double dotv = 0.0;
          for (int i = 0; i < f.d1; ++i) dotv += psi[i] * f.mu1[h](i, sp);
          feature_detail::track(std::abs(dotv - dod[sp]), rep.max_kernel_err,
                                rep.worst_kernel, "psi1-kernel (h,s,m,sp)", {h, s, mm, sp});
        }
        feature_detail::track(std::abs(dot(psi, w1star) - ov.Vhalf[h](s, mm)), rep.max_q_err,
                              rep.worst_q, "vhalf (h,s,m)", {h, s, mm});
        for (int a = 0; a < m.nA; ++a) {
          if (numar[a] <= 0.0) continue;  // conditional undefined off-support
          const Vec& phi = f.phi1(h, s, a, mm);
          rep.max_feature_norm = std::max(rep.max_feature_norm, norm2(phi));
          const Vec cond = am_conditional_next_dist(m, h, s, a, mm);
          for (int sp = 0; sp < m.nS; ++sp) {
            double dotv = 0.0;
            for (int i = 0; i < f.d1; ++i) dotv += phi[i] * f.mu1[h](i, sp);
            feature_detail::track(std::abs(dotv - cond[sp]), rep.max_kernel_err,
                                  rep.worst_kernel, "phi1-kernel (h,s,a,m,sp)",
                                  {h, s, a, mm, sp});
          }
        }
      }
      for (int a = 0; a < m.nA; ++a) {
        const Vec g = f.gamma(s, a);
        // Stage-2 composition: theta2 + mubar Vhalf* represents Q*.
        double q = dot(g, f.theta2[h]);
        for (int mm = 0; mm < m.nM; ++mm) {
          double dotv = 0.0;
          for (int i = 0; i < f.d2; ++i) dotv += g[i] * f.mubar[h](i, mm);
          feature_detail::track(std::abs(dotv - m.it(h, s, a, mm)), rep.max_kernel_err,
                                rep.worst_kernel, "gamma-mediator (h,s,a,m)", {h, s, a, mm});
          q += dotv * ov.Vhalf[h](s, mm);
        }
        feature_detail::track(std::abs(dot(g, f.theta2[h]) - causal_reward(m, h, s, a)),
                              rep.max_reward_err, rep.worst_reward, "gamma-reward (h,s,a)",
                              {h, s, a});
        feature_detail::track(std::abs(q - ov.Q[h](s, a)), rep.max_q_err, rep.worst_q,
                              "qstar (h,s,a)", {h, s, a});
      }
    }
  }
  feature_detail::norm_budget(f.mu1, {}, rep);
  RealizabilityReport rep2;
  feature_detail::norm_budget(f.mubar, f.theta2, rep2);
  rep.theta_norm_max = rep2.theta_norm_max;
  const bool mu1_ok = rep.mu_l1_sq_sum_max <= f.d1 + 1e-9;
  const bool mubar_ok = rep2.mu_l1_sq_sum_max <= f.d2 + 1e-9;
  rep.norms_ok = rep.max_feature_norm <= 1.0 + 1e-12 && mu1_ok && mubar_ok &&
                 rep.theta_norm_max <= std::sqrt(static_cast<double>(f.d2)) + 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// Flat text dumps (stable index order, %.17g) for cross-language goldens.

namespace feature_detail {
inline std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
inline void dump_vec(std::ostream& os, const Vec& v) {
  for (size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << g17(v[i]);
}
}  // namespace feature_detail

inline void dump_features(std::ostream& os, const FeatureMap& f) {
  using feature_detail::dump_vec;
  os << "feature-map backdoor d=" << f.d << " H=" << f.H << " nS=" << f.nS << " nA=" << f.nA
     << " nU=" << f.nU << "\n";
  for (int h = 0; h < f.H; ++h)
    for (int s = 0; s < f.nS; ++s)
      for (int a = 0; a < f.nA; ++a) {
        os << "psi " << h << " " << s << " " << a << " : ";
        dump_vec(os, f.psi(h, s, a));
        os << "\n";
      }
  for (int h = 0; h < f.H; ++h)
    for (int i = 0; i < f.d; ++i) {
      os << "mu " << h << " " << i << " : ";
      Vec row(f.mu[h].cols);
      for (int sp = 0; sp < f.mu[h].cols; ++sp) row[sp] = f.mu[h](i, sp);
      dump_vec(os, row);
      os << "\n";
    }
  for (int h = 0; h < f.H; ++h) {
    os << "theta " << h << " : ";
    dump_vec(os, f.theta[h]);
    os << "\n";
  }
}

inline void dump_features(std::ostream& os, const FrontdoorFeatureMap& f) {
  using feature_detail::dump_vec;
  os << "feature-map frontdoor d1=" << f.d1 << " d2=" << f.d2 << " H=" << f.H << " nS=" << f.nS
     << " nA=" << f.nA << " nM=" << f.nM << " nW=" << f.nW << "\n";
  for (int h = 0; h < f.H; ++h)
    for (int s = 0; s < f.nS; ++s)
      for (int mm = 0; mm < f.nM; ++mm) {
        os << "psi1 " << h << " " << s << " " << mm << " : ";
        dump_vec(os, f.psi1(h, s, mm));
        os << "\n";
      }
  for (int h = 0; h < f.H; ++h)
    for (int s = 0; s < f.nS; ++s)
      for (int a = 0; a < f.nA; ++a)
        for (int mm = 0; mm < f.nM; ++mm) {
          os << "phi1 " << h << " " << s << " " << a << " " << mm << " : ";
          dump_vec(os, f.phi1(h, s, a, mm));
          os << "\n";
        }
  for (int h = 0; h < f.H; ++h)
    for (int i = 0; i < f.d1; ++i) {
      os << "mu1 " << h << " " << i << " : ";
      Vec row(f.mu1[h].cols);
      for (int sp = 0; sp < f.mu1[h].cols; ++sp) row[sp] = f.mu1[h](i, sp);
      dump_vec(os, row);
      os << "\n";
    }
  for (int h = 0; h < f.H; ++h)
    for (int i = 0; i < f.d2; ++i) {
      os << "mubar " << h << " " << i << " : ";
      Vec row(f.mubar[h].cols);
      for (int mm = 0; mm < f.mubar[h].cols; ++mm) row[mm] = f.mubar[h](i, mm);
      dump_vec(os, row);
      os << "\n";
    }
  for (int h = 0; h < f.H; ++h) {
    os << "theta2 " << h << " : ";
    dump_vec(os, f.theta2[h]);
    os << "\n";
  }
}

/// Lambda snapshot export, same conventions as the feature dumps.
inline void dump_lambda(std::ostream& os, const Mat& Lambda) {
  using feature_detail::dump_vec;
  os << "lambda d=" << Lambda.rows << "\n";
  for (int i = 0; i < Lambda.rows; ++i) {
    os << "row " << i << " : ";
    Vec row(Lambda.cols);
    for (int j = 0; j < Lambda.cols; ++j) row[j] = Lambda(i, j);
    dump_vec(os, row);
    os << "\n";
  }
}

}  // namespace cmdp

#endif  // CMDP_FEATURES_HPP
