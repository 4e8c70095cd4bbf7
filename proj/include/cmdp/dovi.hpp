/**
 * @file dovi.hpp
 * @brief Deconfounded optimistic least-squares value iteration, backdoor mode.
 *
 * Per episode k the learner refits, backward over steps, the ridge solution
 *   omega_h = Lambda_h^{-1} ( sum_online psi (r + V_{h+1}(s')) +
 *                             sum_offline phi (r + V_{h+1}(s')) ),
 * sets Q_h = clamp(psi^T omega_h + Gamma_h, 0, steps_to_go) with the bonus
 * Gamma_h = beta * sqrt(logdet(Lambda_h + psi psi^T) - logdet Lambda_h),
 * acts greedily (ties to the lowest action index), then appends the episode's
 * psi features to the design matrices. Offline data enters the design before
 * episode 1 with phi(s,a,u) features (the deconfounding step); the
 * naive_confounded baseline instead ingests psi(s,a) with the raw confounded
 * samples, and online_only ingests nothing.
 *
 * The clamp's lower edge 0 is not in the verbatim update rule; it only ever
 * raises Q toward the truth, preserves both model-prediction-error bounds
 * whenever the unclamped ones hold, and keeps 0 <= Q <= steps_to_go an exact
 * invariant.
 */
#ifndef CMDP_DOVI_HPP
#define CMDP_DOVI_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cmdp/features.hpp"
#include "cmdp/gallery.hpp"
#include "cmdp/mdp.hpp"
#include "cmdp/ridge.hpp"

namespace cmdp {

/// Sign-check counters for the model prediction error
/// iota_h(s,a) = -Q_h(s,a) + R(s,a) + (P V_{h+1})(s,a), evaluated with exact
/// oracles at every (k,h,s,a). Theory puts iota in [-2 Gamma, 0]; rates are
/// violations per side. The half-step counters are used by the two-stage
/// learner only.
struct OptimismAudit {
  static constexpr double tol = 1e-9;
  long long checks = 0, viol_upper = 0, viol_lower = 0;
  long long checks_half = 0, viol_half_upper = 0, viol_half_lower = 0;

  double upper_rate() const { return checks ? double(viol_upper) / checks : 0.0; }
  double lower_rate() const { return checks ? double(viol_lower) / checks : 0.0; }
  double half_upper_rate() const {
    return checks_half ? double(viol_half_upper) / checks_half : 0.0;
  }
  double half_lower_rate() const {
    return checks_half ? double(viol_half_lower) / checks_half : 0.0;
  }
};

/// One episode's fitted quantities.
struct ValueIterate {
  std::vector<Vec> omega;      // per h
  std::vector<Mat> Q, Gamma;   // per h: nS x nA
  Mat V;                       // (H+1) x nS, V(H,.) = 0
  Policy pol;
};

struct EpisodeStat {
  double regret = 0.0;
  double cum_regret = 0.0;
};

/// Full run record: config echo, per-episode regret, information-gain
/// diagnostics, audit counters, and the online feature streams needed by the
/// fixed-stream replay protocol. Wall time never enters CSV output.
struct RunResult {
  std::string instance;
  Mode mode = Mode::dovi;
  long long n = 0;
  int K = 0, H = 0;
  std::uint64_t seed = 0;
  double lambda = 1.0, beta_scale = 0.0, zeta = 0.1;
  double beta1 = 0.0, beta2 = std::numeric_limits<double>::quiet_NaN();
  std::string features = "oracle";
  std::vector<EpisodeStat> episodes;
  double delta1 = 0.0;
  double delta2 = std::numeric_limits<double>::quiet_NaN();
  OptimismAudit audit;
  double wall_ms = 0.0;
  std::vector<std::vector<Vec>> stream1, stream2;  // online features per h

  double final_cum_regret() const {
    return episodes.empty() ? 0.0 : episodes.back().cum_regret;
  }
  double mean_last_regret(int tail) const {
    if (episodes.empty()) return 0.0;
    const int t = std::min<int>(tail, static_cast<int>(episodes.size()));
    double s = 0.0;
    for (size_t i = episodes.size() - t; i < episodes.size(); ++i) s += episodes[i].regret;
    return s / t;
  }
};

namespace dovi_detail {

inline double clamp_q(double q, double cap) { return std::max(0.0, std::min(q, cap)); }

/// Greedy action with ties to the lowest index (strict improvement required).
inline int argmax_low(const Mat& Q, int s) {
  int best = 0;
  double bq = Q(s, 0);
  for (int a = 1; a < Q.cols; ++a)
    if (Q(s, a) > bq) {
      bq = Q(s, a);
      best = a;
    }
  return best;
}

inline double resolve_beta_scale(const ConfoundedMDP& m, const AlgoConfig& cfg) {
  return cfg.beta_scale >= 0.0 ? cfg.beta_scale : gallery_default_beta_scale(m.name);
}

/// Exact per-(h,s,a) reward and kernel tables for the audit.
struct AuditOracles {
  std::vector<Mat> R;                  // per h: nS x nA
  std::vector<std::vector<Vec>> P;     // per h: (s*nA+a) -> next-state law
  std::vector<std::vector<Vec>> Pmed;  // frontdoor: per h: (s*nM+m) -> law
};

inline AuditOracles build_audit_oracles(const ConfoundedMDP& m) {
  AuditOracles o;
  o.R.assign(m.H, Mat(m.nS, m.nA, 0.0));
  o.P.assign(m.H, {});
  if (!m.backdoor()) o.Pmed.assign(m.H, {});
  for (int h = 0; h < m.H; ++h) {
    o.P[h].resize(static_cast<size_t>(m.nS) * m.nA);
    for (int s = 0; s < m.nS; ++s)
      for (int a = 0; a < m.nA; ++a) {
        o.R[h](s, a) = causal_reward(m, h, s, a);
        o.P[h][static_cast<size_t>(s) * m.nA + a] = causal_next_dist(m, h, s, a);
      }
    if (!m.backdoor()) {
      o.Pmed[h].resize(static_cast<size_t>(m.nS) * m.nM);
      for (int s = 0; s < m.nS; ++s)
        for (int mm = 0; mm < m.nM; ++mm)
          o.Pmed[h][static_cast<size_t>(s) * m.nM + mm] = mediator_do_next_dist(m, h, s, mm);
    }
  }
  return o;
}

inline int pick_initial_state(const ConfoundedMDP& m, const AlgoConfig& cfg, int k,
                              Xoshiro256ss& rng) {
  if (!cfg.init_schedule.empty()) {
    const int s1 = cfg.init_schedule[k % cfg.init_schedule.size()];
    if (s1 < 0 || s1 >= m.nS) throw ValidationError("init schedule entry out of range");
    return s1;
  }
  return sample_initial_state(m, rng);
}

}  // namespace dovi_detail

/// One backward fit over all steps given the current design matrices.
inline ValueIterate dovi_fit_episode(const ConfoundedMDP& m, const FeatureMap& f,
                                     std::vector<RidgeState>& states, double beta) {
  ValueIterate vi;
  vi.omega.assign(m.H, Vec());
  vi.Q.assign(m.H, Mat(m.nS, m.nA, 0.0));
  vi.Gamma.assign(m.H, Mat(m.nS, m.nA, 0.0));
  vi.V = Mat(m.H + 1, m.nS, 0.0);
  vi.pol = Policy{m.H, m.nS, std::vector<int>(static_cast<size_t>(m.H) * m.nS, 0)};
  for (int h = m.H - 1; h >= 0; --h) {
    const double cap = static_cast<double>(m.H - 1 - h);
    vi.omega[h] =
        states[h].solve([&](const RidgeSample& smp) { return smp.r + vi.V(h + 1, smp.sp); });
    for (int s = 0; s < m.nS; ++s) {
      for (int a = 0; a < m.nA; ++a) {
        const Vec& psi = f.psi(h, s, a);
        const double gamma = states[h].bonus(psi, beta);
        vi.Gamma[h](s, a) = gamma;
        vi.Q[h](s, a) = dovi_detail::clamp_q(dot(psi, vi.omega[h]) + gamma, cap);
      }
      const int a = dovi_detail::argmax_low(vi.Q[h], s);
      vi.pol.act[static_cast<size_t>(h) * m.nS + s] = a;
      vi.V(h, s) = vi.Q[h](s, a);
    }
  }
  return vi;
}

/// Greedy rollout for one episode from s1; appends psi features and raw
/// payloads to the online pools and logs the feature stream for replay.
inline void dovi_rollout(const ConfoundedMDP& m, const FeatureMap& f, const ValueIterate& vi,
                         int s1, std::vector<RidgeState>& states, Xoshiro256ss& rng,
                         std::vector<std::vector<Vec>>& stream) {
  int s = s1;
  for (int h = 0; h < m.H; ++h) {
    const int a = vi.pol.at(h, s);
    const OnlineStep st = sample_online_step(m, h, s, a, rng);
    RidgeSample smp;
    smp.x = f.psi(h, s, a);
    smp.r = st.r;
    smp.sp = st.sp;
    smp.s = s;
    smp.o = -1;
    stream[h].push_back(smp.x);
    states[h].add_feature(std::move(smp), /*offline=*/false);
    s = st.sp;
  }
}

/**
 * Full run of the backdoor learner (modes dovi, online_only,
 * naive_confounded). online_only requires an empty offline dataset; the
 * other modes ingest `offline` before episode 1. Regret is exact:
 * V*(s1) - V^{pi_k}(s1) from the planning oracles, episode by episode.
 */
inline RunResult run_dovi(const ConfoundedMDP& m, const AlgoConfig& cfg,
                          const std::vector<Trajectory>& offline) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!m.backdoor())
    throw ValidationError("run_dovi: mode '" + std::string(to_string(cfg.mode)) +
                          "' needs a backdoor instance");
  if (cfg.mode == Mode::dovi_plus)
    throw ValidationError("run_dovi: dovi_plus needs run_dovi_plus");
  if (cfg.mode == Mode::online_only && !offline.empty())
    throw ValidationError("run_dovi: online_only forbids an offline dataset");
  if (cfg.K <= 0) throw ValidationError("run_dovi: K must be positive");
  validate_or_throw(m);

  const FeatureMap f = build_backdoor_features(m);
  std::vector<RidgeState> states(m.H);
  for (auto& st : states) st.init(f.d, cfg.lambda);

  // Offline ingestion. dovi uses the (s,a,u)-granular one-hot; the naive
  // baseline pretends the samples were interventional and uses psi(s,a).
  const bool naive = cfg.mode == Mode::naive_confounded;
  for (const auto& traj : offline) {
    if (static_cast<int>(traj.steps.size()) != m.H)
      throw ValidationError("run_dovi: offline episode length differs from H");
    for (int h = 0; h < m.H; ++h) {
      const Step& st = traj.steps[h];
      RidgeSample smp;
      smp.x = naive ? f.psi(h, st.s, st.a) : f.phi(st.s, st.a, st.o);
      smp.r = st.r;
      smp.sp = st.sp;
      smp.s = st.s;
      smp.o = st.o;
      states[h].add_feature(std::move(smp), /*offline=*/true);
    }
  }
  for (auto& st : states) st.mark_online_start();

  RunResult out;
  out.instance = m.name;
  out.mode = cfg.mode;
  out.n = static_cast<long long>(offline.size());
  out.K = cfg.K;
  out.H = m.H;
  out.seed = cfg.seed;
  out.lambda = cfg.lambda;
  out.zeta = cfg.zeta;
  out.beta_scale = dovi_detail::resolve_beta_scale(m, cfg);
  out.beta1 = beta_value(out.beta_scale, f.d, m.H, cfg.K, out.n, cfg.zeta);
  out.stream1.assign(m.H, {});

  const OptimalValues ov = optimal_values(m);
  const dovi_detail::AuditOracles oracle = dovi_detail::build_audit_oracles(m);
  Xoshiro256ss rng(mix_seed(hash_str(m.name.c_str()), cfg.seed));

  double cum = 0.0;
  out.episodes.reserve(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const ValueIterate vi = dovi_fit_episode(m, f, states, out.beta1);

    for (int h = 0; h < m.H; ++h)
      for (int s = 0; s < m.nS; ++s)
        for (int a = 0; a < m.nA; ++a) {
          double iota = -vi.Q[h](s, a) + oracle.R[h](s, a);
          const Vec& p = oracle.P[h][static_cast<size_t>(s) * m.nA + a];
          for (int sp = 0; sp < m.nS; ++sp) iota += p[sp] * vi.V(h + 1, sp);
          ++out.audit.checks;
          if (iota > OptimismAudit::tol) ++out.audit.viol_upper;
          if (iota < -2.0 * vi.Gamma[h](s, a) - OptimismAudit::tol) ++out.audit.viol_lower;
        }

    const int s1 = dovi_detail::pick_initial_state(m, cfg, k, rng);
    const Mat vpi = evaluate_policy(m, vi.pol);
    const double regret = ov.V(0, s1) - vpi(0, s1);
    cum += regret;
    out.episodes.push_back({regret, cum});

    dovi_rollout(m, f, vi, s1, states, rng, out.stream1);
  }

  double dsum = 0.0;
  for (auto& st : states) dsum += std::sqrt(std::max(0.0, st.logdet() - st.logdet_start()));
  out.delta1 = dsum / std::sqrt(static_cast<double>(f.d) * m.H * m.H);

  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

/// Baseline entry point: online_only (no offline pool) and naive_confounded
/// (unadjusted pooling). Kept as a named wrapper so call sites read as what
/// they compare against.
inline RunResult run_baseline(const ConfoundedMDP& m, const AlgoConfig& cfg,
                              const std::vector<Trajectory>& offline) {
  if (cfg.mode != Mode::online_only && cfg.mode != Mode::naive_confounded)
    throw ValidationError("run_baseline: mode must be online_only or naive_confounded");
  return run_dovi(m, cfg, offline);
}

}  // namespace cmdp

#endif  // CMDP_DOVI_HPP
