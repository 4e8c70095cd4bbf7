/**
 * @file dovi_plus.hpp
 * @brief Two-stage deconfounded optimistic value iteration, frontdoor mode.
 *
 * Stage 1 regresses next-step values (no reward term) on mediator features:
 * online samples contribute psi1(s, m) with the realized mediator, offline
 * samples contribute phi1(s, a, m) (the posterior-weighted embedding), giving
 * the post-mediator value V_{h+1/2}(s, m) with its own bonus and truncation.
 * Stage 2 regresses r + V_{h+1/2}(s, m) on the one-hot gamma(s, a) over both
 * pools jointly. Offline samples in stage 2 keep provenance so the design
 * matrix before episode 1 can be split out of the information-gain ratio.
 *
 * Both stage dimensions differ in the tabular construction, so each stage
 * gets its own beta from the shared beta_scale. The clamp-to-[0, cap] note in
 * dovi.hpp applies to both stages.
 */
#ifndef CMDP_DOVI_PLUS_HPP
#define CMDP_DOVI_PLUS_HPP

#include <chrono>
#include <cmath>
#include <vector>

#include "cmdp/dovi.hpp"
#include "cmdp/features.hpp"
#include "cmdp/mdp.hpp"
#include "cmdp/ridge.hpp"

namespace cmdp {

/// One episode's fitted quantities for the two-stage learner.
struct ValueIteratePlus {
  std::vector<Vec> omega1, omega2;     // per h
  std::vector<Mat> Vhalf, Gamma1;      // per h: nS x nM
  std::vector<Mat> Q, Gamma2;          // per h: nS x nA
  Mat V;                               // (H+1) x nS
  Policy pol;
};

/// Backward two-stage fit over all steps given the current design matrices.
inline ValueIteratePlus dovi_plus_fit_episode(const ConfoundedMDP& m,
                                              const FrontdoorFeatureMap& f,
                                              std::vector<RidgeState>& st1,
                                              std::vector<RidgeState>& st2, double beta1,
                                              double beta2) {
  ValueIteratePlus vi;
  vi.omega1.assign(m.H, Vec());
  vi.omega2.assign(m.H, Vec());
  vi.Vhalf.assign(m.H, Mat(m.nS, m.nM, 0.0));
  vi.Gamma1.assign(m.H, Mat(m.nS, m.nM, 0.0));
  vi.Q.assign(m.H, Mat(m.nS, m.nA, 0.0));
  vi.Gamma2.assign(m.H, Mat(m.nS, m.nA, 0.0));
  vi.V = Mat(m.H + 1, m.nS, 0.0);
  vi.pol = Policy{m.H, m.nS, std::vector<int>(static_cast<size_t>(m.H) * m.nS, 0)};
  for (int h = m.H - 1; h >= 0; --h) {
    const double cap = static_cast<double>(m.H - 1 - h);
    // The half-step estimate predicts step-(h+1) values, so it carries the
    // step-(h+1) truncation; then reward + half-step never exceeds cap.
    const double cap_half = std::max(0.0, cap - 1.0);
    // Stage 1: value-only targets.
    vi.omega1[h] =
        st1[h].solve([&](const RidgeSample& smp) { return vi.V(h + 1, smp.sp); });
    for (int s = 0; s < m.nS; ++s)
      for (int mm = 0; mm < m.nM; ++mm) {
        const Vec& psi = f.psi1(h, s, mm);
        const double g = st1[h].bonus(psi, beta1);
        vi.Gamma1[h](s, mm) = g;
        vi.Vhalf[h](s, mm) = dovi_detail::clamp_q(dot(psi, vi.omega1[h]) + g, cap_half);
      }
    // Stage 2: reward plus the freshly fitted post-mediator value at the
    // sample's own (s, m).
    vi.omega2[h] = st2[h].solve(
        [&](const RidgeSample& smp) { return smp.r + vi.Vhalf[h](smp.s, smp.o); });
    for (int s = 0; s < m.nS; ++s) {
      for (int a = 0; a < m.nA; ++a) {
        const Vec g = f.gamma(s, a);
        const double bonus = st2[h].bonus(g, beta2);
        vi.Gamma2[h](s, a) = bonus;
        vi.Q[h](s, a) = dovi_detail::clamp_q(dot(g, vi.omega2[h]) + bonus, cap);
      }
      const int a = dovi_detail::argmax_low(vi.Q[h], s);
      vi.pol.act[static_cast<size_t>(h) * m.nS + s] = a;
      vi.V(h, s) = vi.Q[h](s, a);
    }
  }
  return vi;
}

/**
 * Full run of the two-stage learner (modes dovi_plus, online_only on a
 * frontdoor instance). Audits both prediction errors: the half step
 *   iota_{h+1/2}(s,m) = -V_{h+1/2}(s,m) + sum_s' P(s'|s,do(m)) V_{h+1}(s')
 * against [-2 Gamma1, 0] and the action step
 *   iota_h(s,a) = -Q_h(s,a) + r(s,a) + sum_m P(m|s,a) V_{h+1/2}(s,m)
 * against [-2 Gamma2, 0].
 */
inline RunResult run_dovi_plus(const ConfoundedMDP& m, const AlgoConfig& cfg,
                               const std::vector<Trajectory>& offline) {
  const auto t0 = std::chrono::steady_clock::now();
  if (m.backdoor())
    throw ValidationError("run_dovi_plus: needs a frontdoor instance");
  if (cfg.mode != Mode::dovi_plus && cfg.mode != Mode::online_only)
    throw ValidationError("run_dovi_plus: mode must be dovi_plus or online_only");
  if (cfg.mode == Mode::online_only && !offline.empty())
    throw ValidationError("run_dovi_plus: online_only forbids an offline dataset");
  if (cfg.K <= 0) throw ValidationError("run_dovi_plus: K must be positive");
  validate_or_throw(m);

  const FrontdoorFeatureMap f = build_frontdoor_features(m);
  std::vector<RidgeState> st1(m.H), st2(m.H);
  for (auto& st : st1) st.init(f.d1, cfg.lambda);
  for (auto& st : st2) st.init(f.d2, cfg.lambda);

  for (const auto& traj : offline) {
    if (static_cast<int>(traj.steps.size()) != m.H)
      throw ValidationError("run_dovi_plus: offline episode length differs from H");
    for (int h = 0; h < m.H; ++h) {
      const Step& st = traj.steps[h];
      RidgeSample s1smp;
      s1smp.x = f.phi1(h, st.s, st.a, st.o);
      s1smp.r = st.r;
      s1smp.sp = st.sp;
      s1smp.s = st.s;
      s1smp.o = st.o;
      st1[h].add_feature(std::move(s1smp), /*offline=*/true);
      RidgeSample s2smp;
      s2smp.x = f.gamma(st.s, st.a);
      s2smp.r = st.r;
      s2smp.sp = st.sp;
      s2smp.s = st.s;
      s2smp.o = st.o;
      st2[h].add_feature(std::move(s2smp), /*offline=*/true);
    }
  }
  for (auto& st : st1) st.mark_online_start();
  for (auto& st : st2) st.mark_online_start();

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
  out.beta1 = beta_value(out.beta_scale, f.d1, m.H, cfg.K, out.n, cfg.zeta);
  out.beta2 = beta_value(out.beta_scale, f.d2, m.H, cfg.K, out.n, cfg.zeta);
  out.stream1.assign(m.H, {});
  out.stream2.assign(m.H, {});

  const OptimalValues ov = optimal_values(m);
  const dovi_detail::AuditOracles oracle = dovi_detail::build_audit_oracles(m);
  Xoshiro256ss rng(mix_seed(hash_str(m.name.c_str()), cfg.seed));

  double cum = 0.0;
  out.episodes.reserve(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const ValueIteratePlus vi = dovi_plus_fit_episode(m, f, st1, st2, out.beta1, out.beta2);

    for (int h = 0; h < m.H; ++h) {
      for (int s = 0; s < m.nS; ++s) {
        for (int mm = 0; mm < m.nM; ++mm) {
          double iota = -vi.Vhalf[h](s, mm);
          const Vec& p = oracle.Pmed[h][static_cast<size_t>(s) * m.nM + mm];
          for (int sp = 0; sp < m.nS; ++sp) iota += p[sp] * vi.V(h + 1, sp);
          ++out.audit.checks_half;
          if (iota > OptimismAudit::tol) ++out.audit.viol_half_upper;
          if (iota < -2.0 * vi.Gamma1[h](s, mm) - OptimismAudit::tol)
            ++out.audit.viol_half_lower;
        }
        for (int a = 0; a < m.nA; ++a) {
          double iota = -vi.Q[h](s, a) + oracle.R[h](s, a);
          for (int mm = 0; mm < m.nM; ++mm)
            iota += m.it(h, s, a, mm) * vi.Vhalf[h](s, mm);
          ++out.audit.checks;
          if (iota > OptimismAudit::tol) ++out.audit.viol_upper;
          if (iota < -2.0 * vi.Gamma2[h](s, a) - OptimismAudit::tol) ++out.audit.viol_lower;
        }
      }
    }

    const int s1 = dovi_detail::pick_initial_state(m, cfg, k, rng);
    const Mat vpi = evaluate_policy(m, vi.pol);
    const double regret = ov.V(0, s1) - vpi(0, s1);
    cum += regret;
    out.episodes.push_back({regret, cum});

    int s = s1;
    for (int h = 0; h < m.H; ++h) {
      const int a = vi.pol.at(h, s);
      const OnlineStep step = sample_online_step(m, h, s, a, rng);
      RidgeSample s1smp;
      s1smp.x = f.psi1(h, s, step.m);
      s1smp.r = step.r;
      s1smp.sp = step.sp;
      s1smp.s = s;
      s1smp.o = step.m;
      out.stream1[h].push_back(s1smp.x);
      st1[h].add_feature(std::move(s1smp), /*offline=*/false);
      RidgeSample s2smp;
      s2smp.x = f.gamma(s, a);
      s2smp.r = step.r;
      s2smp.sp = step.sp;
      s2smp.s = s;
      s2smp.o = step.m;
      out.stream2[h].push_back(s2smp.x);
      st2[h].add_feature(std::move(s2smp), /*offline=*/false);
      s = step.sp;
    }
  }

  double dsum1 = 0.0, dsum2 = 0.0;
  for (auto& st : st1) dsum1 += std::sqrt(std::max(0.0, st.logdet() - st.logdet_start()));
  for (auto& st : st2) dsum2 += std::sqrt(std::max(0.0, st.logdet() - st.logdet_start()));
  out.delta1 = dsum1 / std::sqrt(static_cast<double>(f.d1) * m.H * m.H);
  out.delta2 = dsum2 / std::sqrt(static_cast<double>(f.d2) * m.H * m.H);

  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

/// Mode- and instance-dispatched entry point used by the CLI and sweeps.
inline RunResult run_learner(const ConfoundedMDP& m, const AlgoConfig& cfg,
                             const std::vector<Trajectory>& offline) {
  if (cfg.mode == Mode::dovi_plus || (!m.backdoor() && cfg.mode == Mode::online_only))
    return run_dovi_plus(m, cfg, offline);
  if (!m.backdoor())
    throw ValidationError("mode '" + std::string(to_string(cfg.mode)) +
                          "' is not defined for frontdoor instances");
  return run_dovi(m, cfg, offline);
}

}  // namespace cmdp

#endif  // CMDP_DOVI_PLUS_HPP
