#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "cmdp/dataset.hpp"
#include "cmdp/dovi.hpp"
#include "cmdp/gallery.hpp"
#include "helpers.hpp"

using namespace cmdp;

namespace {

AlgoConfig config(Mode mode, int K, std::uint64_t seed, double beta_scale = -1.0) {
  AlgoConfig cfg;
  cfg.mode = mode;
  cfg.K = K;
  cfg.seed = seed;
  cfg.beta_scale = beta_scale;
  return cfg;
}

struct Moments {
  double mean = 0.0, ci95 = 0.0;
};

Moments moments_of(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  if (xs.size() > 1) {
    const double sd = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
    m.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return m;
}

}  // namespace

TEST_CASE("first fit with no data is pure bonus", "[dovi]") {
  const auto m = gallery_get("BD-2");
  const auto f = build_backdoor_features(m);
  std::vector<RidgeState> states(m.H);
  for (auto& st : states) st.init(f.d, 1.0);
  const double beta = 2.0;
  const ValueIterate vi = dovi_fit_episode(m, f, states, beta);

  for (int h = 0; h < m.H; ++h) {
    const double cap = static_cast<double>(m.H - 1 - h);
    // No samples: omega is exactly zero.
    for (double w : vi.omega[h]) REQUIRE(w == 0.0);
    for (int s = 0; s < m.nS; ++s)
      for (int a = 0; a < m.nA; ++a) {
        const Vec& psi = f.psi(h, s, a);
        // Gamma = beta * sqrt(log(1 + ||psi||^2 / lambda)).
        const double expect = beta * std::sqrt(std::log1p(dot(psi, psi)));
        REQUIRE(vi.Gamma[h](s, a) == Catch::Approx(expect).margin(1e-12));
        // Q = clamp(0 + Gamma, 0, cap).
        REQUIRE(vi.Q[h](s, a) == Catch::Approx(std::min(expect, cap)).margin(1e-12));
      }
  }
  // Terminal row of V is zero and the last step is capped at zero.
  for (int s = 0; s < m.nS; ++s) {
    CHECK(vi.V(m.H, s) == 0.0);
    CHECK(vi.V(m.H - 1, s) == 0.0);
  }
}

TEST_CASE("fit invariants hold across a full run", "[dovi]") {
  const auto m = gallery_get("BD-2");
  const auto f = build_backdoor_features(m);
  const auto offline = sample_dataset(m, 50, 9);

  std::vector<RidgeState> states(m.H);
  for (auto& st : states) st.init(f.d, 1.0);
  for (const auto& traj : offline)
    for (int h = 0; h < m.H; ++h) {
      const Step& st = traj.steps[h];
      RidgeSample smp;
      smp.x = f.phi(st.s, st.a, st.o);
      smp.r = st.r;
      smp.sp = st.sp;
      states[h].add_feature(std::move(smp), true);
    }
  for (auto& st : states) st.mark_online_start();

  Xoshiro256ss rng(404);
  std::vector<std::vector<Vec>> stream(m.H);
  Mat prev_gamma;
  for (int k = 0; k < 30; ++k) {
    const ValueIterate vi = dovi_fit_episode(m, f, states, 1.5);
    for (int h = 0; h < m.H; ++h) {
      const double cap = static_cast<double>(m.H - 1 - h);
      for (int s = 0; s < m.nS; ++s) {
        for (int a = 0; a < m.nA; ++a) {
          // Truncation is exact, bonuses are nonnegative.
          REQUIRE(vi.Q[h](s, a) >= 0.0);
          REQUIRE(vi.Q[h](s, a) <= cap);
          REQUIRE(vi.Gamma[h](s, a) >= 0.0);
        }
        // The recorded policy is greedy with ties to the lowest index.
        int best = 0;
        for (int a = 1; a < m.nA; ++a)
          if (vi.Q[h](s, a) > vi.Q[h](s, best)) best = a;
        REQUIRE(vi.pol.at(h, s) == best);
        REQUIRE(vi.V(h, s) == vi.Q[h](s, best));
      }
    }
    // Bonuses never grow as the design matrices accumulate data.
    if (k > 0)
      for (int s = 0; s < m.nS; ++s)
        for (int a = 0; a < m.nA; ++a)
          REQUIRE(vi.Gamma[0](s, a) <= prev_gamma(s, a) + 1e-12);
    prev_gamma = vi.Gamma[0];
    dovi_rollout(m, f, vi, 0, states, rng, stream);
  }
  // The rollout appended one online sample per step per episode.
  for (int h = 0; h < m.H; ++h) {
    CHECK(states[h].n_online() == 30);
    CHECK(stream[h].size() == 30);
  }
}

TEST_CASE("run_dovi produces exact nonnegative regret and diagnostics", "[dovi]") {
  const auto m = gallery_get("BD-2");
  const auto offline = sample_dataset(m, 100, 5);
  const RunResult r = run_dovi(m, config(Mode::dovi, 40, 5, 0.1), offline);

  CHECK(r.instance == "BD-2");
  CHECK(r.n == 100);
  CHECK(r.K == 40);
  REQUIRE(r.episodes.size() == 40);
  double cum = 0.0;
  for (const auto& ep : r.episodes) {
    REQUIRE(ep.regret >= -1e-10);
    REQUIRE(ep.regret <= static_cast<double>(m.H) + 1e-10);
    cum += ep.regret;
    REQUIRE(ep.cum_regret == Catch::Approx(cum).margin(1e-9));
  }
  CHECK(r.final_cum_regret() == Catch::Approx(cum).margin(1e-9));
  // mean_last_regret averages the tail.
  const double tail5 = (r.episodes[35].regret + r.episodes[36].regret + r.episodes[37].regret +
                        r.episodes[38].regret + r.episodes[39].regret) /
                       5.0;
  CHECK(r.mean_last_regret(5) == Catch::Approx(tail5).margin(1e-12));
  CHECK(r.delta1 >= 0.0);
  CHECK(std::isnan(r.delta2));
  CHECK(r.beta1 == Catch::Approx(beta_value(0.1, 8, m.H, 40, 100, 0.1)).margin(1e-12));
  CHECK(r.audit.checks == 40LL * m.H * m.nS * m.nA);
  CHECK(r.features == "oracle");
  // Streams captured per step for the replay protocol.
  for (int h = 0; h < m.H; ++h) REQUIRE(r.stream1[h].size() == 40);
}

TEST_CASE("runs are bitwise deterministic in the seed", "[dovi]") {
  const auto m = gallery_get("BD-2");
  const auto offline = sample_dataset(m, 30, 2);
  const RunResult a = run_dovi(m, config(Mode::dovi, 25, 11, 0.05), offline);
  const RunResult b = run_dovi(m, config(Mode::dovi, 25, 11, 0.05), offline);
  REQUIRE(a.episodes.size() == b.episodes.size());
  for (size_t i = 0; i < a.episodes.size(); ++i) {
    REQUIRE(a.episodes[i].regret == b.episodes[i].regret);
    REQUIRE(a.episodes[i].cum_regret == b.episodes[i].cum_regret);
  }
  CHECK(a.delta1 == b.delta1);
  CHECK(a.beta1 == b.beta1);
  for (int h = 0; h < m.H; ++h) {
    REQUIRE(a.stream1[h].size() == b.stream1[h].size());
    for (size_t i = 0; i < a.stream1[h].size(); ++i)
      REQUIRE(a.stream1[h][i] == b.stream1[h][i]);
  }
  // A different seed must change the realized stream.
  const RunResult c = run_dovi(m, config(Mode::dovi, 25, 12, 0.05), offline);
  bool any_diff = false;
  for (size_t i = 0; i < a.episodes.size(); ++i)
    any_diff |= (a.episodes[i].regret != c.episodes[i].regret);
  CHECK(any_diff);
}

TEST_CASE("online_only is dovi with an empty pool", "[dovi]") {
  const auto m = gallery_get("BD-2");
  const RunResult a = run_dovi(m, config(Mode::dovi, 30, 8, 0.05), {});
  const RunResult b = run_baseline(m, config(Mode::online_only, 30, 8, 0.05), {});
  REQUIRE(a.episodes.size() == b.episodes.size());
  for (size_t i = 0; i < a.episodes.size(); ++i)
    REQUIRE(a.episodes[i].regret == b.episodes[i].regret);
  CHECK(a.delta1 == b.delta1);
  CHECK(a.beta1 == b.beta1);
}

TEST_CASE("input contracts are enforced", "[dovi]") {
  const auto m = gallery_get("BD-2");
  const auto offline = sample_dataset(m, 5, 1);

  CHECK_THROWS_AS(run_dovi(gallery_get("FD-2"), config(Mode::dovi, 10, 1, 0.1), {}),
                  ValidationError);
  CHECK_THROWS_AS(run_dovi(m, config(Mode::dovi_plus, 10, 1, 0.1), offline), ValidationError);
  CHECK_THROWS_AS(run_dovi(m, config(Mode::online_only, 10, 1, 0.1), offline), ValidationError);
  CHECK_THROWS_AS(run_dovi(m, config(Mode::dovi, 0, 1, 0.1), offline), ValidationError);
  CHECK_THROWS_AS(run_baseline(m, config(Mode::dovi, 10, 1, 0.1), offline), ValidationError);

  auto ragged = offline;
  ragged[2].steps.pop_back();
  CHECK_THROWS_AS(run_dovi(m, config(Mode::dovi, 10, 1, 0.1), ragged), ValidationError);

  auto cfg = config(Mode::dovi, 10, 1, 0.1);
  cfg.init_schedule = {0, 5};
  CHECK_THROWS_AS(run_dovi(m, cfg, offline), ValidationError);

  cfg = config(Mode::dovi, 10, 1, 0.1);
  cfg.zeta = 0.0;
  CHECK_THROWS_AS(run_dovi(m, cfg, offline), ValidationError);
}

TEST_CASE("init schedule pins the start state deterministically", "[dovi]") {
  const auto m = gallery_get("BD-2");

  // With K=1 and no data the fitted policy is data-independent, so the
  // episode regret must equal the exact gap at the scheduled start state.
  const auto f = build_backdoor_features(m);
  const auto ov = optimal_values(m);
  for (int s1 = 0; s1 < m.nS; ++s1) {
    auto cfg = config(Mode::dovi, 1, 77, 0.05);
    cfg.init_schedule = {s1};
    const RunResult r = run_dovi(m, cfg, {});

    std::vector<RidgeState> states(m.H);
    for (auto& st : states) st.init(f.d, cfg.lambda);
    const ValueIterate vi = dovi_fit_episode(m, f, states, r.beta1);
    const Mat vpi = evaluate_policy(m, vi.pol);
    const double expect = ov.V(0, s1) - vpi(0, s1);
    REQUIRE(r.episodes[0].regret == Catch::Approx(expect).margin(1e-12));
  }

  // The schedule cycles: with {0,1} episodes alternate start states, which
  // shows up as the same paired regrets under a fixed seed.
  auto cfg = config(Mode::dovi, 2, 3, 0.05);
  cfg.init_schedule = {0, 1};
  const RunResult r01 = run_dovi(m, cfg, {});
  CHECK(r01.episodes.size() == 2);
}

TEST_CASE("offline data estimates deconfounded effects within tolerance", "[dovi]") {
  // With 10^4 logged episodes the ridge estimate of the last nonterminal
  // step's reward (whose regression targets carry no fitted values and no
  // bonuses) must track the interventional reward closely.
  const auto m = gallery_get("BD-2");
  const auto f = build_backdoor_features(m);
  const auto offline = sample_dataset(m, 10000, 1);

  std::vector<RidgeState> states(m.H);
  for (auto& st : states) st.init(f.d, 1.0);
  for (const auto& traj : offline)
    for (int h = 0; h < m.H; ++h) {
      const Step& st = traj.steps[h];
      RidgeSample smp;
      smp.x = f.phi(st.s, st.a, st.o);
      smp.r = st.r;
      smp.sp = st.sp;
      states[h].add_feature(std::move(smp), true);
    }
  const ValueIterate vi = dovi_fit_episode(m, f, states, /*beta=*/0.0);

  const int h = 1;  // targets are raw rewards: V(2,.) is capped to zero
  for (int s = 0; s < m.nS; ++s)
    for (int a = 0; a < m.nA; ++a) {
      const double est = dot(f.psi(h, s, a), vi.omega[h]);
      const double truth = causal_reward(m, h, s, a);
      CAPTURE(s, a, est, truth);
      CHECK(std::abs(est - truth) <= 0.1);
    }

  // The estimate tracks the interventional reward, not the confounded
  // conditional: at (h=1, s=0, a=0) the two differ by 0.16.
  const double causal00 = causal_reward(m, 1, 0, 0);
  const double cond00 = conditional_reward(m, 1, 0, 0);
  REQUIRE(std::abs(causal00 - cond00) > 0.15);
  const double est00 = dot(f.psi(1, 0, 0), vi.omega[1]);
  CHECK(std::abs(est00 - causal00) < std::abs(est00 - cond00));
}

TEST_CASE("naive pooling matches the learner when confounding is absent", "[dovi]") {
  // Overlapping 95% confidence intervals over seeds: with a flat logging
  // policy the conditional equals the causal effect, so unadjusted pooling
  // is unbiased and the two arms are statistically indistinguishable.
  const auto m = testutil::make_bd2_unconfounded();
  std::vector<double> naive_final, dovi_final;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto offline = sample_dataset(m, 400, seed);
    naive_final.push_back(
        run_dovi(m, config(Mode::naive_confounded, 60, seed, 0.1), offline).final_cum_regret());
    dovi_final.push_back(
        run_dovi(m, config(Mode::dovi, 60, seed, 0.1), offline).final_cum_regret());
  }
  const Moments a = moments_of(naive_final);
  const Moments b = moments_of(dovi_final);
  CAPTURE(a.mean, a.ci95, b.mean, b.ci95);
  CHECK(std::abs(a.mean - b.mean) <= a.ci95 + b.ci95);
}

TEST_CASE("audit counters stay within the calibrated tolerance", "[dovi]") {
  const auto g = testutil::read_goldens();
  const auto m = gallery_get("BD-2");
  const auto offline = sample_dataset(m, 100, 1);
  const RunResult r = run_dovi(
      m, config(Mode::dovi, 100, 1, testutil::golden(g, "beta_scale.BD-2")), offline);
  CHECK(r.audit.upper_rate() <= 0.05);
  CHECK(r.audit.lower_rate() <= 0.05);
  CHECK(r.audit.checks == 100LL * m.H * m.nS * m.nA);
}

TEST_CASE("fitted early-step values carry the calibrated optimism margin", "[dovi]") {
  // The first-step estimate regresses on fitted downstream values, so it
  // sits above the true Q by roughly one bonus and scales with beta. The
  // calibrated bound lives in the goldens file; the fixed 0.1 floor applies
  // only to the raw-reward step checked above, which carries no bonus.
  const auto g = testutil::read_goldens();
  const double tol = testutil::golden(g, "dovi.point_tol_h0");
  const auto m = gallery_get("BD-2");
  const auto f = build_backdoor_features(m);
  const auto offline = sample_dataset(m, 10000, 1);
  const auto cfg = config(Mode::dovi, 1, 1, testutil::golden(g, "beta_scale.BD-2"));

  std::vector<RidgeState> states(m.H);
  for (auto& st : states) st.init(f.d, cfg.lambda);
  for (const auto& traj : offline)
    for (int h = 0; h < m.H; ++h) {
      const Step& st = traj.steps[h];
      RidgeSample smp;
      smp.x = f.phi(st.s, st.a, st.o);
      smp.r = st.r;
      smp.sp = st.sp;
      states[h].add_feature(std::move(smp), true);
    }
  const double beta = beta_value(cfg.beta_scale, f.d, m.H, cfg.K, 10000, cfg.zeta);
  const ValueIterate vi = dovi_fit_episode(m, f, states, beta);
  const auto ov = optimal_values(m);
  for (int s = 0; s < m.nS; ++s)
    for (int a = 0; a < m.nA; ++a) {
      const double est = dot(f.psi(0, s, a), vi.omega[0]);
      CAPTURE(s, a, est, ov.Q[0](s, a), tol);
      CHECK(std::abs(est - ov.Q[0](s, a)) <= tol);
    }
}
