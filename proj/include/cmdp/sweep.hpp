/**
 * @file sweep.hpp
 * @brief Experiment grids: modes x dataset sizes x seeds, run in parallel,
 *        with fixed-stream replay diagnostics and CSV output.
 *
 * Dataset discipline: for each seed one dataset of max(n_grid) episodes is
 * sampled, and the cell with size n ingests its first n episodes, so cells of
 * the same seed see nested prefixes of one logged stream.
 *
 * Replay protocol: within each (mode, seed) group the online feature stream
 * recorded by the smallest-n run is replayed against every offline prefix in
 * the grid. With the online stream held fixed, the per-step information gain
 * logdet(Lambda_end) - logdet(Lambda_start) can only shrink as the prefix
 * grows, so replay_delta1/replay_delta2 are non-increasing in n pointwise.
 *
 * CSV schemas are frozen; numbers are written with %.12g and NaN cells are
 * left empty. Wall-clock time never enters CSV output.
 */
#ifndef CMDP_SWEEP_HPP
#define CMDP_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "cmdp/dataset.hpp"
#include "cmdp/dovi_plus.hpp"
#include "cmdp/errors.hpp"

namespace cmdp {

struct SweepSpec {
  std::vector<Mode> modes;
  std::vector<int> n_grid;             // offline dataset sizes
  std::vector<std::uint64_t> seeds;
  int K = 100;
  double lambda = 1.0;
  double beta_scale = -1.0;            // <0: instance default
  double zeta = 0.1;
  std::vector<int> init_schedule;      // optional fixed initial states
  int workers = 0;                     // <=0: CMDP_WORKERS env, then hardware
};

struct CellResult {
  RunResult run;
  double replay_delta1 = std::numeric_limits<double>::quiet_NaN();
  double replay_delta2 = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  std::vector<CellResult> cells;  // sorted by (mode, n, seed)
};

inline int sweep_worker_count(int request) {
  if (request > 0) return request;
  if (const char* env = std::getenv("CMDP_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace sweep_detail {

/// Information gain of a fixed online stream on top of an offline prefix,
/// normalized like the run diagnostic: sum_h sqrt(gain_h) / sqrt(d H^2).
inline double replay_information_gain(int H, int d, double lambda,
                                      const std::vector<std::vector<Vec>>& offline,
                                      const std::vector<std::vector<Vec>>& stream) {
  double sum = 0.0;
  for (int h = 0; h < H; ++h) {
    RidgeState st;
    st.init(d, lambda);
    RidgeSample smp;
    for (const Vec& x : offline[h]) {
      smp.x = x;
      st.add_feature(smp, /*offline=*/true);
    }
    st.mark_online_start();
    for (const Vec& x : stream[h]) {
      smp.x = x;
      st.add_feature(smp, /*offline=*/false);
    }
    sum += std::sqrt(std::max(0.0, st.logdet() - st.logdet_start()));
  }
  return sum / std::sqrt(static_cast<double>(d) * H * H);
}

/// The offline features a given mode ingests, stage by stage, per step index.
struct OfflineFeatures {
  std::vector<std::vector<Vec>> stage1, stage2;  // stage2 used by dovi_plus only
};

inline OfflineFeatures offline_features(const ConfoundedMDP& m, Mode mode,
                                        const std::vector<Trajectory>& data) {
  OfflineFeatures out;
  out.stage1.assign(m.H, {});
  if (mode == Mode::online_only) return out;
  if (m.backdoor()) {
    const FeatureMap f = build_backdoor_features(m);
    const bool naive = mode == Mode::naive_confounded;
    for (const auto& traj : data)
      for (int h = 0; h < m.H; ++h) {
        const Step& st = traj.steps[h];
        out.stage1[h].push_back(naive ? f.psi(h, st.s, st.a) : f.phi(st.s, st.a, st.o));
      }
  } else {
    const FrontdoorFeatureMap f = build_frontdoor_features(m);
    out.stage2.assign(m.H, {});
    for (const auto& traj : data)
      for (int h = 0; h < m.H; ++h) {
        const Step& st = traj.steps[h];
        out.stage1[h].push_back(f.phi1(h, st.s, st.a, st.o));
        out.stage2[h].push_back(f.gamma(st.s, st.a));
      }
  }
  return out;
}

inline void check_mode_supported(const ConfoundedMDP& m, Mode mode) {
  const bool ok = m.backdoor()
                      ? (mode == Mode::dovi || mode == Mode::online_only ||
                         mode == Mode::naive_confounded)
                      : (mode == Mode::dovi_plus || mode == Mode::online_only);
  if (!ok)
    throw ValidationError("sweep: mode '" + std::string(to_string(mode)) +
                          "' is not defined for a " + std::string(to_string(m.mode)) +
                          " instance");
}

}  // namespace sweep_detail

/**
 * Run the full grid. Cells are independent runs executed by a worker pool;
 * results are sorted by (mode, n, seed) regardless of completion order, so
 * the output is deterministic for a fixed spec.
 */
inline SweepResult run_sweep(const ConfoundedMDP& m, const SweepSpec& spec_in) {
  SweepSpec spec = spec_in;
  if (spec.modes.empty()) throw ValidationError("sweep: no modes");
  if (spec.seeds.empty()) throw ValidationError("sweep: no seeds");
  if (spec.n_grid.empty()) spec.n_grid = {0};
  if (spec.K <= 0) throw ValidationError("sweep: K must be positive");
  std::sort(spec.n_grid.begin(), spec.n_grid.end());
  spec.n_grid.erase(std::unique(spec.n_grid.begin(), spec.n_grid.end()), spec.n_grid.end());
  if (spec.n_grid.front() < 0) throw ValidationError("sweep: negative dataset size");
  std::sort(spec.seeds.begin(), spec.seeds.end());
  spec.seeds.erase(std::unique(spec.seeds.begin(), spec.seeds.end()), spec.seeds.end());
  std::sort(spec.modes.begin(), spec.modes.end());
  spec.modes.erase(std::unique(spec.modes.begin(), spec.modes.end()), spec.modes.end());
  for (Mode mode : spec.modes) sweep_detail::check_mode_supported(m, mode);
  validate_or_throw(m);

  // One dataset per seed, shared by every data-consuming cell of that seed.
  int n_max = 0;
  for (Mode mode : spec.modes)
    if (mode != Mode::online_only) n_max = spec.n_grid.back();
  std::map<std::uint64_t, std::vector<Trajectory>> datasets;
  for (std::uint64_t seed : spec.seeds) datasets[seed] = sample_dataset(m, n_max, seed);

  struct CellPlan {
    Mode mode;
    int n;
    std::uint64_t seed;
  };
  std::vector<CellPlan> plan;
  for (Mode mode : spec.modes)
    for (std::uint64_t seed : spec.seeds) {
      if (mode == Mode::online_only) {
        plan.push_back({mode, 0, seed});  // data-free: one cell per seed
        continue;
      }
      for (int n : spec.n_grid) plan.push_back({mode, n, seed});
    }

  SweepResult res;
  res.cells.resize(plan.size());
  std::vector<std::exception_ptr> errors(plan.size());
  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= plan.size()) return;
      try {
        const CellPlan& c = plan[i];
        AlgoConfig cfg;
        cfg.lambda = spec.lambda;
        cfg.beta_scale = spec.beta_scale;
        cfg.zeta = spec.zeta;
        cfg.K = spec.K;
        cfg.mode = c.mode;
        cfg.seed = c.seed;
        cfg.init_schedule = spec.init_schedule;
        const auto& full = datasets.at(c.seed);
        std::vector<Trajectory> prefix(full.begin(), full.begin() + c.n);
        res.cells[i].run = run_learner(m, cfg, prefix);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nw = std::min<int>(sweep_worker_count(spec.workers), static_cast<int>(plan.size()));
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < errors.size(); ++i)
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const ValidationError&) {
        throw;
      } catch (const std::exception& e) {
        throw RunError("sweep cell (" + std::string(to_string(plan[i].mode)) + ", n=" +
                       std::to_string(plan[i].n) + ", seed=" + std::to_string(plan[i].seed) +
                       ") failed: " + e.what());
      }
    }

  // Replay pass: per (mode, seed) the smallest-n cell's online stream is the
  // reference; every cell of the group replays it over its own prefix.
  for (Mode mode : spec.modes)
    for (std::uint64_t seed : spec.seeds) {
      const CellResult* ref = nullptr;
      size_t ref_index = plan.size();
      for (size_t i = 0; i < plan.size(); ++i)
        if (plan[i].mode == mode && plan[i].seed == seed &&
            (!ref || plan[i].n < plan[ref_index].n)) {
          ref = &res.cells[i];
          ref_index = i;
        }
      if (!ref) continue;
      for (size_t i = 0; i < plan.size(); ++i) {
        if (plan[i].mode != mode || plan[i].seed != seed) continue;
        const auto& full = datasets.at(seed);
        std::vector<Trajectory> prefix(full.begin(), full.begin() + plan[i].n);
        const sweep_detail::OfflineFeatures off =
            sweep_detail::offline_features(m, mode, prefix);
        if (m.backdoor()) {
          const int d = m.nS * m.nA * m.nU;
          res.cells[i].replay_delta1 = sweep_detail::replay_information_gain(
              m.H, d, spec.lambda, off.stage1, ref->run.stream1);
        } else {
          const int d1 = m.nS * m.nM * m.nW, d2 = m.nS * m.nA;
          res.cells[i].replay_delta1 = sweep_detail::replay_information_gain(
              m.H, d1, spec.lambda, off.stage1, ref->run.stream1);
          res.cells[i].replay_delta2 = sweep_detail::replay_information_gain(
              m.H, d2, spec.lambda,
              off.stage2.empty() ? std::vector<std::vector<Vec>>(m.H) : off.stage2,
              ref->run.stream2);
        }
      }
    }

  std::vector<size_t> order(res.cells.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (plan[a].mode != plan[b].mode) return plan[a].mode < plan[b].mode;
    if (plan[a].n != plan[b].n) return plan[a].n < plan[b].n;
    return plan[a].seed < plan[b].seed;
  });
  SweepResult sorted;
  sorted.cells.reserve(res.cells.size());
  for (size_t i : order) sorted.cells.push_back(std::move(res.cells[i]));
  return sorted;
}

// ---------------------------------------------------------------------------
// CSV output. Columns are part of the tool's contract; do not reorder.

namespace csv_detail {

inline std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open CSV file for writing: " + path);
  return os;
}

struct Moments {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double ci95 = std::numeric_limits<double>::quiet_NaN();
};

inline Moments moments(const std::vector<double>& xs) {
  Moments mo;
  if (xs.empty()) return mo;
  for (double x : xs)
    if (std::isnan(x)) return mo;
  double s = 0.0;
  for (double x : xs) s += x;
  mo.mean = s / xs.size();
  if (xs.size() == 1) {
    mo.ci95 = 0.0;
    return mo;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - mo.mean) * (x - mo.mean);
  const double sd = std::sqrt(ss / (xs.size() - 1));
  mo.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  return mo;
}

}  // namespace csv_detail

/// Per-episode rows for every cell.
inline void write_results_csv(const std::string& path, const SweepResult& res) {
  auto os = csv_detail::open_out(path);
  os << "instance,mode,n,seed,k,regret_k,cum_regret,delta1,delta2,beta1,beta2\n";
  for (const CellResult& c : res.cells) {
    const RunResult& r = c.run;
    for (size_t k = 0; k < r.episodes.size(); ++k)
      os << r.instance << "," << to_string(r.mode) << "," << r.n << "," << r.seed << ","
         << (k + 1) << "," << csv_detail::num(r.episodes[k].regret) << ","
         << csv_detail::num(r.episodes[k].cum_regret) << "," << csv_detail::num(r.delta1)
         << "," << csv_detail::num(r.delta2) << "," << csv_detail::num(r.beta1) << ","
         << csv_detail::num(r.beta2) << "\n";
  }
  if (!os) throw IoError("failed while writing " + path);
}

/// One row per cell with end-of-run aggregates and audit rates.
inline void write_cells_csv(const std::string& path, const SweepResult& res) {
  auto os = csv_detail::open_out(path);
  os << "instance,mode,n,seed,K,final_cum_regret,mean_last100,delta1,delta2,"
        "replay_delta1,replay_delta2,viol_upper_rate,viol_lower_rate,"
        "viol_half_upper_rate,viol_half_lower_rate,beta_scale,beta1,beta2\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const CellResult& c : res.cells) {
    const RunResult& r = c.run;
    const bool half = r.audit.checks_half > 0;
    os << r.instance << "," << to_string(r.mode) << "," << r.n << "," << r.seed << "," << r.K
       << "," << csv_detail::num(r.final_cum_regret()) << ","
       << csv_detail::num(r.mean_last_regret(100)) << "," << csv_detail::num(r.delta1) << ","
       << csv_detail::num(r.delta2) << "," << csv_detail::num(c.replay_delta1) << ","
       << csv_detail::num(c.replay_delta2) << "," << csv_detail::num(r.audit.upper_rate())
       << "," << csv_detail::num(r.audit.lower_rate()) << ","
       << csv_detail::num(half ? r.audit.half_upper_rate() : nan) << ","
       << csv_detail::num(half ? r.audit.half_lower_rate() : nan) << ","
       << csv_detail::num(r.beta_scale) << "," << csv_detail::num(r.beta1) << ","
       << csv_detail::num(r.beta2) << "\n";
  }
  if (!os) throw IoError("failed while writing " + path);
}

/// Seed-aggregated rows per (mode, n): mean and 1.96 * standard error.
inline void write_summary_csv(const std::string& path, const SweepResult& res) {
  auto os = csv_detail::open_out(path);
  os << "instance,mode,n,seeds,K,final_cum_regret_mean,final_cum_regret_ci95,"
        "mean_last100_mean,mean_last100_ci95,delta1_mean,delta1_ci95,"
        "delta2_mean,delta2_ci95,replay_delta1_mean,replay_delta1_ci95,"
        "replay_delta2_mean,replay_delta2_ci95\n";
  size_t i = 0;
  while (i < res.cells.size()) {
    size_t j = i;
    std::vector<double> fin, last, d1, d2, rp1, rp2;
    const RunResult& r0 = res.cells[i].run;
    while (j < res.cells.size() && res.cells[j].run.mode == r0.mode &&
           res.cells[j].run.n == r0.n) {
      const CellResult& c = res.cells[j];
      fin.push_back(c.run.final_cum_regret());
      last.push_back(c.run.mean_last_regret(100));
      d1.push_back(c.run.delta1);
      d2.push_back(c.run.delta2);
      rp1.push_back(c.replay_delta1);
      rp2.push_back(c.replay_delta2);
      ++j;
    }
    const auto mf = csv_detail::moments(fin), ml = csv_detail::moments(last),
               m1 = csv_detail::moments(d1), m2 = csv_detail::moments(d2),
               q1 = csv_detail::moments(rp1), q2 = csv_detail::moments(rp2);
    os << r0.instance << "," << to_string(r0.mode) << "," << r0.n << "," << (j - i) << ","
       << r0.K << "," << csv_detail::num(mf.mean) << "," << csv_detail::num(mf.ci95) << ","
       << csv_detail::num(ml.mean) << "," << csv_detail::num(ml.ci95) << ","
       << csv_detail::num(m1.mean) << "," << csv_detail::num(m1.ci95) << ","
       << csv_detail::num(m2.mean) << "," << csv_detail::num(m2.ci95) << ","
       << csv_detail::num(q1.mean) << "," << csv_detail::num(q1.ci95) << ","
       << csv_detail::num(q2.mean) << "," << csv_detail::num(q2.ci95) << "\n";
    i = j;
  }
  if (!os) throw IoError("failed while writing " + path);
}

}  // namespace cmdp

#endif  // CMDP_SWEEP_HPP
