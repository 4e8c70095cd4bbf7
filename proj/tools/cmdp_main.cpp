// cmdp: command-line front end for the confounded-MDP learners.
//
// Subcommands: gallery list|show, gen-data, run, sweep, plot, audit.
// Exit codes: 0 success, 1 invalid arguments or instance/config validation,
// 2 runtime failure inside a run, 3 file I/O failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmdp/dataset.hpp"
#include "cmdp/dovi_plus.hpp"
#include "cmdp/gallery.hpp"
#include "cmdp/instance_io.hpp"
#include "cmdp/plot.hpp"
#include "cmdp/sweep.hpp"

namespace {

cmdp::ConfoundedMDP load_instance(const std::string& ref) {
  if (cmdp::gallery_has(ref)) return cmdp::gallery_get(ref);
  return cmdp::read_instance_file(ref);
}

std::vector<cmdp::Mode> parse_modes(const std::vector<std::string>& names) {
  std::vector<cmdp::Mode> modes;
  for (const auto& s : names) modes.push_back(cmdp::mode_from_string(s));
  return modes;
}

void print_run(const cmdp::RunResult& r) {
  char buf[256];
  std::printf("instance %s  mode %s  n %lld  seed %llu  K %d  H %d\n", r.instance.c_str(),
              cmdp::to_string(r.mode), r.n, static_cast<unsigned long long>(r.seed), r.K, r.H);
  std::snprintf(buf, sizeof buf, "beta_scale %.6g  beta1 %.6g", r.beta_scale, r.beta1);
  std::printf("%s", buf);
  if (!std::isnan(r.beta2)) std::printf("  beta2 %.6g", r.beta2);
  std::printf("\n");
  std::printf("final cumulative regret %.6g\n", r.final_cum_regret());
  std::printf("mean regret over last 100 episodes %.6g\n", r.mean_last_regret(100));
  std::printf("information gain delta1 %.6g", r.delta1);
  if (!std::isnan(r.delta2)) std::printf("  delta2 %.6g", r.delta2);
  std::printf("\n");
  std::printf("optimism audit: %lld checks, upper violations %lld (%.3g%%), lower %lld "
              "(%.3g%%)\n",
              r.audit.checks, r.audit.viol_upper, 100.0 * r.audit.upper_rate(),
              r.audit.viol_lower, 100.0 * r.audit.lower_rate());
  if (r.audit.checks_half > 0)
    std::printf("half-step audit: %lld checks, upper violations %lld (%.3g%%), lower %lld "
                "(%.3g%%)\n",
                r.audit.checks_half, r.audit.viol_half_upper,
                100.0 * r.audit.half_upper_rate(), r.audit.viol_half_lower,
                100.0 * r.audit.half_lower_rate());
  std::printf("wall time %.1f ms\n", r.wall_ms);
}

std::vector<cmdp::Trajectory> resolve_dataset(const cmdp::ConfoundedMDP& m,
                                              const std::string& data_path, int n,
                                              std::uint64_t seed) {
  if (data_path.empty()) return cmdp::sample_dataset(m, n, seed);
  std::vector<cmdp::Trajectory> full = cmdp::read_dataset_file(data_path, m);
  if (n < 0 || n > static_cast<int>(full.size())) return full;
  full.resize(static_cast<size_t>(n));
  return full;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confounded-MDP learners: deconfounded optimistic value iteration"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from an INI file");

  // gallery ------------------------------------------------------------
  auto* gallery = app.add_subcommand("gallery", "built-in instances");
  gallery->require_subcommand(1);
  auto* glist = gallery->add_subcommand("list", "list built-in instances");
  glist->callback([]() {
    std::printf("%-14s %-9s %-3s %-3s %-3s %-10s %s\n", "name", "mode", "H", "S", "A",
                "beta_scale", "summary");
    for (const auto& e : cmdp::gallery_list()) {
      if (!cmdp::gallery_has(e.name)) {  // template row, not instantiable as-is
        std::printf("%-14s %-9s %-3s %-3s %-3s %-10g %s\n", e.name.c_str(), "backdoor",
                    "-", "-", "-", e.default_beta_scale, e.summary.c_str());
        continue;
      }
      const cmdp::ConfoundedMDP m = cmdp::gallery_get(e.name);
      std::printf("%-14s %-9s %-3d %-3d %-3d %-10g %s\n", e.name.c_str(),
                  cmdp::to_string(m.mode), m.H, m.nS, m.nA, e.default_beta_scale,
                  e.summary.c_str());
    }
  });
  std::string show_name;
  auto* gshow = gallery->add_subcommand("show", "print an instance in file format");
  gshow->add_option("name", show_name, "gallery name, e.g. BD-2 or CANON(16,4)")->required();
  gshow->callback([&]() { cmdp::write_instance(std::cout, load_instance(show_name)); });

  // gen-data -----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "sample a logged dataset to JSONL");
  std::string gen_instance, gen_out;
  int gen_n = 1000;
  std::uint64_t gen_seed = 1;
  gen->add_option("--instance", gen_instance, "gallery name or instance file")->required();
  gen->add_option("--n", gen_n, "episodes to log")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed, "dataset seed");
  gen->add_option("--out", gen_out, "output JSONL path")->required();
  gen->callback([&]() {
    const cmdp::ConfoundedMDP m = load_instance(gen_instance);
    cmdp::write_dataset_file(gen_out, m, cmdp::sample_dataset(m, gen_n, gen_seed), gen_seed);
    std::printf("wrote %d episodes to %s\n", gen_n, gen_out.c_str());
  });

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "one learner run");
  std::string run_instance, run_mode = "dovi", run_data, run_out;
  int run_n = 0, run_K = 100;
  std::uint64_t run_seed = 1;
  double run_beta = -1.0, run_lambda = 1.0, run_zeta = 0.1;
  run->add_option("--instance", run_instance, "gallery name or instance file")->required();
  run->add_option("--mode", run_mode, "dovi|dovi_plus|online_only|naive_confounded");
  run->add_option("--n", run_n, "offline episodes (sampled unless --data)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--data", run_data, "JSONL dataset to ingest (first --n episodes)");
  run->add_option("--seed", run_seed, "run seed");
  run->add_option("--K", run_K, "online episodes")->check(CLI::PositiveNumber);
  run->add_option("--beta-scale", run_beta, "bonus multiplier c (<0: instance default)");
  run->add_option("--lambda", run_lambda, "ridge regularizer")->check(CLI::PositiveNumber);
  run->add_option("--zeta", run_zeta, "confidence level in (0,1]");
  run->add_option("--out", run_out, "directory for results.csv/cells.csv");
  run->callback([&]() {
    const cmdp::ConfoundedMDP m = load_instance(run_instance);
    cmdp::AlgoConfig cfg;
    cfg.mode = cmdp::mode_from_string(run_mode);
    cfg.K = run_K;
    cfg.seed = run_seed;
    cfg.beta_scale = run_beta;
    cfg.lambda = run_lambda;
    cfg.zeta = run_zeta;
    const auto data = cfg.mode == cmdp::Mode::online_only
                          ? std::vector<cmdp::Trajectory>{}
                          : resolve_dataset(m, run_data, run_n, run_seed);
    cmdp::SweepResult one;
    cmdp::CellResult cell;
    cell.run = cmdp::run_learner(m, cfg, data);
    one.cells.push_back(std::move(cell));
    print_run(one.cells[0].run);
    if (!run_out.empty()) {
      cmdp::write_results_csv(run_out + "/results.csv", one);
      cmdp::write_cells_csv(run_out + "/cells.csv", one);
      std::printf("wrote %s/results.csv and %s/cells.csv\n", run_out.c_str(),
                  run_out.c_str());
    }
  });

  // sweep ----------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "grid of runs with CSV output");
  std::string sw_instance, sw_out = ".";
  std::vector<std::string> sw_modes{"dovi", "online_only", "naive_confounded"};
  std::vector<int> sw_grid{0, 10, 100, 1000};
  std::vector<std::uint64_t> sw_seeds{1, 2, 3};
  int sw_K = 100, sw_workers = 0;
  double sw_beta = -1.0, sw_lambda = 1.0, sw_zeta = 0.1;
  sweep->add_option("--instance", sw_instance, "gallery name or instance file")->required();
  sweep->add_option("--modes", sw_modes, "modes to run")->delimiter(',');
  sweep->add_option("--n-grid", sw_grid, "offline dataset sizes")->delimiter(',');
  sweep->add_option("--seeds", sw_seeds, "seeds")->delimiter(',');
  sweep->add_option("--K", sw_K, "online episodes per cell")->check(CLI::PositiveNumber);
  sweep->add_option("--beta-scale", sw_beta, "bonus multiplier c (<0: instance default)");
  sweep->add_option("--lambda", sw_lambda, "ridge regularizer")->check(CLI::PositiveNumber);
  sweep->add_option("--zeta", sw_zeta, "confidence level in (0,1]");
  sweep->add_option("--workers", sw_workers, "worker threads (0: CMDP_WORKERS or hardware)");
  sweep->add_option("--out", sw_out, "output directory");
  sweep->callback([&]() {
    const cmdp::ConfoundedMDP m = load_instance(sw_instance);
    cmdp::SweepSpec spec;
    spec.modes = parse_modes(sw_modes);
    spec.n_grid = sw_grid;
    spec.seeds = sw_seeds;
    spec.K = sw_K;
    spec.beta_scale = sw_beta;
    spec.lambda = sw_lambda;
    spec.zeta = sw_zeta;
    spec.workers = sw_workers;
    const cmdp::SweepResult res = cmdp::run_sweep(m, spec);
    cmdp::write_results_csv(sw_out + "/results.csv", res);
    cmdp::write_cells_csv(sw_out + "/cells.csv", res);
    cmdp::write_summary_csv(sw_out + "/summary.csv", res);
    std::printf("%zu cells -> %s/{results,cells,summary}.csv\n", res.cells.size(),
                sw_out.c_str());
  });

  // plot -----------------------------------------------------------------
  auto* plot = app.add_subcommand("plot", "SVG charts from sweep CSVs");
  std::string pl_results = "results.csv", pl_cells = "cells.csv", pl_out = ".";
  plot->add_option("--results", pl_results, "results.csv path");
  plot->add_option("--cells", pl_cells, "cells.csv path");
  plot->add_option("--out", pl_out, "output directory");
  plot->callback([&]() {
    cmdp::write_plots(pl_results, pl_cells, pl_out);
    std::printf("wrote %s/regret_curves.svg, %s/delta_vs_n.svg, %s/plot_data.csv\n",
                pl_out.c_str(), pl_out.c_str(), pl_out.c_str());
  });

  // audit ----------------------------------------------------------------
  auto* audit = app.add_subcommand("audit", "feature identities and optimism rates");
  std::string au_instance, au_mode = "dovi";
  int au_n = 100, au_K = 100;
  std::uint64_t au_seed = 1;
  double au_beta = -1.0;
  audit->add_option("--instance", au_instance, "gallery name or instance file")->required();
  audit->add_option("--mode", au_mode, "dovi|dovi_plus|online_only|naive_confounded");
  audit->add_option("--n", au_n, "offline episodes")->check(CLI::NonNegativeNumber);
  audit->add_option("--K", au_K, "online episodes")->check(CLI::PositiveNumber);
  audit->add_option("--seed", au_seed, "run seed");
  audit->add_option("--beta-scale", au_beta, "bonus multiplier c (<0: instance default)");
  audit->callback([&]() {
    const cmdp::ConfoundedMDP m = load_instance(au_instance);
    if (m.backdoor()) {
      const auto rep = cmdp::check_realizability(m, cmdp::build_backdoor_features(m));
      std::printf("realizability: kernel %.3g  reward %.3g  q %.3g  feature norm %.6g  "
                  "mu l1^2 %.6g <= d %d  theta %.6g\n",
                  rep.max_kernel_err, rep.max_reward_err, rep.max_q_err,
                  rep.max_feature_norm, rep.mu_l1_sq_sum_max, rep.d_budget,
                  rep.theta_norm_max);
    } else {
      const auto rep = cmdp::check_realizability(m, cmdp::build_frontdoor_features(m));
      std::printf("realizability: kernel %.3g  reward %.3g  q %.3g  feature norm %.6g  "
                  "mu l1^2 %.6g <= d %d  theta %.6g\n",
                  rep.max_kernel_err, rep.max_reward_err, rep.max_q_err,
                  rep.max_feature_norm, rep.mu_l1_sq_sum_max, rep.d_budget,
                  rep.theta_norm_max);
    }
    cmdp::AlgoConfig cfg;
    cfg.mode = cmdp::mode_from_string(au_mode);
    cfg.K = au_K;
    cfg.seed = au_seed;
    cfg.beta_scale = au_beta;
    const auto data = cfg.mode == cmdp::Mode::online_only
                          ? std::vector<cmdp::Trajectory>{}
                          : cmdp::sample_dataset(m, au_n, au_seed);
    print_run(cmdp::run_learner(m, cfg, data));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const cmdp::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const cmdp::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
