#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "rta/rta.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void apply_slack_override(rta::RunSetup& setup, const std::string& slack_list) {
  std::array<bool, rta::kNumConstraints> slacked{};
  if (slack_list != "none") {
    for (const std::string& name : split_csv(slack_list)) {
      rta::ConstraintId id;
      if (!rta::parse_constraint_name(name, &id))
        throw rta::ConfigError("--slack: unknown constraint '" + name + "'");
      slacked[rta::constraint_index(id)] = true;
    }
  }
  setup.episode.filter.slacked = slacked;
  setup.campaign.episode.filter.slacked = slacked;
  setup.episode.filter.validate();
}

int run_episode_mode(rta::RunSetup& setup, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const rta::EpisodeResult res = rta::run_episode(setup.episode, setup.params);
  rta::write_trajectory_csv(res, out_dir + "/trajectory.csv");
  rta::emit_plot_data(res, setup.params, out_dir + "/plot_data");
  std::printf("episode: %s  steps=%zu  intervention_rate=%.4f  qp_failures=%d\n",
              res.passed ? "PASS" : "FAIL", res.trajectory.size(), res.intervention_rate,
              res.qp_failures);
  for (rta::ConstraintId id : rta::kAllConstraints) {
    const int i = rta::constraint_index(id);
    if (res.violated_any[i])
      std::printf("  violated: %s (min margin %.6g)\n", rta::constraint_name(id),
                  res.min_margin[i]);
  }
  if (!res.diagnostic.empty()) std::printf("  diagnostic: %s\n", res.diagnostic.c_str());
  std::printf("wrote %s/trajectory.csv and %s/plot_data/\n", out_dir.c_str(), out_dir.c_str());
  return 0;
}

int run_campaign_mode(rta::RunSetup& setup, const std::string& out_dir, int dump_episodes) {
  std::filesystem::create_directories(out_dir);
  const rta::CampaignSummary sum = rta::run_campaign(setup.campaign, setup.params);
  rta::write_campaign_json(sum, setup.campaign, setup.params, out_dir + "/campaign.json");
  std::printf("campaign: n=%d  success_rate=%.4f  wall=%.1fs\n", sum.n_episodes,
              sum.success_rate, sum.wall_time_s);
  for (rta::ConstraintId id : rta::kAllConstraints) {
    const double pct = sum.per_constraint_pct[rta::constraint_index(id)];
    if (pct > 0.0) std::printf("  %s violated in %.2f%% of failed episodes\n",
                               rta::constraint_name(id), pct);
  }
  for (int i = 0; i < dump_episodes && i < setup.campaign.n; ++i) {
    rta::EpisodeConfig ecfg = setup.campaign.episode;
    ecfg.record_trajectory = true;
    ecfg.sample_seed = sum.episodes[i].seed;
    ecfg.initial.reset();
    const rta::EpisodeResult res = rta::run_episode(ecfg, setup.params, &setup.campaign.ranges);
    char name[64];
    std::snprintf(name, sizeof name, "/episode_%04d.csv", i);
    rta::write_trajectory_csv(res, out_dir + name);
  }
  std::printf("wrote %s/campaign.json\n", out_dir.c_str());
  return 0;
}

int run_calibrate_mode(rta::RunSetup& setup, const std::string& out_dir, uint64_t seed) {
  std::filesystem::create_directories(out_dir);
  rta::CalibrationOptions opts;
  opts.workers = setup.campaign.workers;
  const rta::CalibrationResult res = rta::calibrate_tuning(setup.params, seed, opts);
  setup.params.tuning = res.tuning;
  rta::RunSetup tuned = setup;
  const rta::ojson j = rta::serialize_config(tuned);
  std::ofstream out(out_dir + "/tuning.json", std::ios::binary);
  out << j["constraints"].dump(2) << '\n';
  std::printf("calibrate: %s  residual_violation_episodes=%d\n",
              res.converged ? "converged" : "best-effort", res.violation_episodes);
  std::printf("wrote %s/tuning.json\n", out_dir.c_str());
  return res.converged ? 0 : 2;
}

int run_check_mode(rta::RunSetup& setup) {
  rta::EpisodeConfig smoke = setup.episode;
  smoke.duration = 10.0 * smoke.dt;
  smoke.record_trajectory = true;
  if (!smoke.initial) smoke.initial = rta::default_scenario_state();
  const rta::EpisodeResult res = rta::run_episode(smoke, setup.params);
  if (!res.diagnostic.empty()) {
    std::fprintf(stderr, "check: smoke episode failed: %s\n", res.diagnostic.c_str());
    return 1;
  }
  std::printf("check: config valid, %zu-step smoke episode ran clean\n", res.trajectory.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spacecraft attitude safety filter simulator"};

  std::string mode = "episode";
  std::string config_path;
  std::string out_dir = "out";
  std::string slack_list;
  uint64_t seed = 0;
  bool seed_set = false;
  int n = 0;
  int workers = 0;
  bool no_rta = false;
  int dump_episodes = 0;

  app.add_option("--mode", mode, "episode | campaign | calibrate | check")
      ->check(CLI::IsMember({"episode", "campaign", "calibrate", "check"}));
  app.add_option("--config", config_path, "config file (JSON)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the root seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--n", n, "override the campaign episode count");
  app.add_option("--workers", workers, "override the worker count");
  app.add_flag("--no-rta", no_rta, "disable the safety filter");
  app.add_option("--slack", slack_list,
                 "comma-separated constraints to slacken (or 'none')");
  app.add_option("--dump-episodes", dump_episodes,
                 "campaign mode: also write trajectory CSVs for the first N episodes");

  CLI11_PARSE(app, argc, argv);

  try {
    rta::RunSetup setup =
        config_path.empty() ? rta::default_run_setup() : rta::parse_config(config_path);

    if (seed_set) {
      setup.campaign.seed = seed;
      setup.episode.sample_seed = seed;
    }
    if (n > 0) setup.campaign.n = n;
    if (workers > 0) setup.campaign.workers = workers;
    if (no_rta) {
      setup.episode.rta_enabled = false;
      setup.campaign.episode.rta_enabled = false;
    }
    if (!slack_list.empty()) apply_slack_override(setup, slack_list);

    if (mode == "episode") return run_episode_mode(setup, out_dir);
    if (mode == "campaign") return run_campaign_mode(setup, out_dir, dump_episodes);
    if (mode == "calibrate") return run_calibrate_mode(setup, out_dir, seed_set ? seed : setup.campaign.seed);
    return run_check_mode(setup);
  } catch (const std::exception& e) {
    rta::log_error(e.what());
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
