#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "blockprobe/experiment.hpp"
#include "blockprobe/presets.hpp"

namespace bp = blockprobe;

namespace {

const char* kFooter = R"(Config file (JSON, every key optional; defaults shown):
  {
    "seed": 0, "jobs": 0, "output_dir": "blockprobe-out",
    "model":    {"preset": "planted-2x7"}            or
                {"definition": {"regime": "independent" | "shared-noise", "dim": 16,
                                "alpha_bar": [...],   (optional; geometric 0.9999 -> 0.05)
                                "steps": [[{"a":1, "var_f":0, "var_g":0, "var_n":0}, ...], ...]}},
    "probe":    {"runs": 15, "perturbations_per_run": 20, "candidates_per_perturbation": 8,
                 "tol_start": 1e-4, "tol_end": 2e-4, "bias_start": 0.02, "bias_end": 0.05,
                 "epsilon_margin": 1e-6, "jitter_scale": 1e-9,
                 "update_probs": {"accepted": {"start": [0.1,0.3,0.6], "end": [0.1,0.6,0.3]},
                                  "rejected": {"start": [0.6,0.3,0.1], "end": [0.3,0.6,0.1]}}},
    "voting":   {"traversal_samples": 20},
    "schedule": {"low": 0.95, "high": 1.02, "signal_power": 1.0},
    "pruning":  {"k": 1, "trials": 256, "eval_trials": 256, "train_seed": 0, "test_seed": 21},
    "verify":   {"draws": 200000, "tolerance": 0.02}
  }
Presets: planted-2x7, planted-2x5, uniform, zero-variance, shared-noise.
vote, reweight, prune and report read <out>/artifact.json and reuse its
recorded configuration; --seed and --preset only affect verify and probe.
Exit codes: 0 success, 1 usage or configuration error, 2 verify tolerance breach.)";

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> preset;
  std::optional<std::size_t> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON experiment config")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "master seed (default 0)");
  cmd->add_option("--out", flags.out, "output directory (default blockprobe-out)");
  cmd->add_option("--preset", flags.preset, "model preset (default planted-2x7)");
  cmd->add_option("--jobs", flags.jobs, "worker threads, 0 = all cores (default 0)");
}

bp::ExperimentConfig resolve(const CommonFlags& flags) {
  bp::ExperimentConfig config;
  if (!flags.config_path.empty()) config = bp::load_experiment_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out) config.output_dir = *flags.out;
  if (flags.preset) {
    config.preset = *flags.preset;
    config.definition.reset();
  }
  if (flags.jobs) config.jobs = *flags.jobs;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block importance probing, voting, re-weighting and pruning on a "
               "synthetic diffusion denoiser"};
  app.footer(kFooter);
  app.require_subcommand(1);

  CommonFlags flags;
  bp::StageOverrides overrides;

  auto* verify = app.add_subcommand("verify", "Monte Carlo check of the error-variance closed form");
  auto* probe = app.add_subcommand("probe", "run the importance probe and start an artifact");
  auto* vote = app.add_subcommand("vote", "voting and importance scores, stability verdict");
  auto* reweight = app.add_subcommand("reweight", "build and evaluate re-weighting schedules");
  auto* prune = app.add_subcommand("prune", "design, refit and score skipping strategies");
  auto* report = app.add_subcommand("report", "summarize an artifact and export CSV tables");
  for (auto* cmd : {verify, probe, vote, reweight, prune, report}) add_common(cmd, flags);
  reweight->add_option("--low", overrides.low, "lower weight (default 0.95)");
  reweight->add_option("--high", overrides.high, "upper weight (default 1.02)");
  prune->add_option("--k", overrides.k, "blocks skipped per step, 1 or 2 (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bp::kExitUsage;
  }

  bp::ExperimentConfig config;
  try {
    config = resolve(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bp::kExitUsage;
  }

  auto& out = std::cout;
  auto& err = std::cerr;
  if (verify->parsed()) return bp::cmd_verify(config, out, err);
  if (probe->parsed()) return bp::cmd_probe(config, out, err);
  if (vote->parsed()) return bp::cmd_vote(config, out, err);
  if (reweight->parsed()) return bp::cmd_reweight(config, overrides, out, err);
  if (prune->parsed()) return bp::cmd_prune(config, overrides, out, err);
  return bp::cmd_report(config, out, err);
}
