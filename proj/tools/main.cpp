#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "posegeom/config.hpp"
#include "posegeom/log.hpp"
#include "posegeom/runner.hpp"
#include "posegeom/version.hpp"

namespace {

struct CliArgs {
  std::string config;
  std::string out;
  int workers = 1;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

void add_common(CLI::App* sub, CliArgs& args) {
  sub->add_option("--config", args.config, "experiment config (JSON)")->required();
  sub->add_option("--out", args.out, "output directory");
  sub->add_option("--workers", args.workers, "worker thread count")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", args.seed, "seed override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"object pose estimation toolkit"};
  app.set_version_flag("--version", posegeom::kVersion);
  app.require_subcommand(1);

  CliArgs args;
  static const char* kTasks[] = {"synth", "solve-abs", "solve-rel", "eval", "gradcheck", "sweep"};
  for (const char* task : kTasks) {
    add_common(app.add_subcommand(task), args);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string task = app.get_subcommands().front()->get_name();
  args.has_seed = app.get_subcommands().front()->count("--seed") > 0;

  try {
    posegeom::ExperimentConfig cfg = posegeom::load_config(args.config);
    if (!cfg.task.empty() && cfg.task != task) {
      throw posegeom::InvalidConfig("config task \"" + cfg.task +
                                    "\" does not match subcommand \"" + task + "\"");
    }
    cfg.task = task;

    posegeom::RunOptions opts;
    opts.out = args.out;
    opts.workers = args.workers;
    opts.has_seed_override = args.has_seed;
    opts.seed_override = args.seed;
    return posegeom::run_task(cfg, opts);
  } catch (const posegeom::Error& e) {
    posegeom::log_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    posegeom::log_error(std::string("unexpected: ") + e.what());
    return 1;
  }
}
