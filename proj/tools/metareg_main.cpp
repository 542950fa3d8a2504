#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "metareg/acceptance.hpp"
#include "metareg/experiment.hpp"

namespace {

/* Flags mirror config-file keys; a --config file is read first and flags
   override it. Overrides apply in the order given on the command line so
   later flags win, matching shell expectations. */
struct CommonArgs {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    auto opt = [this, cmd](const std::string& flag, const std::string& key,
                           const std::string& help) {
      cmd->add_option_function<std::string>(
             flag,
             [this, key](const std::string& v) { overrides.emplace_back(key, v); },
             help)
          ->take_all();
    };
    opt("--method", "method", "meta | gd | adagrad | wngrad | bb1 | bb2 | hypergrad");
    opt("--divergence", "divergence", "divergence id or comma list");
    opt("--rule", "rule",
        "exact | alternating | sc_exact | sc_alternating | scalar_exact | "
        "scalar_alternating");
    opt("--alpha0", "alpha0", "initial rate, or lo:hi:count log sweep");
    opt("--lambda", "lambda", "strong-convexity weight for sc_* rules");
    opt("--clip-factor", "clip_factor", "growth clip factor in (0,1]");
    opt("--hyper-beta", "hyper_beta", "hypergradient meta step size");
    opt("--problem", "problem", "quadratic | logistic | csv:<path>");
    opt("--dim", "dim", "problem dimension");
    opt("--mu-min", "mu_min", "smallest quadratic eigenvalue");
    opt("--mu-max", "mu_max", "largest quadratic eigenvalue");
    opt("--n", "n", "logistic sample count");
    opt("--reg", "reg", "logistic l2 regularization");
    opt("--feature-scale", "feature_scale", "logistic feature scale");
    opt("--label-noise", "label_noise", "logistic label noise");
    opt("--batch-size", "batch_size", "minibatch size (0 = full batch)");
    opt("--stream-samples", "stream_samples", "per-sample pool size for streams");
    opt("--stream-noise", "stream_noise", "per-sample noise for quadratic streams");
    opt("--horizon", "horizon", "step count (overrides --epochs)");
    opt("--epochs", "epochs", "epoch count");
    opt("--seed", "seed", "seed or comma list");
    opt("--out", "out", "output directory");
    opt("--eps", "eps", "steps_to_eps threshold on min squared gradient norm");
    opt("--threads", "threads", "grid worker threads");
  }

  metareg::ExperimentConfig build() const {
    metareg::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = metareg::parse_config_file(config_path);
    for (const auto& [key, value] : overrides)
      metareg::apply_override(cfg, key, value);
    metareg::validate(cfg);
    return cfg;
  }
};

int cmd_run(const CommonArgs& args) {
  metareg::ExperimentConfig cfg = args.build();
  metareg::RunRecord rec = metareg::run_single(cfg);
  std::vector<std::string> files =
      metareg::write_run_outputs(rec, cfg.out_dir, metareg::run_tag(rec));
  metareg::SummaryRow row = metareg::summarize(rec, cfg.eps);
  std::printf("%s seed=%llu steps=%ld final_loss=%.6g final_regret=%.6g "
              "min_grad_sq=%.6g\n",
              metareg::run_tag(rec).c_str(),
              static_cast<unsigned long long>(rec.seed), rec.steps(),
              row.final_loss, row.final_regret, row.min_grad_sq);
  if (rec.aborted)
    std::printf("aborted at step %ld: %s\n", rec.steps(), rec.abort_reason.c_str());
  for (const std::string& f : files) std::printf("wrote %s\n", f.c_str());
  return 0;
}

int cmd_grid(const CommonArgs& args) {
  metareg::ExperimentConfig cfg = args.build();
  std::vector<metareg::SummaryRow> rows = metareg::run_grid(cfg);
  std::printf("grid: %zu runs -> %s/summary.csv\n", rows.size(),
              cfg.out_dir.c_str());
  return 0;
}

int cmd_verify(bool list, const std::vector<int>& only,
               const std::string& demo_divergence, double demo_clip) {
  if (list) {
    for (int id : metareg::acceptance_ids())
      std::printf("%2d  %s\n", id, metareg::acceptance_name(id).c_str());
    return 0;
  }
  if (!demo_divergence.empty()) {
    std::printf("%s\n",
                metareg::domain_clip_demo(demo_divergence, demo_clip).c_str());
    return 0;
  }
  std::vector<metareg::CheckResult> results = metareg::run_acceptance(only);
  bool all_ok = true;
  for (const metareg::CheckResult& r : results) {
    std::printf("%s\n", metareg::format_check_line(r).c_str());
    all_ok = all_ok && r.passed;
  }
  std::printf("%s\n", all_ok ? "all checks passed" : "CHECKS FAILED");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meta-regularization optimizer benchmark"};
  app.require_subcommand(1);

  CommonArgs run_args, grid_args;
  CLI::App* run_cmd = app.add_subcommand("run", "single run, writes json/csv/svg");
  run_args.attach(run_cmd);
  CLI::App* grid_cmd =
      app.add_subcommand("grid", "divergence x alpha0 x seed sweep");
  grid_args.attach(grid_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify", "acceptance checks");
  bool list = false;
  std::vector<int> only;
  std::string demo_divergence;
  double demo_clip = 1.0;
  verify_cmd->add_flag("--list", list, "enumerate checks without running");
  verify_cmd->add_option("--only", only, "check ids to run");
  verify_cmd->add_option("--divergence", demo_divergence,
                         "print the out-of-domain clip diagnostics demo for "
                         "this divergence instead of running checks");
  verify_cmd->add_option("--clip-factor", demo_clip, "clip factor for the demo");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (grid_cmd->parsed()) return cmd_grid(grid_args);
    return cmd_verify(list, only, demo_divergence, demo_clip);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
