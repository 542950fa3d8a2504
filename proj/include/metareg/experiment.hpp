#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metareg/metrics.hpp"

namespace metareg {

/* One benchmark description, parsed from a key=value config file and/or flag
   overrides. Sweepable fields hold lists; `run` uses the first entry of each,
   `grid` takes the product. */
struct ExperimentConfig {
  std::string method = "meta";  // meta | adagrad | wngrad | bb1 | bb2 | hypergrad | gd
  std::vector<std::string> divergences = {"kl"};
  std::string rule = "exact";
  std::vector<double> alpha0s = {1.0};
  double lambda = 1.0;
  double clip_factor = 0.5;
  double hyper_beta = 1e-4;

  /* problem: quadratic | logistic | csv:<path> */
  std::string problem = "quadratic";
  int dim = 5;
  double mu_min = 0.1;
  double mu_max = 1.0;
  int n = 2000;
  double reg = 1e-2;
  double feature_scale = 7.0;
  double label_noise = 3.5;
  int batch_size = 0;
  int stream_samples = 100;
  double stream_noise = 0.25;
  long horizon = 0;  // explicit step count; wins over epochs
  long epochs = 500;

  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "out";
  double eps = 1e-4;  // steps_to_eps target in grid summaries
  int threads = 4;

  std::map<std::string, std::string> raw;  // echoed into run records
};

/* key=value lines, '#' comments; unknown keys and malformed values throw
   std::invalid_argument with the offending line. */
ExperimentConfig parse_config_file(const std::string& path);
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);
void validate(const ExperimentConfig& cfg);

/* alpha0 sweep syntax: a plain number, or lo:hi:count (log-spaced). */
std::vector<double> parse_alpha_sweep(const std::string& text);

ProblemInstance build_problem(const ExperimentConfig& cfg,
                              std::uint64_t seed);

/* Single cell: first divergence/alpha0/seed. */
RunRecord run_single(const ExperimentConfig& cfg);

/* Writes <tag>.json, <tag>.csv, <tag>.svg under cfg.out_dir, returns the
   paths. */
std::vector<std::string> write_run_outputs(const RunRecord& rec,
                                           const std::string& out_dir,
                                           const std::string& tag);
std::string run_tag(const RunRecord& rec);

struct SummaryRow {
  std::string method;
  std::string divergence;
  double alpha0 = 0.0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double final_regret = 0.0;
  double min_grad_sq = 0.0;
  long steps_to_eps = 0;  // first T with min grad_sq <= eps, else horizon
};

/* Product sweep divergences x alpha0s x seeds, run on a small thread pool
   (cfg.threads); row order and bytes are independent of scheduling. */
std::vector<SummaryRow> run_grid(const ExperimentConfig& cfg);
SummaryRow summarize(const RunRecord& rec, double eps);
void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path);

/* Two-panel SVG (loss and regret vs step) for quick inspection. */
void write_run_svg(const RunRecord& rec, const std::string& path);

}  // namespace metareg
