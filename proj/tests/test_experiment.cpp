#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "metareg/experiment.hpp"

using namespace metareg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

long count_lines(const std::string& text) {
  long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

std::string write_file(const std::string& name, const std::string& body) {
  std::string path = std::string("/tmp/metareg_exp_") + name;
  std::ofstream f(path);
  f << body;
  return path;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("/tmp/metareg_exp_out") / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("alpha sweep parsing") {
  CHECK(parse_alpha_sweep("2.5") == std::vector<double>{2.5});
  std::vector<double> sweep = parse_alpha_sweep("0.1:10:3");
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0] == 0.1);
  CHECK(sweep[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sweep[2] == 10.0);
  CHECK(parse_alpha_sweep("5:5:1") == std::vector<double>{5.0});

  CHECK_THROWS_AS(parse_alpha_sweep("1:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_alpha_sweep("0:1:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_alpha_sweep("2:1:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_alpha_sweep("abc"), std::invalid_argument);
}

TEST_CASE("config file parsing with overrides") {
  std::string path = write_file("cfg.txt",
                                "# benchmark config\n"
                                "method = meta\n"
                                "divergence = kl,chi2\n"
                                "rule = alternating\n"
                                "\n"
                                "alpha0 = 0.1:10:3\n"
                                "seed = 1,2\n"
                                "dim = 4\n");
  ExperimentConfig cfg = parse_config_file(path);
  CHECK(cfg.divergences == std::vector<std::string>{"kl", "chi2"});
  CHECK(cfg.rule == "alternating");
  CHECK(cfg.alpha0s.size() == 3);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.dim == 4);
  CHECK(cfg.raw.at("rule") == "alternating");

  apply_override(cfg, "dim", "2");
  CHECK(cfg.dim == 2);
  CHECK_THROWS_AS(apply_override(cfg, "dims", "2"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(cfg, "dim", "two"), std::invalid_argument);

  std::string bad = write_file("bad.txt", "dim = 4\nwhat is this\n");
  CHECK_THROWS_AS(parse_config_file(bad), std::invalid_argument);
  std::string unknown = write_file("unk.txt", "frobnicate = 7\n");
  CHECK_THROWS_AS(parse_config_file(unknown), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_file("/tmp/metareg_exp_missing.txt"),
                  std::invalid_argument);
}

TEST_CASE("validate rejects inconsistent configs") {
  ExperimentConfig ok;
  validate(ok);

  ExperimentConfig m = ok;
  m.method = "sgd";
  CHECK_THROWS_AS(validate(m), std::invalid_argument);

  ExperimentConfig r = ok;
  r.rule = "sideways";
  CHECK_THROWS_AS(validate(r), std::invalid_argument);

  ExperimentConfig d = ok;
  d.divergences = {"kl", "nope"};
  CHECK_THROWS_AS(validate(d), std::invalid_argument);

  ExperimentConfig c = ok;
  c.clip_factor = 0.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);

  ExperimentConfig s = ok;
  s.seeds = {};
  CHECK_THROWS_AS(validate(s), std::invalid_argument);

  ExperimentConfig bb = ok;
  bb.method = "bb1";
  bb.batch_size = 2;
  CHECK_THROWS_AS(validate(bb), std::invalid_argument);

  ExperimentConfig p = ok;
  p.problem = "parabola";
  CHECK_THROWS_AS(validate(p), std::invalid_argument);

  ExperimentConfig e = ok;
  e.eps = 0.0;
  CHECK_THROWS_AS(validate(e), std::invalid_argument);
}

TEST_CASE("run_single writes three files deterministically") {
  fs::path dir = fresh_dir("single");
  ExperimentConfig cfg;
  cfg.divergences = {"chi2"};
  cfg.rule = "alternating";
  cfg.problem = "quadratic";
  cfg.dim = 2;
  cfg.horizon = 10;
  cfg.out_dir = dir.string();
  validate(cfg);

  RunRecord rec = run_single(cfg);
  CHECK(rec.steps() == 10);
  std::vector<std::string> files =
      write_run_outputs(rec, cfg.out_dir, run_tag(rec));
  REQUIRE(files.size() == 3);
  for (const std::string& f : files) CHECK(fs::exists(f));
  CHECK(run_tag(rec) == "meta_chi2_alternating_a1_s1");

  std::string first = slurp(files[0]);
  RunRecord again = run_single(cfg);
  write_run_outputs(again, cfg.out_dir, run_tag(again));
  CHECK(slurp(files[0]) == first);

  std::string svg = slurp(files[2]);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("grid product, summary shape and concurrency soundness") {
  fs::path dir = fresh_dir("grid");
  ExperimentConfig cfg;
  cfg.divergences = {"kl", "chi2"};
  cfg.rule = "exact";
  cfg.alpha0s = parse_alpha_sweep("0.1:10:3");
  cfg.seeds = {1, 2};
  cfg.problem = "quadratic";
  cfg.dim = 3;
  cfg.horizon = 25;
  cfg.out_dir = dir.string();
  cfg.threads = 4;
  validate(cfg);

  std::vector<SummaryRow> rows = run_grid(cfg);
  REQUIRE(rows.size() == 12);
  CHECK(rows[0].method == "meta:exact");
  CHECK(rows[0].divergence == "kl");

  std::string summary = slurp((dir / "summary.csv").string());
  CHECK(count_lines(summary) == 13);  // header + 12 rows
  CHECK(summary.rfind("method,divergence,alpha0,seed,final_loss,final_regret,"
                      "min_grad_sq,steps_to_eps\n",
                      0) == 0);

  /* rerun sequentially: identical summary bytes and run files */
  fs::path dir1 = fresh_dir("grid_seq");
  ExperimentConfig seq = cfg;
  seq.out_dir = dir1.string();
  seq.threads = 1;
  run_grid(seq);
  CHECK(slurp((dir1 / "summary.csv").string()) == summary);

  long files = 0;
  for (const auto& ent : fs::directory_iterator(dir))
    if (ent.path().extension() == ".json") {
      ++files;
      fs::path other = dir1 / ent.path().filename();
      REQUIRE(fs::exists(other));
      CHECK(slurp(other.string()) == slurp(ent.path().string()));
    }
  CHECK(files == 12);
}

TEST_CASE("steps_to_eps semantics") {
  RunRecord rec;
  rec.method = "gd";
  rec.alpha0 = 1.0;
  rec.seed = 3;
  rec.loss = {2.0, 1.0, 0.5, 0.4};
  rec.loss_star = {0.0, 0.0, 0.0, 0.0};
  rec.grad_sq_norm = {1.0, 0.5, 1e-5, 1.0};
  rec.horizon = 4;
  SummaryRow row = summarize(rec, 1e-4);
  CHECK(row.steps_to_eps == 3);  // reached at t=2, reported as T=3
  CHECK(row.final_loss == 0.4);
  CHECK(row.min_grad_sq == 1e-5);
  CHECK(row.final_regret == doctest::Approx(3.9));

  SummaryRow never = summarize(rec, 1e-9);
  CHECK(never.steps_to_eps == 4);  // horizon when the threshold is missed
}

TEST_CASE("baseline grid rows carry empty divergence") {
  fs::path dir = fresh_dir("base");
  ExperimentConfig cfg;
  cfg.method = "adagrad";
  cfg.alpha0s = {0.5, 1.0};
  cfg.seeds = {1};
  cfg.problem = "quadratic";
  cfg.dim = 2;
  cfg.horizon = 15;
  cfg.out_dir = dir.string();
  validate(cfg);
  std::vector<SummaryRow> rows = run_grid(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "adagrad");
  CHECK(rows[0].divergence.empty());
}

TEST_CASE("csv problem end to end") {
  std::string data = write_file("data.csv",
                                "a,b,label\n"
                                "0.5,1.0,1\n"
                                "-0.25,0.5,0\n"
                                "1.5,-1.0,1\n"
                                "-1.0,-0.5,0\n");
  fs::path dir = fresh_dir("csv");
  ExperimentConfig cfg;
  cfg.problem = "csv:" + data;
  cfg.divergences = {"kl"};
  cfg.rule = "alternating";
  cfg.reg = 1e-2;
  cfg.horizon = 20;
  cfg.out_dir = dir.string();
  validate(cfg);
  RunRecord rec = run_single(cfg);
  CHECK(rec.dim == 2);
  CHECK(rec.loss.back() < rec.loss.front());
}

TEST_CASE("epochs set the horizon for streams") {
  ExperimentConfig cfg;
  cfg.problem = "quadratic";
  cfg.dim = 2;
  cfg.batch_size = 2;
  cfg.stream_samples = 8;
  cfg.epochs = 3;  // 3 * (8/2) = 12 steps
  cfg.out_dir = fresh_dir("epochs").string();
  validate(cfg);
  RunRecord rec = run_single(cfg);
  CHECK(rec.steps() == 12);
  CHECK(rec.batch == 2);
}
