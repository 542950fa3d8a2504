#include "metareg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "metareg/baselines.hpp"
#include "metareg/optimizer.hpp"

namespace metareg {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid numeric value for " + key + ": '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid integer value for " + key + ": '" + v + "'");
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

const char* kMethods[] = {"meta", "adagrad", "wngrad", "bb1",
                          "bb2",  "hypergrad", "gd"};

}  // namespace

std::vector<double> parse_alpha_sweep(const std::string& text) {
  std::vector<std::string> parts = split(text, ':');
  if (parts.size() == 1) return {to_double("alpha0", parts[0])};
  if (parts.size() != 3)
    throw std::invalid_argument("alpha0 sweep must be a number or lo:hi:count, got '" +
                                text + "'");
  double lo = to_double("alpha0 sweep lo", parts[0]);
  double hi = to_double("alpha0 sweep hi", parts[1]);
  long count = to_long("alpha0 sweep count", parts[2]);
  if (!(lo > 0.0) || !(hi >= lo) || count < 1)
    throw std::invalid_argument("alpha0 sweep needs 0 < lo <= hi and count >= 1");
  std::vector<double> out;
  if (count == 1) {
    out.push_back(lo);
    return out;
  }
  double llo = std::log(lo), lhi = std::log(hi);
  for (long i = 0; i < count; ++i) {
    double v = std::exp(llo + (lhi - llo) * i / (count - 1));
    /* snap log-spacing artifacts (1.0000000000000004) to tidy values */
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out.push_back(std::strtod(buf, nullptr));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  cfg.raw[key] = value;
  if (key == "method") cfg.method = value;
  else if (key == "divergence") cfg.divergences = split(value, ',');
  else if (key == "rule") cfg.rule = value;
  else if (key == "alpha0") cfg.alpha0s = parse_alpha_sweep(value);
  else if (key == "lambda") cfg.lambda = to_double(key, value);
  else if (key == "clip_factor") cfg.clip_factor = to_double(key, value);
  else if (key == "hyper_beta") cfg.hyper_beta = to_double(key, value);
  else if (key == "problem") cfg.problem = value;
  else if (key == "dim") cfg.dim = static_cast<int>(to_long(key, value));
  else if (key == "mu_min") cfg.mu_min = to_double(key, value);
  else if (key == "mu_max") cfg.mu_max = to_double(key, value);
  else if (key == "n") cfg.n = static_cast<int>(to_long(key, value));
  else if (key == "reg") cfg.reg = to_double(key, value);
  else if (key == "feature_scale") cfg.feature_scale = to_double(key, value);
  else if (key == "label_noise") cfg.label_noise = to_double(key, value);
  else if (key == "batch_size") cfg.batch_size = static_cast<int>(to_long(key, value));
  else if (key == "stream_samples") cfg.stream_samples = static_cast<int>(to_long(key, value));
  else if (key == "stream_noise") cfg.stream_noise = to_double(key, value);
  else if (key == "horizon") cfg.horizon = to_long(key, value);
  else if (key == "epochs") cfg.epochs = to_long(key, value);
  else if (key == "seed") {
    cfg.seeds.clear();
    for (const std::string& s : split(value, ','))
      cfg.seeds.push_back(static_cast<std::uint64_t>(to_long(key, s)));
  } else if (key == "out") cfg.out_dir = value;
  else if (key == "eps") cfg.eps = to_double(key, value);
  else if (key == "threads") cfg.threads = static_cast<int>(to_long(key, value));
  else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + line + "'");
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  bool ok = false;
  for (const char* m : kMethods) ok = ok || cfg.method == m;
  if (!ok) throw std::invalid_argument("unknown method: " + cfg.method);
  if (cfg.method == "meta") {
    parse_rule(cfg.rule);
    if (cfg.divergences.empty())
      throw std::invalid_argument("need at least one divergence");
    for (const std::string& d : cfg.divergences) make_builtin(d);
  }
  if (cfg.alpha0s.empty()) throw std::invalid_argument("need at least one alpha0");
  for (double a : cfg.alpha0s)
    if (!(a > 0.0)) throw std::invalid_argument("alpha0 must be positive");
  if (!(cfg.clip_factor > 0.0) || cfg.clip_factor > 1.0)
    throw std::invalid_argument("clip_factor must be in (0,1]");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (cfg.problem != "quadratic" && cfg.problem != "logistic" &&
      cfg.problem.rfind("csv:", 0) != 0)
    throw std::invalid_argument("problem must be quadratic, logistic or csv:<path>");
  if (cfg.horizon < 0 || (cfg.horizon == 0 && cfg.epochs < 1))
    throw std::invalid_argument("need horizon > 0 or epochs >= 1");
  if (cfg.batch_size < 0) throw std::invalid_argument("batch_size must be >= 0");
  if (cfg.seeds.empty()) throw std::invalid_argument("need at least one seed");
  if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (cfg.method != "meta" && cfg.batch_size > 0 &&
      (cfg.method == "bb1" || cfg.method == "bb2"))
    throw std::invalid_argument("BB methods are full-batch only");
}

ProblemInstance build_problem(const ExperimentConfig& cfg, std::uint64_t seed) {
  ProblemInstance p;
  if (cfg.problem == "quadratic") {
    p = make_quadratic(cfg.dim, cfg.mu_min, cfg.mu_max, seed);
    p.stream.n_samples = cfg.stream_samples;
    p.stream.sample_noise = cfg.stream_noise;
    p.stream.sample_seed = seed;
  } else if (cfg.problem == "logistic") {
    p = make_logistic(cfg.n, cfg.dim, cfg.reg, seed, cfg.feature_scale,
                      cfg.label_noise);
  } else {
    p = load_csv_dataset(cfg.problem.substr(4), cfg.reg);
  }
  p.stream.batch_size = cfg.batch_size;
  return p;
}

namespace {

long effective_horizon(const ExperimentConfig& cfg, const ProblemInstance& p) {
  if (cfg.horizon > 0) return cfg.horizon;
  if (cfg.batch_size > 0) {
    long n = p.kind == ProblemKind::quadratic ? p.stream.n_samples : p.X.rows();
    long per_epoch = std::max<long>(1, n / cfg.batch_size);
    return cfg.epochs * per_epoch;
  }
  return cfg.epochs;
}

RunRecord run_cell(const ExperimentConfig& cfg, const std::string& divergence,
                   double alpha0, std::uint64_t seed) {
  ProblemInstance prob = build_problem(cfg, seed);
  long horizon = effective_horizon(cfg, prob);
  RunRecord rec;
  if (cfg.method == "meta") {
    OptimizerConfig oc;
    oc.divergence = make_builtin(divergence);
    oc.rule = parse_rule(cfg.rule);
    oc.alpha0 = alpha0;
    oc.lambda = cfg.lambda;
    oc.clip_factor = cfg.clip_factor;
    rec = run(oc, prob, horizon, seed);
  } else {
    BaselineOptions opts;
    opts.hyper_beta = cfg.hyper_beta;
    opts.seed = seed;
    rec = run_baseline(cfg.method, prob, alpha0, horizon, opts);
  }
  rec.config = cfg.raw;
  rec.config["method"] = cfg.method;
  if (cfg.method == "meta") {
    rec.config["divergence"] = divergence;
    rec.config["rule"] = cfg.rule;
  }
  rec.config["alpha0"] = fmt_short(alpha0);
  rec.config["seed"] = std::to_string(seed);
  rec.config["problem"] = prob.describe();
  rec.config["horizon"] = std::to_string(horizon);
  return rec;
}

}  // namespace

RunRecord run_single(const ExperimentConfig& cfg) {
  validate(cfg);
  std::string div = cfg.method == "meta" ? cfg.divergences.front() : "";
  return run_cell(cfg, div, cfg.alpha0s.front(), cfg.seeds.front());
}

std::string run_tag(const RunRecord& rec) {
  std::string tag = rec.method;
  if (rec.method == "meta") tag += "_" + rec.divergence + "_" + rec.rule;
  tag += "_a" + fmt_short(rec.alpha0) + "_s" + std::to_string(rec.seed);
  return tag;
}

std::vector<std::string> write_run_outputs(const RunRecord& rec,
                                           const std::string& out_dir,
                                           const std::string& tag) {
  std::filesystem::create_directories(out_dir);
  std::string base = out_dir + "/" + tag;
  write_record_json(rec, base + ".json");
  write_record_csv(rec, base + ".csv");
  write_run_svg(rec, base + ".svg");
  return {base + ".json", base + ".csv", base + ".svg"};
}

SummaryRow summarize(const RunRecord& rec, double eps) {
  SummaryRow row;
  row.method = rec.method == "meta" ? "meta:" + rec.rule : rec.method;
  row.divergence = rec.divergence;
  row.alpha0 = rec.alpha0;
  row.seed = rec.seed;
  const long T = rec.steps();
  row.final_loss = T > 0 ? rec.loss.back()
                         : std::numeric_limits<double>::quiet_NaN();
  if (rec.aborted) row.final_loss = std::numeric_limits<double>::infinity();
  std::vector<double> reg = regret_curve(rec);
  row.final_regret = reg.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : reg.back();
  row.min_grad_sq = T > 0 ? min_grad_norm(rec)
                          : std::numeric_limits<double>::quiet_NaN();
  row.steps_to_eps = rec.horizon;
  double running = std::numeric_limits<double>::infinity();
  for (long t = 0; t < T; ++t) {
    running = std::min(running, rec.grad_sq_norm[t]);
    if (running <= eps) {
      row.steps_to_eps = t + 1;
      break;
    }
  }
  return row;
}

std::vector<SummaryRow> run_grid(const ExperimentConfig& cfg) {
  validate(cfg);
  struct Cell {
    std::string divergence;
    double alpha0;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  std::vector<std::string> divs =
      cfg.method == "meta" ? cfg.divergences : std::vector<std::string>{""};
  for (const std::string& d : divs)
    for (double a : cfg.alpha0s)
      for (std::uint64_t s : cfg.seeds) cells.push_back({d, a, s});

  std::vector<SummaryRow> rows(cells.size());
  std::vector<RunRecord> recs(cells.size());
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        recs[i] = run_cell(cfg, cells[i].divergence, cells[i].alpha0,
                           cells[i].seed);
        rows[i] = summarize(recs[i], cfg.eps);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  int nthreads = std::min<int>(cfg.threads, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  /* outputs written sequentially in cell order so reruns are byte-identical */
  std::filesystem::create_directories(cfg.out_dir);
  for (size_t i = 0; i < cells.size(); ++i)
    write_run_outputs(recs[i], cfg.out_dir, run_tag(recs[i]));
  write_summary_csv(rows, cfg.out_dir + "/summary.csv");
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_summary_csv: cannot open " + path);
  out << "method,divergence,alpha0,seed,final_loss,final_regret,min_grad_sq,steps_to_eps\n";
  for (const SummaryRow& r : rows) {
    out << r.method << ',' << r.divergence << ',' << fmt_double(r.alpha0) << ','
        << r.seed << ',' << fmt_double(r.final_loss) << ','
        << fmt_double(r.final_regret) << ',' << fmt_double(r.min_grad_sq) << ','
        << r.steps_to_eps << "\n";
  }
}

}  // namespace metareg
