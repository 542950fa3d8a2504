#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metareg/acceptance.hpp"
#include "metareg/baselines.hpp"
#include "metareg/divergence.hpp"
#include "metareg/metrics.hpp"
#include "metareg/optimizer.hpp"
#include "metareg/problems.hpp"
#include "metareg/solver.hpp"

namespace py = pybind11;
using namespace metareg;

namespace {

RunRecord run_meta(const ProblemInstance& problem, const std::string& divergence,
                   const std::string& rule, double alpha0, double lambda,
                   double clip_factor, long horizon, std::uint64_t seed,
                   const std::vector<double>& eta_schedule) {
  OptimizerConfig cfg;
  cfg.divergence = make_builtin(divergence);
  cfg.rule = parse_rule(rule);
  cfg.alpha0 = alpha0;
  cfg.lambda = lambda;
  cfg.clip_factor = clip_factor;
  cfg.eta_override = eta_schedule;
  return run(cfg, problem, horizon, seed);
}

RunRecord run_meta_custom(const ProblemInstance& problem,
                          const DivergenceSpec& divergence,
                          const std::string& rule, double alpha0, double lambda,
                          double clip_factor, long horizon, std::uint64_t seed) {
  OptimizerConfig cfg;
  cfg.divergence = divergence;
  cfg.rule = parse_rule(rule);
  cfg.alpha0 = alpha0;
  cfg.lambda = lambda;
  cfg.clip_factor = clip_factor;
  return run(cfg, problem, horizon, seed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "meta-regularization adaptive learning-rate optimizers";
  m.attr("__version__") = "0.1.0";

  py::class_<DivergenceSpec>(m, "Divergence")
      .def_readonly("name", &DivergenceSpec::name)
      .def_readonly("l", &DivergenceSpec::l)
      .def_readonly("phi_prime_sup", &DivergenceSpec::phi_prime_sup)
      .def_readonly("sup_attained", &DivergenceSpec::sup_attained)
      .def("phi", [](const DivergenceSpec& s, double t) { return s.phi(t); },
           py::arg("t"))
      .def("phi_prime",
           [](const DivergenceSpec& s, double t) { return s.phi_prime(t); },
           py::arg("t"))
      .def("phi_prime_inverse",
           [](const DivergenceSpec& s, double y) { return s.phi_prime_inverse(y); },
           py::arg("y"))
      .def("gamma", [](const DivergenceSpec& s, double Z) { return s.gamma(Z); },
           py::arg("Z"), "infimum of phi'' over [1, Z]")
      .def("in_inverse_domain", &DivergenceSpec::in_inverse_domain, py::arg("y"))
      .def("__repr__", [](const DivergenceSpec& s) {
        return "<Divergence " + s.name + ">";
      });

  m.def("builtin_divergences",
        []() { return builtin_divergences(); },
        "names of the bundled generators");
  m.def("make_builtin", &make_builtin, py::arg("name"));
  m.def(
      "make_custom",
      [](const std::string& name, std::function<double(double)> phi,
         std::function<double(double)> phi_prime, double l,
         std::function<double(double)> phi_double_prime,
         std::function<double(double)> phi_prime_inverse,
         std::function<double(double)> gamma, double phi_prime_sup,
         bool sup_attained) {
        CustomDivergence def;
        def.name = name;
        def.phi = std::move(phi);
        def.phi_prime = std::move(phi_prime);
        def.l = l;
        def.phi_double_prime = std::move(phi_double_prime);
        def.phi_prime_inverse = std::move(phi_prime_inverse);
        def.gamma = std::move(gamma);
        def.phi_prime_sup = phi_prime_sup;
        def.sup_attained = sup_attained;
        return make_custom(def);
      },
      py::arg("name"), py::arg("phi"), py::arg("phi_prime"), py::arg("l"),
      py::arg("phi_double_prime") = nullptr, py::arg("phi_prime_inverse") = nullptr,
      py::arg("gamma") = nullptr,
      py::arg("phi_prime_sup") = std::numeric_limits<double>::infinity(),
      py::arg("sup_attained") = false,
      "register a user generator; derivatives beyond phi' are optional");
  m.def("d_phi", &d_phi, py::arg("divergence"), py::arg("u"), py::arg("v"),
        "sum_j phi(v_j/u_j)/v_j");
  m.def("sc_distance", &sc_distance, py::arg("divergence"), py::arg("u"),
        py::arg("v"), "sum_j phi(v_j/u_j)");

  m.def("solve_exact_rate", &solve_exact_rate, py::arg("divergence"),
        py::arg("eta"), py::arg("g_sq"),
        "alpha in (0, eta] with phi'(eta/alpha) = alpha^2 g_sq");
  m.def("solve_sc_exact_rate", &solve_sc_exact_rate, py::arg("divergence"),
        py::arg("alpha_t"), py::arg("g_sq"), py::arg("lambda_"),
        "alpha with lambda (alpha_t/alpha^2) phi'(alpha_t/alpha) = g_sq");
  m.def(
      "solve_monotone",
      [](std::function<double(double)> residual, double lo, double hi,
         std::function<double(double)> derivative, double tol_abs) {
        RootProblem p;
        p.residual = std::move(residual);
        p.derivative = std::move(derivative);
        p.lo = lo;
        p.hi = hi;
        p.tol_abs = tol_abs;
        return solve_monotone(p);
      },
      py::arg("residual"), py::arg("lo"), py::arg("hi"),
      py::arg("derivative") = nullptr, py::arg("tol_abs") = 0.0,
      "root of a nondecreasing residual; the bracket expands upward");

  py::class_<StreamConfig>(m, "StreamConfig")
      .def(py::init<>())
      .def_readwrite("batch_size", &StreamConfig::batch_size)
      .def_readwrite("n_samples", &StreamConfig::n_samples)
      .def_readwrite("sample_noise", &StreamConfig::sample_noise)
      .def_readwrite("sample_seed", &StreamConfig::sample_seed);

  py::class_<ProblemInstance>(m, "Problem")
      .def_property_readonly("kind",
                             [](const ProblemInstance& p) {
                               return p.kind == ProblemKind::quadratic
                                          ? "quadratic"
                                          : "logistic";
                             })
      .def_readonly("A", &ProblemInstance::A)
      .def_readonly("b", &ProblemInstance::b)
      .def_readonly("X", &ProblemInstance::X)
      .def_readonly("y", &ProblemInstance::y)
      .def_readonly("reg", &ProblemInstance::reg)
      .def_readonly("mu_min", &ProblemInstance::mu_min)
      .def_readonly("mu_max", &ProblemInstance::mu_max)
      .def_readwrite("x0", &ProblemInstance::x0)
      .def_readwrite("stream", &ProblemInstance::stream)
      .def_property_readonly("dim", &ProblemInstance::dim)
      .def("describe", &ProblemInstance::describe)
      .def("__repr__",
           [](const ProblemInstance& p) { return "<Problem " + p.describe() + ">"; });

  m.def("make_quadratic", &make_quadratic, py::arg("d"), py::arg("mu_min"),
        py::arg("mu_max"), py::arg("seed"));
  m.def("make_logistic", &make_logistic, py::arg("n"), py::arg("d"),
        py::arg("reg"), py::arg("seed"), py::arg("feature_scale") = 7.0,
        py::arg("label_noise") = 3.5);
  m.def("load_csv_dataset", &load_csv_dataset, py::arg("path"), py::arg("reg"));
  m.def("loss", &loss, py::arg("problem"), py::arg("x"));
  m.def("gradient", &gradient, py::arg("problem"), py::arg("x"));
  m.def("optimum", &optimum, py::arg("problem"));
  m.def("mu_min_of", &mu_min_of, py::arg("problem"));

  py::class_<OnlineStream>(m, "OnlineStream")
      .def(py::init<const ProblemInstance&, int, long, std::uint64_t>(),
           py::arg("problem"), py::arg("batch_size"), py::arg("horizon"),
           py::arg("seed"), py::keep_alive<1, 2>())
      .def_property_readonly("horizon", &OnlineStream::horizon)
      .def("loss", &OnlineStream::loss, py::arg("t"), py::arg("x"))
      .def("gradient", &OnlineStream::gradient, py::arg("t"), py::arg("x"))
      .def("comparator", &OnlineStream::comparator);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("config", &RunRecord::config)
      .def_readonly("method", &RunRecord::method)
      .def_readonly("divergence", &RunRecord::divergence)
      .def_readonly("rule", &RunRecord::rule)
      .def_readonly("alpha0", &RunRecord::alpha0)
      .def_readonly("lambda_", &RunRecord::lambda)
      .def_readonly("clip_factor", &RunRecord::clip_factor)
      .def_readonly("gamma_at_clip", &RunRecord::gamma_at_clip)
      .def_readonly("phi_l", &RunRecord::phi_l)
      .def_readonly("seed", &RunRecord::seed)
      .def_readonly("dim", &RunRecord::dim)
      .def_readonly("batch", &RunRecord::batch)
      .def_readonly("horizon", &RunRecord::horizon)
      .def_readonly("x_start", &RunRecord::x_start)
      .def_readonly("x_star", &RunRecord::x_star)
      .def_readonly("mu_min", &RunRecord::mu_min)
      .def_readonly("loss", &RunRecord::loss)
      .def_readonly("loss_star", &RunRecord::loss_star)
      .def_readonly("grad_sq_norm", &RunRecord::grad_sq_norm)
      .def_readonly("grad_inf", &RunRecord::grad_inf)
      .def_readonly("dist_inf", &RunRecord::dist_inf)
      .def_readonly("alpha_min", &RunRecord::alpha_min)
      .def_readonly("alpha_max", &RunRecord::alpha_max)
      .def_readonly("grad_sq_coord", &RunRecord::grad_sq_coord)
      .def_readonly("clip_hits", &RunRecord::clip_hits)
      .def_readonly("domain_clips", &RunRecord::domain_clips)
      .def_readonly("floor_hits", &RunRecord::floor_hits)
      .def_readonly("aborted", &RunRecord::aborted)
      .def_readonly("abort_reason", &RunRecord::abort_reason)
      .def_property_readonly("steps", &RunRecord::steps)
      .def("to_json", &record_to_json)
      .def("__repr__", [](const RunRecord& r) {
        return "<RunRecord " + r.method +
               (r.divergence.empty() ? "" : " " + r.divergence + " " + r.rule) +
               " steps=" + std::to_string(r.steps()) + ">";
      });

  m.def("run", &run_meta, py::arg("problem"), py::arg("divergence") = "kl",
        py::arg("rule") = "exact", py::arg("alpha0") = 1.0,
        py::arg("lambda_") = 1.0, py::arg("clip_factor") = 0.5,
        py::arg("horizon") = 100, py::arg("seed") = 1,
        py::arg("eta_schedule") = std::vector<double>{},
        "drive a meta-regularization rule over a problem, returning the trace");
  m.def("run_custom", &run_meta_custom, py::arg("problem"), py::arg("divergence"),
        py::arg("rule") = "exact", py::arg("alpha0") = 1.0,
        py::arg("lambda_") = 1.0, py::arg("clip_factor") = 0.5,
        py::arg("horizon") = 100, py::arg("seed") = 1,
        "same as run() but with a Divergence object (e.g. from make_custom)");
  m.def(
      "run_baseline",
      [](const ProblemInstance& problem, const std::string& method, double alpha0,
         long horizon, double hyper_beta, std::uint64_t seed) {
        BaselineOptions opts;
        opts.hyper_beta = hyper_beta;
        opts.seed = seed;
        return run_baseline(method, problem, alpha0, horizon, opts);
      },
      py::arg("problem"), py::arg("method"), py::arg("alpha0") = 1.0,
      py::arg("horizon") = 100, py::arg("hyper_beta") = 1e-4, py::arg("seed") = 1,
      "gd | adagrad | wngrad | bb1 | bb2 | hypergrad");

  m.def("regret_curve", &regret_curve, py::arg("record"));
  m.def("min_grad_norm", &min_grad_norm, py::arg("record"), py::arg("T") = -1);
  m.def("bound_thm5_curve", &bound_thm5_curve, py::arg("record"));
  m.def("bound_thm5", &bound_thm5, py::arg("record"));
  m.def("bound_log_curve", &bound_log_curve, py::arg("record"));
  m.def("bound_log", &bound_log, py::arg("record"));
  m.def("loglog_slope", &loglog_slope, py::arg("curve"), py::arg("window"));
  m.def("lambda_floor", &lambda_floor, py::arg("problem"), py::arg("divergence"),
        py::arg("grad_inf_bound"), py::arg("clip_factor"));

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("id", &CheckResult::id)
      .def_readonly("name", &CheckResult::name)
      .def_readonly("passed", &CheckResult::passed)
      .def_readonly("detail", &CheckResult::detail)
      .def_readonly("seconds", &CheckResult::seconds)
      .def("__repr__", [](const CheckResult& r) { return format_check_line(r); });
  m.def("acceptance_ids", &acceptance_ids);
  m.def("run_acceptance_check", &run_acceptance_check, py::arg("id"));

  py::register_exception<NoRootError>(m, "NoRootError", PyExc_ArithmeticError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError",
                                           PyExc_ArithmeticError);
}
