import json
import math

import numpy as np
import pytest

import metareg


def test_builtins_listed():
    names = metareg.builtin_divergences()
    assert "kl" in names and "chi2" in names
    assert len(names) == 6


def test_divergence_evaluation():
    kl = metareg.make_builtin("kl")
    assert kl.phi(1.0) == 0.0
    assert kl.phi_prime(2.0) == pytest.approx(math.log(2.0))
    assert kl.phi_prime_inverse(1.0) == pytest.approx(math.e)
    assert kl.l == 1.0
    with pytest.raises(ValueError):
        metareg.make_builtin("nope")
    with pytest.raises(ValueError):
        kl.phi_prime_inverse(-1.0)


def test_exact_rate_solves_optimality_condition():
    chi2 = metareg.make_builtin("chi2")
    a = metareg.solve_exact_rate(chi2, 1.0, 1.0)
    assert chi2.phi_prime(1.0 / a) == pytest.approx(a * a, abs=1e-10)
    assert metareg.solve_sc_exact_rate(chi2, 1.0, 2.0, 1.0) == pytest.approx(
        0.6823278038280194
    )


def test_solve_monotone_accepts_python_callables():
    root = metareg.solve_monotone(lambda v: v * v * v - 2.0, 1.0, 2.0)
    assert root == pytest.approx(2.0 ** (1.0 / 3.0))
    with pytest.raises(metareg.NoRootError):
        metareg.solve_monotone(lambda v: v + 1.0, 0.5, 1.0)


def test_run_quadratic_records_trace():
    p = metareg.make_quadratic(6, 0.5, 2.0, 3)
    rec = metareg.run(
        p, divergence="chi2", rule="alternating", alpha0=0.5, horizon=200, seed=1
    )
    assert rec.steps == 200
    assert rec.loss[-1] < rec.loss[0]
    assert min(rec.alpha_min) > 0.0
    data = json.loads(rec.to_json())
    assert data["schema"] == "metareg-run-v1"
    assert data["divergence"] == "chi2"
    assert len(data["steps"]["loss"]) == 200


def test_bound_dominates_regret():
    p = metareg.make_quadratic(4, 0.5, 2.0, 5)
    rec = metareg.run(p, divergence="kl", rule="exact", alpha0=0.5, horizon=300, seed=2)
    regret = metareg.regret_curve(rec)
    bound = metareg.bound_thm5_curve(rec)
    assert all(b >= r - 1e-9 for r, b in zip(regret, bound))
    assert metareg.loglog_slope(bound, 150) < 1.0


def test_baseline_on_minibatch_stream():
    p = metareg.make_quadratic(5, 0.5, 1.5, 7)
    p.stream.batch_size = 1
    p.stream.n_samples = 40
    p.stream.sample_noise = 0.2
    p.stream.sample_seed = 11
    rec = metareg.run_baseline(p, "adagrad", alpha0=0.5, horizon=80, seed=3)
    assert rec.method == "adagrad"
    assert rec.batch == 1
    assert metareg.min_grad_norm(rec) <= rec.grad_sq_norm[0]
    with pytest.raises(ValueError):
        metareg.run_baseline(p, "bb1", alpha0=0.5, horizon=10, seed=3)


def test_custom_divergence_matches_builtin():
    custom = metareg.make_custom(
        "chi2_py",
        phi=lambda z: (z - 1.0) ** 2,
        phi_prime=lambda z: 2.0 * (z - 1.0),
        l=2.0,
        phi_double_prime=lambda z: 2.0,
    )
    ref = metareg.make_builtin("chi2")
    for g_sq in (0.3, 3.0, 40.0):
        assert metareg.solve_exact_rate(custom, 1.0, g_sq) == pytest.approx(
            metareg.solve_exact_rate(ref, 1.0, g_sq), abs=1e-9
        )
    rec = metareg.run_custom(
        metareg.make_quadratic(3, 0.5, 1.0, 2), custom, rule="exact", horizon=50
    )
    assert rec.divergence == "chi2_py"


def test_numpy_interop_and_optimum():
    p = metareg.make_logistic(60, 4, 1e-2, 9)
    g = metareg.gradient(p, np.zeros(4))
    assert g.shape == (4,)
    xs = metareg.optimum(p)
    assert np.linalg.norm(metareg.gradient(p, xs)) <= 1e-8
    assert metareg.d_phi(
        metareg.make_builtin("kl"), np.array([1.0]), np.array([2.0])
    ) == pytest.approx(0.1931471805599453)


def test_online_stream_view():
    p = metareg.make_quadratic(3, 0.5, 1.0, 4)
    p.stream.batch_size = 2
    p.stream.n_samples = 10
    p.stream.sample_noise = 0.3
    p.stream.sample_seed = 6
    s = metareg.OnlineStream(p, 2, 15, 1)
    assert s.horizon == 15
    x = np.zeros(3)
    assert s.gradient(0, x).shape == (3,)
    assert math.isfinite(s.loss(14, x))
    assert s.comparator().shape == (3,)


def test_acceptance_hook():
    assert list(metareg.acceptance_ids()) == list(range(1, 13))
    r = metareg.run_acceptance_check(11)
    assert r.passed, r.detail
