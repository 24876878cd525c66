"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line with the measured
value next to its pinned tolerance; the lines are repeated together in the
terminal summary.
"""

import itertools
import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES
from scipy.integrate import quad

from fracsolve.cli import main
from fracsolve.direct import DirectProblemSpec, kernel, kernel_primitive, solve_direct, verify_direct
from fracsolve.fracops import SampledFunction, hilfer_derivative, rl_derivative_gl, rl_integral
from fracsolve.functions import Bubble, Constant, Power, Separable, SineMode, SineSum
from fracsolve.inverse import (
    InverseProblemSpec,
    InverseSolution,
    denominator,
    reconstruct_field,
    reconstruct_source,
    verify_inverse,
)
from fracsolve.problem import FractionalOrders
from fracsolve.specfun import MLParams, check_gamma_monotonicity, ml_bivariate
from fracsolve.spectral import SpaceGrid, analyze

DEFAULT = FractionalOrders(0.8, 0.4, 1.0, 0.5, 0.5, 1.0)
# orders for which the gamma monotonicity condition holds, opening the weak-profile route
WEAK_ROUTE = FractionalOrders(0.9, 0.3, 1.0, 1.0, 0.5, 1.0)

_INITIAL_LIMITS = {}


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel_l2(num, exact, t, t_min=0.02):
    m = t >= t_min * t[-1]
    return float(np.sqrt(np.sum((num[m] - exact[m]) ** 2) / np.sum(exact[m] ** 2)))


def test_criterion_01_reduction_suite(oracles):
    t0 = time.perf_counter()
    worst = 0.0
    calls = 0
    for row in oracles["reduction"].values():
        p = MLParams(*row["params"])
        for key, args in (("E_y", lambda z: (0.0, z)), ("E_x", lambda z: (z, 0.0))):
            if key not in row:
                continue
            for z, ref in zip(row["z"], row[key]):
                ref = float(ref)
                got = ml_bivariate(p, *args(z), method="auto")
                worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
                calls += 1
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-10 and elapsed < 10 and calls >= 400,
           f"max |E - E_univariate| / max(1, |E|) = {worst:.2e} (tol 1e-10) over {calls} samples "
           f"in {elapsed:.1f} s (limit 10 s)")


def _identity_combos():
    combos = []
    for i, (a1, a2, mu) in enumerate(itertools.product((0.5, 0.8), (0.2, 0.4), (0.0, 0.5, 2.0))):
        beta = float(i % 2)
        k = (1, 5)[(i // 2) % 2]
        combos.append((FractionalOrders(a1, a2, beta, beta, mu, 1.0), k))
    return combos


def test_criterion_02_integration_identity():
    t0 = time.perf_counter()
    worst = 0.0
    combos = _identity_combos()
    assert len(combos) == 12
    assert {k for _, k in combos} == {1, 5} and {o.beta1 for o, _ in combos} == {0.0, 1.0}
    for orders, k in combos:
        a1 = orders.alpha1
        for t in (0.5, 1.0):

            def smooth(z):
                # adaptive quadrature with the z^(alpha1 - 1) singularity as its weight
                return 1 / math.gamma(a1) if z == 0 else kernel(k, orders, z) * z ** (1 - a1)

            val, _ = quad(smooth, 0, t, weight="alg", wvar=(a1 - 1, 0), epsabs=0, epsrel=1e-10, limit=200)
            ref = kernel_primitive(k, orders, t, 1)
            worst = max(worst, abs(val - ref) / abs(ref))
    elapsed = time.perf_counter() - t0
    report(2, worst <= 1e-6 and elapsed < 60,
           f"max relative error {worst:.2e} (tol 1e-6) over 12 combinations x 2 end times in {elapsed:.1f} s (limit 60 s)")


def test_criterion_03_power_rule_battery():
    t = np.linspace(0.0, 1.0, 2001)
    worst = 0.0
    for p in (0.0, 0.5, 1.0, 2.0):
        for a in (0.3, 0.5, 0.8):
            num = rl_integral(SampledFunction(t, t**p), a).values
            exact = math.gamma(p + 1) / math.gamma(p + a + 1) * t ** (p + a)
            worst = max(worst, rel_l2(num, exact, t))
    for p in (0.5, 1.0, 1.5, 2.0):
        for a in (0.3, 0.5, 0.8):
            for b in (0.0, 0.5, 1.0):
                num = hilfer_derivative(SampledFunction(t, t**p), a, b).values
                with np.errstate(divide="ignore"):
                    exact = math.gamma(p + 1) / math.gamma(p + 1 - a) * t ** (p - a)
                worst = max(worst, rel_l2(num, exact, t))

    def max_err(n, a):
        tt = np.linspace(0.0, 1.0, n + 1)
        num = rl_integral(SampledFunction(tt, tt**2), a).values
        return float(np.max(np.abs(num - 2 / math.gamma(3 + a) * tt ** (2 + a))))

    ratio = min(max_err(1000, a) / max_err(2000, a) for a in (0.3, 0.5, 0.8))
    report(3, worst <= 1e-4 and ratio >= 3.5,
           f"max relative L2 error (t >= 2% T) {worst:.2e} (tol 1e-4) at N_t=2000; "
           f"min refinement ratio of I^a t^2 {ratio:.2f} (min 3.5)")


@pytest.mark.slow
def test_criterion_04_direct_residual():
    t0 = time.perf_counter()
    cases = [
        ("sin(pi x)", Separable(Constant(), SineMode(1)), False),
        ("t x(1-x) waived", Separable(Power(1.0), Bubble()), True),
    ]
    worst = 0.0
    for name, src, waive in cases:
        spec = DirectProblemSpec(DEFAULT, source=src, K=16, n_steps=2000, M=256, waive_compat=waive)
        field_ = solve_direct(spec)
        rep = verify_direct(field_, spec)
        assert not rep.excluded_modes
        worst = max(worst, rep.relative)
        _INITIAL_LIMITS[f"direct {name}"] = (rep.initial_limits, 16)
    elapsed = time.perf_counter() - t0
    report(4, worst <= 1e-2 and elapsed < 300,
           f"max relative residual {worst:.2e} (tol 1e-2) for both sources, t >= 2% T, in {elapsed:.1f} s (limit 300 s)")


def _round_trip(orders, waive):
    g = Bubble()
    dspec = DirectProblemSpec(orders, source=Separable(Constant(), g), K=64, n_steps=4000, M=1024,
                              waive_compat=waive)
    phi = solve_direct(dspec).u[-1]
    ispec = InverseProblemSpec(orders, phi, K=64, n_steps=4000, M=1024, waive_compat=True)
    recovered = reconstruct_source(ispec).coeffs[:8]
    exact = analyze(g(SpaceGrid(1024).points), 64).coeffs[:8]
    # even coefficients of x(1-x) vanish; compare them against the largest coefficient instead
    scale = np.where(np.abs(exact) > 1e-12 * np.max(np.abs(exact)), np.abs(exact), np.max(np.abs(exact)))
    return float(np.max(np.abs(recovered - exact) / scale))


@pytest.mark.slow
@pytest.mark.filterwarnings("ignore:phi has no analytic derivatives")
def test_criterion_05_round_trip():
    t0 = time.perf_counter()
    errs = {"waived default orders": _round_trip(DEFAULT, True), "weak-route orders": _round_trip(WEAK_ROUTE, False)}
    elapsed = time.perf_counter() - t0
    worst = max(errs.values())
    detail = ", ".join(f"{k} {v:.2e}" for k, v in errs.items())
    report(5, worst <= 1e-3 and elapsed < 300,
           f"max relative coefficient error k <= 8: {detail} (tol 1e-3) at N_t=4000 in {elapsed:.1f} s (limit 300 s)")


def test_criterion_06_final_time_interpolation():
    worst = 0.0
    for phi in (SineMode(2, 0.7), SineSum([1, 3, 6], [1.0, -0.4, 0.15])):
        spec = InverseProblemSpec(DEFAULT, phi, K=16, n_steps=500, M=256)
        g = reconstruct_source(spec)
        field_ = reconstruct_field(spec, g)
        worst = max(worst, float(np.max(np.abs(field_.u[-1] - spec.phi_samples()))))
        den = np.array([denominator(k, DEFAULT) for k in range(1, 17)])
        rep = verify_inverse(InverseSolution(g, field_, den, spec.eps_den), spec, residual=False)
        _INITIAL_LIMITS[f"inverse {phi!r}"] = (rep.initial_limits, 16)
    report(6, worst <= 1e-9, f"max |u(T,x) - phi(x)| = {worst:.2e} (tol 1e-9) for one- and three-mode phi")


def test_criterion_07_initial_limits():
    if not any(k.startswith("direct") for k in _INITIAL_LIMITS):
        # run standalone: take the limits from a direct solve of the same size
        spec = DirectProblemSpec(DEFAULT, source=Separable(Power(1.0), Bubble()), K=16, n_steps=2000, M=256,
                                 waive_compat=True)
        _INITIAL_LIMITS["direct"] = (verify_direct(solve_direct(spec), spec).initial_limits, 16)
    if not any(k.startswith("inverse") for k in _INITIAL_LIMITS):
        test_criterion_06_final_time_interpolation()
    worst, count, complete = 0.0, 0, True
    for limits, K in _INITIAL_LIMITS.values():
        complete &= sorted(limits) == list(range(1, K + 1))
        for pair in limits.values():
            for est in pair:
                worst = max(worst, abs(est.value))
                count += 1
    report(7, worst <= 1e-6 and complete,
           f"max |initial limit| {worst:.2e} (tol 1e-6) over {count} estimates, both derivative terms, all modes")


def test_criterion_08_degeneracy_exit(tmp_path, capsys):
    k_bad = 6
    eps = denominator(k_bad, DEFAULT) * 1.01
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[orders]\nalpha1 = 0.8\nalpha2 = 0.4\nbeta1 = 1.0\nbeta2 = 0.5\nmu = 0.5\nT = 1.0\n"
        "[discretization]\nK = 8\nN_t = 200\nM = 64\n"
        f"[observation]\nspace = sin\nspace.n = 1\n[inverse]\neps_den = {eps!r}\n"
    )
    out = tmp_path / "out"
    code = main(["inverse", "--config", str(cfg), "--out-dir", str(out)])
    err = capsys.readouterr().err
    csvs = sorted(p.name for p in out.glob("*.csv"))
    named = f"k={k_bad} " in err
    report(8, code == 3 and named and not csvs,
           f"exit code {code} (want 3), offending mode k={k_bad} named: {named}, CSV files written: {csvs or 'none'}")


def test_criterion_09_classical_reductions(oracles):
    # mu = 0, beta1 = 1, constant source c: Caputo closed form c t^a E_{a,a+1}(-lambda_k t^a)
    worst_caputo = 0.0
    c = 0.75
    for alpha in (0.5, 0.8):
        orders = FractionalOrders(alpha, alpha / 2, 1.0, 1.0, 0.0, 1.0)
        spec = DirectProblemSpec(orders, source=Separable(Constant(c), SineSum([1, 2, 3], [1.0, 1.0, 1.0])),
                                 K=4, n_steps=2000, M=256)
        field_ = solve_direct(spec)
        for row in oracles["caputo"]:
            if row["alpha"] != alpha:
                continue
            n = int(round(row["t"] / orders.T * 2000))
            worst_caputo = max(worst_caputo, abs(field_.modes[n, row["k"] - 1] - c * row["value"]))
    # beta1 = 0: the Hilfer path against Grunwald-Letnikov, Richardson-extrapolated from h and 2h
    worst_rl = 0.0
    fine = np.linspace(0.0, 1.0, 4001)
    t = fine[::2]
    for alpha in (0.5, 0.8):
        for f in (lambda s: s * np.sin(2 * s), lambda s: s**1.5, lambda s: s**2):
            gl_h = rl_derivative_gl(SampledFunction(fine, f(fine)), alpha).values[::2]
            gl_2h = rl_derivative_gl(SampledFunction(t, f(t)), alpha).values
            reference = 2 * gl_h - gl_2h
            num = hilfer_derivative(SampledFunction(t, f(t)), alpha, 0.0).values
            worst_rl = max(worst_rl, rel_l2(num, reference, t))
    report(9, worst_caputo <= 1e-6 and worst_rl <= 1e-6,
           f"Caputo closed form max error {worst_caputo:.2e} (tol 1e-6); "
           f"beta=0 vs independent RL relative L2 {worst_rl:.2e} (tol 1e-6)")


def _brute_force(p, n_max):
    step = p.b - p.a
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            if not math.gamma(p.rho + n * p.a + k * step) > math.gamma(p.rho + n * p.a):
                return False, (n, k)
    return True, None


def test_criterion_10_gamma_monotonicity():
    battery = [FractionalOrders(a1, a2).ml_params(shift)
               for a1, a2 in ((0.5, 0.2), (0.8, 0.4), (0.9, 0.3), (0.6, 0.3), (0.95, 0.1))
               for shift in (0.0, 1.0)]
    t0 = time.perf_counter()
    results = [check_gamma_monotonicity(p, 50) for p in battery]
    elapsed = time.perf_counter() - t0
    agree = all(r == _brute_force(p, 50) for p, r in zip(battery, results))
    synthetic = MLParams(0.1, 0.3, 0.05)
    ok, where = check_gamma_monotonicity(synthetic, 50)
    n, k = where if where else (0, 0)
    confirmed = (not ok and where is not None and
                 math.gamma(synthetic.rho + n * synthetic.a + k * (synthetic.b - synthetic.a))
                 <= math.gamma(synthetic.rho + n * synthetic.a))
    report(10, elapsed < 1.0 and agree and confirmed,
           f"{len(battery)} parameter sets checked to n=50 in {elapsed * 1e3:.1f} ms (limit 1 s), "
           f"agree with direct Gamma comparison: {agree}; synthetic rho=0.05 flagged at (n,k)={where}, "
           f"confirmed: {confirmed}")
