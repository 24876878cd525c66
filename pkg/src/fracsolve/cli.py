"""Command-line front end.

Exit codes: 0 success, 1 verification below tolerance (``verify`` and
``selftest`` only), 2 invalid input, 3 numerical failure. Results are
computed in full before any CSV is written, so a failed run leaves no
partial data files; ``report.txt`` records the outcome either way.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import parse_config
from .direct import DirectProblemSpec, solve_direct, verify_direct
from .exceptions import (
    ConfigError,
    DegenerateDenominator,
    FracSolveError,
    IncompatibleSource,
    InvalidParams,
    NoConvergence,
    PrecisionLoss,
)
from .inverse import InverseProblemSpec, solve_inverse, verify_inverse
from .io import write_field, write_profile, write_series
from .specfun import MLParams, SeriesControl, gamma, ml_bivariate, ml_univariate
from .spectral import synthesize

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3

RESIDUAL_TOL = 1e-2
INITIAL_LIMIT_TOL = 1e-6


def _exit_code(exc):
    if isinstance(exc, (DegenerateDenominator, PrecisionLoss, NoConvergence)):
        return EXIT_NUMERIC
    return EXIT_INVALID


def _header(cfg, command):
    o = cfg.orders
    return [
        f"fracsolve {__version__} {command}",
        f"config: {cfg.path}",
        f"orders: alpha1={o.alpha1} alpha2={o.alpha2} beta1={o.beta1} beta2={o.beta2} mu={o.mu} T={o.T}",
        f"discretization: K={cfg.K} N_t={cfg.N_t} M={cfg.M}",
    ]


def _mode_lines(diagnostics, denominators=None, eps_den=None):
    out = ["per-mode status:"]
    for d in diagnostics:
        flag = "ok" if d.reliable else f"UNRELIABLE ({d.message})"
        extra = ""
        if denominators is not None:
            den = denominators[d.k - 1]
            extra = f"  denominator={den:.6e}  margin={abs(den) / eps_den:.3e}"
        out.append(f"  k={d.k:3d} {flag}{extra}")
    return out


def _limit_lines(limits):
    if not limits:
        return []
    worst = max(limits.items(), key=lambda kv: max(abs(e.value) for e in kv[1]))
    k, (l1, l2) = worst
    return [f"initial limits: worst mode k={k}: (alpha1,beta1) {l1.value:.3e} +- {l1.error:.1e}, "
            f"(alpha2,beta2) {l2.value:.3e} +- {l2.error:.1e}"]


def _write_report(out_dir, lines):
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / "report.txt").write_text("\n".join(lines) + "\n")


def _fmt(cfg):
    return f"%.{cfg.precision}g"


def _direct_spec(cfg):
    if cfg.source is None:
        raise ConfigError("direct problem needs a [source] section")
    return DirectProblemSpec(cfg.orders, source=cfg.source, K=cfg.K, n_steps=cfg.N_t, M=cfg.M,
                             waive_compat=cfg.waive_compat)


def _inverse_spec(cfg):
    if cfg.phi is None:
        raise ConfigError("inverse problem needs an [observation] section")
    return InverseProblemSpec(cfg.orders, cfg.phi, K=cfg.K, n_steps=cfg.N_t, M=cfg.M, eps_den=cfg.eps_den,
                              waive_compat=cfg.waive_compat)


def _run_direct(cfg, write=True):
    spec = _direct_spec(cfg)
    field_ = solve_direct(spec)
    rep = verify_direct(field_, spec)
    lines = ["route: " + field_.route, "compatibility:"] + ["  " + s for s in "\n".join(field_.compatibility).splitlines()]
    lines += _mode_lines(field_.diagnostics) + rep.lines() + _limit_lines(rep.initial_limits)
    if write:
        write_field(Path(cfg.out_dir) / "u_field.csv", field_.t, field_.x, field_.u, _fmt(cfg))
    ok = rep.relative <= RESIDUAL_TOL and rep.worst_initial_limit <= INITIAL_LIMIT_TOL
    return lines, ok


def _run_inverse(cfg, write=True):
    spec = _inverse_spec(cfg)
    sol = solve_inverse(spec)
    rep = verify_inverse(sol, spec)
    lines = [f"eps_den: {spec.eps_den:.6e}", "compatibility:"]
    lines += ["  " + s for s in "\n".join(sol.compatibility).splitlines()]
    lines += _mode_lines(sol.u_field.diagnostics, sol.denominators, spec.eps_den)
    lines += rep.lines() + _limit_lines(rep.initial_limits)
    if write:
        out = Path(cfg.out_dir)
        f = sol.u_field
        g_x = synthesize(sol.g_series, spec.grid)
        write_field(out / "u_field.csv", f.t, f.x, f.u, _fmt(cfg))
        write_series(out / "g_series.csv", sol.g_series.coeffs, fmt=_fmt(cfg))
        write_profile(out / "g_field.csv", spec.grid.points, g_x, fmt=_fmt(cfg))
    ok = rep.residual.relative <= RESIDUAL_TOL and rep.worst_initial_limit <= INITIAL_LIMIT_TOL
    return lines, ok


def _fail(exc, cfg, command, out_dir):
    code = _exit_code(exc) if isinstance(exc, FracSolveError) else EXIT_INVALID
    kind = "numerical failure" if code == EXIT_NUMERIC else "invalid input"
    msg = f"error ({kind}): {exc}"
    print(msg, file=sys.stderr)
    if out_dir is not None:
        head = _header(cfg, command) if cfg is not None else [f"fracsolve {__version__} {command}"]
        try:
            _write_report(out_dir, head + [msg, f"status: exit {code}"])
        except OSError:
            pass
    return code


def run(cfg, command=None):
    """Run a parsed configuration and write its artifacts.

    Parameters
    ----------
    cfg : RunConfig
    command : {"direct", "inverse", "verify"}, optional
        Defaults to the configured problem.

    Returns
    -------
    int
        Exit status; see the module docstring. ``report.txt`` is written in
        every case, CSV files only on success of a solve command.
    """
    command = command or cfg.problem
    try:
        problem = cfg.problem if command == "verify" else command
        t0 = time.perf_counter()
        runner = _run_direct if problem == "direct" else _run_inverse
        body, ok = runner(cfg, write=command != "verify")
    except (FracSolveError, ValueError) as exc:
        return _fail(exc, cfg, command, cfg.out_dir)
    lines = _header(cfg, command) + [f"problem: {problem}"] + body
    lines.append(f"elapsed: {time.perf_counter() - t0:.2f} s")
    code = EXIT_OK
    if command == "verify":
        lines.append(f"verification: {'PASS' if ok else 'FAIL'} (relative residual <= {RESIDUAL_TOL}, "
                     f"initial limits <= {INITIAL_LIMIT_TOL})")
        code = EXIT_OK if ok else EXIT_VERIFY
    lines.append(f"status: {'ok' if code == EXIT_OK else 'verification failed'}")
    _write_report(cfg.out_dir, lines)
    print("\n".join(lines))
    return code


def _solve_command(args):
    cfg = None
    try:
        cfg = parse_config(args.config)
        cfg = cfg.with_overrides(K=args.k, N_t=args.nt, out_dir=args.out_dir,
                                 waive_compat=True if args.waive_compat else None,
                                 eps_den=getattr(args, "eps_den", None))
    except (FracSolveError, ValueError) as exc:
        return _fail(exc, cfg, args.command, args.out_dir)
    return run(cfg, args.command)


def _run_mlf(args):
    try:
        p = MLParams(args.a, args.b, args.rho)
        ctrl = SeriesControl(tol=args.tol)
        value = ml_bivariate(p, args.x, args.y, ctrl, method=args.method)
    except FracSolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    print("%.17g" % value)
    return EXIT_OK


def _selftest_checks():
    from .direct import kernel_primitive, solve_mode
    from .fracops import SampledFunction, hilfer_derivative, rl_integral
    from .functions import SineMode
    from .problem import FractionalOrders

    p = MLParams(0.3, 0.7, 1.7)
    yield "E(0,0) = 1/Gamma(rho)", abs(ml_bivariate(p, 0, 0) - 1 / gamma(1.7)), 1e-15
    q = MLParams(0.5, 0.8, 1.5)
    err = max(abs(ml_bivariate(q, 0, y, method="auto") - ml_univariate(0.8, 1.5, y)) for y in (-3.0, -0.5, 2.0))
    yield "E(0,y) reduces to univariate", err, 1e-10
    t = np.linspace(0, 1, 2001)
    f = SampledFunction(t, t**2)
    exact = math.gamma(3) / math.gamma(3.5) * t**2.5
    yield "I^0.5 t^2 power rule", float(np.max(np.abs(rl_integral(f, 0.5).values - exact))), 1e-5
    d = hilfer_derivative(f, 0.5, 0.5).values[40:]
    exact = math.gamma(3) / math.gamma(2.5) * t[40:] ** 1.5
    yield "D^(0.5,0.5) t^2 power rule", float(np.max(np.abs(d - exact) / exact)), 1e-4
    o = FractionalOrders(0.8, 0.4, 1.0, 0.5, 0.5, 1.0)
    U = solve_mode(1, o, SampledFunction(t, np.ones_like(t))).values
    yield "constant-source identity", float(np.max(np.abs(U - kernel_primitive(1, o, t, 1)))), 1e-10
    spec = InverseProblemSpec(o, SineMode(2), K=4, n_steps=100, M=64)
    sol = solve_inverse(spec)
    yield "final-time interpolation", float(np.max(np.abs(sol.u_field.u[-1] - spec.phi_samples()))), 1e-12


def _run_selftest(args):
    failed = 0
    for name, err, tol in _selftest_checks():
        ok = err <= tol
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: error {err:.2e} (tol {tol:.0e})")
    print("selftest: " + ("all checks passed" if not failed else f"{failed} check(s) failed"))
    return EXIT_OK if not failed else EXIT_VERIFY


def build_parser():
    parser = argparse.ArgumentParser(prog="fracsolve",
                                     description="Two-term time-fractional diffusion with Hilfer derivatives.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="INI run configuration")
        sp.add_argument("--out-dir", help="output directory (overrides [output] dir)")
        sp.add_argument("--k", type=int, help="number of sine modes")
        sp.add_argument("--nt", type=int, help="number of time steps")
        sp.add_argument("--waive-compat", action="store_true", help="solve even if compatibility checks fail")
        return sp

    solver("direct", "solve the direct problem for a given source")
    inv = solver("inverse", "recover the source from the final-time observation")
    inv.add_argument("--eps-den", type=float, help="denominator floor")
    ver = solver("verify", "solve the configured problem and check residual and initial limits")
    ver.add_argument("--eps-den", type=float, help="denominator floor (inverse problems)")

    mlf = sub.add_parser("mlf", help="evaluate the bivariate Mittag-Leffler function")
    for flag in ("--a", "--b", "--rho", "--x", "--y"):
        mlf.add_argument(flag, type=float, required=True)
    mlf.add_argument("--tol", type=float, default=1e-12)
    mlf.add_argument("--method", choices=("series", "contour", "auto"), default="auto")

    sub.add_parser("selftest", help="run quick built-in consistency checks")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "mlf":
        return _run_mlf(args)
    if args.command == "selftest":
        return _run_selftest(args)
    return _solve_command(args)


if __name__ == "__main__":
    sys.exit(main())
