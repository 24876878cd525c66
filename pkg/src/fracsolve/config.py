"""Run configuration files (INI format).

Example::

    [run]
    problem = direct          ; direct or inverse (used by ``verify``)

    [orders]
    alpha1 = 0.8
    alpha2 = 0.4
    beta1 = 1.0
    beta2 = 0.5
    mu = 0.5
    T = 1.0

    [discretization]          ; all optional
    K = 64
    N_t = 2000
    M = 1024

    [source]                  ; direct problem: g(t, x) = time(t) * space(x)
    time = const
    time.value = 1.0
    space = sin
    space.n = 1

    [observation]             ; inverse problem: phi(x)
    space = table
    space.file = phi.csv      ; two columns x,phi; resampled to the grid

    [inverse]
    eps_den = 1e-12
    waive_compat = false

    [output]
    dir = out

Keys are case-insensitive. Space functions: ``sin`` (n, amplitude),
``sine_sum`` (modes, amplitudes as comma lists), ``bubble`` (scale),
``poly_bc`` (coeffs, scale), ``zero`` and ``table`` (file). Time functions:
``const`` (value) and ``power`` (p, coeff).
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .exceptions import InvalidParams, ParseError, ValidationError
from .functions import Separable, Tabulated, space_function, time_function
from .io import read_table
from .problem import DEFAULT_TIME_STEPS, FractionalOrders
from .spectral import DEFAULT_MODES, DEFAULT_SPACE_INTERVALS, SpaceGrid

__all__ = ["RunConfig", "parse_config", "parse_config_text", "DEFAULTS"]

DEFAULTS = {"K": DEFAULT_MODES, "N_t": DEFAULT_TIME_STEPS, "M": DEFAULT_SPACE_INTERVALS}

_SCHEMA = {
    "run": {"problem"},
    "orders": {"alpha1", "alpha2", "beta1", "beta2", "mu", "t"},
    "discretization": {"k", "n_t", "m"},
    "source": {"time", "space"},
    "observation": {"space"},
    "inverse": {"eps_den", "waive_compat"},
    "direct": {"waive_compat"},
    "output": {"dir", "precision"},
}
_PARAM_SECTIONS = {"source": ("time", "space"), "observation": ("space",)}
_ORDER_DEFAULTS = {"beta1": 1.0, "beta2": 1.0, "mu": 0.0, "t": 1.0}


@dataclass
class RunConfig:
    """Validated run configuration."""

    orders: FractionalOrders
    problem: str = "direct"
    K: int = DEFAULT_MODES
    N_t: int = DEFAULT_TIME_STEPS
    M: int = DEFAULT_SPACE_INTERVALS
    source: Optional[Separable] = None
    phi: object = None
    eps_den: Optional[float] = None
    waive_compat: bool = False
    out_dir: str = "out"
    precision: int = 17
    path: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        _check_discretization(cfg, {})
        return cfg


class _Locator:
    """Line numbers of sections and keys in the raw text, for error messages."""

    def __init__(self, text):
        self.lines = {}
        section = None
        for no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            m = re.match(r"\[([^\]]+)\]", line)
            if m:
                section = m.group(1).strip().lower()
                self.lines.setdefault((section, None), no)
                continue
            m = re.match(r"([^=:;#\s][^=:]*?)\s*[=:]", line)
            if m and section is not None:
                self.lines.setdefault((section, m.group(1).strip().lower()), no)

    def __call__(self, section, key=None):
        return self.lines.get((section, key), self.lines.get((section, None)))


def _number(value, section, key, loc, kind=float):
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{key} must be {'an integer' if kind is int else 'a number'}, got {value!r}",
                              loc(section, key), f"{section}.{key}") from None
    return out


def _param_value(raw):
    raw = raw.strip()
    if "," in raw:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def _bool(value, section, key, loc):
    low = value.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"{key} must be a boolean, got {value!r}", loc(section, key), f"{section}.{key}")


def _build_function(sect, section, role, loc, base_dir):
    name = sect.get(role)
    if name is None:
        return None
    name = name.strip()
    params = {k.split(".", 1)[1]: _param_value(v) for k, v in sect.items() if k.startswith(role + ".")}
    where = (loc(section, role), f"{section}.{role}")
    try:
        if role == "time":
            return time_function(name, **params)
        if name == "table":
            if set(params) != {"file"}:
                raise InvalidParams("table needs exactly one parameter: file")
            path = Path(str(params["file"]))
            if not path.is_absolute():
                path = base_dir / path
            return Tabulated(*read_table(path))
        return space_function(name, **params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {role} function {name!r}: {exc}", *where) from None
    except InvalidParams as exc:
        raise ValidationError(str(exc), *where) from None


def _check_discretization(cfg, lines):
    for key in ("K", "N_t", "M"):
        val = getattr(cfg, key)
        if int(val) != val or val < 1:
            raise ValidationError(f"{key} must be a positive integer, got {val!r}", lines.get(key), key)
    if cfg.N_t < 4:
        raise ValidationError(f"N_t must be >= 4, got {cfg.N_t}", lines.get("N_t"), "N_t")
    if cfg.M % 2:
        raise ValidationError(f"M must be even (Simpson's rule), got {cfg.M}", lines.get("M"), "M")
    if cfg.M < 2 * cfg.K:
        raise ValidationError(f"M={cfg.M} cannot resolve K={cfg.K} modes (need M >= 2K)", lines.get("M"), "M")
    if cfg.eps_den is not None and not cfg.eps_den > 0:
        raise ValidationError(f"eps_den must be > 0, got {cfg.eps_den}", lines.get("eps_den"), "eps_den")


def parse_config_text(text, base_dir="."):
    """Parse configuration text; see :func:`parse_config`."""
    loc = _Locator(text)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None

    for section in parser.sections():
        sname = section.lower()
        if sname not in _SCHEMA:
            raise ParseError(f"unknown section [{section}]", loc(sname), section)
        allowed = _SCHEMA[sname]
        for key in parser[section]:
            base = key.split(".", 1)[0] if sname in _PARAM_SECTIONS else key
            if base not in allowed or ("." in key and base not in _PARAM_SECTIONS.get(sname, ())):
                raise ParseError(f"unknown key {key!r}", loc(sname, key), f"{sname}.{key}")

    sections = {s.lower(): parser[s] for s in parser.sections()}
    if "orders" not in sections:
        raise ParseError("missing [orders] section")
    o = sections["orders"]
    values = {}
    for key in ("alpha1", "alpha2"):
        if key not in o:
            raise ValidationError(f"missing required key {key}", loc("orders"), f"orders.{key}")
    for key in ("alpha1", "alpha2", "beta1", "beta2", "mu", "t"):
        values[key] = _number(o[key], "orders", key, loc) if key in o else _ORDER_DEFAULTS[key]
    a1, a2 = values["alpha1"], values["alpha2"]
    if not 0 < a2 < a1 < 1:
        which = "alpha2" if 0 < a1 < 1 else "alpha1"
        raise ValidationError(f"orders violate 0 < alpha2 < alpha1 < 1 (alpha2 must be < alpha1; "
                              f"got alpha1={a1}, alpha2={a2})", loc("orders", which), f"orders.{which}")
    for key in ("beta1", "beta2"):
        if not 0 <= values[key] <= 1:
            raise ValidationError(f"{key} must lie in [0, 1], got {values[key]}", loc("orders", key),
                                  f"orders.{key}")
    if not values["t"] > 0:
        raise ValidationError(f"T must be > 0, got {values['t']}", loc("orders", "t"), "orders.T")
    orders = FractionalOrders(a1, a2, values["beta1"], values["beta2"], values["mu"], values["t"])

    cfg = RunConfig(orders)
    lines = {}
    d = sections.get("discretization", {})
    for key, attr in (("k", "K"), ("n_t", "N_t"), ("m", "M")):
        if key in d:
            setattr(cfg, attr, _number(d[key], "discretization", key, loc, int))
            lines[attr] = loc("discretization", key)

    run = sections.get("run", {})
    if "problem" in run:
        cfg.problem = run["problem"].strip().lower()
        if cfg.problem not in ("direct", "inverse"):
            raise ValidationError(f"problem must be direct or inverse, got {cfg.problem!r}",
                                  loc("run", "problem"), "run.problem")

    base_dir = Path(base_dir)
    if "source" in sections:
        s = sections["source"]
        tf = _build_function(s, "source", "time", loc, base_dir)
        sf = _build_function(s, "source", "space", loc, base_dir)
        if sf is None:
            raise ValidationError("source needs a space function", loc("source"), "source.space")
        cfg.source = Separable(tf if tf is not None else time_function("const"), sf)
    if "observation" in sections:
        cfg.phi = _build_function(sections["observation"], "observation", "space", loc, base_dir)
        if cfg.phi is None:
            raise ValidationError("observation needs a space function", loc("observation"), "observation.space")

    inv = sections.get("inverse", {})
    if "eps_den" in inv:
        cfg.eps_den = _number(inv["eps_den"], "inverse", "eps_den", loc)
        lines["eps_den"] = loc("inverse", "eps_den")
    for sname in ("inverse", "direct"):
        sect = sections.get(sname, {})
        if "waive_compat" in sect:
            cfg.waive_compat = _bool(sect["waive_compat"], sname, "waive_compat", loc)

    out = sections.get("output", {})
    if "dir" in out:
        path = Path(out["dir"].strip())
        cfg.out_dir = str(path if path.is_absolute() else base_dir / path)
    else:
        cfg.out_dir = str(base_dir / "out")
    if "precision" in out:
        cfg.precision = _number(out["precision"], "output", "precision", loc, int)
        if not 1 <= cfg.precision <= 17:
            raise ValidationError("precision must lie in 1..17", loc("output", "precision"), "output.precision")

    _check_discretization(cfg, lines)
    return cfg


def parse_config(path):
    """Parse and validate a configuration file.

    Relative paths inside the file (tables, output directory) are resolved
    against the file's directory. Omitted discretization values default to
    ``K=64``, ``N_t=2000``, ``M=1024``.

    Raises
    ------
    ParseError
        Malformed file, unknown section or key.
    ValidationError
        A value violates an invariant; the message names it.
    """
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"config file not found: {path}")
    cfg = parse_config_text(path.read_text(), base_dir=path.parent)
    cfg.path = str(path)
    return cfg


def phi_samples(cfg):
    """Observation resampled to the configured space grid."""
    return cfg.phi(SpaceGrid(cfg.M).points)
