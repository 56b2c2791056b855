"""Command-line front end: parameter sweeps, the invariant suite and tabular output.

Subcommands ``fidelity``, ``verify``, ``teleport``, ``ho`` and ``star``.

Configuration file
------------------
An INI file passed with ``--config`` may hold a ``[ncphase]`` section whose
keys are the long flag names without the leading dashes (``grid-points`` or
``grid_points``).  List-valued keys take comma-separated values.  Flags given
on the command line override the file.  The environment variable
``NCPHASE_WORKERS`` sets the number of worker threads for sweeps and nothing
else.

Output
------
``--format table`` writes comma-separated rows after a ``#`` header naming
each column and its unit.  ``--format json-like`` writes one JSON object per
line.  Floats carry 12 significant digits in both formats.

Exit status: 0 all checks pass, 1 tolerance or check failure, 2 configuration
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import deformation
from .deformation import DeformationParams, jacobian
from .errors import ConfigError, DomainError, ProtocolError
from .gaussian import GaussianWigner, fidelity_gaussian, grid_fidelity, purity
from .ncwigner import HOParams, ho_hamiltonian, ho_params, ho_wigner, nc_from_commutative
from .protocols import (
    CONVENTIONS,
    nc_fidelity,
    teleport_1d,
    teleport_finite_r,
    teleport_ideal_1d,
    teleport_nc_2d,
)
from .starcalc import (
    BoundaryWarning,
    GridFunction,
    PhasePolynomial,
    StarStructure,
    coordinate_commutators,
    is_power_of_two,
    kernel_grid_extent,
    star_commutator,
    star_poly,
    stargen_residual,
    verify_integral_theorem,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
WORKERS_ENV = "NCPHASE_WORKERS"
SECTION = "ncphase"
DEFAULT_R = (0.0, 0.5, 1.0, 2.0)
STARGEN_MIN_POINTS = 32
NAMES_2D = ("x", "y", "px", "py")

Row = Dict[str, Any]
Columns = Sequence[Tuple[str, str]]

# flag name -> (kind, default); kinds: float, floats, int, ints, str
OPTIONS: Dict[str, Tuple[str, Any]] = {
    "theta": ("floats", (0.0,)),
    "eta": ("floats", (0.0,)),
    "hbar": ("float", 1.0),
    "lambda": ("float", None),
    "r": ("floats", None),
    "sigma": ("floats", None),
    "gamma": ("float", 1.0),
    "grid-points": ("int", None),
    "extent": ("float", None),
    "n1": ("ints", None),
    "n2": ("ints", None),
    "cap": ("int", 3),
    "seed": ("int", None),
    "runs": ("int", 100),
    "output": ("str", None),
    "format": ("str", "table"),
    "tolerance": ("float", None),
    "protocol": ("str", "1d"),
    "state": ("str", None),
    "a": ("str", None),
    "b": ("str", None),
    "structure": ("str", "omega"),
    "save-grids": ("str", None),
}


# ---------------------------------------------------------------- configuration

@dataclass
class SweepConfig:
    """Resolved settings for one command."""

    command: str
    theta: Tuple[float, ...]
    eta: Tuple[float, ...]
    hbar: float
    lam: Optional[float]
    r: Optional[Tuple[float, ...]]
    sigma: Optional[Tuple[float, ...]]
    gamma: float
    grid_points: Optional[int]
    extent: Optional[float]
    n1: Optional[Tuple[int, ...]]
    n2: Optional[Tuple[int, ...]]
    cap: int
    seed: Optional[int]
    runs: int
    output: Optional[str]
    format: str
    tolerance: Optional[float]
    protocol: str
    naive: bool = False
    state: Optional[str] = None
    a: Optional[str] = None
    b: Optional[str] = None
    structure: str = "omega"
    save_grids: Optional[str] = None
    workers: int = 1
    extra: Dict[str, Any] = field(default_factory=dict)

    def points(self, default: int) -> int:
        return default if self.grid_points is None else self.grid_points


def _convert(name: str, kind: str, text) -> Any:
    if not isinstance(text, str):
        return text
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        if kind in ("floats", "ints"):
            conv = float if kind == "floats" else int
            items = [t.strip() for t in text.split(",") if t.strip()]
            return tuple(conv(t) for t in items)
    except ValueError as exc:
        raise ConfigError(f"--{name}: cannot parse {text!r}: {exc}") from None
    return text


def _read_config_file(path: Optional[str]) -> Dict[str, str]:
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    if not parser.has_section(SECTION):
        raise ConfigError(f"config file {path} has no [{SECTION}] section")
    values = {}
    for key, value in parser.items(SECTION):
        name = key.replace("_", "-")
        if name not in OPTIONS:
            raise ConfigError(f"unknown config key {key!r}")
        values[name] = value
    return values


def _workers() -> int:
    text = os.environ.get(WORKERS_ENV)
    if text is None:
        return 1
    try:
        n = int(text)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {text!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {n}")
    return n


def resolve_config(args: argparse.Namespace) -> SweepConfig:
    """Merge defaults, the config file and command-line flags, then validate."""
    filed = _read_config_file(args.config)
    values = {}
    for name, (kind, default) in OPTIONS.items():
        flag = getattr(args, name.replace("-", "_"), None)
        raw = flag if flag is not None else filed.get(name, default)
        values[name] = _convert(name, kind, raw)
    for name in ("theta", "eta", "r", "sigma", "n1", "n2"):
        if values[name] is not None and len(values[name]) == 0:
            raise ConfigError(f"--{name}: empty range")
    if values["format"] not in ("table", "json-like"):
        raise ConfigError(f"--format must be 'table' or 'json-like', got {values['format']!r}")
    gp = values["grid-points"]
    if gp is not None and (gp < 2 or not is_power_of_two(gp)):
        raise ConfigError(f"--grid-points must be a power of two, got {gp}")
    if not values["hbar"] > 0:
        raise ConfigError(f"--hbar must be positive, got {values['hbar']}")
    if values["lambda"] is not None and not values["lambda"] > 0:
        raise ConfigError(f"--lambda must be positive, got {values['lambda']}")
    if values["extent"] is not None and not values["extent"] > 0:
        raise ConfigError(f"--extent must be positive, got {values['extent']}")
    if values["runs"] < 1:
        raise ConfigError(f"--runs must be at least 1, got {values['runs']}")
    if values["cap"] < 0:
        raise ConfigError(f"--cap must be non-negative, got {values['cap']}")
    if not values["gamma"] > 0:
        raise ConfigError(f"--gamma must be positive, got {values['gamma']}")
    for r in values["r"] or ():
        if not (math.isfinite(r) and r >= 0):
            raise ConfigError(f"--r values must be finite and non-negative, got {r}")
    for s in values["sigma"] or ():
        if not s > 0:
            raise ConfigError(f"--sigma values must be positive, got {s}")
    for th, et in product(values["theta"], values["eta"]):
        if th * et >= values["hbar"] ** 2:
            raise ConfigError(f"theta*eta = {th * et:g} must be below hbar^2 = {values['hbar'] ** 2:g}")
    return SweepConfig(
        command=args.command, theta=values["theta"], eta=values["eta"], hbar=values["hbar"],
        lam=values["lambda"], r=values["r"], sigma=values["sigma"], gamma=values["gamma"],
        grid_points=gp, extent=values["extent"], n1=values["n1"], n2=values["n2"], cap=values["cap"],
        seed=values["seed"], runs=values["runs"], output=values["output"], format=values["format"],
        tolerance=values["tolerance"], protocol=values["protocol"], naive=bool(getattr(args, "naive", False)),
        state=values["state"], a=values["a"], b=values["b"], structure=values["structure"],
        save_grids=values["save-grids"], workers=_workers(),
    )


# ---------------------------------------------------------------- output

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    return str(value)


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float("%.12g" % value) if math.isfinite(value) else str(value)
    return value


def render(rows: Sequence[Row], columns: Columns, fmt: str, footer: Optional[Row] = None) -> str:
    names = [c for c, _ in columns]
    lines = []
    if fmt == "table":
        lines.append("# " + ",".join(f"{c}[{u}]" for c, u in columns))
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows([_fmt(row.get(c)) for c in names] for row in rows)
        lines.extend(buf.getvalue().splitlines())
    else:
        lines.extend(json.dumps({c: _jsonable(row.get(c)) for c in names}) for row in rows)
    if footer:
        lines.append(_footer_line(footer, fmt))
    return "\n".join(lines) + "\n"


def _footer_line(footer: Row, fmt: str) -> str:
    if fmt == "table":
        return "# " + " ".join(f"{k}={_fmt(v)}" for k, v in footer.items())
    return json.dumps({"aggregate": {k: _jsonable(v) for k, v in footer.items()}})


def emit(text: str, output: Optional[str]):
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _sweep(fn: Callable, points: Sequence, workers: int) -> List:
    """Evaluate sweep points independently; results stay in sweep order."""
    if workers <= 1 or len(points) <= 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points))


# ---------------------------------------------------------------- fidelity

FIDELITY_COLUMNS = (("theta", "length^2"), ("eta", "momentum^2"), ("r", "1"), ("sigma", "1"),
                    ("F_closed", "1"), ("F_grid", "1"), ("abs_diff", "1"))


def _cloner_sweep(cfg: SweepConfig) -> List[Tuple[Optional[float], float]]:
    if cfg.sigma is not None:
        if cfg.r is not None:
            raise ConfigError("give either --r or --sigma, not both")
        return [(None, s) for s in cfg.sigma]
    return [(r, math.exp(-2 * r)) for r in (cfg.r if cfg.r is not None else DEFAULT_R)]


def _fidelity_point(cfg: SweepConfig, theta: float, eta: float, r, sigma: float) -> Row:
    if theta == 0 and eta == 0:
        Gamma, Sigma = cfg.gamma * np.eye(2), sigma * np.eye(2)
        closed = fidelity_gaussian(Gamma, Sigma)
        grid = grid_fidelity(Gamma, Sigma, points=cfg.points(128))
    else:
        params = DeformationParams.scalar(theta, eta, cfg.hbar)
        sw = deformation.build_scalar_sw(params, cfg.lam)
        Sinv = deformation.invert_sw(sw).S
        # input and cloner shapes are fixed in the NC frame
        base = GaussianWigner(np.zeros(4), cfg.gamma * Sinv @ Sinv.T)
        state = nc_from_commutative(base, sw)
        Sigma = sigma * np.eye(4)
        closed = nc_fidelity(state, Sigma, path="closed")
        grid = nc_fidelity(state, Sigma, path="grid", points=cfg.points(32), extent=cfg.extent)
    return {"theta": theta, "eta": eta, "r": r, "sigma": sigma, "F_closed": closed, "F_grid": grid,
            "abs_diff": abs(closed - grid)}


def cmd_fidelity(cfg: SweepConfig) -> Tuple[str, int]:
    tol = 1e-4 if cfg.tolerance is None else cfg.tolerance
    points = [(t, e, r, s) for t, e in product(cfg.theta, cfg.eta) for r, s in _cloner_sweep(cfg)]
    rows = _sweep(lambda p: _fidelity_point(cfg, *p), points, cfg.workers)
    status = EXIT_FAIL if any(row["abs_diff"] > tol for row in rows) else EXIT_OK
    return render(rows, FIDELITY_COLUMNS, cfg.format), status


# ---------------------------------------------------------------- oscillator

HO_COLUMNS = (("theta", "length^2"), ("eta", "momentum^2"), ("n1", "1"), ("n2", "1"), ("E", "hbar"),
              ("residual", "1"), ("norm", "1"))


def _levels(cfg: SweepConfig) -> List[Tuple[int, int]]:
    if cfg.n1 is None and cfg.n2 is None:
        return [(n1, n - n1) for n in range(cfg.cap + 1) for n1 in range(n, -1, -1)]
    pairs = list(product(cfg.n1 or (0,), cfg.n2 or (0,)))
    for n1, n2 in pairs:
        if n1 < 0 or n2 < 0:
            raise ConfigError(f"quantum numbers must be non-negative, got ({n1}, {n2})")
        if n1 + n2 > cfg.cap:
            raise ConfigError(f"n1 + n2 = {n1 + n2} exceeds the cap {cfg.cap}")
    return pairs


def _ho_point(cfg: SweepConfig, theta: float, eta: float, n1: int, n2: int, points: int) -> Row:
    params = _ho_setting(cfg, theta, eta)
    state = ho_wigner(n1, n2, params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        g = state.grid(points, cfg.extent)
        residual = stargen_residual(ho_hamiltonian(params), g, state.energy,
                                    StarStructure.hbar_J(2, params.hbar))
    if cfg.save_grids:
        path = os.path.join(cfg.save_grids, f"ho_{n1}_{n2}_theta{theta:g}_eta{eta:g}.grid")
        g.save(path)
    return {"theta": theta, "eta": eta, "n1": n1, "n2": n2, "E": state.energy, "residual": residual,
            "norm": g.meta["norm"]}


def _ho_setting(cfg: SweepConfig, theta: float, eta: float) -> HOParams:
    if theta == 0 and eta == 0:
        return HOParams.commutative(cfg.hbar)
    return ho_params(deformation.build_scalar_sw(DeformationParams.scalar(theta, eta, cfg.hbar), cfg.lam))


def cmd_ho(cfg: SweepConfig) -> Tuple[str, int]:
    tol = 1e-3 if cfg.tolerance is None else cfg.tolerance
    levels = _levels(cfg)
    points = cfg.points(64)
    if cfg.save_grids:
        os.makedirs(cfg.save_grids, exist_ok=True)
    sweep = [(t, e, n1, n2) for t, e in product(cfg.theta, cfg.eta) for n1, n2 in levels]
    rows = _sweep(lambda p: _ho_point(cfg, *p, points), sweep, cfg.workers)
    bad = any(row["residual"] > tol or abs(row["norm"] - 1) > 1e-4 for row in rows)
    return render(rows, HO_COLUMNS, cfg.format), EXIT_FAIL if bad else EXIT_OK


# ---------------------------------------------------------------- teleportation

TELEPORT_COLUMNS = (("protocol", "-"), ("resource", "r"), ("run", "1"), ("seed", "1"), ("m_1", "1"),
                    ("m_2", "1"), ("m_3", "1"), ("m_4", "1"), ("fidelity", "1"))


def _input_state(cfg: SweepConfig, dim: int) -> GaussianWigner:
    if cfg.state is None:
        return GaussianWigner.coherent(np.zeros(dim))
    try:
        with open(cfg.state, encoding="utf-8") as fh:
            state = GaussianWigner.from_dict(json.load(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read state file {cfg.state}: {exc}") from None
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid state file {cfg.state}: {exc}") from None
    if state.dim != dim:
        raise ConfigError(f"protocol needs a {dim}-coordinate state, file has {state.dim}")
    return state


def _teleport_row(run, index: int) -> Row:
    row = {"protocol": run.protocol, "resource": "delta" if run.delta else run.r, "run": index,
           "seed": run.seed, "fidelity": run.fidelity}
    for k, value in enumerate(run.measured.values(), start=1):
        row[f"m_{k}"] = value
    return row


def _aggregate(rows: Sequence[Row], **extra) -> Row:
    f = np.array([row["fidelity"] for row in rows])
    err = float(f.std(ddof=1) / np.sqrt(len(f))) if len(f) > 1 else 0.0
    return dict(extra, runs=len(f), fidelity=float(f.mean()), stderr=err)


def cmd_teleport(cfg: SweepConfig) -> Tuple[str, int]:
    if cfg.seed is None:
        raise ConfigError("teleport needs --seed")
    tol = 1e-6 if cfg.tolerance is None else cfg.tolerance
    proto = cfg.protocol
    if proto == "1d":
        state = _input_state(cfg, 2)
        runs = [teleport_ideal_1d(state, seed=cfg.seed, run_index=i, hbar=cfg.hbar) for i in range(cfg.runs)]
        rows = [_teleport_row(run, i) for i, run in enumerate(runs)]
        agg = _aggregate(rows, protocol=proto, purity=purity(state))
        # a perfect channel returns the input, whose fidelity with itself is its purity
        status = EXIT_FAIL if abs(agg["fidelity"] - agg["purity"]) > tol else EXIT_OK
        return render(rows, TELEPORT_COLUMNS, cfg.format, agg), status
    if proto == "finite":
        state = _input_state(cfg, 2)
        rs = cfg.r if cfg.r is not None else (1.0,)
        rows, footers = [], []
        for r in rs:
            block = [_teleport_row(teleport_1d(state, r, seed=cfg.seed, run_index=i, hbar=cfg.hbar,
                                               convention="cm1"), i) for i in range(cfg.runs)]
            rows.extend(block)
            footers.append(_aggregate(block, protocol=proto, r=r,
                                      closed_form=teleport_finite_r(state, r).fidelity))
        text = render(rows, TELEPORT_COLUMNS, cfg.format)
        text += "".join(_footer_line(f, cfg.format) + "\n" for f in footers)
        return text, EXIT_OK
    if proto == "nc-2d":
        params = DeformationParams.scalar(cfg.theta[0], cfg.eta[0], cfg.hbar)
        state = _input_state(cfg, 4)
        observables = "naive" if cfg.naive else "canonical"
        runs = [teleport_nc_2d(state, params, observables=observables, seed=cfg.seed, run_index=i)
                for i in range(cfg.runs)]
        rows = [_teleport_row(run, i) for i, run in enumerate(runs)]
        agg = _aggregate(rows, protocol=proto, theta=params.theta, eta=params.eta, purity=purity(state))
        status = EXIT_FAIL if abs(agg["fidelity"] - agg["purity"]) > tol else EXIT_OK
        return render(rows, TELEPORT_COLUMNS, cfg.format, agg), status
    raise ConfigError(f"--protocol must be one of 1d, finite, nc-2d; got {proto!r}")


# ---------------------------------------------------------------- star products

STAR_TERM_COLUMNS = (("quantity", "-"), ("monomial", "-"), ("re", "1"), ("im", "1"))


def _structure(cfg: SweepConfig) -> StarStructure:
    params = DeformationParams.scalar(cfg.theta[0], cfg.eta[0], cfg.hbar)
    choices = {
        "hbar": lambda: StarStructure.hbar_J(2, cfg.hbar),
        "omega": lambda: StarStructure.hbar_Omega(params),
        "theta": lambda: StarStructure.theta(params),
        "eta": lambda: StarStructure.eta(params),
    }
    if cfg.structure not in choices:
        raise ConfigError(f"--structure must be one of {sorted(choices)}, got {cfg.structure!r}")
    return choices[cfg.structure]()


def _monomial(exp) -> str:
    parts = [n if k == 1 else f"{n}**{k}" for n, k in zip(NAMES_2D, exp) if k]
    return "*".join(parts) or "1"


def _terms(name: str, p: PhasePolynomial) -> List[Row]:
    return [{"quantity": name, "monomial": _monomial(e), "re": c.real, "im": c.imag}
            for e, c in sorted(p.terms.items(), key=lambda t: (sum(t[0]), t[0]))]


def cmd_star(cfg: SweepConfig) -> Tuple[str, int]:
    L = _structure(cfg)
    if cfg.a is None and cfg.b is None:
        C = coordinate_commutators(L, 4)
        rows = [{"quantity": "commutator", "monomial": f"[{NAMES_2D[i]},{NAMES_2D[j]}]",
                 "re": C[i, j].real, "im": C[i, j].imag} for i in range(4) for j in range(4)]
        return render(rows, STAR_TERM_COLUMNS, cfg.format), EXIT_OK
    if cfg.a is None or cfg.b is None:
        raise ConfigError("star needs both --a and --b, or neither")
    try:
        a = PhasePolynomial.parse(cfg.a, NAMES_2D)
        b = PhasePolynomial.parse(cfg.b, NAMES_2D)
    except ValueError as exc:
        raise ConfigError(f"cannot parse polynomial: {exc}") from None
    rows = _terms("a*b", star_poly(a, b, L).chop()) + _terms("[a,b]", star_commutator(a, b, L).chop())
    return render(rows, STAR_TERM_COLUMNS, cfg.format), EXIT_OK


# ---------------------------------------------------------------- invariant suite

VERIFY_COLUMNS = (("check", "-"), ("status", "-"), ("value", "1"), ("tolerance", "1"), ("detail", "-"))


@dataclass
class CheckResult:
    check: str
    status: str
    value: float
    tolerance: float
    detail: str = ""

    def row(self) -> Row:
        return {"check": self.check, "status": self.status, "value": self.value,
                "tolerance": self.tolerance, "detail": self.detail}


def _judge(name: str, value: float, tol: float, detail: str = "") -> CheckResult:
    ok = bool(np.isfinite(value) and value <= tol)
    return CheckResult(name, "pass" if ok else "fail", float(value), tol, detail)


def _verify_params(cfg: SweepConfig) -> List[DeformationParams]:
    chosen = [(t, e) for t, e in product(cfg.theta, cfg.eta) if (t, e) != (0.0, 0.0)]
    pairs = chosen or [(0.3, 0.2), (-0.4, 0.5), (0.6, 0.8)]
    return [DeformationParams.scalar(t, e, cfg.hbar) for t, e in pairs]


def _check_sw(cfg, plist) -> CheckResult:
    worst = 0.0
    for p in plist:
        sw = deformation.build_scalar_sw(p, cfg.lam)
        worst = max(worst, deformation.validate_sw(sw, p).max())
        # commutators of the mapped coordinates under the commutative product
        J = StarStructure.hbar_J(2, p.hbar)
        z = [PhasePolynomial.linear(row) for row in sw.S]
        target = p.hbar * deformation.symplectic_data(p).Omega
        for i in range(4):
            for j in range(4):
                c = star_commutator(z[i], z[j], J).coefficient((0, 0, 0, 0))
                worst = max(worst, abs(c - 1j * target[i, j]))
        worst = max(worst, abs(jacobian(sw) - (1 - p.deformation_ratio)))
    return _judge("sw_validity", worst, 1e-10, f"{len(plist)} maps")


def _check_associativity(cfg, plist, rng) -> CheckResult:
    worst = 0.0
    for p in plist:
        L = StarStructure.hbar_Omega(p)
        for _ in range(5):
            a, b, c = (_random_poly(rng, 4, 3) for _ in range(3))
            lhs = star_poly(star_poly(a, b, L), c, L)
            rhs = star_poly(a, star_poly(b, c, L), L)
            worst = max(worst, lhs.max_abs_diff(rhs))
    return _judge("star_associativity", worst, 1e-12, f"{5 * len(plist)} triples")


def _random_poly(rng, dim: int, degree: int) -> PhasePolynomial:
    terms = {}
    for _ in range(6):
        exp = [0] * dim
        for _ in range(int(rng.integers(0, degree + 1))):
            exp[int(rng.integers(0, dim))] += 1
        terms[tuple(exp)] = terms.get(tuple(exp), 0) + complex(rng.normal(), rng.normal())
    return PhasePolynomial(dim, terms)


def _check_integral(cfg, rng) -> CheckResult:
    warnings.simplefilter("ignore", BoundaryWarning)
    L = StarStructure.hbar_J(1, cfg.hbar)
    worst = 0.0
    extent = kernel_grid_extent(32, cfg.hbar)
    axes = [(-extent, extent, 32)] * 2
    for _ in range(3):
        ga, gb = _random_gaussian(rng, 0.3), _random_gaussian(rng, 0.3)
        poly = _random_poly(rng, 2, 2)
        a = GridFunction.from_callable(lambda x, p: ga(np.stack(np.broadcast_arrays(x, p), -1)), axes)
        b = GridFunction.from_callable(lambda x, p: gb(np.stack(np.broadcast_arrays(x, p), -1)), axes)
        pa = a.with_samples(poly(*a.mesh()) * a.samples)
        for lhs, engine in product((a, pa), ("kernel", "fourier")):
            worst = max(worst, verify_integral_theorem(lhs, b, L, engine).relative())
    return _judge("integral_theorem", worst, 1e-6, "kernel and Fourier engines")


def _random_gaussian(rng, spread: float) -> GaussianWigner:
    mean = rng.uniform(-spread, spread, 2)
    A = np.eye(2) + rng.uniform(-0.2, 0.2, (2, 2))
    shape = A @ A.T
    return GaussianWigner(mean, shape / np.sqrt(np.linalg.det(shape)))


def _ho_checks(cfg, plist) -> List[CheckResult]:
    points = cfg.points(STARGEN_MIN_POINTS)
    settings = [HOParams.commutative(cfg.hbar)] + [ho_params(deformation.build_scalar_sw(p, cfg.lam))
                                                   for p in plist[:1]]
    worst_res, worst_norm = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        for params in settings:
            H = ho_hamiltonian(params)
            for n1, n2 in ((0, 0), (1, 0), (0, 1)):
                state = ho_wigner(n1, n2, params)
                g = state.grid(points, cfg.extent, renormalize=False)
                worst_norm = max(worst_norm, abs(g.meta["norm"] - 1.0))
                worst_res = max(worst_res, stargen_residual(H, g, state.energy, StarStructure.hbar_J(2, params.hbar)))
    out = [_judge("normalization", worst_norm, 1e-4, f"{points}^4 grid"),
           _judge("stargenvalue", worst_res, 1e-3, f"{points}^4 grid")]
    if points < STARGEN_MIN_POINTS:
        for res in out:
            if res.status == "fail":
                res.status = "warn"
                res.detail += f"; below the {STARGEN_MIN_POINTS}-point calibrated grid"
    return out


def _check_invariance(cfg, plist, rng) -> List[CheckResult]:
    closed, grid = 0.0, 0.0
    for p in plist:
        sw = deformation.build_scalar_sw(p, cfg.lam)
        Gamma = np.eye(4) + np.diag(rng.uniform(0, 0.5, 4))
        Sigma = np.diag(rng.uniform(0.2, 1.5, 4))
        Sinv = deformation.invert_sw(sw).S
        state = nc_from_commutative(GaussianWigner(np.zeros(4), Sinv @ Gamma @ Sinv.T), sw)
        expected = fidelity_gaussian(Gamma, Sigma)
        closed = max(closed, abs(nc_fidelity(state, Sigma, path="closed") - expected))
        grid = max(grid, abs(nc_fidelity(state, Sigma, path="grid") - expected))
    return [_judge("sw_invariance_closed", closed, 1e-10, f"{len(plist)} maps"),
            _judge("sw_invariance_grid", grid, 1e-4, "32^4 grid")]


def _check_protocols(cfg, plist) -> CheckResult:
    worst = 0.0
    state = GaussianWigner.coherent([0.4, -0.2])
    for r in (0.0, 0.5, 1.0, 2.0):
        worst = max(worst, abs(teleport_finite_r(state, r).fidelity - 2 / (2 + math.exp(-2 * r))))
    for i in range(5):
        worst = max(worst, abs(teleport_ideal_1d(state, seed=0, run_index=i).fidelity - 1.0))
    p = plist[0]
    nc_state = GaussianWigner.coherent([0.3, -0.1, 0.2, 0.5])
    run = teleport_nc_2d(nc_state, p, seed=0)
    pts = np.random.default_rng(0).normal(size=(50, 4))
    diff = np.max(np.abs(run.corrected_output(pts) - nc_state(pts)))
    worst = max(worst, float(diff) / nc_state.peak)
    detail = "finite-r curve, delta limit, NC canonical set"
    if p.theta != 0:
        try:
            teleport_nc_2d(nc_state, p, observables="naive", seed=0)
            return CheckResult("protocols", "fail", worst, 1e-6, "naive observable set was accepted")
        except ProtocolError:
            detail += ", naive set rejected"
    return _judge("protocols", worst, 1e-6, detail)


def cmd_verify(cfg: SweepConfig) -> Tuple[str, int]:
    rng = np.random.default_rng(0 if cfg.seed is None else cfg.seed)
    plist = _verify_params(cfg)
    checks: List[Callable[[], Any]] = [
        lambda: _check_sw(cfg, plist),
        lambda: _check_associativity(cfg, plist, rng),
        lambda: _check_integral(cfg, rng),
        lambda: _ho_checks(cfg, plist),
        lambda: _check_invariance(cfg, plist, rng),
        lambda: _check_protocols(cfg, plist),
    ]
    names = ["sw_validity", "star_associativity", "integral_theorem", "normalization", "sw_invariance_closed",
             "protocols"]
    results: List[CheckResult] = []
    for name, check in zip(names, checks):
        try:
            with warnings.catch_warnings():
                out = check()
        except (DomainError, ProtocolError, ValueError, np.linalg.LinAlgError) as exc:
            out = CheckResult(name, "fail", float("nan"), float("nan"), f"{type(exc).__name__}: {exc}")
        results.extend(out if isinstance(out, list) else [out])
    rows = [res.row() for res in results]
    status = EXIT_FAIL if any(res.status == "fail" for res in results) else EXIT_OK
    summary = {"checks": len(results), "passed": sum(r.status == "pass" for r in results),
               "warned": sum(r.status == "warn" for r in results),
               "failed": sum(r.status == "fail" for r in results)}
    return render(rows, VERIFY_COLUMNS, cfg.format, summary), status


# ---------------------------------------------------------------- entry point

COMMANDS = {"fidelity": cmd_fidelity, "verify": cmd_verify, "teleport": cmd_teleport, "ho": cmd_ho,
            "star": cmd_star}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncphase", description=__doc__.split("\n\n")[0])
    parser.add_argument("--log-level", default="WARNING", help="logging level (default WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fidelity": "cloning fidelity sweep: closed form against the grid double integral",
        "verify": "run the invariant suite and report pass/warn/fail",
        "teleport": "simulate teleportation runs and report per-run records",
        "ho": "noncommutative oscillator levels: energy, stargenvalue residual, norm",
        "star": "star products of polynomials or the coordinate commutator table",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", help="INI file with a [ncphase] section")
        p.add_argument("--theta", help="comma-separated theta values (default 0)")
        p.add_argument("--eta", help="comma-separated eta values (default 0)")
        p.add_argument("--hbar", help="Planck constant (default 1)")
        p.add_argument("--lambda", dest="lambda", help="SW split parameter (default symmetric)")
        p.add_argument("--r", help="comma-separated squeezing values")
        p.add_argument("--grid-points", help="points per axis, a power of two")
        p.add_argument("--extent", help="grid half-width")
        p.add_argument("--seed", help="random seed")
        p.add_argument("--runs", help="number of runs (default 100)")
        p.add_argument("--output", help="write output to this file instead of stdout")
        p.add_argument("--format", choices=("table", "json-like"), help="output format (default table)")
        p.add_argument("--tolerance", help="failure threshold for the command's checks")
        if name == "fidelity":
            p.add_argument("--sigma", help="comma-separated cloner shapes (instead of --r)")
            p.add_argument("--gamma", help="input shape multiple of the identity (default 1)")
        if name == "ho":
            p.add_argument("--n1", help="comma-separated n1 values")
            p.add_argument("--n2", help="comma-separated n2 values")
            p.add_argument("--cap", help="largest allowed n1 + n2 (default 3)")
            p.add_argument("--save-grids", help="directory for serialized Wigner grids")
        if name == "teleport":
            p.add_argument("--protocol", choices=("1d", "finite", "nc-2d"), help="protocol (default 1d)")
            p.add_argument("--naive", action="store_true", help="measure the naive observable set (nc-2d)")
            p.add_argument("--state", help="JSON file with a Gaussian input state")
        if name == "star":
            p.add_argument("--a", help="first polynomial in x, y, px, py")
            p.add_argument("--b", help="second polynomial in x, y, px, py")
            p.add_argument("--structure", choices=("hbar", "omega", "theta", "eta"),
                           help="commutator matrix (default omega)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        text, status = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"ncphase {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"ncphase {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolError as exc:
        print(f"ncphase {args.command}: protocol error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"ncphase {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        emit(text, cfg.output)
    except OSError as exc:
        print(f"ncphase {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
