"""Config-driven command line front end.

One flat UTF-8 text file describes a run: the gain pair, the coefficient
functions as expression text, the interval, a task name, and task
parameters.  ``confode run config.txt`` executes the task and writes a
trajectory table (CSV), a machine-readable report (JSON), and rendered
figures (PNG) into the output directory.

Key = value lines, ``#`` starts a comment line, dots group related keys:

    schema_version = 1
    task = bvp
    kappa.family = trig
    kappa.alpha = 0.5
    interval = 0, 2.0
    p = 1
    q = -1
    h = cos(t)
    bvp.kind = conjugate

Exit codes: 0 success, 1 config error, 2 degenerate boundary problem,
3 numerics failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .confcalc import e0
from .expressions import ExpressionError, parse_expression
from .fields import ScalarField, constant
from .gains import BUILTIN_FAMILIES, KappaPair, make_pair
from .greens import (
    BVPSpec,
    DegenerateBVPError,
    GreenKernel,
    apply_green,
    audit_green,
    green_cauchy,
    green_periodic,
    solve_bvp,
)
from .oscillation import disconjugate, flw_scan, lyapunov_check, roundabout_audit
from .solver import (
    GeneralProblem,
    IVPSpec,
    SelfAdjointProblem,
    Trajectory,
    lx_residual,
    solve_ivp,
    to_self_adjoint,
)
from .structure import (
    RiccatiProblem,
    cauchy_kernel,
    riccati_from_solution,
    riccati_residual,
    solution_from_riccati,
    variation_of_constants,
)

__all__ = ["ConfigError", "RunConfig", "load_config", "run", "main"]

SCHEMA_VERSION = "1"
TASKS = (
    "ivp",
    "bvp",
    "green",
    "cauchy",
    "riccati",
    "lyapunov",
    "disconjugacy",
    "roundabout",
    "flw",
    "audit",
)
FORMATS = ("csv", "json", "png")
BVP_KINDS = ("conjugate", "focal", "general", "periodic")

DEFAULT_TOL = 1.0e-4
DEFAULT_GRID = 129
PROBE_N = 33


class ConfigError(ValueError):
    """Anything wrong with the config file itself."""


# ---------------------------------------------------------------------------
# flat file parsing
# ---------------------------------------------------------------------------

def read_flat(path: Path) -> Dict[str, str]:
    raw: Dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path.name}:{lineno}: expected 'key = value', got {text!r}")
        key, _, value = text.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{path.name}:{lineno}: empty key")
        if key in raw:
            raise ConfigError(f"{path.name}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _float(raw: Dict[str, str], key: str, default: Optional[float] = None) -> float:
    if key not in raw:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw[key]!r}") from None


def _int(raw: Dict[str, str], key: str, default: int) -> int:
    if key not in raw:
        return default
    try:
        return int(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {raw[key]!r}") from None


def _floats(text: str, key: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise ConfigError(f"{key}: not a comma-separated number list: {text!r}") from None


# keys that do not depend on the task
_COMMON_KEYS = {
    "schema_version",
    "task",
    "kappa.family",
    "kappa.alpha",
    "kappa.omega",
    "interval",
    "p",
    "q",
    "h",
    "a",
    "b",
    "c",
    "g",
    "expect.x",
    "expect.tol",
    "numerics.tol",
    "numerics.grid",
    "numerics.step",
    "outputs.dir",
    "outputs.formats",
}
_TASK_KEYS = {
    "ivp": {"ivp.t0", "ivp.x0", "ivp.dax0"},
    "bvp": {"bvp.kind", "bvp.xi", "bvp.beta", "bvp.gamma", "bvp.delta", "bvp.A", "bvp.B"},
    "green": {"green.kind", "green.xi", "green.beta", "green.gamma", "green.delta"},
    "audit": {"green.kind", "green.xi", "green.beta", "green.gamma", "green.delta"},
    "cauchy": set(),
    "riccati": {"riccati.t0", "riccati.x0", "riccati.dax0"},
    "lyapunov": set(),
    "disconjugacy": {"disconjugacy.criterion"},
    "roundabout": set(),
    "flw": {"flw.rungs"},
}


@dataclass
class RunConfig:
    """A validated run: everything the task dispatcher needs."""

    task: str
    pair: KappaPair
    interval: Tuple[float, float]
    p: ScalarField
    q: ScalarField
    h: ScalarField
    raw: Dict[str, str]  #: effective flat config, echoed into the report
    tol: float
    grid: int
    step: float
    out_dir: Path
    formats: Tuple[str, ...]
    expect_x: Optional[ScalarField] = None
    expect_tol: float = DEFAULT_TOL
    quiet: bool = False


def _coefficient(raw: Dict[str, str], key: str, default: float) -> ScalarField:
    if key not in raw:
        return constant(default, f"{default:g}")
    try:
        return parse_expression(raw[key]).to_field()
    except ExpressionError as err:
        raise ConfigError(f"{key}: {err}") from err


def _probe_finite(name: str, f: ScalarField, lo: float, hi: float) -> None:
    for t in np.linspace(lo, hi, PROBE_N):
        try:
            v = f(float(t))
        except (ArithmeticError, ValueError) as err:
            raise ConfigError(f"coefficient {name!r} fails at t={t:g}: {err}") from err
        if not math.isfinite(v):
            raise ConfigError(f"coefficient {name!r} is not finite at t={t:g}")


def _bvp_spec(raw: Dict[str, str], prefix: str) -> BVPSpec:
    kind = raw.get(f"{prefix}.kind", "conjugate")
    if kind not in BVP_KINDS:
        raise ConfigError(f"{prefix}.kind: unknown kind {kind!r}; expected one of {BVP_KINDS}")
    A = _float(raw, f"{prefix}.A", 0.0)
    B = _float(raw, f"{prefix}.B", 0.0)
    if kind == "periodic":
        return BVPSpec.periodic()
    if kind == "conjugate":
        return BVPSpec.conjugate(A, B)
    if kind == "focal":
        return BVPSpec.focal(A, B)
    try:
        return BVPSpec(
            _float(raw, f"{prefix}.xi"),
            _float(raw, f"{prefix}.beta"),
            _float(raw, f"{prefix}.gamma"),
            _float(raw, f"{prefix}.delta"),
            A,
            B,
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def load_config(raw: Dict[str, str], quiet: bool = False) -> RunConfig:
    """Validate a flat key map and resolve it into a RunConfig."""
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION!r}")
    task = raw.get("task", "")
    if task not in TASKS:
        raise ConfigError(f"task: expected one of {TASKS}, got {task!r}")

    allowed = _COMMON_KEYS | _TASK_KEYS[task]
    if task == "bvp":
        allowed = allowed | {"expect.dax"}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} for task {task!r}")

    family = raw.get("kappa.family", "")
    if family not in BUILTIN_FAMILIES:
        raise ConfigError(f"kappa.family: expected one of {BUILTIN_FAMILIES}, got {family!r}")
    omega = _float(raw, "kappa.omega", math.nan)
    try:
        pair = make_pair(family, _float(raw, "kappa.alpha"), None if math.isnan(omega) else omega)
    except ValueError as err:
        raise ConfigError(str(err)) from err

    iv = _floats(raw.get("interval", ""), "interval")
    if len(iv) != 2 or not iv[0] < iv[1]:
        raise ConfigError(f"interval: expected 'lo, hi' with lo < hi, got {raw.get('interval')!r}")
    lo, hi = iv
    try:
        pair.assert_in(lo, hi)
    except ValueError as err:
        raise ConfigError(str(err)) from err

    general = [k for k in ("a", "b", "c", "g") if k in raw]
    if general and any(k in raw for k in ("p", "q", "h")):
        raise ConfigError("give either p,q,h or a,b,c,g coefficients, not both")
    if general:
        ga = _coefficient(raw, "a", 1.0)
        gb = _coefficient(raw, "b", 0.0)
        gc = _coefficient(raw, "c", 0.0)
        gg = _coefficient(raw, "g", 0.0)
        for name, f in (("a", ga), ("b", gb), ("c", gc), ("g", gg)):
            _probe_finite(name, f, lo, hi)
        for t in np.linspace(lo, hi, PROBE_N):
            if not ga(float(t)) > 0.0:
                raise ConfigError(f"leading coefficient 'a' must be positive; a({t:g}) = {ga(float(t)):g}")
        try:
            prob = to_self_adjoint(GeneralProblem(pair, ga, gb, gc, gg, (lo, hi)), lo)
        except ValueError as err:
            raise ConfigError(str(err)) from err
        p, q, h = prob.p, prob.q, prob.h
    else:
        p = _coefficient(raw, "p", 1.0)
        q = _coefficient(raw, "q", 0.0)
        h = _coefficient(raw, "h", 0.0)
        for name, f in (("p", p), ("q", q), ("h", h)):
            _probe_finite(name, f, lo, hi)
        for t in np.linspace(lo, hi, PROBE_N):
            if not p(float(t)) > 0.0:
                raise ConfigError(f"coefficient 'p' must be positive; p({t:g}) = {p(float(t)):g}")

    if task == "lyapunov":
        for t in np.linspace(lo, hi, PROBE_N):
            if abs(p(float(t)) - 1.0) > 1.0e-12:
                raise ConfigError("lyapunov task needs p = 1")
            if not q(float(t)) > 0.0:
                raise ConfigError("lyapunov task needs q > 0 on the interval")

    expect_x = None
    if "expect.x" in raw:
        try:
            expect_x = parse_expression(raw["expect.x"]).to_field()
        except ExpressionError as err:
            raise ConfigError(f"expect.x: {err}") from err

    tol = _float(raw, "numerics.tol", DEFAULT_TOL)
    grid = _int(raw, "numerics.grid", DEFAULT_GRID)
    if grid < 9:
        raise ConfigError("numerics.grid must be at least 9")
    step = _float(raw, "numerics.step", (hi - lo) / 1024.0)
    if not step > 0:
        raise ConfigError("numerics.step must be positive")

    formats = tuple(part.strip() for part in raw.get("outputs.formats", ",".join(FORMATS)).split(","))
    for fmt in formats:
        if fmt not in FORMATS:
            raise ConfigError(f"outputs.formats: unknown format {fmt!r}")

    # echo the effective numerics back so the report embeds a complete config
    raw = dict(raw)
    raw.setdefault("numerics.tol", f"{tol:g}")
    raw.setdefault("numerics.grid", str(grid))
    raw.setdefault("outputs.dir", "confode_out")
    raw.setdefault("outputs.formats", ",".join(formats))

    return RunConfig(
        task=task,
        pair=pair,
        interval=(lo, hi),
        p=p,
        q=q,
        h=h,
        raw=raw,
        tol=tol,
        grid=grid,
        step=step,
        out_dir=Path(raw["outputs.dir"]),
        formats=formats,
        expect_x=expect_x,
        expect_tol=_float(raw, "expect.tol", tol),
        quiet=quiet,
    )


# ---------------------------------------------------------------------------
# task execution
# ---------------------------------------------------------------------------

@dataclass
class TaskResult:
    trajectory: Optional[Trajectory]
    residual: Optional[Callable[[float], float]]
    verdicts: Dict[str, bool] = field(default_factory=dict)  #: health checks
    findings: Dict[str, bool] = field(default_factory=dict)  #: classifications
    residuals: Dict[str, float] = field(default_factory=dict)
    kernel: Optional[GreenKernel] = None
    kernel_values: Optional[np.ndarray] = None
    kernel_grids: Optional[Tuple[np.ndarray, np.ndarray]] = None
    lines: List[str] = field(default_factory=list)


def _problem(cfg: RunConfig) -> SelfAdjointProblem:
    return SelfAdjointProblem(cfg.pair, cfg.p, cfg.q, cfg.h, cfg.interval)


def _sup_on_grid(fn: Callable[[float], float], lo: float, hi: float, n: int) -> float:
    return max(abs(fn(float(t))) for t in np.linspace(lo, hi, n))


def _witness(cfg: RunConfig, prob: SelfAdjointProblem) -> Trajectory:
    lo = cfg.interval[0]
    return solve_ivp(prob.homogeneous, IVPSpec(lo, 0.0, 1.0 / cfg.p(lo)), cfg.step)


def _check_expectation(cfg: RunConfig, traj: Trajectory, out: TaskResult) -> None:
    if cfg.expect_x is None:
        return
    lo, hi = cfg.interval
    sup = max(
        abs(traj.x_at(float(t)) - cfg.expect_x(float(t)))
        for t in np.linspace(lo, hi, cfg.grid)
    )
    out.residuals["expected_sup"] = sup
    out.verdicts["expected_match"] = sup <= cfg.expect_tol


def _run_ivp(cfg: RunConfig, prob: SelfAdjointProblem) -> TaskResult:
    lo, hi = cfg.interval
    spec = IVPSpec(
        _float(cfg.raw, "ivp.t0", lo),
        _float(cfg.raw, "ivp.x0"),
        _float(cfg.raw, "ivp.dax0"),
    )
    traj = solve_ivp(prob, spec, cfg.step)
    res = lx_residual(prob, traj)
    out = TaskResult(traj, res)
    sup = _sup_on_grid(res, lo, hi, cfg.grid)
    out.residuals["operator_sup"] = sup
    out.verdicts["residual_ok"] = sup <= cfg.tol
    _check_expectation(cfg, traj, out)
    return out


def _run_bvp(cfg: RunConfig, prob: SelfAdjointProblem) -> TaskResult:
    lo, hi = cfg.interval
    spec = _bvp_spec(cfg.raw, "bvp")
    traj = solve_bvp(prob, spec, step=cfg.step)
    res = lx_residual(prob, traj)
    out = TaskResult(traj, res)
    sup = _sup_on_grid(res, lo, hi, cfg.grid)
    out.residuals["operator_sup"] = sup
    out.verdicts["residual_ok"] = sup <= cfg.tol
    if spec.kind == "periodic":
        w = e0(cfg.pair, lo, hi)
        bres = max(
            abs(traj.x_at(lo) - w * traj.x_at(hi)),
            abs(traj.dax_at(lo) - w * traj.dax_at(hi)),
        )
    else:
        bres = max(
            abs(spec.xi * traj.x_at(lo) - spec.beta * traj.dax_at(lo) - spec.A),
            abs(spec.gamma * traj.x_at(hi) + spec.delta * traj.dax_at(hi) - spec.B),
        )
    out.residuals["boundary_sup"] = bres
    out.verdicts["boundary_ok"] = bres <= cfg.tol
    _check_expectation(cfg, traj, out)
    return out


def _green_kernel(cfg: RunConfig, prob: SelfAdjointProblem) -> Tuple[GreenKernel, BVPSpec]:
    spec = _bvp_spec(cfg.raw, "green")
    tg = np.linspace(cfg.interval[0], cfg.interval[1], cfg.grid)
    if spec.kind == "periodic":
        return green_periodic(prob, t_grid=tg, s_grid=tg), spec
    return green_cauchy(prob, spec, t_grid=tg, s_grid=tg), spec


def _run_green(cfg: RunConfig, prob: SelfAdjointProblem, with_audit: bool) -> TaskResult:
    lo, hi = cfg.interval
    G, spec = _green_kernel(cfg, prob)
    traj = apply_green(G, cfg.pair, cfg.h)
    res = lx_residual(prob, traj)
    out = TaskResult(traj, res, kernel=G)
    sup = _sup_on_grid(res, lo, hi, cfg.grid)
    out.residuals["operator_sup"] = sup
    out.verdicts["residual_ok"] = sup <= cfg.tol
    if with_audit:
        rep = audit_green(G, prob, spec)
        out.residuals["symmetry_sup"] = rep.symmetry_residual
        out.verdicts["symmetry_ok"] = rep.symmetry_residual <= 1.0e-6
        if rep.interior_negative is not None:
            out.verdicts["interior_negative"] = rep.interior_negative
        if rep.comparison_ok is not None:
            out.verdicts["comparison_ok"] = rep.comparison_ok
        if rep.equality_exact is not None:
            out.verdicts["repeat_identical"] = rep.equality_exact
        out.lines.extend(rep.lines())
    _check_expectation(cfg, traj, out)
    tg, sg = G.t_grid, G.s_grid
    merged = np.where(tg[:, None] <= sg[None, :], G.upper.values, G.lower.values)
    out.kernel_values = merged
    out.kernel_grids = (tg, sg)
    return out


def _run_cauchy(cfg: RunConfig, prob: SelfAdjointProblem) -> TaskResult:
    lo, hi = cfg.interval
    tg = np.linspace(lo, hi, cfg.grid)
    K1 = cauchy_kernel(prob, "basis_formula", t_grid=tg, s_grid=tg)
    K2 = cauchy_kernel(prob, "ivp_sweep", t_grid=tg, s_grid=tg)
    gap = float(np.max(np.abs(K1.values - K2.values)))
    traj = variation_of_constants(prob, lo, n=max(cfg.grid, 257))
    res = lx_residual(prob, traj)
    out = TaskResult(traj, res)
    sup = _sup_on_grid(res, lo, hi, cfg.grid)
    out.residuals["construction_gap"] = gap
    out.residuals["operator_sup"] = sup
    out.verdicts["constructions_agree"] = gap <= 1.0e-6
    out.verdicts["residual_ok"] = sup <= cfg.tol
    _check_expectation(cfg, traj, out)
    out.kernel_values = K1.values
    out.kernel_grids = (K1.t_grid, K1.s_grid)
    return out


def _run_riccati(cfg: RunConfig, prob: SelfAdjointProblem) -> TaskResult:
    lo, hi = cfg.interval
    spec = IVPSpec(
        _float(cfg.raw, "riccati.t0", lo),
        _float(cfg.raw, "riccati.x0", 1.0),
        _float(cfg.raw, "riccati.dax0", 0.0),
    )
    traj = solve_ivp(prob.homogeneous, spec, cfg.step)
    z = riccati_from_solution(prob.homogeneous, traj)
    rp = RiccatiProblem(cfg.pair, cfg.p, cfg.q, cfg.interval)
    rz = riccati_residual(rp, z)
    # keep clear of the endpoints: the residual differentiates interpolants
    pad = (hi - lo) / (cfg.grid - 1)
    sup = _sup_on_grid(rz, lo + pad, hi - pad, cfg.grid)
    back = solution_from_riccati(rp, z, spec.t0, cfg.step)
    back_res = lx_residual(prob.homogeneous, back)
    back_sup = _sup_on_grid(back_res, lo + pad, hi - pad, cfg.grid)
    out = TaskResult(traj, rz)
    out.residuals["riccati_sup"] = sup
    out.residuals["roundtrip_operator_sup"] = back_sup
    out.verdicts["riccati_residual_ok"] = sup <= cfg.tol
    out.verdicts["roundtrip_ok"] = back_sup <= cfg.tol
    _check_expectation(cfg, traj, out)
    return out


def _run_lyapunov(cfg: RunConfig, prob: SelfAdjointProblem) -> TaskResult:
    lo, hi = cfg.interval
    result = lyapunov_check(prob, lo, hi)
    traj = _witness(cfg, prob)
    res = lx_residual(prob.homogeneous, traj)
    out = TaskResult(traj, res)
    out.residuals["lhs"] = result.lhs
    out.residuals["rhs"] = result.rhs
    out.findings["necessary_holds"] = result.necessary_holds
    out.findings["sufficient_disconjugacy"] = result.sufficient_disconjugacy
    out.lines.append(f"lyapunov: lhs = {result.lhs:.9g}, rhs = {result.rhs:.9g}")
    return out


def _run_disconjugacy(cfg: RunConfig, prob: SelfAdjointProblem) -> TaskResult:
    lo, hi = cfg.interval
    criterion = cfg.raw.get("disconjugacy.criterion", "reid_v")
    verdict = disconjugate(prob, lo, hi, criterion=criterion, step=cfg.step)
    traj = _witness(cfg, prob)
    res = lx_residual(prob.homogeneous, traj)
    out = TaskResult(traj, res)
    out.findings["disconjugate"] = verdict
    return out


def _run_roundabout(cfg: RunConfig, prob: SelfAdjointProblem) -> TaskResult:
    lo, hi = cfg.interval
    rep = roundabout_audit(prob, lo, hi)
    traj = _witness(cfg, prob)
    res = lx_residual(prob.homogeneous, traj)
    out = TaskResult(traj, res)
    out.findings["solution_nonvanishing"] = rep.solution_nonvanishing
    out.findings["riccati_solvable"] = rep.riccati_solvable
    out.findings["functional_positive"] = rep.functional_positive
    out.findings["zero_count_disconjugate"] = rep.zero_count_disconjugate
    out.findings["left_endpoint_criterion"] = rep.left_endpoint_criterion
    out.findings["right_endpoint_criterion"] = rep.right_endpoint_criterion
    out.verdicts["agree"] = rep.agree
    out.residuals["worst_functional"] = rep.worst_functional
    out.lines.extend(rep.lines())
    return out


def _run_flw(cfg: RunConfig, prob: SelfAdjointProblem) -> TaskResult:
    lo, hi = cfg.interval
    if "flw.rungs" not in cfg.raw:
        raise ConfigError("flw task needs flw.rungs (comma-separated horizons)")
    rungs = _floats(cfg.raw["flw.rungs"], "flw.rungs")
    if len(rungs) < 2 or any(not lo < r <= hi for r in rungs) or sorted(rungs) != rungs:
        raise ConfigError("flw.rungs must be ascending horizons inside the interval")
    rep = flw_scan(prob, lo, rungs)
    traj = _witness(cfg, prob)
    res = lx_residual(prob.homogeneous, traj)
    out = TaskResult(traj, res)
    out.findings["oscillation_predicted"] = rep.predicted
    out.residuals["slope_weighted_inv_p"] = rep.slopes[0]
    out.residuals["slope_potential"] = rep.slopes[1]
    out.residuals["zero_count"] = float(rep.zero_count)
    out.lines.extend(rep.lines())
    return out


_RUNNERS = {
    "ivp": _run_ivp,
    "bvp": _run_bvp,
    "cauchy": _run_cauchy,
    "riccati": _run_riccati,
    "lyapunov": _run_lyapunov,
    "disconjugacy": _run_disconjugacy,
    "roundabout": _run_roundabout,
    "flw": _run_flw,
}


def _execute(cfg: RunConfig) -> TaskResult:
    prob = _problem(cfg)
    if cfg.task == "green":
        return _run_green(cfg, prob, with_audit=False)
    if cfg.task == "audit":
        return _run_green(cfg, prob, with_audit=True)
    return _RUNNERS[cfg.task](cfg, prob)


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

def _write_csv(cfg: RunConfig, result: TaskResult, path: Path) -> None:
    lo, hi = cfg.interval
    traj = result.trajectory
    grid = traj.grid if traj.grid.size == cfg.grid else np.linspace(lo, hi, cfg.grid)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x", "dax", "residual"])
        for t in grid:
            t = float(t)
            r = result.residual(t) if result.residual is not None else 0.0
            writer.writerow(
                [f"{t:.15g}", f"{traj.x_at(t):.15g}", f"{traj.dax_at(t):.15g}", f"{r:.15g}"]
            )


def _write_json(cfg: RunConfig, result: TaskResult, wall: float, path: Path) -> None:
    # numpy scalars sneak in through report dataclasses; json wants builtins.
    # "pass" aggregates the health checks only; classification findings
    # (disconjugate, oscillation_predicted, the two-zero dichotomy) ride along
    # without deciding it
    verdicts = {name: bool(value) for name, value in result.verdicts.items()}
    verdicts["pass"] = all(verdicts.values()) if verdicts else True
    verdicts.update({name: bool(value) for name, value in result.findings.items()})
    report = {
        "task": cfg.task,
        "config": cfg.raw,
        "verdicts": verdicts,
        "residuals": {name: float(value) for name, value in result.residuals.items()},
        "wall_time_s": wall,
    }
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _render_figures(cfg: RunConfig, result: TaskResult) -> List[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lo, hi = cfg.interval
    written = []
    traj = result.trajectory
    grid = np.linspace(lo, hi, max(cfg.grid, 257))
    xs = [traj.x_at(float(t)) for t in grid]
    dxs = [traj.dax_at(float(t)) for t in grid]
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax0.plot(grid, xs, label="x")
    ax0.plot(grid, dxs, label="Dx", alpha=0.7)
    ax0.legend(loc="best")
    ax0.set_ylabel("solution channels")
    ax0.set_title(f"task {cfg.task}: trajectory")
    if result.residual is not None:
        rs = np.abs([result.residual(float(t)) for t in grid])
        ax1.semilogy(grid, np.maximum(rs, 1.0e-18))
    ax1.set_xlabel("t")
    ax1.set_ylabel("|residual|")
    fig.tight_layout()
    target = cfg.out_dir / "trajectory.png"
    fig.savefig(target, dpi=110)
    plt.close(fig)
    written.append(target)

    if result.kernel_values is not None:
        tg, sg = result.kernel_grids
        fig, ax = plt.subplots(figsize=(6.0, 5.0))
        mesh = ax.pcolormesh(sg, tg, result.kernel_values, shading="auto")
        fig.colorbar(mesh, ax=ax, label="K(t, s)")
        ax.set_xlabel("s")
        ax.set_ylabel("t")
        ax.set_title(f"task {cfg.task}: kernel")
        fig.tight_layout()
        target = cfg.out_dir / "kernel.png"
        fig.savefig(target, dpi=110)
        plt.close(fig)
        written.append(target)
    return written


def run(cfg: RunConfig) -> int:
    """Execute a validated config and write its artifacts; returns exit code."""
    start = time.perf_counter()
    try:
        result = _execute(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except DegenerateBVPError as err:
        print(f"degenerate problem: {err}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, ArithmeticError) as err:
        print(f"numerics failure: {err}", file=sys.stderr)
        return 3
    wall = time.perf_counter() - start

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in cfg.formats and result.trajectory is not None:
        target = cfg.out_dir / "trajectory.csv"
        _write_csv(cfg, result, target)
        written.append(target)
    if "json" in cfg.formats:
        target = cfg.out_dir / "report.json"
        _write_json(cfg, result, wall, target)
        written.append(target)
    if "png" in cfg.formats and result.trajectory is not None:
        written.extend(_render_figures(cfg, result))

    if not cfg.quiet:
        print(
            f"task {cfg.task} on {list(cfg.interval)} "
            f"[{cfg.pair.family_tag} alpha={float(cfg.pair.alpha):g}]"
        )
        for name, value in result.verdicts.items():
            print(f"  {name}: {value}")
        for name, value in result.findings.items():
            print(f"  {name}: {value}")
        for name, value in result.residuals.items():
            print(f"  {name} = {value:.6g}")
        for line in result.lines:
            print(f"  {line}")
        for target in written:
            print(f"wrote {target}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="confode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute a config file")
    runp.add_argument("config", type=Path)
    runp.add_argument("--out", type=Path, default=None, help="output directory")
    runp.add_argument("--tol", type=float, default=None, help="residual tolerance override")
    runp.add_argument("--grid", type=int, default=None, help="node count override")
    runp.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        raw = read_flat(args.config)
        if args.out is not None:
            raw["outputs.dir"] = str(args.out)
        if args.tol is not None:
            raw["numerics.tol"] = f"{args.tol:g}"
        if args.grid is not None:
            raw["numerics.grid"] = str(args.grid)
        cfg = load_config(raw, quiet=args.quiet)
    except (ConfigError, ExpressionError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
