"""Structure theory over the solver: kernels, reduction, Riccati, factorization.

The Cauchy kernel K(t, s) solves the homogeneous equation in t for each fixed
s with K(s, s) = 0 and DK(s, s) = 1/p(s); forcing is recovered by integrating
it against h (variation of constants).  A nonvanishing solution x yields a
second solution by reduction of order, a log-derivative z = p Dx / x solving
the Riccati companion equation, and the two-factor nested form of the
operator (with the Trench refinement that pushes the trailing integral to
divergence when the plain factors do not already have it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .confcalc import (
    DEFAULT_QUAD,
    Antiderivative,
    QuadratureConfig,
    dalpha,
    dalpha_field,
    e0,
    e0_field,
    integrate,
)
from .fields import ScalarField, from_callable
from .gains import KappaPair
from .solver import (
    GeneralProblem,
    IVPSpec,
    SelfAdjointProblem,
    Trajectory,
    basis,
    solve_ivp,
    wronskian,
)

__all__ = [
    "FactorPair",
    "Kernel",
    "RecessiveDominantReport",
    "RiccatiProblem",
    "TrenchReport",
    "cauchy_kernel",
    "classify_recessive_dominant",
    "nested_apply",
    "polya_factors",
    "reduce_order",
    "reduce_order_general",
    "riccati_from_solution",
    "riccati_residual",
    "solution_from_riccati",
    "trench_factors",
    "variation_of_constants",
    "variation_of_parameters",
]

KERNEL_N = 129  #: default dense-grid resolution per axis

NONVANISHING_RATIO = 1.0e-8  #: min|x| must exceed this times max|x|

TRENCH_DIVERGENCE_FACTOR = 1.0e6  #: total vs first-decile partial integral


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

class Kernel:
    """Dense K(t, s) samples with cubic columns, blended linearly across s.

    For s on the grid, evaluation is the cubic interpolant of that column in
    t; off-grid s blends the two neighboring columns linearly.
    """

    def __init__(self, t_grid, s_grid, values):
        self.t_grid = np.asarray(t_grid, dtype=float)
        self.s_grid = np.asarray(s_grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (self.t_grid.size, self.s_grid.size):
            raise ValueError("kernel values must be shaped (len(t_grid), len(s_grid))")
        if not (np.diff(self.t_grid) > 0).all() or not (np.diff(self.s_grid) > 0).all():
            raise ValueError("kernel grids must be strictly increasing")
        if not np.isfinite(self.values).all():
            raise ValueError("kernel contains non-finite values")
        self._columns = {}

    def _column(self, j: int) -> CubicSpline:
        if j not in self._columns:
            self._columns[j] = CubicSpline(self.t_grid, self.values[:, j])
        return self._columns[j]

    def at(self, t: float, s: float, derivative: int = 0) -> float:
        sg = self.s_grid
        if s <= sg[0]:
            return float(self._column(0)(t, derivative))
        if s >= sg[-1]:
            return float(self._column(sg.size - 1)(t, derivative))
        j = int(np.searchsorted(sg, s) - 1)
        u = (s - sg[j]) / (sg[j + 1] - sg[j])
        return float(
            (1.0 - u) * self._column(j)(t, derivative)
            + u * self._column(j + 1)(t, derivative)
        )

    def column_field(self, j: int, label: str = "K(.,s)") -> ScalarField:
        spline = self._column(j)
        dspline = spline.derivative()
        return from_callable(lambda t: float(spline(t)), lambda t: float(dspline(t)), label)


def cauchy_kernel(
    prob: SelfAdjointProblem,
    method: str = "basis_formula",
    s_grid: Optional[Sequence[float]] = None,
    t_grid: Optional[Sequence[float]] = None,
) -> Kernel:
    """Kernel of the homogeneous problem by either of two routes.

    ``ivp_sweep`` integrates one initial value problem per s column;
    ``basis_formula`` assembles every column from a single solution basis:

        K(t, s) = (u(s) v(t) - v(s) u(t)) / (p(s) W(u, v)(s))
    """
    lo, hi = prob.interval
    if t_grid is None:
        t_grid = np.linspace(lo, hi, KERNEL_N)
    if s_grid is None:
        s_grid = np.linspace(lo, hi, KERNEL_N)
    t_grid = np.asarray(t_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)

    if method == "ivp_sweep":
        cols = []
        step = (hi - lo) / (4 * max(KERNEL_N, t_grid.size))
        for s in s_grid:
            traj = solve_ivp(prob.homogeneous, IVPSpec(float(s), 0.0, 1.0 / prob.p(float(s))), step)
            cols.append([traj.x_at(float(t)) for t in t_grid])
        values = np.array(cols).T
    elif method == "basis_formula":
        u, v = basis(prob, 0.5 * (lo + hi), step=(hi - lo) / 1024.0)
        us = np.array([u.x_at(float(s)) for s in s_grid])
        vs = np.array([v.x_at(float(s)) for s in s_grid])
        ut = np.array([u.x_at(float(t)) for t in t_grid])
        vt = np.array([v.x_at(float(t)) for t in t_grid])
        denom = np.array(
            [prob.p(float(s)) * wronskian(prob.pair, u, v, float(s)) for s in s_grid]
        )
        values = (np.outer(vt, us) - np.outer(ut, vs)) / denom[None, :]
    else:
        raise ValueError(f"unknown kernel method {method!r}")
    return Kernel(t_grid, s_grid, values)


def cauchy_closed_form_q0(
    pair: KappaPair,
    p: ScalarField,
    t: float,
    s: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """K(t, s) = e0(t, s) * integral_s^t 1/p in the weighted measure (q = 0)."""
    inner = integrate(lambda tau: 1.0 / (p(tau) * pair.kappa0(tau)), s, t, quad)
    return e0(pair, t, s, quad) * inner


# ---------------------------------------------------------------------------
# variation of constants
# ---------------------------------------------------------------------------

def variation_of_constants(
    prob: SelfAdjointProblem,
    a: float,
    n: int = 257,
) -> Trajectory:
    """Particular solution x(t) = integral_a^t K(t, s) h(s) in the measure.

    Assembled through the basis so both channels come from two cumulative
    integrals: x = v I_u - u I_v and Dx = Dv I_u - Du I_v, which vanish at a
    by construction.
    """
    lo, hi = prob.interval
    if not lo <= a <= hi:
        raise ValueError(f"a={a} outside the problem interval")
    pair = prob.pair
    u, v = basis(prob, a, step=(hi - lo) / 1024.0)

    pw = prob.p(a) * wronskian(pair, u, v, a)

    def weight(s: float) -> float:
        # Abel keeps p W at pw * e0(s, a)^2, cheaper and steadier than re-deriving
        return prob.h(s) / (pw * e0(pair, s, a) ** 2 * pair.kappa0(s))

    iu = Antiderivative(lambda s: u.x_at(s) * weight(s), a)
    iv = Antiderivative(lambda s: v.x_at(s) * weight(s), a)

    grid = np.linspace(a, hi, n)
    xs = np.empty_like(grid)
    daxs = np.empty_like(grid)
    for k, t in enumerate(grid):
        t = float(t)
        Iu, Iv = iu(t), iv(t)
        xs[k] = v.x_at(t) * Iu - u.x_at(t) * Iv
        daxs[k] = v.dax_at(t) * Iu - u.dax_at(t) * Iv
    xs[0] = 0.0
    daxs[0] = 0.0
    return Trajectory(pair, grid, xs, daxs)


# ---------------------------------------------------------------------------
# reduction of order
# ---------------------------------------------------------------------------

def _check_nonvanishing(x: Trajectory, what: str = "x") -> None:
    ax = np.abs(x.x)
    if ax.min() <= NONVANISHING_RATIO * ax.max():
        raise ValueError(f"{what} is not bounded away from zero on its grid")
    if (np.sign(x.x[:-1]) * np.sign(x.x[1:]) < 0).any():
        # a sign flip between nodes means a zero the grid stepped over
        raise ValueError(f"{what} changes sign between grid nodes")


def reduce_order(prob: SelfAdjointProblem, x: Trajectory, t0: float) -> Trajectory:
    """Second independent solution from a nonvanishing one.

        y(t) = x(t) * integral_{t0}^t e0(s, t0)^2 / (p x^2) in the measure

    The construction pins the Wronskian: p W(x, y) = e0(t, t0)^2, so the Dy
    channel is recovered algebraically instead of differenced.
    """
    _check_nonvanishing(x)
    pair = prob.pair

    def growth_rate(s: float) -> float:
        return e0(pair, s, t0) ** 2 / (prob.p(s) * x.x_at(s) ** 2 * pair.kappa0(s))

    I = Antiderivative(growth_rate, t0)
    ys = np.empty_like(x.grid)
    dys = np.empty_like(x.grid)
    for k, t in enumerate(x.grid):
        t = float(t)
        ys[k] = x.x_at(t) * I(t)
        dys[k] = (e0(pair, t, t0) ** 2 / prob.p(t) + ys[k] * x.dax_at(t)) / x.x_at(t)
    return Trajectory(pair, x.grid, ys, dys)


def reduce_order_general(gp: GeneralProblem, x: Trajectory, t0: float) -> Trajectory:
    """Reduction of order for a DDx + b Dx + c x = 0, no conversion needed.

    The weight e_{(-b/a - kappa1)}(s, t0) equals e0^2/p of the converted
    problem, so this is the same construction expressed in raw coefficients.
    """
    _check_nonvanishing(x)
    pair = gp.pair

    def log_weight_rate(s: float) -> float:
        return (-gp.b(s) / gp.a(s) - 2.0 * pair.kappa1(s)) / pair.kappa0(s)

    lw = Antiderivative(log_weight_rate, t0)

    def growth_rate(s: float) -> float:
        return math.exp(lw(s)) / (x.x_at(s) ** 2 * pair.kappa0(s))

    I = Antiderivative(growth_rate, t0)
    ys = np.empty_like(x.grid)
    dys = np.empty_like(x.grid)
    for k, t in enumerate(x.grid):
        t = float(t)
        ys[k] = x.x_at(t) * I(t)
        dys[k] = (math.exp(lw(t)) + ys[k] * x.dax_at(t)) / x.x_at(t)
    return Trajectory(pair, x.grid, ys, dys)


# ---------------------------------------------------------------------------
# Riccati correspondence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiProblem:
    """Coefficients of R z = Dz + q + z^2/p - kappa1 z on an interval."""

    pair: KappaPair
    p: ScalarField
    q: ScalarField
    interval: Tuple[float, float]


def riccati_from_solution(prob: SelfAdjointProblem, x: Trajectory) -> ScalarField:
    """z = p Dx / x, the log-derivative of a nonvanishing solution."""
    _check_nonvanishing(x)
    return ((prob.p * x.dax_field()) / x.x_field()).relabel("z")


def riccati_residual(rp: RiccatiProblem, z: ScalarField) -> ScalarField:
    """Pointwise R z."""
    pair = rp.pair

    def fn(t: float) -> float:
        return (
            dalpha(pair, z, t)
            + rp.q(t)
            + z(t) ** 2 / rp.p(t)
            - pair.kappa1(t) * z(t)
        )

    return from_callable(fn, None, f"R[{z.label}]")


def solution_from_riccati(
    rp: RiccatiProblem,
    z: ScalarField,
    t0: float,
    step: float,
) -> Trajectory:
    """x = e_{(z/p)}(., t0), positive by construction, with Dx = z x / p."""
    if not step > 0:
        raise ValueError("step must be positive")
    lo, hi = rp.interval
    if not lo <= t0 <= hi:
        raise ValueError(f"t0={t0} outside the problem interval")
    pair = rp.pair

    exponent = Antiderivative(
        lambda tau: (z(tau) / rp.p(tau) - pair.kappa1(tau)) / pair.kappa0(tau), t0
    )
    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, n)
    k = int(np.argmin(np.abs(grid - t0)))
    if abs(grid[k] - t0) <= 1.0e-9 * (hi - lo):
        grid[k] = t0
    else:
        grid = np.sort(np.append(grid, t0))
    xs = np.array([math.exp(exponent(float(t))) for t in grid])
    dxs = np.array([z(float(t)) * xv / rp.p(float(t)) for t, xv in zip(grid, xs)])
    return Trajectory(pair, grid, xs, dxs)


# ---------------------------------------------------------------------------
# nested two-factor forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactorPair:
    """Positive factors (f1, f2) of the nested form f1 D{ f2 D[ f1 y ] }."""

    f1: ScalarField
    f2: ScalarField
    kind: str  #: "polya" or "trench"


def nested_apply(pair: KappaPair, factors: FactorPair, y: ScalarField) -> ScalarField:
    """Evaluate f1 * D{ f2 * D[ f1 * y ] } pointwise."""
    inner = dalpha_field(pair, factors.f1 * y)
    mid = factors.f2 * inner

    def fn(t: float) -> float:
        return factors.f1(t) * dalpha(pair, mid, t)

    return from_callable(fn, None, f"nested[{factors.kind}]({y.label})")


def _positive_trajectory_field(x: Trajectory) -> ScalarField:
    if x.x.min() <= 0.0:
        raise ValueError("trajectory must be strictly positive")
    _check_nonvanishing(x)
    return x.x_field()


def polya_factors(prob: SelfAdjointProblem, x: Trajectory, a: float) -> FactorPair:
    """Two-factor form from a positive solution:

        f1 = e0(., a)/x,   f2 = p x^2 / e0(., a)^2
    """
    xf = _positive_trajectory_field(x)
    base = e0_field(prob.pair, a)
    rho1 = (base / xf).relabel("rho1")
    rho2 = (prob.p * xf * xf / (base * base)).relabel("rho2")
    return FactorPair(rho1, rho2, "polya")


@dataclass
class TrenchReport:
    already_divergent: bool
    total: float  #: integral of delta2 over [a, b]
    first_decile: float
    ladder: list  #: (T, partial integral of 1/gamma2 up to T)


def trench_factors(
    prob: SelfAdjointProblem,
    x: Trajectory,
    a: float,
    b: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> Tuple[FactorPair, TrenchReport]:
    """Canonical nested form whose trailing integral diverges at b.

    Starting from the reciprocals (delta1, delta2) of the plain factors: if
    integral_a^b delta2 already blows past the divergence threshold, the
    plain factors stand; otherwise
        beta1 = delta1 * J,  beta2 = delta2 / J^2,  J(t) = integral_t^b delta2,
    and the returned factors are their reciprocals, making
    integral_a^T 1/gamma2 = 1/J(T) - 1/J(a) grow without bound as T -> b.
    """
    polya = polya_factors(prob, x, a)
    pair = prob.pair
    delta1 = (1.0 / polya.f1).relabel("delta1")
    delta2 = (1.0 / polya.f2).relabel("delta2")

    d2_measure = lambda s: delta2(s) / pair.kappa0(s)
    total = integrate(d2_measure, a, b, quad)
    first_decile = integrate(d2_measure, a, a + (b - a) / 10.0, quad)

    if total > TRENCH_DIVERGENCE_FACTOR * first_decile:
        factors = FactorPair(polya.f1, polya.f2, "trench")
        inv_f2 = delta2
    else:
        tail = Antiderivative(d2_measure, b, quad)
        J = from_callable(lambda t: -tail(t), lambda t: -d2_measure(t), "J")
        beta1 = (delta1 * J).relabel("beta1")
        beta2 = (delta2 / (J * J)).relabel("beta2")
        factors = FactorPair((1.0 / beta1).relabel("gamma1"), (1.0 / beta2).relabel("gamma2"), "trench")
        inv_f2 = beta2

    rungs = [b - (b - a) * 0.5**k for k in range(1, 9)]
    ladder = []
    partial = Antiderivative(lambda s: inv_f2(s) / pair.kappa0(s), a, quad)
    for T in rungs:
        ladder.append((T, partial(T)))
    return factors, TrenchReport(total > TRENCH_DIVERGENCE_FACTOR * first_decile, total, first_decile, ladder)


# ---------------------------------------------------------------------------
# variation of parameters from one positive solution
# ---------------------------------------------------------------------------

def variation_of_parameters(
    prob: SelfAdjointProblem,
    x: Trajectory,
    y_a: float,
    w_a: float,
    a: float,
) -> Trajectory:
    """Solve L y = h from one positive solution x of the homogeneous problem.

        y = x * [ y_a/x(a) + w_a K(t) + N(t) ]
        K(t) = integral_a^t e0(s,a)^2/(p x^2),
        N(t) = integral_a^t e0(s,a)^2/(p x^2) * M(s),
        M(s) = integral_a^s x h / e0(., a)^2   (all in the weighted measure)

    where w_a is p(a) W(x, y)(a).  The Dy channel follows from
    p W(x, y)(t) = (w_a + M(t)) e0(t, a)^2.
    """
    xf = _positive_trajectory_field(x)
    pair = prob.pair

    M = Antiderivative(
        lambda s: xf(s) * prob.h(s) / (e0(pair, s, a) ** 2 * pair.kappa0(s)), a
    )
    base_over_px2 = lambda s: e0(pair, s, a) ** 2 / (prob.p(s) * xf(s) ** 2 * pair.kappa0(s))
    K = Antiderivative(base_over_px2, a)
    N = Antiderivative(lambda s: base_over_px2(s) * M(s), a)

    c0 = y_a / x.x_at(a)
    ys = np.empty_like(x.grid)
    dys = np.empty_like(x.grid)
    for k, t in enumerate(x.grid):
        t = float(t)
        S = c0 + w_a * K(t) + N(t)
        ys[k] = x.x_at(t) * S
        dys[k] = S * x.dax_at(t) + (w_a + M(t)) * e0(pair, t, a) ** 2 / (prob.p(t) * x.x_at(t))
    return Trajectory(pair, x.grid, ys, dys)


# ---------------------------------------------------------------------------
# recessive / dominant classification
# ---------------------------------------------------------------------------

@dataclass
class RecessiveDominantReport:
    verdict: str  #: "u_recessive", "v_recessive", or "inconclusive"
    ratio_ladder: list  #: (T, |u(T)/v(T)|)
    growth_u: list  #: (T, integral_a^T e0^2/(p u^2))
    growth_v: list
    ordering_ok: bool  #: Riccati ordering of the winner on the tail
    notes: list

    def lines(self) -> list:
        out = [f"recessive/dominant verdict: {self.verdict} (heuristic ladder test)"]
        for (T, r) in self.ratio_ladder:
            out.append(f"  |u/v|({T:g}) = {r:.6g}")
        out.extend(f"  note: {n}" for n in self.notes)
        return out


def classify_recessive_dominant(
    prob: SelfAdjointProblem,
    u: Trajectory,
    v: Trajectory,
    a: float,
    horizon_ladder: Sequence[float],
) -> RecessiveDominantReport:
    """Ladder comparison of two homogeneous solutions toward the right end.

    The verdict is a finite-horizon heuristic: it reports the u/v trend, the
    growth of the reciprocal-square integrals, and the log-derivative
    ordering on the tail; it cannot certify the limit itself.
    """
    pair = prob.pair
    ladder = sorted(float(T) for T in horizon_ladder)
    if not ladder:
        raise ValueError("horizon ladder is empty")
    notes = []

    # precondition: no zeros on the tail
    for traj, name in ((u, "u"), (v, "v")):
        sel = (traj.grid >= a) & (traj.grid <= ladder[-1])
        vals = traj.x[sel]
        if (np.sign(vals[:-1]) * np.sign(vals[1:]) < 0).any() or (vals == 0.0).any():
            notes.append(f"{name} changes sign on the tail; classification void")
            return RecessiveDominantReport("inconclusive", [], [], [], False, notes)

    ratio = [(T, abs(u.x_at(T) / v.x_at(T))) for T in ladder]
    gu_int = Antiderivative(lambda s: e0(pair, s, a) ** 2 / (prob.p(s) * u.x_at(s) ** 2 * pair.kappa0(s)), a)
    gv_int = Antiderivative(lambda s: e0(pair, s, a) ** 2 / (prob.p(s) * v.x_at(s) ** 2 * pair.kappa0(s)), a)
    growth_u = [(T, gu_int(T)) for T in ladder]
    growth_v = [(T, gv_int(T)) for T in ladder]

    falling = all(r2 < r1 for (_, r1), (_, r2) in zip(ratio, ratio[1:]))
    rising = all(r2 > r1 for (_, r1), (_, r2) in zip(ratio, ratio[1:]))
    drop = ratio[-1][1] / ratio[0][1] if ratio[0][1] > 0 else 0.0

    def log_deriv(traj, t):
        return prob.p(t) * traj.dax_at(t) / traj.x_at(t)

    tail_pts = np.linspace(0.5 * (ladder[0] + ladder[-1]), ladder[-1], 5)
    if falling and drop < 0.1:
        ordering = all(log_deriv(v, float(t)) > log_deriv(u, float(t)) for t in tail_pts)
        verdict = "u_recessive" if ordering else "inconclusive"
    elif rising and drop > 10.0:
        ordering = all(log_deriv(u, float(t)) > log_deriv(v, float(t)) for t in tail_pts)
        verdict = "v_recessive" if ordering else "inconclusive"
    else:
        ordering = False
        verdict = "inconclusive"
        notes.append("u/v ratio shows no decisive trend along the ladder")
    return RecessiveDominantReport(verdict, ratio, growth_u, growth_v, ordering, notes)
