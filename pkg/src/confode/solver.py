"""Second-order problems in self-adjoint form and their initial value solver.

The equation solved throughout is

    L x = D[p Dx] + q x = h        (D the proportional derivative, p > 0)

reduced to a classical first-order system in z = (x, y) with y = p Dx:

    x' = ( y/p - kappa1 x ) / kappa0
    y' = ( h - q x - kappa1 y ) / kappa0

General equations a DDx + b Dx + c x = g are converted to this form with the
multiplier p = e_{(b/a + kappa1)}(., t0), which never vanishes, leaving the
solution set untouched.

Trajectories store both channels (x and Dx).  The x channel interpolates with
cubic Hermite pieces fed by the exact slope x' = (Dx - kappa1 x)/kappa0, so
interpolated values honor the stored derivative channel; the Dx channel uses
a plain C2 cubic spline.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp as _scipy_solve_ivp
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .confcalc import DEFAULT_QUAD, ExpArgs, QuadratureConfig, dalpha, exp_p_field
from .fields import DomainError, ScalarField, constant, from_callable
from .gains import KappaPair

__all__ = [
    "GeneralProblem",
    "IVPSpec",
    "SelfAdjointProblem",
    "Trajectory",
    "basis",
    "lx_residual",
    "solve_ivp",
    "to_self_adjoint",
    "wronskian",
]

POSITIVITY_GRID = 1024  #: probe resolution for sign checks on p (and a)

_POSITIVITY_OK = weakref.WeakSet()  # problems whose p already passed the probe

RK_RTOL = 1.0e-9
RK_ATOL = 1.0e-11


# ---------------------------------------------------------------------------
# problem types
# ---------------------------------------------------------------------------

def _spot_check(field: ScalarField, interval, name: str) -> None:
    lo, hi = interval
    for t in np.linspace(lo, hi, 7):
        v = field(float(t))
        if not math.isfinite(v):
            raise ValueError(f"{name}({t:g}) is not finite")


@dataclass(frozen=True)
class SelfAdjointProblem:
    """Coefficients of L x = D[p Dx] + q x = h on a closed interval."""

    pair: KappaPair
    p: ScalarField
    q: ScalarField
    h: ScalarField
    interval: Tuple[float, float]

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError(f"degenerate interval {self.interval}")
        self.pair.assert_in(lo, hi)
        for f, name in ((self.p, "p"), (self.q, "q"), (self.h, "h")):
            _spot_check(f, self.interval, name)

    @property
    def homogeneous(self) -> "SelfAdjointProblem":
        return replace(self, h=constant(0.0, "0"))

    def check_p_positive(self) -> None:
        if self in _POSITIVITY_OK:
            return  # kernel sweeps re-solve the same problem hundreds of times
        lo, hi = self.interval
        for t in np.linspace(lo, hi, POSITIVITY_GRID):
            if not self.p(float(t)) > 0.0:
                raise ValueError(f"p({t:g}) = {self.p(float(t)):g} is not positive")
        _POSITIVITY_OK.add(self)


@dataclass(frozen=True)
class GeneralProblem:
    """Coefficients of a DDx + b Dx + c x = g on a closed interval."""

    pair: KappaPair
    a: ScalarField
    b: ScalarField
    c: ScalarField
    g: ScalarField
    interval: Tuple[float, float]

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError(f"degenerate interval {self.interval}")
        self.pair.assert_in(lo, hi)
        for f, name in ((self.a, "a"), (self.b, "b"), (self.c, "c"), (self.g, "g")):
            _spot_check(f, self.interval, name)


@dataclass(frozen=True)
class IVPSpec:
    """Initial data x(t0) = x0, Dx(t0) = x1."""

    t0: float
    x0: float
    x1: float


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

class Trajectory:
    """Sampled solution with value and operator-derivative channels.

    Node values are exact; between nodes the x channel is cubic Hermite with
    the slope reconstructed from the stored Dx channel, and the Dx channel is
    a C2 cubic spline.  Evaluation slightly outside the span (up to 0.1% of
    its length, enough for difference stencils at the edges) extrapolates;
    beyond that it raises.
    """

    def __init__(self, pair: KappaPair, grid, x, dax):
        grid = np.asarray(grid, dtype=float)
        x = np.asarray(x, dtype=float)
        dax = np.asarray(dax, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("trajectory needs at least two grid points")
        if not (np.diff(grid) > 0).all():
            raise ValueError("trajectory grid must be strictly increasing")
        if x.shape != grid.shape or dax.shape != grid.shape:
            raise ValueError("grid, x, dax must have equal length")
        self.pair = pair
        self.grid = grid
        self.x = x
        self.dax = dax
        k0 = np.array([pair.kappa0(t) for t in grid])
        k1 = np.array([pair.kappa1(t) for t in grid])
        xprime = (dax - k1 * x) / k0
        self._x_spline = CubicHermiteSpline(grid, x, xprime)
        self._dax_spline = CubicSpline(grid, dax)
        self._dax_deriv = self._dax_spline.derivative()
        self._margin = 1.0e-3 * (grid[-1] - grid[0])

    @property
    def span(self) -> Tuple[float, float]:
        return (float(self.grid[0]), float(self.grid[-1]))

    def _check(self, t: float) -> None:
        lo, hi = self.span
        if t < lo - self._margin or t > hi + self._margin:
            raise DomainError(f"t={t} outside trajectory span [{lo:g}, {hi:g}]")

    def x_at(self, t: float) -> float:
        self._check(t)
        return float(self._x_spline(t))

    def dax_at(self, t: float) -> float:
        self._check(t)
        return float(self._dax_spline(t))

    def x_field(self) -> ScalarField:
        # x' recovered exactly from the two channels
        pair = self.pair

        def dfn(t: float) -> float:
            return (self.dax_at(t) - pair.kappa1(t) * self.x_at(t)) / pair.kappa0(t)

        return from_callable(self.x_at, dfn, "x")

    def dax_field(self) -> ScalarField:
        return from_callable(self.dax_at, lambda t: float(self._dax_deriv(t)), "Dx")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def solve_ivp(prob: SelfAdjointProblem, ivp: IVPSpec, step: float) -> Trajectory:
    """Integrate the reduced 2-system with adaptive RK45 from t0 outward.

    ``step`` is both the output spacing and the integrator's maximum step.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    lo, hi = prob.interval
    if not lo <= ivp.t0 <= hi:
        raise ValueError(f"t0={ivp.t0} outside the problem interval [{lo}, {hi}]")
    prob.check_p_positive()

    pair, p, q, h = prob.pair, prob.p, prob.q, prob.h

    def rhs(t, z):
        x, y = z
        k0 = pair.kappa0(t)
        k1 = pair.kappa1(t)
        return ((y / p(t) - k1 * x) / k0, (h(t) - q(t) * x - k1 * y) / k0)

    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, n)
    k = int(np.argmin(np.abs(grid - ivp.t0)))
    if abs(grid[k] - ivp.t0) <= 1.0e-9 * (hi - lo):
        grid[k] = ivp.t0  # snap so the masks below split exactly at t0
    else:
        grid = np.sort(np.append(grid, ivp.t0))

    z0 = np.array([ivp.x0, prob.p(ivp.t0) * ivp.x1])
    xs = np.empty_like(grid)
    ys = np.empty_like(grid)

    for forward in (True, False):
        mask = grid >= ivp.t0 if forward else grid <= ivp.t0
        t_eval = grid[mask] if forward else grid[mask][::-1]
        if t_eval.size == 1:
            xs[mask], ys[mask] = z0[0], z0[1]
            continue
        sol = _scipy_solve_ivp(
            rhs,
            (ivp.t0, hi if forward else lo),
            z0,
            method="RK45",
            t_eval=t_eval,
            rtol=RK_RTOL,
            atol=RK_ATOL,
            max_step=step,
        )
        if not sol.success:
            raise RuntimeError(f"integrator failed: {sol.message}")
        xs[mask] = sol.y[0] if forward else sol.y[0][::-1]
        ys[mask] = sol.y[1] if forward else sol.y[1][::-1]

    p_on_grid = np.array([p(t) for t in grid])
    return Trajectory(pair, grid, xs, ys / p_on_grid)


def to_self_adjoint(
    gp: GeneralProblem,
    t0: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> SelfAdjointProblem:
    """Rewrite a DDx + b Dx + c x = g in self-adjoint form.

    The multiplier p = e_{(b/a + kappa1)}(., t0) is positive by construction;
    then q = p c / a and h = g p / a, and the two equations share solutions.
    """
    lo, hi = gp.interval
    if not lo <= t0 <= hi:
        raise ValueError(f"t0={t0} outside the problem interval")
    vals = [gp.a(float(t)) for t in np.linspace(lo, hi, POSITIVITY_GRID)]
    if any(v == 0.0 or not math.isfinite(v) for v in vals) or min(vals) * max(vals) < 0.0:
        raise ValueError("leading coefficient a vanishes inside the interval")
    rate = gp.b / gp.a + gp.pair.kappa1
    p = exp_p_field(ExpArgs(rate, gp.pair), t0, quad, cached=True).relabel("p")
    q = (p * gp.c / gp.a).relabel("q")
    h = (gp.g * p / gp.a).relabel("h")
    return SelfAdjointProblem(gp.pair, p, q, h, gp.interval)


def wronskian(pair: KappaPair, xtraj: Trajectory, ytraj: Trajectory, t: float) -> float:
    """x(t) Dy(t) - y(t) Dx(t) from the stored channels."""
    return xtraj.x_at(t) * ytraj.dax_at(t) - ytraj.x_at(t) * xtraj.dax_at(t)


def basis(
    prob: SelfAdjointProblem,
    t0: float,
    step: Optional[float] = None,
) -> Tuple[Trajectory, Trajectory]:
    """Two independent homogeneous solutions with Wronskian 1/p(t0) at t0.

    u carries (x, Dx)(t0) = (1, 0) and v carries (0, 1/p(t0)).
    """
    if step is None:
        step = (prob.interval[1] - prob.interval[0]) / 512.0
    hom = prob.homogeneous
    u = solve_ivp(hom, IVPSpec(t0, 1.0, 0.0), step)
    v = solve_ivp(hom, IVPSpec(t0, 0.0, 1.0 / prob.p(t0)), step)
    return u, v


def lx_residual(prob: SelfAdjointProblem, traj: Trajectory) -> ScalarField:
    """t -> D[p Dx](t) + q(t) x(t) - h(t) for an interpolated trajectory.

    The outer derivative necessarily differentiates the interpolated p*Dx
    channel, so expect interpolation-limited accuracy, not machine epsilon.
    """
    y = prob.p * traj.dax_field()

    def fn(t: float) -> float:
        return dalpha(prob.pair, y, t) + prob.q(t) * traj.x_at(t) - prob.h(t)

    return from_callable(fn, None, "Lx-h")
