"""Core calculus for the proportional derivative.

Everything here reduces to two primitives attached to a gain pair:

    log_e0(t, s) = -integral_s^t kappa1/kappa0 dtau
    h1(t, a)     =  integral_a^t 1/kappa0 ds

The rate-p exponential is exp(integral_s^t (p - kappa1)/kappa0), integrals in
the weighted measure are classical integrals of f/kappa0, and the geodesics
(the curves annihilated by applying the operator twice) are spanned by
e0(t, a) and e0(t, a)*h1(t, a).

Exponentials accumulate the exponent and exponentiate once; the log-scale
accessors are public so long intervals cannot overflow.  Built-in gain pairs
carry analytic channels for the two primitives; custom pairs fall back to
cached quadrature anchored at the first queried point.
"""

from __future__ import annotations

import bisect
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning
from scipy.integrate import quad as _scipy_quad

from .fields import ScalarField, bisect_root, from_callable, scan_sign_changes
from .gains import KappaPair

__all__ = [
    "Antiderivative",
    "DEFAULT_QUAD",
    "ExpArgs",
    "QuadratureConfig",
    "QuadratureError",
    "alpha_integral",
    "dalpha",
    "dalpha2",
    "dalpha_field",
    "e0",
    "e0_field",
    "e0_right_field",
    "exp_p",
    "exp_p_field",
    "find_alpha_critical",
    "geodesic",
    "h1",
    "h1_fast",
    "h1_field",
    "h1_inverse",
    "inner_product",
    "integrate",
    "log_e0",
    "log_exp_p",
    "special",
    "special_field",
]

log = logging.getLogger(__name__)

WEIGHTS = ("none", "e0_right", "e0sq_right")
SPECIAL_KINDS = ("cos_a", "sin_a", "cosh_a", "sinh_a")


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerances."""


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1.0e-10
    rel_tol: float = 1.0e-8
    max_depth: int = 200  #: subdivision limit handed to the adaptive rule

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


DEFAULT_QUAD = QuadratureConfig()


def integrate(
    fn: Callable[[float], float],
    a: float,
    b: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Adaptive Gauss-Kronrod integral of ``fn`` over [a, b].

    ``points`` marks known interior breakpoints (kernel kinks).  Raises
    :class:`QuadratureError` when the subdivision limit is hit and the error
    estimate is still far above tolerance.
    """
    if a == b:
        return 0.0
    kw = {}
    if points is not None:
        inside = [p for p in points if min(a, b) < p < max(a, b)]
        if inside:
            kw["points"] = sorted(inside)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        val, err = _scipy_quad(
            fn, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_depth, **kw
        )
    if caught and err > 1.0e3 * max(quad.abs_tol, quad.rel_tol * abs(val)):
        raise QuadratureError(
            f"integral over [{a:g}, {b:g}] did not converge: "
            f"estimate {val:.6g}, error {err:.3g} ({caught[0].message})"
        )
    return val


# ---------------------------------------------------------------------------
# primitives: log e0 and h1, with analytic channels when the pair has them
# ---------------------------------------------------------------------------

class Antiderivative:
    """Memoized cumulative integral F(x) = integral_{x0}^x fn.

    Queried points become anchors; a new query integrates from the nearest
    anchor only, so sweeps with many closely spaced evaluations (integrators,
    kernel assembly) pay for short smooth integrals instead of restarting at
    the base point every time.
    """

    def __init__(self, fn: Callable[[float], float], x0: float, quad: QuadratureConfig = DEFAULT_QUAD):
        self.fn = fn
        self.quad = quad
        self.xs = [float(x0)]
        self.vals = [0.0]

    def __call__(self, x: float) -> float:
        i = bisect.bisect_left(self.xs, x)
        if i < len(self.xs) and self.xs[i] == x:
            return self.vals[i]
        if i == len(self.xs) or (i > 0 and x - self.xs[i - 1] <= self.xs[i] - x):
            j = i - 1
        else:
            j = i
        val = self.vals[j] + integrate(self.fn, self.xs[j], x, self.quad)
        self.xs.insert(i, x)
        self.vals.insert(i, val)
        return val


def _antideriv(pair: KappaPair, key: str, integrand, x: float, quad: QuadratureConfig) -> float:
    # cumulative integral from a per-pair anchor, memoized per query point
    store = pair.cache
    if key not in store:
        store[key] = Antiderivative(integrand, x, quad)
    return store[key](x)


def log_e0(pair: KappaPair, t: float, s: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """log of the zero-rate exponential e0(t, s)."""
    if pair.log_e0_closed is not None:
        return pair.log_e0_closed(t, s)
    if t == s:
        return 0.0
    neg_ratio = lambda tau: -pair.kratio(tau)
    return _antideriv(pair, "log_e0", neg_ratio, t, quad) - _antideriv(
        pair, "log_e0", neg_ratio, s, quad
    )


def e0(pair: KappaPair, t: float, s: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    return math.exp(log_e0(pair, t, s, quad))


def h1_fast(pair: KappaPair, t: float, a: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """h1 through the pair's analytic channel when available."""
    if pair.h1_closed is not None:
        return pair.h1_closed(t, a)
    if t == a:
        return 0.0
    inv_k0 = lambda tau: 1.0 / pair.kappa0(tau)
    return _antideriv(pair, "h1", inv_k0, t, quad) - _antideriv(pair, "h1", inv_k0, a, quad)


# ---------------------------------------------------------------------------
# the operator
# ---------------------------------------------------------------------------

def dalpha(pair: KappaPair, f: ScalarField, t: float) -> float:
    """kappa1(t) f(t) + kappa0(t) f'(t)."""
    pair.assert_in(t)
    val = pair.kappa1(t) * f(t) + pair.kappa0(t) * f.d(t)
    if not math.isfinite(val):
        raise ValueError(f"operator value non-finite at t={t} for field {f.label!r}")
    return val


def dalpha_field(pair: KappaPair, f: ScalarField) -> ScalarField:
    """The operator applied to ``f``, materialized as a field."""
    return from_callable(lambda t: dalpha(pair, f, t), None, f"D[{f.label}]")


def dalpha2(pair: KappaPair, f: ScalarField, t: float) -> float:
    """The operator applied twice; the inner application is a field."""
    return dalpha(pair, dalpha_field(pair, f), t)


# ---------------------------------------------------------------------------
# exponentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpArgs:
    """Rate field plus gain pair for the rate-p exponential."""

    p: ScalarField
    pair: KappaPair


def log_exp_p(args: ExpArgs, t: float, s: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Exponent integral_s^t (p - kappa1)/kappa0; the log-scale accessor."""
    pair = args.pair
    pair.assert_in(t, s)
    if t == s:
        return 0.0
    p, k0, k1 = args.p, pair.kappa0, pair.kappa1
    return integrate(lambda tau: (p(tau) - k1(tau)) / k0(tau), s, t, quad)


def exp_p(args: ExpArgs, t: float, s: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    return math.exp(log_exp_p(args, t, s, quad))


def exp_p_field(
    args: ExpArgs,
    s: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
    cached: bool = False,
) -> ScalarField:
    """t -> e_p(t, s) with the exact classical-derivative channel.

    ``cached=True`` routes the exponent through an :class:`Antiderivative`,
    which is the right mode when the field will be hammered by an integrator.
    """
    pair = args.pair

    if cached:
        p, k0, k1 = args.p, pair.kappa0, pair.kappa1
        exponent = Antiderivative(lambda tau: (p(tau) - k1(tau)) / k0(tau), s, quad)

        def fn(t: float) -> float:
            pair.assert_in(t)
            return math.exp(exponent(t))

    else:

        def fn(t: float) -> float:
            return exp_p(args, t, s, quad)

    def dfn(t: float) -> float:
        return (args.p(t) - pair.kappa1(t)) / pair.kappa0(t) * fn(t)

    return from_callable(fn, dfn, f"exp[{args.p.label};s={s:g}]")


def e0_field(pair: KappaPair, a: float, quad: QuadratureConfig = DEFAULT_QUAD) -> ScalarField:
    """t -> e0(t, a); satisfies x' = -(kappa1/kappa0) x."""

    def fn(t: float) -> float:
        return e0(pair, t, a, quad)

    return from_callable(fn, lambda t: -pair.kratio(t) * fn(t), f"e0(.,{a:g})")


def e0_right_field(pair: KappaPair, b: float, quad: QuadratureConfig = DEFAULT_QUAD) -> ScalarField:
    """t -> e0(b, t); satisfies x' = +(kappa1/kappa0) x."""

    def fn(t: float) -> float:
        return e0(pair, b, t, quad)

    return from_callable(fn, lambda t: pair.kratio(t) * fn(t), f"e0({b:g},.)")


def h1_field(pair: KappaPair, a: float, quad: QuadratureConfig = DEFAULT_QUAD) -> ScalarField:
    """t -> h1(t, a); satisfies x' = 1/kappa0."""
    return from_callable(
        lambda t: h1_fast(pair, t, a, quad),
        lambda t: 1.0 / pair.kappa0(t),
        f"h1(.,{a:g})",
    )


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------

def h1(pair: KappaPair, t: float, a: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """integral_a^t 1/kappa0, always through quadrature.

    The analytic channel (:func:`h1_fast`) is deliberately not consulted, so
    closed forms and quadrature stay independently checkable.
    """
    pair.assert_in(t, a)
    return integrate(lambda s: 1.0 / pair.kappa0(s), a, t, quad)


def h1_inverse(
    pair: KappaPair,
    a: float,
    target: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
    tol: float = 1.0e-12,
) -> float:
    """The t >= a with h1(t, a) = target, by bisection on the analytic channel.

    h1(., a) is strictly increasing (kappa0 > 0), so the root is unique.
    """
    if target < 0.0:
        raise ValueError("h1 is nonnegative to the right of the anchor")
    if target == 0.0:
        return a
    hi = a + max(1.0, abs(a))
    lo_dom, hi_dom = pair.domain
    while h1_fast(pair, hi, a, quad) < target:
        hi = a + 2.0 * (hi - a)
        if hi >= hi_dom:
            raise ValueError(f"h1 never reaches {target} inside the domain")
    return bisect_root(lambda t: h1_fast(pair, t, a, quad) - target, a, hi, tol)


def alpha_integral(
    pair: KappaPair,
    f: ScalarField,
    a: float,
    b: float,
    weight: str = "none",
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """integral_a^b f(t) w(t) / kappa0(t) dt with a selectable right weight.

    ``weight``:
        none        w = 1
        e0_right    w(t) = e0(b, t)
        e0sq_right  w(t) = e0(b, t)^2
    """
    pair.assert_in(a, b)
    if weight not in WEIGHTS:
        raise ValueError(f"unknown weight {weight!r}; expected one of {WEIGHTS}")
    if weight == "none":
        integrand = lambda t: f(t) / pair.kappa0(t)
    elif weight == "e0_right":
        integrand = lambda t: f(t) * math.exp(log_e0(pair, b, t, quad)) / pair.kappa0(t)
    else:
        integrand = lambda t: f(t) * math.exp(2.0 * log_e0(pair, b, t, quad)) / pair.kappa0(t)
    return integrate(integrand, a, b, quad)


def inner_product(
    pair: KappaPair,
    f: ScalarField,
    g: ScalarField,
    a: float,
    b: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """integral_a^b f g e0(b,t)^2 in the weighted measure."""
    return alpha_integral(pair, f * g, a, b, "e0sq_right", quad)


# ---------------------------------------------------------------------------
# special functions: damped circular and hyperbolic pairs
# ---------------------------------------------------------------------------

def special(
    pair: KappaPair,
    kind: str,
    omega: float,
    t: float,
    t0: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """cos/sin and cosh/sinh analogues riding on the zero-rate exponential.

        cos_a(w; t, t0) = e0(t, t0) * cos(w * h1(t, t0))    (sin alike)
        cosh_a          = (e_{+w} + e_{-w}) / 2             (sinh alike)

    For constant rate w the exponentials reduce to e0 * exp(+/- w h1), so
    both pairs share the same two primitives.
    """
    if kind not in SPECIAL_KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {SPECIAL_KINDS}")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    pair.assert_in(t, t0)
    l0 = log_e0(pair, t, t0, quad)
    u = omega * h1_fast(pair, t, t0, quad)
    if kind == "cos_a":
        return math.exp(l0) * math.cos(u)
    if kind == "sin_a":
        return math.exp(l0) * math.sin(u)
    # hyperbolic pair, kept in exponent form to dodge overflow
    plus = math.exp(l0 + u)
    minus = math.exp(l0 - u)
    if kind == "cosh_a":
        return 0.5 * (plus + minus)
    return 0.5 * (plus - minus)


def special_field(
    pair: KappaPair,
    kind: str,
    omega: float,
    t0: float,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> ScalarField:
    """Field version with the exact classical-derivative channel.

    The derivative channel follows from the first-derivative system of the
    pair: applying the operator sends cos_a -> -w sin_a, sin_a -> w cos_a,
    cosh_a -> w sinh_a, sinh_a -> w cosh_a.
    """
    partner = {"cos_a": "sin_a", "sin_a": "cos_a", "cosh_a": "sinh_a", "sinh_a": "cosh_a"}
    sign = -1.0 if kind == "cos_a" else 1.0
    if kind not in partner:
        raise ValueError(f"unknown kind {kind!r}; expected one of {SPECIAL_KINDS}")

    def fn(t: float) -> float:
        return special(pair, kind, omega, t, t0, quad)

    def dfn(t: float) -> float:
        # kappa1 f + kappa0 f' = sign * w * partner  =>  solve for f'
        mate = special(pair, partner[kind], omega, t, t0, quad)
        return (sign * omega * mate - pair.kappa1(t) * fn(t)) / pair.kappa0(t)

    return from_callable(fn, dfn, f"{kind}({omega:g};.,{t0:g})")


# ---------------------------------------------------------------------------
# geodesics
# ---------------------------------------------------------------------------

def geodesic(
    pair: KappaPair,
    f: ScalarField,
    a: float,
    b: Optional[float] = None,
    kind: str = "secant",
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> ScalarField:
    """Secant or tangent curve through ``f`` at ``a`` (and ``b`` for secant).

    Both are of the form e0(t, a) * (A + B h1(t, a)), the general curve
    annihilated by applying the operator twice.  The secant matches f at a
    and b; the tangent matches the value and the operator derivative at a.
    """
    pair.assert_in(a)
    A = f(a)
    if kind == "secant":
        if b is None:
            raise ValueError("secant needs the second abscissa b")
        pair.assert_in(b)
        span = h1_fast(pair, b, a, quad)
        B = (math.exp(log_e0(pair, a, b, quad)) * f(b) - f(a)) / span
        tag = f"secant[{f.label};{a:g},{b:g}]"
    elif kind == "tangent":
        B = dalpha(pair, f, a)
        tag = f"tangent[{f.label};{a:g}]"
    else:
        raise ValueError(f"unknown geodesic kind {kind!r}")

    def fn(t: float) -> float:
        return math.exp(log_e0(pair, t, a, quad)) * (A + B * h1_fast(pair, t, a, quad))

    def dfn(t: float) -> float:
        base = math.exp(log_e0(pair, t, a, quad))
        return -pair.kratio(t) * fn(t) + base * B / pair.kappa0(t)

    return from_callable(fn, dfn, tag)


# ---------------------------------------------------------------------------
# critical points under the operator
# ---------------------------------------------------------------------------

def find_alpha_critical(
    pair: KappaPair,
    f: ScalarField,
    interval: Tuple[float, float],
    grid_n: int = 512,
) -> list:
    """Roots of the operator derivative, classified by the second application.

    Returns (t, kind) with kind in {alpha_max, alpha_min, saddle}.  A field
    the operator already annihilates is degenerate: no isolated roots exist,
    so the list is empty (logged, not an error).  Grazing cells that never
    change sign are logged as unresolved brackets.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    lo, hi = interval
    pair.assert_in(lo, hi)
    grid = np.linspace(lo, hi, grid_n)
    F = [dalpha(pair, f, t) for t in grid]
    f_scale = max(1.0, max(abs(f(t)) for t in grid))
    if max(abs(v) for v in F) <= 1.0e-8 * f_scale:
        log.info("operator derivative of %s vanishes on [%g, %g]; degenerate", f.label, lo, hi)
        return []
    scan = scan_sign_changes(lambda t: dalpha(pair, f, t), list(grid), graze_scale=f_scale)
    for cell in scan.unresolved:
        log.warning("unresolved bracket for %s in [%g, %g]", f.label, cell[0], cell[1])
    out = []
    thr = 1.0e-6 * f_scale
    for root in scan.roots:
        curv = dalpha2(pair, f, root)
        if curv > thr:
            kind = "alpha_min"
        elif curv < -thr:
            kind = "alpha_max"
        else:
            kind = "saddle"
        out.append((root, kind))
    return out
