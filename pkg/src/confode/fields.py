"""Scalar fields with an attached classical-derivative channel.

Every coefficient that enters the calculus (gains, equation coefficients,
forcing terms, weights) is carried as a :class:`ScalarField`: a callable
``t -> f(t)`` paired with an optional closed-form ``t -> f'(t)``.  Keeping the
derivative channel alongside the value means composed coefficients stay exact
under arithmetic and no finite differencing sneaks into places where a closed
derivative is known.

When the derivative channel is absent, :meth:`ScalarField.d` falls back to a
fourth-order central difference with one Richardson refinement, which is the
single numeric-differentiation routine used everywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

__all__ = [
    "DomainError",
    "ScalarField",
    "any_label",
    "bisect_root",
    "constant",
    "from_callable",
    "identity",
    "numeric_deriv",
    "scan_sign_changes",
]


class DomainError(ValueError):
    """Raised when an evaluation point falls outside a declared domain."""


# ---------------------------------------------------------------------------
# numeric differentiation
# ---------------------------------------------------------------------------

def _central4(fn: Callable[[float], float], t: float, h: float) -> float:
    # classic 5-point stencil, O(h^4) truncation
    return (8.0 * (fn(t + h) - fn(t - h)) - (fn(t + 2 * h) - fn(t - 2 * h))) / (12.0 * h)


def numeric_deriv(fn: Callable[[float], float], t: float) -> float:
    """Fourth-order central difference with one Richardson refinement.

    Step is ``h = max(1e-5, 1e-5*|t|)``; the half-step estimate is combined as
    ``(16*D(h/2) - D(h)) / 15`` to cancel the leading truncation term.
    """
    h = max(1.0e-5, 1.0e-5 * abs(t))
    coarse = _central4(fn, t, h)
    fine = _central4(fn, t, 0.5 * h)
    return (16.0 * fine - coarse) / 15.0


# ---------------------------------------------------------------------------
# the field type
# ---------------------------------------------------------------------------

def any_label(obj) -> str:
    return obj.label if isinstance(obj, ScalarField) else repr(obj)


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function of one real variable plus derivative channel.

    Parameters
    ----------
    eval:
        The value channel ``t -> f(t)``.
    deriv:
        Optional closed-form classical derivative ``t -> f'(t)``.  When
        ``None``, :meth:`d` differentiates numerically.
    label:
        Short human-readable tag used in reports and error messages.
    """

    eval: Callable[[float], float]
    deriv: Optional[Callable[[float], float]] = None
    label: str = "f"

    def __call__(self, t: float) -> float:
        return self.eval(t)

    def d(self, t: float) -> float:
        """Classical derivative at ``t`` (closed channel if present)."""
        if self.deriv is not None:
            return self.deriv(t)
        return numeric_deriv(self.eval, t)

    @property
    def has_closed_deriv(self) -> bool:
        return self.deriv is not None

    def relabel(self, label: str) -> "ScalarField":
        return replace(self, label=label)

    # -- arithmetic: derivative channels propagate only when both sides have
    # -- one, so a closed channel never silently reports a differenced value
    def __add__(self, other) -> "ScalarField":
        other = as_field(other)
        dfn = None
        if self.deriv is not None and other.deriv is not None:
            dfn = lambda t, a=self.deriv, b=other.deriv: a(t) + b(t)
        return ScalarField(
            lambda t, a=self.eval, b=other.eval: a(t) + b(t),
            dfn,
            f"({self.label} + {other.label})",
        )

    def __radd__(self, other) -> "ScalarField":
        return as_field(other).__add__(self)

    def __sub__(self, other) -> "ScalarField":
        other = as_field(other)
        dfn = None
        if self.deriv is not None and other.deriv is not None:
            dfn = lambda t, a=self.deriv, b=other.deriv: a(t) - b(t)
        return ScalarField(
            lambda t, a=self.eval, b=other.eval: a(t) - b(t),
            dfn,
            f"({self.label} - {other.label})",
        )

    def __rsub__(self, other) -> "ScalarField":
        return as_field(other).__sub__(self)

    def __mul__(self, other) -> "ScalarField":
        other = as_field(other)
        dfn = None
        if self.deriv is not None and other.deriv is not None:
            dfn = (
                lambda t, f=self.eval, g=other.eval, df=self.deriv, dg=other.deriv:
                df(t) * g(t) + f(t) * dg(t)
            )
        return ScalarField(
            lambda t, f=self.eval, g=other.eval: f(t) * g(t),
            dfn,
            f"({self.label} * {other.label})",
        )

    def __rmul__(self, other) -> "ScalarField":
        return as_field(other).__mul__(self)

    def __truediv__(self, other) -> "ScalarField":
        other = as_field(other)
        dfn = None
        if self.deriv is not None and other.deriv is not None:
            dfn = (
                lambda t, f=self.eval, g=other.eval, df=self.deriv, dg=other.deriv:
                (df(t) * g(t) - f(t) * dg(t)) / g(t) ** 2
            )
        return ScalarField(
            lambda t, f=self.eval, g=other.eval: f(t) / g(t),
            dfn,
            f"({self.label} / {other.label})",
        )

    def __rtruediv__(self, other) -> "ScalarField":
        return as_field(other).__truediv__(self)

    def __neg__(self) -> "ScalarField":
        dfn = None
        if self.deriv is not None:
            dfn = lambda t, a=self.deriv: -a(t)
        return ScalarField(lambda t, a=self.eval: -a(t), dfn, f"(-{self.label})")


def as_field(obj) -> ScalarField:
    """Coerce a number or field into a :class:`ScalarField`."""
    if isinstance(obj, ScalarField):
        return obj
    if isinstance(obj, (int, float)):
        return constant(float(obj))
    raise TypeError(f"cannot treat {obj!r} as a scalar field")


def constant(c: float, label: Optional[str] = None) -> ScalarField:
    c = float(c)
    return ScalarField(lambda _t: c, lambda _t: 0.0, label or f"{c:g}")


def identity(label: str = "t") -> ScalarField:
    return ScalarField(lambda t: t, lambda _t: 1.0, label)


def from_callable(
    fn: Callable[[float], float],
    dfn: Optional[Callable[[float], float]] = None,
    label: str = "f",
) -> ScalarField:
    return ScalarField(fn, dfn, label)


# ---------------------------------------------------------------------------
# root bracketing and bisection
# ---------------------------------------------------------------------------

def bisect_root(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1.0e-10,
) -> float:
    """Bisection on a sign-changing bracket, refined until ``hi-lo <= tol``."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


@dataclass
class BracketScan:
    """Result of a sign-change sweep over a grid."""

    roots: list = field(default_factory=list)  # refined root locations
    unresolved: list = field(default_factory=list)  # (lo, hi) cells that graze zero without crossing


def scan_sign_changes(
    fn: Callable[[float], float],
    grid,
    tol: float = 1.0e-10,
    graze_scale: float = 1.0,
) -> BracketScan:
    """Bisect every sign-changing cell of ``grid``; flag grazing cells.

    A cell whose endpoint values share a sign but dip below
    ``1e-7 * graze_scale`` in magnitude is recorded as an unresolved bracket
    (a double root cannot be separated by sign changes alone).
    """
    out = BracketScan()
    vals = [fn(t) for t in grid]
    graze = 1.0e-7 * graze_scale
    for (lo, flo), (hi, fhi) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if flo == 0.0:
            out.roots.append(lo)
            continue
        if fhi == 0.0:
            continue  # picked up as the next cell's left endpoint or the tail check
        if flo * fhi < 0.0:
            out.roots.append(bisect_root(fn, lo, hi, tol))
        elif min(abs(flo), abs(fhi)) < graze:
            out.unresolved.append((lo, hi))
    if vals and vals[-1] == 0.0:
        out.roots.append(grid[-1])
    # collapse duplicates from roots landing exactly on grid nodes
    dedup: list = []
    for r in sorted(out.roots):
        if not dedup or abs(r - dedup[-1]) > 10 * tol + 1e-12 * abs(r):
            dedup.append(r)
    out.roots = dedup
    return out
