"""Gain pairs (kappa0, kappa1) defining the proportional derivative.

The operator implemented across this package is

    D f(t) = kappa1(t) * f(t) + kappa0(t) * f'(t),

with the order parameter ``alpha`` in (0, 1] shaping the two gains.  Built-in
families:

    trig        kappa1 = cos(alpha*pi/2),        kappa0 = sin(alpha*pi/2)
    power       kappa1 = (1-alpha)*omega**alpha, kappa0 = alpha*omega**(1-alpha)
    time_power  kappa1(t) = (1-alpha)*(omega*t)**alpha,
                kappa0(t) = alpha*(omega*t)**(1-alpha)   on (0, inf)

All three satisfy the end-point limits: as alpha -> 0+ the pair tends to
(kappa0, kappa1) -> (0, 1) and as alpha -> 1- it tends to (1, 0), so the
operator interpolates between the identity and the classical derivative.
``alpha = 0`` itself is rejected at construction: with kappa0 == 0 every
integral formula downstream divides by zero.

Custom pairs are accepted as raw scalar fields and flagged with a caveat,
since the end-point limits can only be machine-checked for a family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

from .fields import DomainError, ScalarField, constant, from_callable

__all__ = [
    "Alpha",
    "KappaPair",
    "LimitCheck",
    "ValidationReport",
    "Violation",
    "BUILTIN_FAMILIES",
    "custom_pair",
    "make_pair",
    "validate",
]

BUILTIN_FAMILIES = ("trig", "power", "time_power")


@dataclass(frozen=True)
class Alpha:
    """Order parameter, restricted to (0, 1]."""

    value: float

    def __post_init__(self):
        v = self.value
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise ValueError(f"alpha must be a finite real, got {v!r}")
        if not 0.0 < v <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {v}")
        object.__setattr__(self, "value", float(v))

    def __float__(self) -> float:
        return self.value


def _as_alpha(alpha) -> Alpha:
    return alpha if isinstance(alpha, Alpha) else Alpha(float(alpha))


@dataclass(frozen=True)
class KappaPair:
    """An immutable gain pair over an open interval.

    ``log_e0_closed``/``h1_closed`` are optional analytic channels for the
    two primitives every weight in the package is built from:

        log_e0_closed(t, s) = -integral_s^t kappa1/kappa0
        h1_closed(t, a)     =  integral_a^t 1/kappa0

    They are populated for the built-in families and left ``None`` for custom
    pairs, which fall back to cached quadrature.
    """

    alpha: Alpha
    kappa0: ScalarField  #: > 0 on the domain
    kappa1: ScalarField  #: >= 0 on the domain
    domain: Tuple[float, float]  #: open interval (lo, hi)
    family_tag: str
    omega: Optional[float] = None
    caveat: bool = False  #: True for custom pairs (limits not machine-checked)
    log_e0_closed: Optional[Callable[[float, float], float]] = field(
        default=None, repr=False, compare=False
    )
    h1_closed: Optional[Callable[[float, float], float]] = field(
        default=None, repr=False, compare=False
    )
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def contains(self, t: float) -> bool:
        lo, hi = self.domain
        return lo < t < hi

    def assert_in(self, *ts: float) -> None:
        for t in ts:
            if not self.contains(t):
                raise DomainError(
                    f"t={t} outside the open domain {self.domain} of the "
                    f"{self.family_tag} pair"
                )

    def kratio(self, t: float) -> float:
        """kappa1(t)/kappa0(t), the decay rate of the zero-rate exponential."""
        return self.kappa1(t) / self.kappa0(t)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def make_pair(family: str, alpha, omega: Optional[float] = None) -> KappaPair:
    """Build a built-in gain pair.

    ``omega`` must be supplied exactly for the families that use it
    (``power`` and ``time_power``) and must be positive.
    """
    a = float(_as_alpha(alpha))
    needs_omega = family in ("power", "time_power")
    if needs_omega and omega is None:
        raise ValueError(f"family {family!r} requires omega")
    if not needs_omega and omega is not None:
        raise ValueError(f"family {family!r} does not take omega")
    if omega is not None and not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")

    if family == "trig":
        k1 = math.cos(a * math.pi / 2.0)
        k0 = math.sin(a * math.pi / 2.0)
        return _constant_pair(a, k0, k1, "trig", None)

    if family == "power":
        k1 = (1.0 - a) * omega ** a
        k0 = a * omega ** (1.0 - a)
        return _constant_pair(a, k0, k1, "power", omega)

    if family == "time_power":
        w = float(omega)

        def k1_fn(t: float) -> float:
            return (1.0 - a) * (w * t) ** a

        def k1_d(t: float) -> float:
            return (1.0 - a) * a * w * (w * t) ** (a - 1.0)

        def k0_fn(t: float) -> float:
            return a * (w * t) ** (1.0 - a)

        def k0_d(t: float) -> float:
            return a * (1.0 - a) * w * (w * t) ** (-a)

        # integral_s^t kappa1/kappa0 = (1-a)/(2 a^2) * w^(2a-1) * (t^2a - s^2a)
        c_log = (1.0 - a) / (2.0 * a * a) * w ** (2.0 * a - 1.0)
        # integral_a^t 1/kappa0 = (t^a - s^a) / (a^2 w^(1-a))
        c_h1 = 1.0 / (a * a * w ** (1.0 - a))

        return KappaPair(
            alpha=Alpha(a),
            kappa0=from_callable(k0_fn, k0_d, "kappa0"),
            kappa1=from_callable(k1_fn, k1_d, "kappa1"),
            domain=(0.0, math.inf),
            family_tag="time_power",
            omega=w,
            log_e0_closed=lambda t, s: -c_log * (t ** (2.0 * a) - s ** (2.0 * a)),
            h1_closed=lambda t, s: c_h1 * (t ** a - s ** a),
        )

    if family == "custom":
        raise ValueError("custom pairs are built with custom_pair(), not make_pair()")
    raise ValueError(f"unknown family {family!r}")


def _constant_pair(a: float, k0: float, k1: float, tag: str, omega) -> KappaPair:
    ratio = k1 / k0
    return KappaPair(
        alpha=Alpha(a),
        kappa0=constant(k0, "kappa0"),
        kappa1=constant(k1, "kappa1"),
        domain=(-math.inf, math.inf),
        family_tag=tag,
        omega=omega,
        log_e0_closed=lambda t, s: -ratio * (t - s),
        h1_closed=lambda t, s: (t - s) / k0,
    )


def custom_pair(
    alpha,
    kappa0: ScalarField,
    kappa1: ScalarField,
    domain: Tuple[float, float] = (-math.inf, math.inf),
) -> KappaPair:
    """Wrap user-supplied gain fields; carries a caveat flag."""
    return KappaPair(
        alpha=_as_alpha(alpha),
        kappa0=kappa0,
        kappa1=kappa1,
        domain=(float(domain[0]), float(domain[1])),
        family_tag="custom",
        caveat=True,
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    where: str  #: "kappa0" or "kappa1"
    t: float
    value: float


@dataclass(frozen=True)
class LimitCheck:
    end: str  #: "alpha->0+" or "alpha->1-"
    gain: str
    t: float
    value: float
    target: float
    tol: float

    @property
    def ok(self) -> bool:
        return abs(self.value - self.target) <= self.tol


@dataclass
class ValidationReport:
    family: str
    violations: list
    limit_checks: list

    @property
    def ok(self) -> bool:
        return not self.violations and all(c.ok for c in self.limit_checks)

    def lines(self) -> list:
        out = [f"pair[{self.family}]: {'ok' if self.ok else 'PROBLEMS'}"]
        for v in self.violations:
            out.append(f"  violation: {v.where}({v.t:g}) = {v.value:g}")
        for c in self.limit_checks:
            mark = "ok" if c.ok else "FAIL"
            out.append(
                f"  limit {c.end} {c.gain}({c.t:g}) = {c.value:.8g}"
                f" (target {c.target:g}, tol {c.tol:g}) {mark}"
            )
        return out


def validate(pair: KappaPair, grid: Sequence[float]) -> ValidationReport:
    """Check positivity on a grid and, for built-ins, the alpha end limits.

    The end limits are probed by rebuilding the family at alpha = 1e-6 and
    alpha = 1 - 1e-6; the deviation from the limit value is first order in
    1e-6 with a slope set by omega (and t for time_power), so the tolerance
    is 1e-5 times that scale.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("validation grid is empty")
    pair.assert_in(*grid)

    violations = []
    for t in grid:
        k0 = pair.kappa0(t)
        k1 = pair.kappa1(t)
        if not (math.isfinite(k0) and k0 > 0.0):
            violations.append(Violation("kappa0", t, k0))
        if not (math.isfinite(k1) and k1 >= 0.0):
            violations.append(Violation("kappa1", t, k1))

    checks = []
    if pair.family_tag in BUILTIN_FAMILIES:
        eps = 1.0e-6
        for end, a_probe, targets in (
            ("alpha->0+", eps, {"kappa1": 1.0, "kappa0": 0.0}),
            ("alpha->1-", 1.0 - eps, {"kappa1": 0.0, "kappa0": 1.0}),
        ):
            probe = make_pair(pair.family_tag, a_probe, pair.omega)
            for t in (grid[0], grid[-1]):
                scale = _limit_scale(pair, t)
                checks.append(
                    LimitCheck(end, "kappa0", t, probe.kappa0(t), targets["kappa0"], 1.0e-5 * scale)
                )
                checks.append(
                    LimitCheck(end, "kappa1", t, probe.kappa1(t), targets["kappa1"], 1.0e-5 * scale)
                )
    return ValidationReport(pair.family_tag, violations, checks)


def _limit_scale(pair: KappaPair, t: float) -> float:
    if pair.family_tag == "power":
        return max(1.0, pair.omega, abs(math.log(pair.omega)))
    if pair.family_tag == "time_power":
        wt = pair.omega * t
        return max(1.0, wt, abs(math.log(wt)))
    return 1.0
