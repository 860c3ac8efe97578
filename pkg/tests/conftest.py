import math

import pytest

from confode.fields import from_callable
from confode.gains import make_pair

ALPHAS = (0.3, 0.5, 0.8, 1.0)


def builtin_pairs(alpha):
    """One pair per built-in family at the given order."""
    return [
        make_pair("trig", alpha),
        make_pair("power", alpha, omega=2.0),
        make_pair("time_power", alpha, omega=1.5),
    ]


def all_builtin_pairs():
    return [p for a in ALPHAS for p in builtin_pairs(a)]


def interval_for(pair):
    """A safe closed interval inside the pair's domain."""
    return (0.5, 3.0) if pair.family_tag == "time_power" else (-1.0, 3.0)


@pytest.fixture
def sin_field():
    return from_callable(math.sin, math.cos, "sin")


@pytest.fixture
def quadratic_field():
    return from_callable(lambda t: t * t, lambda t: 2.0 * t, "t^2")
