from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def unit_rationals(max_den: int = 36):
    """Rationals in [0, 1] with bounded denominators."""
    return st.integers(1, max_den).flatmap(
        lambda d: st.integers(0, d).map(lambda n: Fraction(n, d)))


def cube_points(max_den: int = 36):
    return st.tuples(unit_rationals(max_den), unit_rationals(max_den), unit_rationals(max_den))
