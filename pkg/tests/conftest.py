from fractions import Fraction

from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")


def small_rationals(lo=-5, hi=5, max_den=6):
    return st.builds(lambda p, q: Fraction(p, q), st.integers(lo * max_den, hi * max_den), st.integers(1, max_den))

