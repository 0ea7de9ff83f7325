"""Shared sets and hypothesis strategies."""

from fractions import Fraction

from hypothesis import strategies as st

from erelax.domain import IntervalSet

E3 = IntervalSet.of((0, Fraction(1, 3)), (Fraction(2, 3), 1))
FIVE = IntervalSet.of((0, Fraction(1, 5)), (Fraction(2, 5), Fraction(3, 5)), (Fraction(4, 5), 1))


@st.composite
def interval_sets(draw, max_k=5, max_den=50):
    k = draw(st.integers(1, max_k))
    if k == 1:
        return IntervalSet.of((0, 1))
    den = draw(st.integers(2 * k - 1, max_den))
    inner = draw(st.lists(st.integers(1, den - 1), min_size=2 * k - 2, max_size=2 * k - 2, unique=True))
    pts = [Fraction(0)] + sorted(Fraction(v, den) for v in inner) + [Fraction(1)]
    return IntervalSet(tuple((pts[2 * i], pts[2 * i + 1]) for i in range(k)))


rationals01 = st.fractions(min_value=0, max_value=1, max_denominator=60)

# one line per acceptance criterion, printed by the terminal summary hook
ACCEPTANCE_LINES: list[str] = []
