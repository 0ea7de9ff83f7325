import random
from fractions import Fraction as F

import pytest

from erelax.domain import Box, DimensionMismatch, LinearProgram
from erelax.lp import LpStatus, check_feasible, farkas_holds, lagrangian_bound, minimize
from erelax.oracle import enumerate_vertices


def test_feasible_at_lower_corner():
    lp = LinearProgram(1, (({0: 1}, 0),))
    out = check_feasible(lp, Box((0,), (F(1, 3),)))
    assert out.status is LpStatus.FEASIBLE and out.point == (0,)


def test_infeasible_with_certificate():
    lp = LinearProgram(1, (({0: 1}, 0),))
    box = Box((F(2, 3),), (1,))
    out = check_feasible(lp, box)
    assert out.status is LpStatus.INFEASIBLE
    assert farkas_holds(lp, box, out.farkas)


def test_clause_in_low_box():
    lp = LinearProgram(3, (({0: -1, 1: -1, 2: -1}, -1),))
    out = check_feasible(lp, Box((0,) * 3, (F(1, 3),) * 3))
    assert out.point == (F(1, 3),) * 3


def test_minimize_examples():
    assert minimize(LinearProgram(1), [1], Box.unit(1)).value == 0
    lp = LinearProgram(2, (({0: -1, 1: -1}, -1),))
    assert minimize(lp, [1, 1], Box.unit(2)).value == 1
    out = minimize(LinearProgram(1, (({0: 2}, 1),)), [-1], Box.unit(1))
    assert out.value == F(-1, 2) and out.point == (F(1, 2),)


def test_minimize_infeasible():
    lp = LinearProgram(2, (({0: 1, 1: 1}, -1),))
    out = minimize(lp, [1, 0], Box.unit(2))
    assert out.status is LpStatus.INFEASIBLE
    assert farkas_holds(lp, Box.unit(2), out.farkas)


def test_dimension_checks():
    lp = LinearProgram(2)
    with pytest.raises(DimensionMismatch):
        check_feasible(lp, Box.unit(3))
    with pytest.raises(DimensionMismatch):
        minimize(lp, [1], Box.unit(2))


def test_mapping_objective():
    lp = LinearProgram(3, (({0: 1, 2: 1}, 1),))
    assert minimize(lp, {0: -1, 2: -2}, Box.unit(3)).value == -2


def _random_lp(rng, n, m):
    rows = []
    for _ in range(m):
        coeffs = {j: F(rng.randint(-4, 4), rng.randint(1, 3)) for j in range(n) if rng.random() < 0.8}
        rows.append((coeffs, F(rng.randint(-3, 4), rng.randint(1, 3))))
    return LinearProgram(n, tuple(rows))


def test_strong_duality_random():
    rng = random.Random(11)
    optimal = 0
    for _ in range(100):
        n = rng.randint(1, 5)
        lp = _random_lp(rng, n, rng.randint(0, 6))
        lo = [F(rng.randint(0, 2), 4) for _ in range(n)]
        hi = [max(a, F(rng.randint(1, 4), 4)) for a in lo]
        box = Box(tuple(lo), tuple(hi))
        c = [F(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(n)]
        out = minimize(lp, c, box)
        if out.status is LpStatus.OPTIMAL:
            optimal += 1
            assert lagrangian_bound(lp, c, box, out.dual) == out.value
            assert sum(a * x for a, x in zip(c, out.point)) == out.value
        else:
            assert farkas_holds(lp, box, out.farkas)
    assert optimal >= 30


def test_agrees_with_vertex_enumeration():
    rng = random.Random(5)
    for _ in range(60):
        n = rng.randint(1, 4)
        lp = _random_lp(rng, n, rng.randint(0, 6))
        verts = enumerate_vertices(lp)
        c = [F(rng.randint(-5, 5)) for _ in range(n)]
        out = minimize(lp, c, Box.unit(n))
        if not verts:
            assert out.status is LpStatus.INFEASIBLE
            continue
        best = min(sum(a * x for a, x in zip(c, v)) for v in verts)
        assert out.value == best
        assert out.point in verts
