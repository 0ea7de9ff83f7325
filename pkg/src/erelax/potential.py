"""Per-interval potentials and the constants that govern the walk.

For an interval set ``E`` with ``k`` intervals, ``u0[i]`` scores interval
``i`` against a hidden bit 0 and ``u1[i]`` against a hidden bit 1.  Both are
anchored at the interval holding the bit (``u0[0] == u1[k-1] == 1``) and
decay geometrically away from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from mpmath.ctx_iv import MPIntervalContext

from .domain import Box, IntervalSet, LinearProgram
from .lp import LpStatus, minimize

__all__ = [
    "SingleIntervalNoTraction",
    "PotentialTable",
    "build_potentials",
    "quanta",
    "traction",
    "canonical_q",
    "beta",
    "iteration_budget",
    "budget_for",
    "potential_of",
    "restart_budget",
]


class SingleIntervalNoTraction(ValueError):
    """Traction (and hence the step budget) needs at least two intervals."""


def _u0(E: IntervalSet) -> list[Fraction]:
    c, d = E.lows, E.highs
    out = [Fraction(1)]
    for i in range(E.k - 1):
        out.append(out[-1] * (1 - c[i + 1]) / (1 - d[i]))
    return out


def _u1(E: IntervalSet) -> list[Fraction]:
    c, d = E.lows, E.highs
    out = [Fraction(1)]
    for i in range(E.k - 2, -1, -1):
        out.append(out[-1] * d[i] / c[i + 1])
    return out[::-1]


def canonical_q(E: IntervalSet) -> list[Fraction]:
    """Starting distribution ``q_j ∝ c_{j+1} - d_{j-1}`` (``d_{-1}=0``, ``c_k=1``)."""
    c = E.lows + [Fraction(1)]
    d = [Fraction(0)] + E.highs
    z = 2 - E.measure()
    return [(c[j + 1] - d[j]) / z for j in range(E.k)]


def _traction(u0, u1) -> Fraction:
    best = None
    for u in (u0, u1):
        for i, a in enumerate(u):
            for j, b in enumerate(u):
                if i != j and a >= b:
                    r = a / b
                    if best is None or r < best:
                        best = r
    return best


@dataclass(frozen=True)
class PotentialTable:
    source: IntervalSet
    u0: tuple[Fraction, ...]
    u1: tuple[Fraction, ...]
    gamma: Fraction
    tau: Fraction | None
    q_canonical: tuple[Fraction, ...]
    beta: Fraction
    q_beta: tuple[Fraction, ...]

    @property
    def k(self) -> int:
        return len(self.u0)

    def u(self, bit: int) -> tuple[Fraction, ...]:
        return self.u1 if bit else self.u0


@lru_cache(maxsize=256)
def build_potentials(E: IntervalSet) -> PotentialTable:
    u0, u1 = _u0(E), _u1(E)
    tau = _traction(u0, u1) if E.k >= 2 else None
    b, qb = _beta_lp(tuple(u0), tuple(u1))
    return PotentialTable(
        source=E,
        u0=tuple(u0),
        u1=tuple(u1),
        gamma=min(min(u0), min(u1)),
        tau=tau,
        q_canonical=tuple(canonical_q(E)),
        beta=b,
        q_beta=qb,
    )


def quanta(t: PotentialTable) -> Fraction:
    """Smallest single-coordinate potential, ``min(u0[k-1], u1[0])``."""
    return t.gamma


def traction(t: PotentialTable) -> Fraction:
    """Smallest ratio ``u_a(i)/u_a(j) >= 1`` over distinct intervals."""
    if t.tau is None:
        raise SingleIntervalNoTraction("a single interval has no traction")
    return t.tau


def _beta_lp(u0, u1):
    k = len(u0)
    # variables q_0..q_{k-1}, t ; all live in [0, 1]
    rows = [
        ({**{i: -u0[i] for i in range(k)}, k: 1}, 0),
        ({**{i: -u1[i] for i in range(k)}, k: 1}, 0),
        ({i: 1 for i in range(k)}, 1),
        ({i: -1 for i in range(k)}, -1),
    ]
    lp = LinearProgram(k + 1, tuple(rows))
    box = Box.unit(k + 1)
    res = minimize(lp, [0] * k + [-1], box)
    assert res.status is LpStatus.OPTIMAL
    best = -res.value
    # lexicographically smallest maximiser: pin each coordinate in turn
    lo = [Fraction(0)] * k + [best]
    hi = [Fraction(1)] * (k + 1)
    for i in range(k):
        obj = [0] * (k + 1)
        obj[i] = 1
        r = minimize(lp, obj, Box(tuple(lo), tuple(hi)))
        lo[i] = hi[i] = r.value
    return best, tuple(lo[:k])


def beta(E: IntervalSet) -> tuple[Fraction, tuple[Fraction, ...]]:
    """``max_q min(E_q[u0], E_q[u1])`` and its lexicographically least maximiser."""
    t = build_potentials(E)
    return t.beta, t.q_beta


def _budget_enclosure(n: int, gamma: Fraction, tau: Fraction, prec: int):
    # private context: the shared mpmath.iv precision is process-global
    iv = MPIntervalContext()
    iv.prec = prec
    g = iv.mpf(gamma.numerator) / gamma.denominator
    tq = iv.mpf(tau.numerator) / tau.denominator
    num = (n + 1) * iv.log(1 / g)
    den = iv.log(1 + (1 - 1 / tq) ** 2 / (2 * n))
    return num / den + 2


def budget_for(n: int, gamma: Fraction, tau: Fraction) -> int:
    """``ceil((n+1) log(1/gamma) / log(1 + (1-1/tau)^2 / 2n) + 2)``.

    Evaluated in interval arithmetic; if the enclosure straddles an integer
    the larger ceiling is taken, so the result never under-counts.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if tau is None or tau <= 1:
        raise SingleIntervalNoTraction("budget needs traction > 1")
    enc = _budget_enclosure(n, Fraction(gamma), Fraction(tau), 128)
    lo, hi = math.ceil(enc.a), math.ceil(enc.b)
    if lo != hi:
        enc = _budget_enclosure(n, Fraction(gamma), Fraction(tau), 512)
        hi = math.ceil(enc.b)
    return int(hi)


def iteration_budget(n: int, t: PotentialTable) -> int:
    return budget_for(n, t.gamma, traction(t))


def potential_of(tables: Sequence[PotentialTable], x: Sequence[int], sigma: Sequence[int]) -> Fraction:
    """``prod_i u_{x_i}(sigma_i)`` for a 0-1 point ``x``."""
    if not len(tables) == len(x) == len(sigma):
        raise IndexError("tables, x and sigma must have equal length")
    out = Fraction(1)
    for t, bit, s in zip(tables, x, sigma):
        if bit not in (0, 1):
            raise ValueError(f"x must be 0-1, got {bit!r}")
        if not 0 <= s < t.k:
            raise IndexError(f"interval index {s} out of range for k={t.k}")
        out *= t.u(bit)[s]
    return out


def restart_budget(lp: LinearProgram) -> int:
    """``ceil(n' * prod_i (2 - meas(E_i)))`` where ``n'`` counts walk variables."""
    walkers = sum(1 for E in lp.var_sets if E.k >= 2)
    prod = Fraction(1)
    for E in lp.var_sets:
        prod *= 2 - E.measure()
    return math.ceil(walkers * prod)
