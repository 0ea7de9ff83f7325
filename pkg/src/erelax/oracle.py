"""Independent checks: brute force, a cutting-plane strategy solver,
martingale simulation and a high-precision sweep of the drift inequality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from mpmath.ctx_iv import MPIntervalContext

from .domain import Box, LinearProgram
from .lp import LpStatus, minimize, simplex
from .walk import (
    StrategyDistribution,
    StrategyInfeasible,
    _ratios,
    strategy_affine,
    tables_for,
)

__all__ = [
    "TooLarge",
    "brute_force_ip",
    "enumerate_vertices",
    "CuttingPlaneResult",
    "cutting_plane_strategy",
    "LatticeChain",
    "SimulationResult",
    "lemma_budget",
    "submartingale_sim",
    "SweepPoint",
    "SweepReport",
    "calc_inequality_sweep",
    "VertexCheck",
    "vertex_submartingale_check",
]


class TooLarge(ValueError):
    pass


def _integer_rows(lp: LinearProgram):
    A = np.zeros((lp.m, lp.n), dtype=object)
    b = np.zeros(lp.m, dtype=object)
    for r, (coeffs, rhs) in enumerate(lp.rows):
        den = rhs.denominator
        for a in coeffs.values():
            den = den * a.denominator // math.gcd(den, a.denominator)
        for j, a in coeffs.items():
            A[r, j] = int(a * den)
        b[r] = int(rhs * den)
    return A, b


def brute_force_ip(lp: LinearProgram, limit: int = 20) -> list[tuple[int, ...]]:
    """Every ``x in {0,1}^n`` with ``A x <= b``, by exact enumeration."""
    if lp.n > limit:
        raise TooLarge(f"n={lp.n} exceeds the enumeration limit {limit}")
    n = lp.n
    if n == 0:
        return [()] if all(b >= 0 for _, b in lp.rows) else []
    pts = ((np.arange(2**n)[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int64)
    A, b = _integer_rows(lp)
    big = max([abs(int(v)) for v in A.flat] + [abs(int(v)) for v in b] + [0])
    if big * n < 2**62:
        lhs = pts @ A.astype(np.int64).T
        ok = np.all(lhs <= b.astype(np.int64), axis=1) if lp.m else np.ones(len(pts), dtype=bool)
    else:
        lhs = pts.astype(object) @ A.T
        ok = np.all(lhs <= b, axis=1) if lp.m else np.ones(len(pts), dtype=bool)
    return [tuple(int(v) for v in row) for row in pts[ok]]


def _solve_square(M, rhs):
    """Exact Gauss-Jordan; None when singular."""
    n = len(M)
    aug = [list(row) + [r] for row, r in zip(M, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def enumerate_vertices(lp: LinearProgram, limit: int = 4) -> list[tuple[Fraction, ...]]:
    """Vertices of ``{A x <= b, 0 <= x <= 1}`` by trying every n tight constraints."""
    n = lp.n
    if n > limit:
        raise TooLarge(f"vertex enumeration is limited to n <= {limit}")
    cons = [([coeffs.get(j, Fraction(0)) for j in range(n)], b) for coeffs, b in lp.rows]
    for j in range(n):
        e = [Fraction(0)] * n
        e[j] = Fraction(1)
        cons.append((e, Fraction(1)))
        cons.append(([-v for v in e], Fraction(0)))
    seen = set()
    out = []
    for subset in itertools.combinations(range(len(cons)), n):
        x = _solve_square([cons[i][0] for i in subset], [cons[i][1] for i in subset])
        if x is None:
            continue
        x = tuple(x)
        if x in seen:
            continue
        if lp.satisfied_by(x):
            seen.add(x)
            out.append(x)
    return sorted(out)


@dataclass
class CuttingPlaneResult:
    strategy: StrategyDistribution
    responses: list[tuple[Fraction, ...]]
    hyperplanes: list[tuple[dict, Fraction]]
    iterations: int


def cutting_plane_strategy(lp: LinearProgram, sigma: Sequence[int], tables=None, max_iter: int = 10_000) -> CuttingPlaneResult:
    """Step distribution via a separation oracle.

    Keeps a finite set ``X`` of responses.  The master LP maximises
    ``min_{x in X} f(x, p)`` over move distributions; the oracle then
    minimises ``f(., p)`` over the relaxation.  A minimum ``M < 1`` yields
    the separating hyperplane ``{p : f(x, p) = (M + 1)/2}`` and ``x`` joins
    ``X``; ``M >= 1`` means ``p`` is valid.
    """
    tables = tables or tables_for(lp)
    sigma = tuple(sigma)
    moves = _ratios(tables, sigma)
    P = len(moves)
    if P == 0:
        raise StrategyInfeasible("no variable can move")
    box = Box.unit(lp.n)
    start = minimize(lp, [0] * lp.n, box)
    if start.status is not LpStatus.OPTIMAL:
        raise StrategyInfeasible("relaxation is empty")
    X = [start.point]
    planes = []

    def coeffs_for(x):
        return {col: (1 - x[i]) * r0 + x[i] * r1 for col, ((i, _), r0, r1) in enumerate(moves)}

    for it in range(1, max_iter + 1):
        # variables p_0..p_{P-1}, t ; maximise t subject to f(x, p) >= t on X
        rows = []
        for x in X:
            row = {col: -v for col, v in coeffs_for(x).items()}
            row[P] = 1
            rows.append(row)
        rows.append({c: 1 for c in range(P)})
        rhs = [0] * len(X) + [1]
        eq = [False] * len(X) + [True]
        res = simplex([0] * P + [-1], rows, rhs, [0] * (P + 1), [1] * P + [None], eq=eq)
        if res.status is not LpStatus.OPTIMAL:
            raise StrategyInfeasible(f"master LP is {res.status.value}")
        p = {moves[c][0]: Fraction(int(v.numerator), int(v.denominator)) for c, v in enumerate(res.x[:P]) if v}
        h, g = strategy_affine(tables, sigma, p)
        worst = minimize(lp, g, box)
        M = h + worst.value
        if M >= 1:
            dist = StrategyDistribution(tuple(sorted(p.items())))
            return CuttingPlaneResult(dist, X, planes, it)
        x = worst.point
        if x in X:
            raise StrategyInfeasible("oracle returned a response already in the master problem")
        cut = coeffs_for(x)
        planes.append(({moves[c][0]: v for c, v in cut.items()}, (M + 1) / 2))
        X.append(x)
    raise StrategyInfeasible("cutting-plane iteration limit reached")


@dataclass(frozen=True)
class LatticeChain:
    """Chain on ``{tau^-j} ∪ {1}``: multiply by ``tau`` w.p. ``up`` else divide.

    ``start`` maps exponent ``j >= 1`` to probability (``j = 0`` means 1).
    Reaching 1 absorbs.  ``up >= 1/(tau + 1)`` makes it a submartingale and
    every non-absorbed ratio is exactly ``tau`` or ``1/tau``.
    """

    tau: Fraction
    up: Fraction
    start: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        if self.tau <= 1:
            raise ValueError("tau must exceed 1")
        if self.up < 1 / (self.tau + 1) or self.up > 1:
            raise ValueError("up-probability breaks the submartingale property")
        if sum(p for _, p in self.start) != 1 or any(j < 0 for j, _ in self.start):
            raise ValueError("bad starting distribution")

    def expected_step(self, j: int) -> Fraction:
        """``E[X_{t+1} | X_t = tau^-j] - X_t`` (nonnegative)."""
        x = self.tau ** -j
        if j == 0:
            return Fraction(0)
        return self.up * x * self.tau + (1 - self.up) * x / self.tau - x


def _moment(chain: LatticeChain, eps: Fraction, prec: int = 128):
    iv = MPIntervalContext()
    iv.prec = prec
    tau = iv.mpf(chain.tau.numerator) / chain.tau.denominator
    e = iv.mpf(eps.numerator) / eps.denominator
    total = iv.mpf(0)
    for j, p in chain.start:
        total += (iv.mpf(p.numerator) / p.denominator) * tau ** (-(j * (1 + e)))
    return total


def lemma_budget(chain: LatticeChain, eps: Fraction) -> int:
    """Smallest integer ``T >= log(1/E[X^(1+eps)]) / log(1 + eps/2 (1-1/tau)^2) + 2``."""
    iv = MPIntervalContext()
    iv.prec = 128
    mom = _moment(chain, eps)
    tau = iv.mpf(chain.tau.numerator) / chain.tau.denominator
    e = iv.mpf(eps.numerator) / eps.denominator
    val = iv.log(1 / mom) / iv.log(1 + e / 2 * (1 - 1 / tau) ** 2) + 2
    return int(math.ceil(val.b))


@dataclass
class SimulationResult:
    T: int
    trials: int
    hits: int
    estimate: float
    stderr: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.estimate >= self.bound - 3 * self.stderr


def submartingale_sim(chain: LatticeChain, eps: Fraction, trials: int = 100_000, T: int | None = None, seed: int = 0) -> SimulationResult:
    """Monte-Carlo ``Pr[X_T = 1]`` against the floor ``E[X_1^(1+eps)] / 2``."""
    T = lemma_budget(chain, eps) if T is None else T
    rng = np.random.default_rng(seed)
    exps = np.array([j for j, _ in chain.start])
    probs = np.array([float(p) for _, p in chain.start])
    state = rng.choice(exps, size=trials, p=probs / probs.sum())
    up = float(chain.up)
    for _ in range(T - 1):
        live = state > 0
        moves = np.where(rng.random(trials) < up, -1, 1)
        state = np.where(live, state + moves, state)
    hits = int(np.sum(state == 0))
    est = hits / trials
    se = math.sqrt(max(est * (1 - est), 1.0 / trials) / trials)
    mom = _moment(chain, eps)
    return SimulationResult(T, trials, hits, est, se, float(mom.a) / 2)


@dataclass
class SweepPoint:
    tau: Fraction
    eps: Fraction
    lower_margin: float
    equality: bool
    passed: bool


@dataclass
class SweepReport:
    points: list[SweepPoint] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)

    @property
    def failures(self) -> list[SweepPoint]:
        return [p for p in self.points if not p.passed]


def _margin(tau: Fraction, eps: Fraction, prec: int):
    iv = MPIntervalContext()
    iv.prec = prec
    t = iv.mpf(tau.numerator) / tau.denominator
    e = iv.mpf(eps.numerator) / eps.denominator
    left = t ** (-(1 + e)) - (1 + e) / t + e
    right = t ** (1 + e) - (1 + e) * t + e
    rhs = e / 2 * (1 - 1 / t) ** 2
    return left - rhs, right - rhs


def calc_inequality_sweep(taus: Iterable, epss: Iterable, prec: int = 256) -> SweepReport:
    """Check ``min(tau^-(1+e) - (1+e)/tau + e, tau^(1+e) - (1+e) tau + e) >= e/2 (1 - 1/tau)^2``.

    Each side is enclosed in interval arithmetic; a point passes when the
    lower end of both margins is nonnegative.  Lower ends within ``2^-128``
    of zero are redone at doubled precision.  ``tau == 1`` is exact: both sides vanish.
    """
    report = SweepReport()
    epss = [Fraction(e) for e in epss]
    for tau in taus:
        tau = Fraction(tau)
        if tau < 1:
            raise ValueError("tau must be at least 1")
        for eps in epss:
            if eps <= 0:
                raise ValueError("eps must be positive")
            if tau == 1:
                report.points.append(SweepPoint(tau, eps, 0.0, True, True))
                continue
            a, b = _margin(tau, eps, prec)
            low = min(a.a, b.a)
            if low < 2.0**-128:
                a, b = _margin(tau, eps, 2 * prec)
                low = min(a.a, b.a)
            report.points.append(SweepPoint(tau, eps, float(low), False, low >= 0))
    return report


@dataclass
class VertexCheck:
    passed: bool
    checked: int
    counterexample: tuple[Fraction, ...] | None = None
    value: Fraction | None = None


def vertex_submartingale_check(lp: LinearProgram, sigma, p, tables=None, limit: int = 4) -> VertexCheck:
    """Exact ``f(x, p) >= 1`` at every vertex (``n <= limit``) or every 0-1 solution."""
    tables = tables or tables_for(lp)
    h, g = strategy_affine(tables, sigma, p)
    if lp.n <= limit:
        points = enumerate_vertices(lp, limit)
    elif lp.n <= 20:
        points = [tuple(Fraction(v) for v in x) for x in brute_force_ip(lp)]
    else:
        raise TooLarge("vertex check needs n <= 20")
    for x in points:
        val = h + sum((gi * xi for gi, xi in zip(g, x)), Fraction(0))
        if val < 1:
            return VertexCheck(False, len(points), x, val)
    return VertexCheck(True, len(points))
