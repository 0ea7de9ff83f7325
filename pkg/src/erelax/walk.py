"""The potential-guided random walk over interval choices.

Each variable ``i`` carries an interval set ``E_i``; the walk state is a
vector ``sigma`` of interval indices.  At every step the box
``prod_i E_i[sigma_i]`` is probed for a feasible point.  On failure a move
distribution over single-coordinate changes is computed from one exact LP
such that, against every point of the relaxation, the expected potential
does not drop.  One move is then sampled.
"""

from __future__ import annotations

import enum
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .domain import Box, LinearProgram
from .lp import LpStatus, check_feasible, minimize, simplex
from .potential import PotentialTable, budget_for, build_potentials, restart_budget

__all__ = [
    "RelaxationInfeasible",
    "StrategyInfeasible",
    "RestartBudgetTooLarge",
    "WalkState",
    "StrategyDistribution",
    "WalkStatus",
    "WalkOutcome",
    "OptimizeResult",
    "WalkContext",
    "stream",
    "sample_index",
    "tables_for",
    "step_budget",
    "strategy_affine",
    "init_state",
    "feasibility_probe",
    "solve_strategy",
    "step",
    "run_walk",
    "solve",
    "optimize",
]

DEFAULT_RESTART_CAP = 10**6


class RelaxationInfeasible(ValueError):
    """``{A x <= b, 0 <= x <= 1}`` is empty, so no promise can hold."""


class StrategyInfeasible(RuntimeError):
    """No move distribution satisfies the step constraints (a bug)."""


class RestartBudgetTooLarge(ValueError):
    pass


def stream(seed: int, index: int) -> random.Random:
    """Independent generator for restart ``index`` under ``seed``."""
    ss = np.random.SeedSequence([seed & (2**64 - 1), index])
    words = ss.generate_state(4, dtype=np.uint64)
    return random.Random(int.from_bytes(words.tobytes(), "little"))


def sample_index(probs: Sequence[Fraction], rng: random.Random) -> int:
    """Draw ``i`` with probability exactly ``probs[i]``.

    Scales to a common denominator ``D`` and draws uniformly from
    ``range(D)``; ``randrange`` rejection-samples on raw random bits.
    """
    D = 1
    for p in probs:
        D = D * p.denominator // math.gcd(D, p.denominator)
    r = rng.randrange(D)
    acc = 0
    for i, p in enumerate(probs):
        acc += p.numerator * (D // p.denominator)
        if r < acc:
            return i
    raise ValueError("probabilities do not sum to 1")


@dataclass
class WalkState:
    sigma: tuple[int, ...]
    step: int
    rng: random.Random = field(repr=False)


@dataclass(frozen=True)
class StrategyDistribution:
    """Move probabilities ``((i, j), p)``: set ``sigma_i`` to ``j`` w.p. ``p``."""

    moves: tuple[tuple[tuple[int, int], Fraction], ...]

    def __post_init__(self):
        if sum(p for _, p in self.moves) != 1 or any(p <= 0 for _, p in self.moves):
            raise ValueError("move probabilities must be positive and sum to 1")

    def as_dict(self) -> dict[tuple[int, int], Fraction]:
        return dict(self.moves)

    @property
    def support(self) -> tuple[tuple[int, int], ...]:
        return tuple(mv for mv, _ in self.moves)


class WalkStatus(enum.Enum):
    SOLVED = "solved"
    EXHAUSTED = "exhausted"


@dataclass
class WalkOutcome:
    status: WalkStatus
    witness: tuple[Fraction, ...] | None = None
    steps_used: int = 0
    restarts_used: int = 0
    restart_steps: list[int] = field(default_factory=list)
    T: int | None = None
    R: int | None = None
    trajectory: list[tuple[int, ...]] | None = None

    @property
    def solved(self) -> bool:
        return self.status is WalkStatus.SOLVED


def tables_for(lp: LinearProgram) -> list[PotentialTable]:
    return [build_potentials(E) for E in lp.var_sets]


def step_budget(lp: LinearProgram, tables=None) -> int:
    """Per-restart step budget for a product of interval sets.

    Only variables with two or more intervals move; quanta and traction
    are the worst over those, and ``n`` counts them.
    """
    tables = tables or tables_for(lp)
    walkers = [t for t in tables if t.k >= 2]
    if not walkers:
        return 1
    gamma = min(t.gamma for t in walkers)
    tau = min(t.tau for t in walkers)
    return budget_for(len(walkers), gamma, tau)


def _ratios(tables, sigma):
    """Per move ``(i, j)``: ``(u0(j)/u0(s_i), u1(j)/u1(s_i))``."""
    out = []
    for i, (t, s) in enumerate(zip(tables, sigma)):
        for j in range(t.k):
            if j != s:
                out.append(((i, j), t.u0[j] / t.u0[s], t.u1[j] / t.u1[s]))
    return out


def strategy_affine(tables, sigma, p) -> tuple[Fraction, list[Fraction]]:
    """Write ``f(x, p) = h + g . x`` and return ``(h, g)``."""
    probs = p.as_dict() if isinstance(p, StrategyDistribution) else dict(p)
    h = Fraction(0)
    g = [Fraction(0)] * len(sigma)
    for (i, j), r0, r1 in _ratios(tables, sigma):
        w = probs.get((i, j))
        if w:
            h += w * r0
            g[i] += w * (r1 - r0)
    return h, g


def min_response(lp: LinearProgram, tables, sigma, p):
    """``min_{x in K1} f(x, p)`` and the minimising vertex."""
    h, g = strategy_affine(tables, sigma, p)
    res = minimize(lp, g, Box.unit(lp.n))
    if res.status is not LpStatus.OPTIMAL:
        raise RelaxationInfeasible("relaxation is empty")
    return h + res.value, res.point


def init_state(lp: LinearProgram, rng: random.Random, tables=None, start: str = "canonical") -> WalkState:
    """Sample each ``sigma_i`` independently from the starting distribution."""
    tables = tables or tables_for(lp)
    sigma = []
    for t in tables:
        if t.k == 1:
            sigma.append(0)
        else:
            q = t.q_canonical if start == "canonical" else t.q_beta
            sigma.append(sample_index(q, rng))
    return WalkState(tuple(sigma), 1, rng)


def feasibility_probe(lp: LinearProgram, sigma: Sequence[int]):
    """Exact point of the sigma-box satisfying the program, or None."""
    res = check_feasible(lp, Box.from_sigma(lp.var_sets, sigma))
    return res.point if res.status is LpStatus.FEASIBLE else None


def solve_strategy(lp: LinearProgram, sigma: Sequence[int], tables=None, verify: bool = True) -> StrategyDistribution:
    """Move distribution keeping the potential a submartingale.

    The robust requirement ``min_{x in K1} f(x, p) >= 1`` is replaced by
    its LP dual: multipliers ``y >= 0`` on the rows and ``v >= 0`` on the
    caps ``x <= 1`` with ``g(p) + A^T y + v >= 0`` and
    ``h(p) - b.y - sum(v) >= 1``.  Ties go to mass on the earliest moves.
    """
    tables = tables or tables_for(lp)
    sigma = tuple(sigma)
    n, m = lp.n, lp.m
    moves = _ratios(tables, sigma)
    P = len(moves)
    if P == 0:
        raise StrategyInfeasible("no variable can move")
    yoff, voff = P, P + m
    nvars = P + m + n
    rows: list[dict] = [dict() for _ in range(n)]
    hrow: dict = {}
    for col, ((i, j), r0, r1) in enumerate(moves):
        if r1 != r0:
            rows[i][col] = -(r1 - r0)
        hrow[col] = -r0
    for r, (coeffs, b) in enumerate(lp.rows):
        for i, a in coeffs.items():
            rows[i][yoff + r] = -a
        if b:
            hrow[yoff + r] = b
    for i in range(n):
        rows[i][voff + i] = -1
        hrow[voff + i] = 1
    all_rows = rows + [hrow, {c: 1 for c in range(P)}]
    rhs = [0] * n + [-1, 1]
    eq = [False] * (n + 1) + [True]
    lo = [0] * nvars
    hi = [1] * P + [None] * (m + n)
    cost = list(range(1, P + 1)) + [0] * (m + n)
    res = simplex(cost, all_rows, rhs, lo, hi, eq=eq)
    if res.status is not LpStatus.OPTIMAL:
        raise StrategyInfeasible(f"step system is {res.status.value} at sigma={sigma}")
    out = []
    for col, (mv, _, _) in enumerate(moves):
        v = res.x[col]
        if v:
            out.append((mv, Fraction(int(v.numerator), int(v.denominator))))
    dist = StrategyDistribution(tuple(out))
    if any(mv[1] == sigma[mv[0]] for mv in dist.support):
        raise StrategyInfeasible("distribution proposes a null move")
    if verify:
        worst, _ = min_response(lp, tables, sigma, dist)
        if worst < 1:
            raise StrategyInfeasible(f"re-minimisation gives {worst} < 1 at sigma={sigma}")
    return dist


def step(state: WalkState, p: StrategyDistribution, rng: random.Random | None = None) -> WalkState:
    rng = rng or state.rng
    (i, j), _ = p.moves[sample_index([w for _, w in p.moves], rng)]
    sigma = list(state.sigma)
    sigma[i] = j
    return WalkState(tuple(sigma), state.step + 1, rng)


class WalkContext:
    """Per-program data shared by all restarts, with per-sigma memos.

    Probes and strategies are deterministic functions of sigma, so
    caching them leaves every trajectory unchanged.
    """

    def __init__(self, lp: LinearProgram, T: int | None = None, verify: bool = True, start: str = "canonical"):
        self.lp = lp
        self.tables = tables_for(lp)
        self.T = T if T is not None else step_budget(lp, self.tables)
        self.verify = verify
        self.start = start
        self._probes: dict = {}
        self._strategies: dict = {}
        self.strategy_solves = 0

    def probe(self, sigma):
        if sigma not in self._probes:
            self._probes[sigma] = feasibility_probe(self.lp, sigma)
        return self._probes[sigma]

    def strategy(self, sigma) -> StrategyDistribution:
        if sigma not in self._strategies:
            self._strategies[sigma] = solve_strategy(self.lp, sigma, self.tables, verify=self.verify)
            self.strategy_solves += 1
        return self._strategies[sigma]

    def strategies(self) -> dict:
        return dict(self._strategies)

    def run(self, rng: random.Random, record: bool = False) -> WalkOutcome:
        state = init_state(self.lp, rng, self.tables, self.start)
        traj = [state.sigma] if record else None
        for t in range(1, self.T + 1):
            y = self.probe(state.sigma)
            if y is not None:
                return WalkOutcome(WalkStatus.SOLVED, y, t, 1, [t], self.T, None, traj)
            state = step(state, self.strategy(state.sigma), rng)
            if record:
                traj.append(state.sigma)
        return WalkOutcome(WalkStatus.EXHAUSTED, None, self.T, 1, [self.T], self.T, None, traj)


def run_walk(lp: LinearProgram, tables=None, T: int | None = None, rng: random.Random | None = None, record=False) -> WalkOutcome:
    """One restart: probe, solve for a strategy, move; at most ``T`` probes."""
    ctx = WalkContext(lp, T)
    if tables is not None:
        ctx.tables = list(tables)
    return ctx.run(rng or stream(0, 0), record)


def _check_relaxation(lp: LinearProgram):
    if check_feasible(lp, Box.unit(lp.n)).status is not LpStatus.FEASIBLE:
        raise RelaxationInfeasible("the LP relaxation over [0,1]^n is empty")


def _job(args):
    lp, T, seed, indices, verify, record = args
    ctx = WalkContext(lp, T, verify)
    outs = []
    for r in indices:
        out = ctx.run(stream(seed, r), record)
        outs.append((r, out))
        if out.solved:
            break
    return outs


def solve(
    lp: LinearProgram,
    restarts: int | None = None,
    seed: int = 0,
    T: int | None = None,
    jobs: int = 1,
    cap: int = DEFAULT_RESTART_CAP,
    record: bool = False,
    context: WalkContext | None = None,
) -> WalkOutcome:
    """Independent restarts until one succeeds or ``restarts`` are spent.

    The default restart count is ``ceil(n (2 - meas(E))^n)`` (per-variable
    factors for mixed interval sets).  Restart ``r`` draws from
    ``stream(seed, r)``, so the outcome does not depend on ``jobs``.
    """
    _check_relaxation(lp)
    R = restart_budget(lp) if restarts is None else restarts
    if R > cap:
        raise RestartBudgetTooLarge(
            f"restart budget {R} = ceil(n * prod(2 - meas(E_i))) exceeds the cap {cap}"
        )
    ctx = context or WalkContext(lp, T)
    steps: list[int] = []
    if jobs <= 1 or R <= 1:
        for r in range(R):
            out = ctx.run(stream(seed, r), record)
            steps.append(out.steps_used)
            if out.solved:
                return _finish(out, lp, steps, ctx.T, R)
        return WalkOutcome(WalkStatus.EXHAUSTED, None, sum(steps), R, steps, ctx.T, R)
    chunk = max(1, math.ceil(R / (jobs * 4)))
    blocks = [list(range(a, min(R, a + chunk))) for a in range(0, R, chunk)]
    with ProcessPoolExecutor(jobs) as pool:
        for a in range(0, len(blocks), jobs):
            batch = pool.map(_job, [(lp, ctx.T, seed, b, ctx.verify, record) for b in blocks[a:a + jobs]])
            for outs in batch:
                for _, out in outs:
                    steps.append(out.steps_used)
                    if out.solved:
                        return _finish(out, lp, steps, ctx.T, R)
    return WalkOutcome(WalkStatus.EXHAUSTED, None, sum(steps), R, steps, ctx.T, R)


def _finish(out: WalkOutcome, lp, steps, T, R) -> WalkOutcome:
    y = out.witness
    if not (lp.satisfied_by(y) and lp.in_sets(y)):
        raise AssertionError("walk witness failed exact verification")
    return WalkOutcome(WalkStatus.SOLVED, y, sum(steps), len(steps), steps, T, R, out.trajectory)


@dataclass
class OptimizeResult:
    value: Fraction | None
    threshold: Fraction | None
    witness: tuple[Fraction, ...] | None
    probes: int


def optimize(
    lp: LinearProgram,
    objective: Sequence,
    seed: int = 0,
    integral: bool = False,
    tolerance=Fraction(1, 1000),
    restarts: int | None = None,
) -> OptimizeResult:
    """Bisect on ``M`` with the cut ``c.x >= M`` to maximise ``c.x`` over E-points.

    ``value`` is ``c.y`` of the returned witness, which may exceed the best
    0-1 objective.  With ``integral`` the candidates are the integers in the
    objective's range and at most ``ceil(log2(#candidates)) + 1`` solves run.
    """
    c = [Fraction(v) for v in objective]
    if len(c) != lp.n:
        raise ValueError("objective length differs from n")
    _check_relaxation(lp)
    lo = sum((v for v in c if v < 0), Fraction(0))
    hi = sum((v for v in c if v > 0), Fraction(0))
    cut = {j: -v for j, v in enumerate(c) if v}
    probes = 0
    best = None

    def attempt(M):
        nonlocal probes
        probes += 1
        aug = lp.add_rows([(cut, -M)])
        try:
            out = solve(aug, restarts=restarts, seed=seed + probes)
        except RelaxationInfeasible:
            return None
        return out.witness if out.solved else None

    if integral:
        if any(v.denominator != 1 for v in c):
            raise ValueError("integral mode needs an integer objective")
        a, b = int(lo), int(hi)
        while a < b:
            mid = (a + b + 1) // 2
            y = attempt(Fraction(mid))
            if y is not None:
                best, a = (Fraction(mid), y), mid
            else:
                b = mid - 1
        if best is None:
            y = attempt(Fraction(a))
            if y is not None:
                best = (Fraction(a), y)
    else:
        # the upper end is often attained exactly; bisection would stop short of it
        y = attempt(hi)
        if y is not None:
            best = (hi, y)
        else:
            y = attempt(lo)
        if best is None and y is not None:
            best = (lo, y)
            lo = max(lo, sum((v * w for v, w in zip(c, y)), Fraction(0)))
            while hi - lo > tolerance:
                mid = (lo + hi) / 2
                y = attempt(mid)
                if y is not None:
                    best = (mid, y)
                    lo = max(mid, sum((v * w for v, w in zip(c, y)), Fraction(0)))
                else:
                    hi = mid
    if best is None:
        return OptimizeResult(None, None, None, probes)
    M, y = best
    return OptimizeResult(sum((v * w for v, w in zip(c, y)), Fraction(0)), M, y, probes)
