"""Exact rational linear programming.

A bounded-variable primal simplex with Bland's rule, run on a dense tableau
of ``gmpy2.mpq`` entries.  Phase 1 minimises the sum of artificial
variables; when it stalls above zero the slack reduced costs are a Farkas
certificate.  Phase 2 returns a primal vertex together with row multipliers
that close the duality gap exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from gmpy2 import mpq

from .domain import Box, DimensionMismatch, LinearProgram

__all__ = [
    "LpStatus",
    "LpOutcome",
    "LpError",
    "simplex",
    "check_feasible",
    "minimize",
    "farkas_holds",
    "lagrangian_bound",
]

_ZERO = mpq(0)
_ONE = mpq(1)


class LpError(RuntimeError):
    """A result failed its own exact re-verification (a solver bug)."""


class LpStatus(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    point: tuple[Fraction, ...] | None = None
    value: Fraction | None = None
    dual: tuple[Fraction, ...] | None = None
    farkas: tuple[Fraction, ...] | None = None

    @property
    def feasible(self) -> bool:
        return self.status in (LpStatus.FEASIBLE, LpStatus.OPTIMAL)


def _q(v) -> mpq:
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


def _f(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


@dataclass
class _Result:
    status: LpStatus
    x: list | None = None
    value: object = None
    row_mult: list | None = None


def simplex(cost, rows, rhs, lo, hi, eq=None, phase1_only=False) -> _Result:
    """Minimise ``cost . x`` subject to sparse ``rows`` and variable bounds.

    ``rows[i]`` maps column -> coefficient; row ``i`` reads ``<= rhs[i]`` or
    ``== rhs[i]`` when ``eq[i]`` is set.  ``lo`` must be finite; ``hi[j]``
    may be None for an unbounded column.  Row multipliers are returned in
    Lagrangian sign convention: ``cost + A^T mult`` are the reduced costs and
    ``mult >= 0`` on inequality rows.  When infeasible they form a Farkas
    combination instead.
    """
    n = len(lo)
    m = len(rows)
    eq = eq or [False] * m
    L = [_q(v) for v in lo]
    U = [None if v is None else _q(v) for v in hi]
    rowq = [{j: _q(a) for j, a in r.items() if a} for r in rows]
    resid = []
    for r, b in zip(rowq, rhs):
        s = _q(b)
        for j, a in r.items():
            s -= a * L[j]
        resid.append(s)

    need_art = [eq[i] or resid[i] < 0 for i in range(m)]
    n_art = sum(need_art)
    ncols = n + m + n_art
    L += [_ZERO] * (m + n_art)
    U += [_ZERO if eq[i] else None for i in range(m)] + [None] * n_art
    at_upper = [False] * ncols
    basic = [0] * m
    is_basic = [False] * ncols
    beta = [_ZERO] * m
    T = []
    art_cols = []
    a_idx = n + m
    for i in range(m):
        row = [_ZERO] * ncols
        sign = _ONE
        if need_art[i]:
            sign = _ONE if resid[i] >= 0 else -_ONE
            row[a_idx] = _ONE
            basic[i] = a_idx
            art_cols.append(a_idx)
            a_idx += 1
        else:
            basic[i] = n + i
        for j, a in rowq[i].items():
            row[j] = a * sign
        row[n + i] = sign
        beta[i] = resid[i] * sign
        is_basic[basic[i]] = True
        T.append(row)

    def value_of(j):
        return U[j] if at_upper[j] else L[j]

    def reduced(c):
        d = list(c)
        for i in range(m):
            cb = c[basic[i]]
            if cb:
                Ti = T[i]
                for j in range(ncols):
                    if Ti[j]:
                        d[j] -= cb * Ti[j]
        return d

    def run(c, d, frozen):
        while True:
            enter = -1
            for j in range(ncols):
                if is_basic[j] or j in frozen:
                    continue
                if U[j] is not None and U[j] == L[j]:
                    continue
                dj = d[j]
                if (dj < 0 and not at_upper[j]) or (dj > 0 and at_upper[j]):
                    enter = j
                    break
            if enter < 0:
                return True
            j = enter
            direction = -1 if at_upper[j] else 1
            best_t = None
            best_var = None
            best_row = -1
            if U[j] is not None:
                best_t = U[j] - L[j]
                best_var = j
            for i in range(m):
                a = T[i][j]
                if not a:
                    continue
                if direction < 0:
                    a = -a
                bv = basic[i]
                if a > 0:
                    t = (beta[i] - L[bv]) / a
                elif U[bv] is not None:
                    t = (U[bv] - beta[i]) / (-a)
                else:
                    continue
                if best_t is None or t < best_t or (t == best_t and bv < best_var):
                    best_t, best_var, best_row = t, bv, i
            if best_t is None:
                return False
            step = best_t if direction > 0 else -best_t
            if step:
                for i in range(m):
                    a = T[i][j]
                    if a:
                        beta[i] -= a * step
            if best_row < 0:
                at_upper[j] = not at_upper[j]
                continue
            r = best_row
            leave = basic[r]
            a = T[r][j] if direction > 0 else -T[r][j]
            at_upper[leave] = a < 0
            entering_value = value_of(j) + step
            at_upper[j] = False
            Tr = T[r]
            piv = Tr[j]
            nz = [k for k in range(ncols) if Tr[k]]
            for k in nz:
                Tr[k] = Tr[k] / piv
            for i in range(m):
                if i == r:
                    continue
                Ti = T[i]
                f = Ti[j]
                if f:
                    for k in nz:
                        Ti[k] -= f * Tr[k]
            f = d[j]
            if f:
                for k in nz:
                    d[k] -= f * Tr[k]
            beta[r] = entering_value
            basic[r] = j
            is_basic[leave] = False
            is_basic[j] = True

    def mults(d):
        return [d[n + i] for i in range(m)]

    def primal():
        x = [value_of(j) for j in range(n)]
        for i in range(m):
            if basic[i] < n:
                x[basic[i]] = beta[i]
        return x

    if n_art:
        c1 = [_ZERO] * ncols
        for a in art_cols:
            c1[a] = _ONE
        d1 = reduced(c1)
        run(c1, d1, frozen=())
        arts = set(art_cols)
        infeas = sum((beta[i] for i in range(m) if basic[i] in arts), _ZERO)
        if infeas > 0:
            return _Result(LpStatus.INFEASIBLE, row_mult=mults(d1), value=infeas)
        for a in art_cols:
            U[a] = _ZERO
    if phase1_only:
        return _Result(LpStatus.FEASIBLE, x=primal())
    c2 = [_q(v) for v in cost] + [_ZERO] * (m + n_art)
    d2 = reduced(c2)
    if not run(c2, d2, frozen=set(art_cols)):
        return _Result(LpStatus.UNBOUNDED, x=primal())
    x = primal()
    val = sum((c2[j] * x[j] for j in range(n)), _ZERO)
    return _Result(LpStatus.OPTIMAL, x=x, value=val, row_mult=mults(d2))


def _check_dims(lp: LinearProgram, box: Box):
    if len(box) != lp.n:
        raise DimensionMismatch(f"box has {len(box)} sides for n={lp.n}")


def farkas_holds(lp: LinearProgram, box: Box, lam: Sequence[Fraction]) -> bool:
    """True iff ``lam >= 0`` proves ``{A x <= b} ∩ box`` empty.

    The combination ``(lam^T A) x <= lam^T b`` must fail at every point of
    the box, i.e. its minimum over the box exceeds ``lam^T b``.
    """
    if len(lam) != lp.m or any(v < 0 for v in lam):
        return False
    combo = [Fraction(0)] * lp.n
    bound = Fraction(0)
    for l, (coeffs, b) in zip(lam, lp.rows):
        if l:
            bound += l * b
            for j, a in coeffs.items():
                combo[j] += l * a
    low = sum((a * (box.lo[j] if a > 0 else box.hi[j]) for j, a in enumerate(combo)), Fraction(0))
    return low > bound


def lagrangian_bound(lp: LinearProgram, objective, box: Box, lam) -> Fraction:
    """Lower bound ``min_box (c + A^T lam) x - lam^T b`` on the optimum."""
    red = [Fraction(v) for v in objective]
    const = Fraction(0)
    for l, (coeffs, b) in zip(lam, lp.rows):
        if l:
            const -= l * b
            for j, a in coeffs.items():
                red[j] += l * a
    return const + sum((a * (box.lo[j] if a > 0 else box.hi[j]) for j, a in enumerate(red)), Fraction(0))


def _solve(lp: LinearProgram, box: Box, objective, phase1_only):
    _check_dims(lp, box)
    rows = [coeffs for coeffs, _ in lp.rows]
    return simplex(objective, rows, lp.rhs(), box.lo, box.hi, phase1_only=phase1_only)


def check_feasible(lp: LinearProgram, box: Box) -> LpOutcome:
    """Find ``y`` in ``box`` with ``A y <= b`` or certify that none exists."""
    res = _solve(lp, box, [0] * lp.n, phase1_only=True)
    if res.status is LpStatus.INFEASIBLE:
        lam = tuple(_f(v) for v in res.row_mult)
        if not farkas_holds(lp, box, lam):
            raise LpError("Farkas certificate failed verification")
        return LpOutcome(LpStatus.INFEASIBLE, farkas=lam)
    y = tuple(_f(v) for v in res.x)
    if not (box.contains(y) and lp.satisfied_by(y)):
        raise LpError("feasibility witness failed verification")
    return LpOutcome(LpStatus.FEASIBLE, point=y)


def minimize(lp: LinearProgram, objective: Sequence | Mapping, box: Box) -> LpOutcome:
    """Minimise ``objective . x`` over ``{A x <= b} ∩ box`` exactly.

    Returns OPTIMAL with a vertex, its value and row multipliers whose
    Lagrangian bound equals the value, or INFEASIBLE with a certificate.
    """
    if isinstance(objective, Mapping):
        obj = [Fraction(0)] * lp.n
        for j, a in objective.items():
            obj[j] = Fraction(a)
    else:
        obj = [Fraction(a) for a in objective]
    if len(obj) != lp.n:
        raise DimensionMismatch(f"objective has {len(obj)} entries for n={lp.n}")
    res = _solve(lp, box, obj, phase1_only=False)
    if res.status is LpStatus.INFEASIBLE:
        lam = tuple(_f(v) for v in res.row_mult)
        if not farkas_holds(lp, box, lam):
            raise LpError("Farkas certificate failed verification")
        return LpOutcome(LpStatus.INFEASIBLE, farkas=lam)
    if res.status is LpStatus.UNBOUNDED:  # pragma: no cover - boxes are bounded
        raise LpError("box-bounded program reported unbounded")
    x = tuple(_f(v) for v in res.x)
    value = _f(res.value)
    lam = tuple(_f(v) for v in res.row_mult)
    if not (box.contains(x) and lp.satisfied_by(x)):
        raise LpError("optimal point failed verification")
    if any(v < 0 for v in lam) or lagrangian_bound(lp, obj, box, lam) != value:
        raise LpError("dual certificate does not close the gap")
    return LpOutcome(LpStatus.OPTIMAL, point=x, value=value, dual=lam)
