"""Acceptance suite: twelve criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the
terminal summary) or ``python3 -m tests.test_acceptance``.
"""

import itertools
import math
import random
import sys
import time
from fractions import Fraction as F

import pytest

from erelax.cli import main as cli_main
from erelax.csp import (
    CspInstance,
    CspTemplate,
    Constraint,
    basic_lp,
    choose_delta,
    ksat_scheme,
    ksat_template,
    ksat_to_lp,
    partial_polymorphism_check,
    planted_ksat,
    random_ksat,
    round_point,
    verify_assignment,
)
from erelax.domain import IntervalSet, LinearProgram, format_interval_set, format_lp, measure, random_interval_set, shrink
from erelax.oracle import (
    LatticeChain,
    brute_force_ip,
    calc_inequality_sweep,
    cutting_plane_strategy,
    lemma_budget,
    submartingale_sim,
    vertex_submartingale_check,
)
from erelax.potential import build_potentials, restart_budget, traction
from erelax.walk import StrategyInfeasible, WalkContext, min_response, stream

from .helpers import ACCEPTANCE_LINES, E3, FIVE


def record(num: int, ok: bool, detail: str) -> bool:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def cube(n):
    return itertools.product((0, 1), repeat=n)


def shrunk_e3(n):
    return shrink(E3, choose_delta(E3, n))


def random_sets(count=200, seed=2024):
    rng = random.Random(seed)
    return [random_interval_set(rng, 5, 50) for _ in range(count)]


# 1 ---------------------------------------------------------------------------


def test_criterion_01_potential_exactness():
    t0 = time.perf_counter()
    t = build_potentials.__wrapped__(E3)
    f = build_potentials.__wrapped__(FIVE)
    ok = (
        t.u0 == (1, F(1, 2))
        and t.u1 == (F(1, 2), 1)
        and t.gamma == F(1, 2)
        and t.tau == 2
        and f.u0[1] == F(3, 4)
        and f.u1[1] == F(3, 4)
    )
    dt = time.perf_counter() - t0
    ok = ok and dt < 1
    assert record(1, ok, f"E3 tables, middle-interval potentials 3/4, {dt:.3f}s")


# 2 ---------------------------------------------------------------------------


def test_criterion_02_telescoping():
    t0 = time.perf_counter()
    bad = 0
    for E in random_sets():
        t = build_potentials(E)
        target = 1 / (2 - measure(E))
        e0 = sum(q * u for q, u in zip(t.q_canonical, t.u0))
        e1 = sum(q * u for q, u in zip(t.q_canonical, t.u1))
        bad += not (e0 == e1 == target)
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 10
    assert record(2, ok, f"200 random sets, {bad} mismatches, {dt:.2f}s")


# 3 ---------------------------------------------------------------------------


def test_criterion_03_beta_bound():
    t0 = time.perf_counter()
    below = not_tight = two = 0
    for E in random_sets():
        t = build_potentials(E)
        target = 1 / (2 - measure(E))
        below += t.beta < target
        if E.k == 2:
            two += 1
            not_tight += t.beta != target
    five = build_potentials(FIVE).beta
    dt = time.perf_counter() - t0
    ok = below == 0 and not_tight == 0 and five >= F(3, 4) and dt < 30
    assert record(3, ok, f"beta >= 1/(2-meas) on 200 sets, tight on {two} two-interval sets, five-interval beta={five}, {dt:.2f}s")


# 4 ---------------------------------------------------------------------------


def _small_lp(rng):
    n = rng.randint(2, 6)
    x = [rng.randrange(2) for _ in range(n)]
    rows = []
    for _ in range(rng.randint(1, 5)):
        coeffs = {j: F(rng.randint(-3, 3)) for j in range(n)}
        lhs = sum(a * v for a, v in zip(coeffs.values(), x))
        rows.append((coeffs, lhs + F(rng.randint(0, 1), 2)))
    sets = []
    for _ in range(n):
        E = random_interval_set(rng, 3, 12)
        while E.k < 2:
            E = random_interval_set(rng, 3, 12)
        sets.append(E)
    return LinearProgram(n, tuple(rows), tuple(sets))


def _random_states(lp, ctx, rng, want):
    got = 0
    for _ in range(20 * want):
        if got >= want:
            break
        sigma = tuple(rng.randrange(t.k) for t in ctx.tables)
        if sigma not in ctx.strategies() and ctx.probe(sigma) is None:
            ctx.strategy(sigma)
            got += 1


def test_criterion_04_strategy_soundness():
    solves = infeasible = unsound = 0
    contexts = []
    i = 0
    while solves < 900:
        n = 10 + i % 6
        inst, _ = planted_ksat(n, round(4.26 * n), 3, seed=4000 + i)
        lp = ksat_to_lp(inst, 3, shrunk_e3(n))
        ctx = WalkContext(lp)
        for r in range(6):
            try:
                ctx.run(stream(4000 + i, r))
            except StrategyInfeasible:
                infeasible += 1
        solves += ctx.strategy_solves
        contexts.append(ctx)
        i += 1
    rng = random.Random(44)
    small = 0
    while small < 150:
        lp = _small_lp(rng)
        if lp.n and not brute_force_ip(lp):
            continue
        ctx = WalkContext(lp)
        try:
            for r in range(3):
                ctx.run(stream(small, r))
            _random_states(lp, ctx, rng, 3)
        except StrategyInfeasible:
            infeasible += 1
        small += ctx.strategy_solves
        contexts.append(ctx)
    solves += small
    for ctx in contexts:
        for sigma, p in ctx.strategies().items():
            val, _ = min_response(ctx.lp, ctx.tables, sigma, p)
            unsound += val < 1
    # shared subset: both solvers on the same states
    shared = shared_bad = 0
    for ctx in contexts:
        if shared >= 120:
            break
        for sigma in list(ctx.strategies())[:12]:
            cp = cutting_plane_strategy(ctx.lp, sigma, ctx.tables).strategy
            for dist in (ctx.strategy(sigma), cp):
                val, _ = min_response(ctx.lp, ctx.tables, sigma, dist)
                chk = vertex_submartingale_check(ctx.lp, sigma, dist.as_dict(), ctx.tables)
                shared_bad += val < 1 or not chk.passed
            shared += 1
    ok = solves >= 1000 and infeasible == 0 and unsound == 0 and shared >= 100 and shared_bad == 0
    assert record(
        4,
        ok,
        f"{solves} step solves ({small} on small LPs), {unsound} unsound, {infeasible} infeasible; "
        f"{shared} shared states, {shared_bad} failures",
    )


# 5 ---------------------------------------------------------------------------


def test_criterion_05_traction_realized():
    t0 = time.perf_counter()
    moves = violations = jumps = 0
    for i in range(10):
        n = 8 + i % 5
        inst, _ = planted_ksat(n, round(4.26 * n), 3, seed=5000 + i)
        lp = ksat_to_lp(inst, 3, shrunk_e3(n))
        sols = brute_force_ip(lp)
        ctx = WalkContext(lp)
        tau = traction(ctx.tables[0])
        for r in range(5):
            traj = ctx.run(stream(5000 + i, r), record=True).trajectory
            for a, b in zip(traj, traj[1:]):
                moves += 1
                diff = [j for j in range(n) if a[j] != b[j]]
                jumps += len(diff) != 1
                for x in sols:
                    u = ctx.tables[diff[0]].u(x[diff[0]])
                    ratio = u[b[diff[0]]] / u[a[diff[0]]]
                    violations += 1 / tau < ratio < tau
    dt = time.perf_counter() - t0
    ok = violations == 0 and jumps == 0 and moves > 0 and dt < 60
    assert record(5, ok, f"{moves} moves, {violations} ratios inside the window, {jumps} multi-coordinate jumps, {dt:.1f}s")


# 6 ---------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_06_success_rate():
    t0 = time.perf_counter()
    n, instances, per = 12, 20, 100
    scheme = ksat_scheme(3)
    trials = wins = unverified = 0
    for i in range(instances):
        inst, _ = planted_ksat(n, round(4.26 * n), 3, seed=6000 + i)
        ctx = WalkContext(ksat_to_lp(inst, 3, shrunk_e3(n)))
        for r in range(per):
            out = ctx.run(stream(6000 + i, r))
            trials += 1
            if out.solved:
                wins += 1
                unverified += not verify_assignment(inst, round_point(out.witness, scheme, n))
    rate = wins / trials
    se = math.sqrt(rate * (1 - rate) / trials)
    floor = 0.5 * 0.75 ** (n + 1)
    ok = trials >= 2000 and rate >= floor - 3 * se and unverified == 0
    dt = time.perf_counter() - t0
    assert record(
        6, ok, f"{wins}/{trials} restarts solved, rate {rate:.4f} (se {se:.4f}) vs floor {floor:.4f}, {unverified} unverified, {dt:.0f}s"
    )


# 7 ---------------------------------------------------------------------------


def test_criterion_07_restart_budget():
    mismatch = [n for n in range(1, 41) if restart_budget(LinearProgram(n, (), E3)) != math.ceil(n * F(4, 3) ** n)]
    assert record(7, not mismatch, f"auto budget equals ceil(n (4/3)^n) for n = 1..40, mismatches {mismatch}")


# 8 ---------------------------------------------------------------------------


def test_criterion_08_inequality_sweep():
    t0 = time.perf_counter()
    rep = calc_inequality_sweep([1 + F(i, 10) for i in range(91)], [F(j, 10) for j in range(1, 21)])
    eq = all(p.equality for p in rep.points if p.tau == 1)
    dt = time.perf_counter() - t0
    ok = rep.passed and eq and dt < 10
    assert record(8, ok, f"{len(rep.points)} grid points, {len(rep.failures)} failures, equality at tau=1: {eq}, {dt:.2f}s")


# 9 ---------------------------------------------------------------------------


CHAINS = [
    ("tau=2 eps=1 X1=1/2", LatticeChain(F(2), F(1, 3), ((1, F(1)),)), F(1)),
    ("tau=2 eps=1 X1=1/4", LatticeChain(F(2), F(1, 2), ((2, F(1)),)), F(1)),
    ("tau=3 eps=1/2 mixed", LatticeChain(F(3), F(1, 4), ((1, F(1, 2)), (2, F(1, 2)))), F(1, 2)),
]


def test_criterion_09_submartingale():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for k, (name, chain, eps) in enumerate(CHAINS):
        r = submartingale_sim(chain, eps, trials=100_000, seed=900 + k)
        ok &= r.passed
        parts.append(f"{name}: T={r.T} Q={r.estimate:.4f} floor={r.bound:.4f}")
    ok &= lemma_budget(CHAINS[0][1], F(1)) == 14
    dt = time.perf_counter() - t0
    ok &= dt < 60
    assert record(9, ok, "; ".join(parts) + f", {dt:.1f}s")


# 10 --------------------------------------------------------------------------

ONE_IN_THREE = CspTemplate({"x1of3": frozenset({(1, 0, 0), (0, 1, 0), (0, 0, 1)})})


def basic_projection(lp, n, blocks):
    """x in {0,1}^n for which some 0-1 weights satisfy every row."""
    rows_of = []
    for w in blocks:
        ws = set(w)
        rows_of.append([(c, b) for c, b in lp.rows if ws & set(c)])
    out = set()
    for x in cube(n):
        ok = True
        for w, rows in zip(blocks, rows_of):
            found = False
            for bits in cube(len(w)):
                val = dict(zip(range(n), x))
                val.update(zip(w, bits))
                if all(sum(a * val[j] for j, a in c.items()) <= b for c, b in rows):
                    found = True
                    break
            if not found:
                ok = False
                break
        if ok:
            out.add(x)
    return out


def _one_in_three(rng, n):
    m = rng.randint(1, n)
    planted = None
    if rng.random() < 0.5:
        # at least one 1 and two 0s, so some triple has exactly one 1
        planted = [1, 0, 0] + [rng.randrange(2) for _ in range(n - 3)]
        rng.shuffle(planted)
    cons = []
    while len(cons) < m:
        vs = tuple(rng.sample(range(n), 3))
        if planted is not None and sum(planted[v] for v in vs) != 1:
            continue
        cons.append(Constraint("x1of3", vs))
    return CspInstance(n, tuple(cons), ONE_IN_THREE)


def test_criterion_10_encoding_soundness():
    t0 = time.perf_counter()
    rng = random.Random(10)
    sat_bad = 0
    for i in range(100):
        n = rng.randint(3, 12)
        inst = random_ksat(n, rng.randint(1, 5 * n), 3, seed=10_000 + i)
        lp_sols = set(brute_force_ip(ksat_to_lp(inst, 3)))
        sat_bad += lp_sols != {a for a in cube(n) if verify_assignment(inst, a)}
    one_bad = nonempty = 0
    for i in range(50):
        n = rng.randint(3, 10)
        inst = _one_in_three(rng, n)
        lp = basic_lp(inst)
        blocks = [list(range(n + 3 * c, n + 3 * c + 3)) for c in range(len(inst.constraints))]
        proj = basic_projection(lp, n, blocks)
        truth = {a for a in cube(n) if verify_assignment(inst, a)}
        one_bad += proj != truth
        nonempty += bool(truth)
    dt = time.perf_counter() - t0
    ok = sat_bad == 0 and one_bad == 0 and dt < 120
    assert record(10, ok, f"3-SAT mismatches {sat_bad}/100, 1-in-3 mismatches {one_bad}/50 ({nonempty} satisfiable), {dt:.1f}s")


# 11 --------------------------------------------------------------------------


def test_criterion_11_polymorphism():
    t0 = time.perf_counter()
    passes = {(k, L): partial_polymorphism_check(ksat_template(k), ksat_scheme(k), L) for k, L in ((3, 4), (3, 5), (4, 5))}
    xor = CspTemplate({"xor": frozenset({(0, 1), (1, 0)})})
    xor_fails = {(k, L): not partial_polymorphism_check(xor, ksat_scheme(k), L) for k, L in ((3, 4), (3, 5), (4, 5))}
    dt = time.perf_counter() - t0
    ok = all(passes.values()) and all(xor_fails.values()) and dt < 60
    assert record(
        11,
        ok,
        f"k-SAT scheme preserved {sum(passes.values())}/3; XOR rejected {sum(xor_fails.values())}/3, {dt:.2f}s",
    )


# 12 --------------------------------------------------------------------------


def test_criterion_12_determinism(tmp_path):
    import io
    import json

    n = 10
    inst, _ = planted_ksat(n, 42, 3, seed=1212)
    path = tmp_path / "planted.lp"
    path.write_text(format_lp(ksat_to_lp(inst, 3)))
    argv = ["solve", "--lp", str(path), "--E", format_interval_set(shrunk_e3(n)), "--seed", "1212", "--trace"]
    reports = []
    for _ in range(2):
        buf = io.StringIO()
        code = cli_main(argv, out=buf)
        rep = json.loads(buf.getvalue())
        rep.pop("timestamp")
        reports.append((code, rep))
    (c1, r1), (c2, r2) = reports
    ok = c1 == c2 == 0 and r1 == r2 and r1["trajectory"] == r2["trajectory"]
    assert record(12, ok, f"two seeded runs identical: {r1 == r2}, trajectory length {len(r1['trajectory'] or [])}")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
