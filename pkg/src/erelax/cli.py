"""Command-line entry point: ``erelax solve|cnf|analyze|verify``."""

from __future__ import annotations

import argparse
import itertools
import json
import math
import random
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import csp, oracle, potential
from .domain import (
    DomainError,
    IntervalSet,
    as_rational,
    format_interval_set,
    measure,
    parse_interval_set,
    parse_lp,
    random_interval_set,
    shrink,
)
from .walk import (
    WalkContext,
    RelaxationInfeasible,
    RestartBudgetTooLarge,
    DEFAULT_RESTART_CAP,
    min_response,
    optimize,
    solve,
    stream,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_EXHAUSTED = 2
EXIT_INFEASIBLE = 3
EXIT_USAGE = 64
EXIT_DATAERR = 65

DEFAULT_SEED = 20240601
SUITES = ("calc", "strategy", "submartingale", "potential", "encoding", "polymorphism")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _q(v) -> str:
    return str(Fraction(v))


def _restarts(text: str):
    if text == "auto":
        return None
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'auto'")
    if v < 1:
        raise argparse.ArgumentTypeError("restarts must be positive")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer")
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="erelax", description="Random-walk solver for E-relaxations of 0-1 programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(sp):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="64-bit seed (fixed default)")
        sp.add_argument("--entropy", action="store_true", help="seed from OS entropy instead")
        sp.add_argument("--restarts", type=_restarts, default=None, help="integer or 'auto' (default)")
        sp.add_argument("--max-restarts", type=_positive, default=DEFAULT_RESTART_CAP, help="hard cap on restarts")
        sp.add_argument("--steps", type=_positive, default=None, help="override the per-restart step budget")
        sp.add_argument("--jobs", type=_positive, default=1)
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--trace", action="store_true", help="include the successful restart's interval trajectory")

    s = sub.add_parser("solve", help="find y in E^n with Ay <= b")
    s.add_argument("--lp", required=True, help="LP file")
    s.add_argument("--E", dest="E", required=True, help='interval set, e.g. "0,1/3;2/3,1"')
    s.add_argument("--mode", choices=("feasible", "optimize"), default="feasible")
    s.add_argument("--objective", help="comma-separated rationals (optimize mode)")
    s.add_argument("--integral", action="store_true", help="bisect over integer thresholds")
    run_flags(s)

    c = sub.add_parser("cnf", help="solve a DIMACS CNF via the k-SAT scheme")
    c.add_argument("path", help="DIMACS file")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--encoder", choices=("direct", "basic"), default="direct")
    run_flags(c)

    a = sub.add_parser("analyze", help="potential tables and budgets for an interval set")
    a.add_argument("--E", dest="E", required=True)
    a.add_argument("--n", type=_positive, default=1)
    a.add_argument("--format", choices=("json", "text"), default="json")

    v = sub.add_parser("verify", help="run oracle suites")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--n", type=_positive, default=8)
    v.add_argument("--instances", type=_positive, default=5)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--trials", type=_positive, default=100_000)
    return p


def _emit(report: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
        return
    for key in sorted(report):
        val = report[key]
        if isinstance(val, list):
            val = " ".join(str(x) for x in val)
        out.write(f"{key}: {val}\n")


def _seed(args) -> int:
    if args.entropy:
        return random.SystemRandom().getrandbits(63)
    return args.seed


def _walk_report(out, seed: int, trace: bool) -> dict:
    rep = {
        "status": out.status.value,
        "witness": None if out.witness is None else [_q(v) for v in out.witness],
        "restarts_used": out.restarts_used,
        "steps_used": out.steps_used,
        "seed": seed,
        "T": out.T,
        "R": out.R,
        "restart_steps": list(out.restart_steps),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if trace:
        rep["trajectory"] = None if out.trajectory is None else [list(s) for s in out.trajectory]
    return rep


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise DomainError(f"cannot read {path}: {e.strerror}")


def cmd_solve(args, out) -> int:
    E = parse_interval_set(args.E)
    lp = parse_lp(_read(args.lp), E)
    seed = _seed(args)
    if args.mode == "optimize":
        if not args.objective:
            raise UsageError("--mode optimize needs --objective")
        c = [as_rational(t.strip()) for t in args.objective.split(",")]
        if len(c) != lp.n:
            raise DomainError(f"objective has {len(c)} entries for n={lp.n}")
        res = optimize(lp, c, seed=seed, integral=args.integral, restarts=args.restarts)
        rep = {
            "status": "solved" if res.witness is not None else "exhausted",
            "value": None if res.value is None else _q(res.value),
            "threshold": None if res.threshold is None else _q(res.threshold),
            "witness": None if res.witness is None else [_q(v) for v in res.witness],
            "probes": res.probes,
            "seed": seed,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        _emit(rep, args.format, out)
        return EXIT_OK if res.witness is not None else EXIT_EXHAUSTED
    res = solve(lp, restarts=args.restarts, seed=seed, T=args.steps, jobs=args.jobs, cap=args.max_restarts, record=args.trace)
    _emit(_walk_report(res, seed, args.trace), args.format, out)
    return EXIT_OK if res.solved else EXIT_EXHAUSTED


def cmd_cnf(args, out) -> int:
    if args.k < 3:
        raise UsageError("--k must be at least 3")
    inst = csp.parse_dimacs(_read(args.path))
    width = max((len(c.vars) for c in inst.constraints), default=0)
    if width > args.k:
        raise csp.ClauseTooWide(f"clause of width {width} exceeds k={args.k}")
    seed = _seed(args)
    res = csp.solve_csp(
        inst,
        csp.ksat_scheme(args.k),
        encoder=args.encoder,
        seed=seed,
        restarts=args.restarts,
        k=args.k,
        jobs=args.jobs,
        cap=args.max_restarts,
        T=args.steps,
        record=args.trace,
    )
    rep = _walk_report(res.walk, seed, args.trace)
    rep["delta"] = _q(res.delta)
    rep["assignment"] = None if res.assignment is None else list(res.assignment)
    _emit(rep, args.format, out)
    return EXIT_OK if res.solved else EXIT_EXHAUSTED


def analyze_report(E: IntervalSet, n: int) -> dict:
    t = potential.build_potentials(E)
    meas = measure(E)
    rep = {
        "E": format_interval_set(E),
        "n": n,
        "u0": [_q(v) for v in t.u0],
        "u1": [_q(v) for v in t.u1],
        "gamma": _q(t.gamma),
        "tau": None if t.tau is None else _q(t.tau),
        "q_canonical": [_q(v) for v in t.q_canonical],
        "beta": _q(t.beta),
        "q_beta": [_q(v) for v in t.q_beta],
        "meas": _q(meas),
        "two_minus_meas": _q(2 - meas),
        "T": None if t.tau is None else potential.budget_for(n, t.gamma, t.tau),
        "R": math.ceil(n * (2 - meas) ** n) if E.k >= 2 else 0,
    }
    if t.tau is None:
        rep["note"] = "single interval: traction undefined, no walk needed"
    return rep


def cmd_analyze(args, out) -> int:
    _emit(analyze_report(parse_interval_set(args.E), args.n), args.format, out)
    return EXIT_OK


# --- verify suites ------------------------------------------------------------

E3 = IntervalSet.of((0, Fraction(1, 3)), (Fraction(2, 3), 1))
FIVE = IntervalSet.of((0, Fraction(1, 5)), (Fraction(2, 5), Fraction(3, 5)), (Fraction(4, 5), 1))


def suite_calc(args) -> dict:
    taus = [1 + Fraction(i, 10) for i in range(91)]
    epss = [Fraction(j, 10) for j in range(1, 21)]
    rep = oracle.calc_inequality_sweep(taus, epss)
    bad = [{"tau": _q(p.tau), "eps": _q(p.eps), "margin": p.lower_margin} for p in rep.failures]
    eq_ok = all(p.equality for p in rep.points if p.tau == 1)
    return {"passed": rep.passed and eq_ok, "points": len(rep.points), "counterexamples": bad}


def suite_potential(args) -> dict:
    rng = random.Random(args.seed)
    bad = []
    t = potential.build_potentials(E3)
    if (t.u0, t.u1, t.gamma, t.tau) != ((1, Fraction(1, 2)), (Fraction(1, 2), 1), Fraction(1, 2), 2):
        bad.append({"E": str(E3), "tables": "mismatch"})
    f = potential.build_potentials(FIVE)
    if f.u0[1] != Fraction(3, 4) or f.u1[1] != Fraction(3, 4) or f.beta < Fraction(3, 4):
        bad.append({"E": str(FIVE), "tables": "mismatch"})
    for _ in range(50):
        E = random_interval_set(rng)
        t = potential.build_potentials(E)
        target = 1 / (2 - measure(E))
        e0 = sum(q * u for q, u in zip(t.q_canonical, t.u0))
        e1 = sum(q * u for q, u in zip(t.q_canonical, t.u1))
        if e0 != target or e1 != target or t.beta < target or (E.k == 2 and t.beta != target):
            bad.append({"E": str(E), "e0": _q(e0), "e1": _q(e1), "beta": _q(t.beta)})
    return {"passed": not bad, "sets": 52, "counterexamples": bad}


def strategy_states(lp, ctx: WalkContext, seed: int, want: int = 10, draws: int = 400):
    """Up to ``want`` sigmas where the probe fails: walk states first, then random ones."""
    for r in range(20):
        ctx.run(stream(seed, r))
        if len(ctx.strategies()) >= want:
            break
    states = list(ctx.strategies())[:want]
    rng = stream(seed, 10**6)
    for _ in range(draws):
        if len(states) >= want:
            break
        sigma = tuple(rng.randrange(t.k) for t in ctx.tables)
        if sigma not in states and ctx.probe(sigma) is None:
            states.append(sigma)
    return states


def suite_strategy(args) -> dict:
    bad = []
    count = 0
    for i in range(args.instances):
        inst, _ = csp.planted_ksat(args.n, round(4.26 * args.n), 3, seed=args.seed + i)
        lp = csp.ksat_to_lp(inst, 3, shrink(E3, csp.choose_delta(E3, args.n)))
        ctx = WalkContext(lp)
        for sigma in strategy_states(lp, ctx, args.seed + i, want=5):
            count += 1
            cp = oracle.cutting_plane_strategy(lp, sigma, ctx.tables)
            for label, dist in (("dual", ctx.strategy(sigma)), ("cutting_plane", cp.strategy)):
                val, _ = min_response(lp, ctx.tables, sigma, dist.as_dict())
                chk = oracle.vertex_submartingale_check(lp, sigma, dist.as_dict(), ctx.tables)
                if val < 1 or not chk.passed:
                    bad.append({"instance": i, "sigma": list(sigma), "solver": label, "min": _q(val)})
    return {"passed": not bad, "states": count, "counterexamples": bad}


def _chains():
    return [
        ("tau2_eps1_half", oracle.LatticeChain(Fraction(2), Fraction(1, 3), ((1, Fraction(1)),)), Fraction(1)),
        ("tau2_eps1_quarter", oracle.LatticeChain(Fraction(2), Fraction(1, 2), ((2, Fraction(1)),)), Fraction(1)),
        (
            "tau3_eps_half_mixed",
            oracle.LatticeChain(Fraction(3), Fraction(1, 4), ((1, Fraction(1, 2)), (2, Fraction(1, 2)))),
            Fraction(1, 2),
        ),
    ]


def suite_submartingale(args) -> dict:
    bad = []
    results = {}
    for i, (name, chain, eps) in enumerate(_chains()):
        r = oracle.submartingale_sim(chain, eps, trials=args.trials, seed=args.seed + i)
        results[name] = {"T": r.T, "estimate": r.estimate, "stderr": r.stderr, "bound": r.bound}
        if not r.passed:
            bad.append({"chain": name, **results[name]})
    return {"passed": not bad, "chains": results, "counterexamples": bad}


def suite_encoding(args) -> dict:
    bad = []
    for i in range(args.instances):
        n = min(args.n, 12)
        inst = csp.random_ksat(n, round(3 * n), 3, seed=args.seed + i)
        sols = set(oracle.brute_force_ip(csp.ksat_to_lp(inst, 3)))
        direct = set(a for a in _cube(n) if csp.verify_assignment(inst, a))
        if sols != direct:
            bad.append({"instance": i, "lp_only": len(sols - direct), "cnf_only": len(direct - sols)})
    return {"passed": not bad, "instances": args.instances, "counterexamples": bad}


def _cube(n):
    return itertools.product((0, 1), repeat=n)


def parity_template(arity: int) -> csp.CspTemplate:
    odd = frozenset(t for t in itertools.product((0, 1), repeat=arity) if sum(t) % 2)
    return csp.CspTemplate({f"xor{arity}": odd})


def suite_polymorphism(args) -> dict:
    bad = []
    for k, L in ((3, 4), (3, 5), (4, 5)):
        hit = csp.polymorphism_violation(csp.ksat_template(k), csp.ksat_scheme(k), L)
        if hit is not None:
            bad.append({"k": k, "L": L, "relation": hit[0], "image": list(hit[2])})
    # with L=4 each defined column has at most one dissenting row, so arity <= 3
    # relations always survive; 4-ary odd parity maps the unit vectors to 0000
    if csp.polymorphism_violation(parity_template(4), csp.ksat_scheme(3), 4) is None:
        bad.append({"template": "xor4", "error": "negative control passed"})
    return {"passed": not bad, "counterexamples": bad}


_SUITE_FUNCS = {
    "calc": suite_calc,
    "strategy": suite_strategy,
    "submartingale": suite_submartingale,
    "potential": suite_potential,
    "encoding": suite_encoding,
    "polymorphism": suite_polymorphism,
}


def cmd_verify(args, out) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    rep = {"suites": {name: _SUITE_FUNCS[name](args) for name in names}}
    rep["passed"] = all(s["passed"] for s in rep["suites"].values())
    _emit(rep, "json", out)
    return EXIT_OK if rep["passed"] else EXIT_VERIFY_FAILED


_COMMANDS = {"solve": cmd_solve, "cnf": cmd_cnf, "analyze": cmd_analyze, "verify": cmd_verify}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args, out)
    except UsageError as e:
        print(f"erelax: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RestartBudgetTooLarge as e:
        print(f"erelax: {e}; pass --restarts or raise --max-restarts", file=sys.stderr)
        return EXIT_USAGE
    except RelaxationInfeasible as e:
        print(f"erelax: {e}", file=sys.stderr)
        _emit({"status": "relaxation_infeasible"}, getattr(args, "format", "json"), out)
        return EXIT_INFEASIBLE
    except (DomainError, csp.CspError, json.JSONDecodeError) as e:
        print(f"erelax: input error: {e}", file=sys.stderr)
        return EXIT_DATAERR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
