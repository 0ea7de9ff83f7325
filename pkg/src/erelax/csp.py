"""Boolean CSP frontend: encodings, threshold rounding and verification."""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .domain import UNIT, IntervalSet, LinearProgram, as_rational, locate, parse_interval_set, shrink
from .walk import WalkOutcome, solve

__all__ = [
    "CspError",
    "MalformedHeader",
    "LiteralOutOfRange",
    "UnterminatedClause",
    "ClauseTooWide",
    "UnknownRelation",
    "CoordinateInGap",
    "EndpointIntegral",
    "RoundingFailed",
    "CspTemplate",
    "Constraint",
    "CspInstance",
    "ThresholdScheme",
    "or_relation",
    "ksat_template",
    "ksat_scheme",
    "parse_dimacs",
    "format_dimacs",
    "parse_template",
    "parse_instance",
    "parse_scheme",
    "ksat_to_lp",
    "basic_lp",
    "round_point",
    "verify_assignment",
    "choose_delta",
    "CspOutcome",
    "solve_csp",
    "polymorphism_violation",
    "partial_polymorphism_check",
    "planted_ksat",
    "random_ksat",
    "planted_instance",
]


class CspError(ValueError):
    pass


class MalformedHeader(CspError):
    pass


class LiteralOutOfRange(CspError):
    pass


class UnterminatedClause(CspError):
    pass


class ClauseTooWide(CspError):
    pass


class UnknownRelation(CspError):
    pass


class CoordinateInGap(CspError):
    pass


class EndpointIntegral(CspError):
    pass


class RoundingFailed(RuntimeError):
    """The rounded point violates the instance: the scheme is not a polymorphism family."""


Tuple01 = tuple[int, ...]


@dataclass(frozen=True)
class CspTemplate:
    relations: dict[str, frozenset[Tuple01]]

    def __post_init__(self):
        rels = {}
        for name, tuples in self.relations.items():
            ts = frozenset(tuple(int(b) for b in t) for t in tuples)
            if not ts:
                raise CspError(f"relation {name!r} is empty")
            arities = {len(t) for t in ts}
            if len(arities) != 1:
                raise CspError(f"relation {name!r} mixes arities {sorted(arities)}")
            if any(b not in (0, 1) for t in ts for b in t):
                raise CspError(f"relation {name!r} is not Boolean")
            rels[name] = ts
        object.__setattr__(self, "relations", rels)

    def arity(self, name: str) -> int:
        return len(next(iter(self.relations[name])))

    def __hash__(self):
        return hash(tuple(sorted((k, tuple(sorted(v))) for k, v in self.relations.items())))

    def merged(self, other: "CspTemplate") -> "CspTemplate":
        return CspTemplate({**self.relations, **other.relations})


@dataclass(frozen=True)
class Constraint:
    relation: str
    vars: tuple[int, ...]
    negated: tuple[bool, ...] = ()

    def __post_init__(self):
        neg = self.negated or (False,) * len(self.vars)
        if len(neg) != len(self.vars):
            raise CspError("negation mask length differs from scope")
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "negated", tuple(bool(b) for b in neg))

    def literal_tuple(self, a: Sequence[int]) -> Tuple01:
        return tuple(int(a[v]) ^ int(s) for v, s in zip(self.vars, self.negated))


@dataclass(frozen=True)
class CspInstance:
    """``n`` Boolean variables (0-based) and constraints over ``template``."""

    n: int
    constraints: tuple[Constraint, ...]
    template: CspTemplate = field(default_factory=lambda: CspTemplate({}))

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            if any(not 0 <= v < self.n for v in c.vars):
                raise CspError(f"scope {c.vars} out of range for n={self.n}")
            rel = self.template.relations.get(c.relation)
            if rel is None:
                raise UnknownRelation(c.relation)
            if self.template.arity(c.relation) != len(c.vars):
                raise CspError(f"scope length {len(c.vars)} != arity of {c.relation!r}")


@dataclass(frozen=True)
class ThresholdScheme:
    """An interval set with a 0-1 label per interval (first 0, last 1)."""

    E: IntervalSet
    eta: tuple[int, ...]

    def __post_init__(self):
        eta = tuple(int(b) for b in self.eta)
        if len(eta) != self.E.k:
            raise CspError(f"eta has {len(eta)} labels for {self.E.k} intervals")
        if eta[0] != 0 or eta[-1] != 1:
            raise CspError("eta must map the interval of 0 to 0 and that of 1 to 1")
        object.__setattr__(self, "eta", eta)

    def label(self, v) -> int | None:
        i = locate(self.E, v)
        return None if i is None else self.eta[i]


def or_relation(arity: int) -> frozenset[Tuple01]:
    return frozenset(t for t in itertools.product((0, 1), repeat=arity) if any(t))


def ksat_template(k: int) -> CspTemplate:
    """OR relations of every arity ``1..k`` (negations live on literals)."""
    return CspTemplate({f"or{a}": or_relation(a) for a in range(1, k + 1)})


def ksat_scheme(k: int) -> ThresholdScheme:
    """``E = [0, 1/k] ∪ [1 - 1/k, 1]`` with ``eta = (0, 1)``."""
    if k < 3:
        raise CspError("the k-SAT scheme needs k >= 3")
    w = Fraction(1, k)
    return ThresholdScheme(IntervalSet.of((0, w), (1 - w, 1)), (0, 1))


def _clause(lits: list[int], template: dict) -> Constraint:
    a = len(lits)
    if a == 0:
        raise CspError("empty clause: the instance is trivially unsatisfiable")
    name = f"or{a}"
    if name not in template:
        template[name] = or_relation(a)
    return Constraint(name, tuple(abs(l) - 1 for l in lits), tuple(l < 0 for l in lits))


def parse_dimacs(text: str) -> CspInstance:
    """DIMACS CNF into a CSP instance with one OR constraint per clause."""
    n = m = None
    clauses: list[list[int]] = []
    cur: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if n is not None or len(parts) != 4 or parts[1] != "cnf":
                raise MalformedHeader(f"line {lineno}: bad header {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise MalformedHeader(f"line {lineno}: bad header {line!r}") from None
            if n < 0 or m < 0:
                raise MalformedHeader(f"line {lineno}: negative counts")
            continue
        if n is None:
            raise MalformedHeader(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise MalformedHeader(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(cur)
                cur = []
            elif abs(lit) > n:
                raise LiteralOutOfRange(f"line {lineno}: literal {lit} with n={n}")
            else:
                cur.append(lit)
    if n is None:
        raise MalformedHeader("missing 'p cnf' header")
    if cur:
        raise UnterminatedClause("last clause is not terminated by 0")
    if len(clauses) != m:
        raise MalformedHeader(f"header promises {m} clauses, found {len(clauses)}")
    rels: dict = {}
    cons = tuple(_clause(c, rels) for c in clauses)
    return CspInstance(n, cons, CspTemplate(rels))


def format_dimacs(inst: CspInstance) -> str:
    lines = [f"p cnf {inst.n} {len(inst.constraints)}"]
    for c in inst.constraints:
        lits = [-(v + 1) if s else v + 1 for v, s in zip(c.vars, c.negated)]
        lines.append(" ".join(map(str, lits + [0])))
    return "\n".join(lines) + "\n"


def parse_template(text: str) -> CspTemplate:
    """JSON ``{"relations": {"name": ["010", ...]}}``."""
    data = json.loads(text)
    rels = data.get("relations", data)
    return CspTemplate({name: frozenset(tuple(int(ch) for ch in s) for s in tuples) for name, tuples in rels.items()})


def parse_instance(text: str, template: CspTemplate) -> CspInstance:
    """JSON ``{"n": 3, "constraints": [{"relation", "vars" (1-based), "negated"?}]}``."""
    data = json.loads(text)
    cons = []
    for c in data["constraints"]:
        neg = c.get("negated", "")
        if isinstance(neg, str):
            neg = tuple(ch == "1" for ch in neg)
        cons.append(Constraint(c["relation"], tuple(v - 1 for v in c["vars"]), tuple(neg)))
    return CspInstance(int(data["n"]), tuple(cons), template)


def parse_scheme(text: str) -> ThresholdScheme:
    """Two whitespace-separated fields: an interval set and an eta string."""
    parts = text.split()
    if len(parts) != 2:
        raise CspError("scheme needs '<intervals> <eta bits>'")
    return ThresholdScheme(parse_interval_set(parts[0]), tuple(int(ch) for ch in parts[1]))


def ksat_to_lp(inst: CspInstance, k: int, E: IntervalSet | None = None) -> LinearProgram:
    """One row per clause: ``sum of literal values >= 1`` over ``[0,1]^n``."""
    rows = []
    for c in inst.constraints:
        if inst.template.relations[c.relation] != or_relation(len(c.vars)):
            raise UnknownRelation(f"{c.relation!r} is not an OR clause")
        if len(c.vars) > k:
            raise ClauseTooWide(f"clause of width {len(c.vars)} exceeds k={k}")
        coeffs: dict[int, Fraction] = {}
        negs = 0
        for v, s in zip(c.vars, c.negated):
            coeffs[v] = coeffs.get(v, Fraction(0)) + (1 if s else -1)
            negs += s
        rows.append((coeffs, Fraction(negs - 1)))
    return LinearProgram(inst.n, tuple(rows), E or UNIT)


def basic_lp(inst: CspInstance, template: CspTemplate | None = None, E: IntervalSet | None = None) -> LinearProgram:
    """Tuple-weight relaxation with marginal consistency.

    Variables ``0..n-1`` are the CSP variables (interval set ``E``); after
    them each constraint gets one weight per tuple of its relation (sorted),
    on the full interval ``[0, 1]``.
    """
    template = template or inst.template
    rows = []
    sets = [E or UNIT] * inst.n
    nxt = inst.n
    for c in inst.constraints:
        rel = template.relations.get(c.relation)
        if rel is None:
            raise UnknownRelation(c.relation)
        tuples = sorted(rel)
        w = list(range(nxt, nxt + len(tuples)))
        nxt += len(tuples)
        sets += [UNIT] * len(tuples)
        rows.append(({j: 1 for j in w}, Fraction(1)))
        rows.append(({j: -1 for j in w}, Fraction(-1)))
        for pos, (v, s) in enumerate(zip(c.vars, c.negated)):
            # literal - sum_z w_z z_pos == 0, literal = x_v or 1 - x_v
            up: dict[int, Fraction] = {j: -Fraction(z[pos]) for j, z in zip(w, tuples) if z[pos]}
            up[v] = up.get(v, Fraction(0)) + (-1 if s else 1)
            rhs = Fraction(-1 if s else 0)
            rows.append((up, rhs))
            rows.append(({j: -a for j, a in up.items()}, -rhs))
    return LinearProgram(nxt, tuple(rows), tuple(sets))


def round_point(y: Sequence, scheme: ThresholdScheme, n: int | None = None) -> tuple[int, ...]:
    """``eta`` of the interval holding each of the first ``n`` coordinates."""
    n = len(y) if n is None else n
    out = []
    for i in range(n):
        lab = scheme.label(as_rational(y[i]))
        if lab is None:
            raise CoordinateInGap(f"coordinate {i} = {y[i]} lies in a gap of {scheme.E}")
        out.append(lab)
    return tuple(out)


def verify_assignment(inst: CspInstance, a: Sequence[int]) -> bool:
    if len(a) != inst.n:
        raise CspError(f"assignment of length {len(a)} for n={inst.n}")
    rels = inst.template.relations
    return all(c.literal_tuple(a) in rels[c.relation] for c in inst.constraints)


def choose_delta(E: IntervalSet, n: int) -> Fraction:
    """``min(1/(4 k n), min length / 4, min gap / 4)``."""
    k = E.k
    if k == 1:
        return Fraction(0)
    cands = [Fraction(1, 4 * k * max(n, 1))]
    cands.append(min(E.lengths()) / 4)
    cands.append(min(E.gaps()) / 4)
    return min(cands)


@dataclass
class CspOutcome:
    assignment: tuple[int, ...] | None
    walk: WalkOutcome
    delta: Fraction
    lp: LinearProgram

    @property
    def solved(self) -> bool:
        return self.assignment is not None


def solve_csp(
    inst: CspInstance,
    scheme: ThresholdScheme,
    encoder: str = "direct",
    seed: int = 0,
    restarts: int | None = None,
    k: int | None = None,
    jobs: int = 1,
    cap: int | None = None,
    T: int | None = None,
    record: bool = False,
) -> CspOutcome:
    """Encode, walk over the shrunk set, round and verify.

    Only verified assignments are returned; an exhausted walk yields
    ``assignment=None``.
    """
    delta = choose_delta(scheme.E, inst.n)
    Ed = shrink(scheme.E, delta)
    if encoder == "direct":
        width = max((len(c.vars) for c in inst.constraints), default=1)
        lp = ksat_to_lp(inst, k or width, Ed)
    elif encoder == "basic":
        lp = basic_lp(inst, E=Ed)
    else:
        raise ValueError(f"unknown encoder {encoder!r}")
    kwargs = {} if cap is None else {"cap": cap}
    out = solve(lp, restarts=restarts, seed=seed, T=T, jobs=jobs, record=record, **kwargs)
    if not out.solved:
        return CspOutcome(None, out, delta, lp)
    a = round_point(out.witness, scheme, inst.n)
    if not verify_assignment(inst, a):
        raise RoundingFailed("rounded assignment violates the instance")
    return CspOutcome(a, out, delta, lp)


def _endpoint_check(E: IntervalSet, L: int):
    for c, d in E.intervals:
        if c > 0 and (L * c).denominator == 1:
            raise EndpointIntegral(f"L*c = {L * c} is integral")
        if d < 1 and (L * d).denominator == 1:
            raise EndpointIntegral(f"L*d = {L * d} is integral")


def polymorphism_violation(template: CspTemplate, scheme: ThresholdScheme, L: int):
    """A multiset of ``L`` tuples whose defined threshold image leaves its relation.

    The image depends only on column sums, so multisets suffice.  Returns
    ``(relation, tuples, image)`` or None.
    """
    if L < 1:
        raise ValueError("L must be positive")
    _endpoint_check(scheme.E, L)
    labels = [scheme.label(Fraction(w, L)) for w in range(L + 1)]
    for name in sorted(template.relations):
        rel = template.relations[name]
        tuples = sorted(rel)
        ar = len(tuples[0])
        for combo in itertools.combinations_with_replacement(tuples, L):
            image = []
            for pos in range(ar):
                lab = labels[sum(z[pos] for z in combo)]
                if lab is None:
                    break
                image.append(lab)
            else:
                if tuple(image) not in rel:
                    return name, combo, tuple(image)
    return None


def partial_polymorphism_check(template: CspTemplate, scheme: ThresholdScheme, L: int) -> bool:
    """True iff the ``(E, eta)`` threshold function on ``L`` bits preserves every relation."""
    return polymorphism_violation(template, scheme, L) is None


def planted_instance(n: int, m: int, k: int, rng: random.Random, planted=None):
    """Random ``k``-CNF on distinct variables satisfied by ``planted``."""
    planted = planted or tuple(rng.randrange(2) for _ in range(n))
    clauses = []
    while len(clauses) < m:
        vs = rng.sample(range(n), k)
        neg = tuple(bool(rng.randrange(2)) for _ in vs)
        if any(planted[v] ^ s for v, s in zip(vs, neg)):
            clauses.append((tuple(vs), neg))
    return clauses, planted


def planted_ksat(n: int, m: int, k: int = 3, seed: int = 0) -> tuple[CspInstance, tuple[int, ...]]:
    rng = random.Random(seed)
    clauses, planted = planted_instance(n, m, k, rng)
    tmpl = CspTemplate({f"or{k}": or_relation(k)})
    cons = tuple(Constraint(f"or{k}", vs, neg) for vs, neg in clauses)
    return CspInstance(n, cons, tmpl), planted


def random_ksat(n: int, m: int, k: int = 3, seed: int = 0) -> CspInstance:
    rng = random.Random(seed)
    tmpl = CspTemplate({f"or{k}": or_relation(k)})
    cons = []
    for _ in range(m):
        vs = tuple(rng.sample(range(n), k))
        cons.append(Constraint(f"or{k}", vs, tuple(bool(rng.randrange(2)) for _ in vs)))
    return CspInstance(n, tuple(cons), tmpl)
