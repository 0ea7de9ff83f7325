"""Potentials, traction and budgets for a few interval sets."""

from fractions import Fraction as F

from erelax.domain import measure, parse_interval_set
from erelax.potential import beta, budget_for, build_potentials, traction

SETS = [
    "0,1/3;2/3,1",
    "0,1/5;2/5,3/5;4/5,1",
    "0,1/10;1/2,1",
]


def main():
    n = 10
    for text in SETS:
        E = parse_interval_set(text)
        t = build_potentials(E)
        b, q = beta(E)
        tau = traction(t)
        print(text)
        print(f"  measure {measure(E)}  gamma {t.gamma}  tau {tau}")
        print(f"  beta {b} (>= 1/(2-meas) = {1 / (2 - measure(E))})  q {[str(v) for v in q]}")
        print(f"  step budget at n={n}: {budget_for(n, t.gamma, tau)}")
        print(f"  expected restarts ~ n(2-meas)^n = {float(n * (2 - measure(E)) ** n):.1f}")


if __name__ == "__main__":
    main()
