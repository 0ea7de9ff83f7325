"""Threshold functions of the 3-SAT scheme against a few Boolean relations."""

from erelax.csp import CspTemplate, ksat_scheme, polymorphism_violation

RELATIONS = {
    "or3": {t for t in [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)] if any(t)},
    "xor2": {(0, 1), (1, 0)},
    "parity4": {t for t in [(a, b, c, d) for a in (0, 1) for b in (0, 1) for c in (0, 1) for d in (0, 1)]
                if sum(t) % 2 == 1},
}


def main():
    scheme = ksat_scheme(3)
    for name, rel in RELATIONS.items():
        template = CspTemplate({name: frozenset(rel)})
        for L in (4, 5):
            bad = polymorphism_violation(template, scheme, L)
            if bad is None:
                print(f"{name:8s} L={L}: preserved")
            else:
                _, tuples, image = bad
                print(f"{name:8s} L={L}: violated by {tuples} -> {image}")


if __name__ == "__main__":
    main()
