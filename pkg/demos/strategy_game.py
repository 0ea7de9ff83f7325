"""Compare the dual-LP step strategy with a cutting-plane solve on the same states."""

import random

from erelax.csp import choose_delta, ksat_to_lp, planted_ksat
from erelax.domain import parse_interval_set, shrink
from erelax.oracle import cutting_plane_strategy, vertex_submartingale_check
from erelax.walk import WalkContext, min_response, stream


def main():
    n = 10
    inst, _ = planted_ksat(n, 40, 3, seed=3)
    E = parse_interval_set("0,1/3;2/3,1")
    lp = ksat_to_lp(inst, 3, shrink(E, choose_delta(E, n)))
    ctx = WalkContext(lp)
    for r in range(3):
        ctx.run(stream(3, r))
    states = list(ctx.strategies())[:5]
    print(f"{len(ctx.strategies())} states visited, comparing {len(states)}")
    for sigma in states:
        dual = ctx.strategy(sigma)
        cp = cutting_plane_strategy(lp, sigma, ctx.tables)
        v1, _ = min_response(lp, ctx.tables, sigma, dual)
        v2, _ = min_response(lp, ctx.tables, sigma, cp.strategy)
        chk = vertex_submartingale_check(lp, sigma, dual.as_dict(), ctx.tables)
        print(f"sigma {''.join(map(str, sigma))}: dual min {v1}, cutting plane min {v2} "
              f"after {cp.iterations} cuts, 0-1 check {'ok' if chk.passed else 'FAILED'}")


if __name__ == "__main__":
    main()
