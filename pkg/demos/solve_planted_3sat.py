"""Solve a planted 3-SAT instance with the interval walk and round the witness."""

from erelax.csp import ksat_scheme, planted_ksat, solve_csp, verify_assignment


def main():
    n = 12
    inst, planted = planted_ksat(n, round(4.26 * n), 3, seed=7)
    print(f"instance: {n} variables, {len(inst.constraints)} clauses")
    out = solve_csp(inst, ksat_scheme(3), seed=1, restarts=50)
    print(f"shrink delta: {out.delta}")
    print(f"restarts used: {out.walk.restarts_used}, steps used: {out.walk.steps_used}")
    if not out.solved:
        print("no assignment found within the restart budget")
        return
    print("witness:", " ".join(str(v) for v in out.walk.witness))
    print("assignment:", "".join(map(str, out.assignment)))
    print("verified:", verify_assignment(inst, out.assignment))


if __name__ == "__main__":
    main()
