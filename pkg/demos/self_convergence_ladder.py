#!/usr/bin/env python3
"""Judging a run without an exact solution: self-convergence ladders.

When no closed-form solution exists, successively refined runs are compared
against the finest one on a shared probe grid.  A healthy discretization
shows the distance to the finest run dropping by an order of magnitude or
more per refinement.  By default this script demonstrates the idea on a
fast 2D Poisson ladder; pass "full" to run the two shipped production
ladders (a plate with four holes and a variable-coefficient problem on a
disk -- several minutes of dense solves).
"""

import sys

from rfm.assembly import assemble
from rfm.evaluation import evaluation_grid, self_convergence
from rfm.experiments import build_run, load_suite
from rfm.solver import solve_system


def solve(config):
    problem, model, colloc = build_run(config)
    system = assemble(problem, model, colloc)
    if config.rescale_on:
        system = system.rescale(config.rescale_scale)
    coef, _ = solve_system(system, config.rank_tol)
    return problem, model, coef


def ladder(suite, probe_counts, derivatives=False):
    print(f"\n{suite}: errors of each run against the finest run")
    solved = [solve(cfg) for cfg in load_suite(suite)]
    pts = evaluation_grid(solved[-1][0].domain, probe_counts)
    table = self_convergence(
        [(m, c) for _, m, c in solved[:-1]],
        (solved[-1][1], solved[-1][2]),
        pts,
        derivatives=derivatives,
    )
    header = sorted(table[0])
    print("  ".join(f"{k:>10}" for k in header))
    for row in table:
        print("  ".join(f"{row[k]:>10.3e}" for k in header))


def main():
    if "full" in sys.argv[1:]:
        ladder("holed-plate", (81, 81))
        ladder("homogenization-desk", (101, 101), derivatives=True)
    else:
        ladder("poisson-pou", (81, 81))


if __name__ == "__main__":
    main()
