#! /usr/bin/env python3
"""Checking the min-cut solver against exhaustive enumeration.

The labeling program is small enough on a 4x4 grid to try every assignment of
the free pixels, which gives an independent reference optimum.
"""

import dataclasses

import numpy as np

from maskfuse.energy import FREE, EnergyProblem, objective_value, random_problem, solve_bruteforce, solve_graphcut

# =============================================================================
# The two-pixel instance can be scored by hand: P = (0.8, 0.3), one edge of
# weight 0.5, lambda 2. Labels (1, 0) agree with both pixels but cut the edge.

pb = EnergyProblem(
    prob=np.array([[0.8, 0.3]]),
    right_weight=np.array([[0.5]]),
    down_weight=np.zeros((0, 2)),
    fixed=np.full((1, 2), FREE, np.int8),
    lambda_=2.0,
)
print("labels (1,0):", objective_value(pb, np.array([[1, 0]])))
best = solve_graphcut(pb)
print("optimum     :", best.labels.ravel(), best.objective)

# =============================================================================
# Random instances: uniform P, weights from a random image, some pixels pinned.

rng = np.random.default_rng(7)
worst = 0.0
for _ in range(200):
    problem = random_problem(4, 4, rng)
    gap = abs(solve_graphcut(problem).objective - solve_bruteforce(problem).objective)
    worst = max(worst, gap)
print(f"200 random 4x4 instances, largest objective gap {worst:.2e}")
assert worst <= 1e-9

# =============================================================================
# Raising lambda can only lower the weighted boundary term of the optimum.
# Here every pixel is free and neighbours are equally similar.

rng = np.random.default_rng(1)
problem = EnergyProblem(
    prob=rng.random((8, 8)),
    right_weight=np.full((8, 7), 0.8),
    down_weight=np.full((7, 8), 0.8),
    fixed=np.full((8, 8), FREE, np.int8),
    lambda_=0.0,
)
for lam in (0.0, 0.1, 0.2, 0.4, 0.8):
    r = solve_graphcut(dataclasses.replace(problem, lambda_=lam))
    print(f"lambda {lam:>3}: o_scf {r.o_scf:.4f}  objective {r.objective:.4f}")
