"""How a junction hands out flux when not everyone fits.

Each step, every junction maximizes the total flux it admits, subject
to what incoming arcs offer (demand), what outgoing arcs can take
(supply), and the routing fractions.  When several allocations achieve
the same total, right-of-way weights decide who is served first.
The brute-force grid search is the same oracle the test suite uses.
"""

import numpy as np

from tagflow import JunctionProblem, brute_force_solve, solve

print("1) Simple pass-through: one in, one out")
p = JunctionProblem(demands=[0.16], supplies=[0.25], distribution=[[1.0]])
print(f"   demand 0.16 vs supply 0.25 -> granted {solve(p).gamma_in[0]:.3f}")
print()

print("2) Split with one congested branch")
p = JunctionProblem(
    demands=[0.2], supplies=[0.25, 0.04], distribution=[[0.5], [0.5]]
)
sol = solve(p)
print("   half the flux goes to each branch, but branch 2 only accepts 0.04:")
print(f"   granted {sol.gamma_in[0]:.3f}, routed {np.round(sol.gamma_out, 3)}")
print()

print("3) Merge under scarcity: right-of-way decides")
for priority, label in [([1.0, 0.0], "arc 1 first"), ([0.0, 1.0], "arc 2 first")]:
    p = JunctionProblem(
        demands=[0.2, 0.2], supplies=[0.25], distribution=[[1.0, 1.0]], priority=priority
    )
    sol = solve(p)
    print(f"   {label}: granted {np.round(sol.gamma_in, 3)} (total {sol.objective:.3f})")
print()

print("4) A 3-in/2-out allocation against the brute-force oracle")
rng = np.random.default_rng(5)
cols = [rng.uniform(0.1, 1.0, 2) for _ in range(3)]
p = JunctionProblem(
    demands=rng.uniform(0.05, 0.25, 3),
    supplies=rng.uniform(0.05, 0.3, 2),
    distribution=np.stack([c / c.sum() for c in cols], axis=1),
    priority=[0.5, 0.3, 0.2],
)
sol = solve(p)
oracle = brute_force_solve(p, grid_step=1e-3)
print(f"   solver objective {sol.objective:.6f}, oracle {oracle.objective:.6f}")
print(f"   conservation gap {abs(sol.gamma_in.sum() - sol.gamma_out.sum()):.2e}")
