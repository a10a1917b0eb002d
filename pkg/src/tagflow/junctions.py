"""Per-node flux allocation.

Each junction step solves: maximize the total flux admitted from the
incoming arcs subject to per-arc demand caps, routing of the admitted
flux through the distribution matrix, and per-outgoing-arc supply caps.
Among multiple maximizers the right-of-way weights pick the point that
serves incoming arcs greedily in descending priority (waterfilling).

The degrees that dominate real networks (one-in, and all-ones merge
rows) are solved in closed form; anything else goes through an LP with
a lexicographic refinement pass for the priority selection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

__all__ = ["JunctionProblem", "JunctionFluxSolution", "solve", "brute_force_solve"]

# Slack when testing feasibility of grid points against supplies.
_FEAS_TOL = 1e-12
# Objective slack separating "near-optimal" ties in the brute-force search.
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class JunctionProblem:
    """Demands per incoming arc, supplies per outgoing arc, routing matrix.

    distribution[j, i] is the fraction of arc i's admitted flux sent to
    outgoing arc j.  priority orders incoming arcs when the maximizer is
    not unique; ties fall back to list position.
    """

    demands: np.ndarray
    supplies: np.ndarray
    distribution: np.ndarray
    priority: np.ndarray | None = None

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.demands, dtype=float))
        s = np.atleast_1d(np.asarray(self.supplies, dtype=float))
        a = np.atleast_2d(np.asarray(self.distribution, dtype=float))
        p = self.priority
        p = np.full(d.shape, 1.0 / d.size) if p is None else np.atleast_1d(np.asarray(p, dtype=float))
        object.__setattr__(self, "demands", d)
        object.__setattr__(self, "supplies", s)
        object.__setattr__(self, "distribution", a)
        object.__setattr__(self, "priority", p)
        if a.shape != (s.size, d.size):
            raise ValueError(
                f"distribution shape {a.shape} does not match "
                f"{s.size} outgoing x {d.size} incoming"
            )
        if p.shape != d.shape:
            raise ValueError("priority length does not match incoming arcs")
        for name, arr in (("demands", d), ("supplies", s), ("distribution", a)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            if np.any(arr < 0.0):
                raise ValueError(f"{name} must be non-negative")

    @property
    def n_in(self) -> int:
        return self.demands.size

    @property
    def n_out(self) -> int:
        return self.supplies.size


@dataclass(frozen=True)
class JunctionFluxSolution:
    gamma_in: np.ndarray
    gamma_out: np.ndarray

    @property
    def objective(self) -> float:
        return float(np.sum(self.gamma_in))


def _priority_order(p: JunctionProblem) -> list[int]:
    """Incoming-arc indices in descending priority, position breaking ties."""
    return sorted(range(p.n_in), key=lambda i: (-p.priority[i], i))


def _finish(p: JunctionProblem, gamma: np.ndarray) -> JunctionFluxSolution:
    gamma = np.clip(gamma, 0.0, p.demands)
    # LP paths work at solver tolerance; scale any hair of supply
    # violation out so gamma_out always respects the caps
    routed = p.distribution @ gamma
    over = routed > p.supplies
    if np.any(over):
        positive = routed[over] > 0.0
        if np.any(positive):
            gamma = gamma * np.min(p.supplies[over][positive] / routed[over][positive])
    return JunctionFluxSolution(gamma_in=gamma, gamma_out=p.distribution @ gamma)


def _max_single(p: JunctionProblem, loads: np.ndarray, i: int) -> float:
    """Largest admissible flux for incoming arc i given supply already used."""
    col = p.distribution[:, i]
    cap = p.demands[i]
    positive = col > 0.0
    if np.any(positive):
        cap = min(cap, np.min((p.supplies[positive] - loads[positive]) / col[positive]))
    return max(cap, 0.0)


def solve(p: JunctionProblem) -> JunctionFluxSolution:
    """Optimal junction allocation with priority tie-breaking.

    gamma_in maximizes total admitted flux over {0 <= gamma <= demands,
    distribution @ gamma <= supplies}; gamma_out is the routed image, so
    the node balance sum(gamma_in) == sum(gamma_out) holds exactly
    whenever the distribution columns each sum to one.
    """
    if p.n_in == 1:
        gamma = np.array([_max_single(p, np.zeros(p.n_out), 0)])
        return _finish(p, gamma)

    if p.n_out == 1 and np.all(p.distribution == 1.0):
        # pure merge: one shared supply, waterfill in priority order
        gamma = np.zeros(p.n_in)
        remaining = p.supplies[0]
        for i in _priority_order(p):
            gamma[i] = min(p.demands[i], max(remaining, 0.0))
            remaining -= gamma[i]
        return _finish(p, gamma)

    return _lp_solve(p)


_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def _lp_solve(p: JunctionProblem) -> JunctionFluxSolution:
    """LP for the total, then lexicographic maximization in priority order."""
    bounds = [(0.0, d) for d in p.demands]
    res = linprog(
        -np.ones(p.n_in),
        A_ub=p.distribution,
        b_ub=p.supplies,
        bounds=bounds,
        options=_LP_OPTIONS,
    )
    if not res.success:
        raise RuntimeError(f"junction LP failed: {res.message}")
    best_total = -res.fun

    slack = 1e-8 * max(1.0, best_total)
    total_row = -np.ones((1, p.n_in))  # total >= best_total - slack
    a_ub = np.vstack([p.distribution, total_row])
    b_ub = np.concatenate([p.supplies, [-(best_total - slack)]])
    gamma = np.zeros(p.n_in)
    for i in _priority_order(p):
        c = np.zeros(p.n_in)
        c[i] = -1.0
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, options=_LP_OPTIONS)
        if not res.success:
            raise RuntimeError(f"junction LP refinement failed: {res.message}")
        gamma = res.x
        # pin as a slightly relaxed lower bound; an exact pin can render
        # the next stage infeasible at solver precision
        bounds[i] = (max(0.0, gamma[i] - 1e-9), p.demands[i])
    return _finish(p, gamma)


def _axis_grid(d: float, step: float) -> np.ndarray:
    pts = np.arange(0.0, d + 0.5 * step, step)
    if pts.size == 0 or pts[-1] < d - 1e-15:
        pts = np.append(pts, d)
    return pts


def brute_force_solve(p: JunctionProblem, grid_step: float = 1e-3) -> JunctionFluxSolution:
    """Testing oracle: enumerate grid allocations, no optimization theory.

    All but the last incoming arc run over a uniform grid of [0, d_i]
    (demand endpoint included); for each combination the last arc gets
    its largest admissible flux outright, which by monotonicity of the
    objective dominates every grid choice on that axis.  Near-optimal
    ties are resolved priority-lexicographically.  Limited to three
    incoming arcs; the enumeration is exponential.
    """
    if p.n_in > 3:
        raise ValueError("brute force supports at most 3 incoming arcs")
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")

    last = p.n_in - 1
    if p.n_in == 1:
        heads = np.zeros((1, 0))
    else:
        axes = [_axis_grid(d, grid_step) for d in p.demands[:last]]
        mesh = np.meshgrid(*axes, indexing="ij")
        heads = np.stack([m.ravel() for m in mesh], axis=1)

    a_head = p.distribution[:, :last]
    col = p.distribution[:, last]
    loads = heads @ a_head.T  # (n_candidates, n_out)

    feasible = np.ones(len(heads), dtype=bool)
    zero_rows = col == 0.0
    if np.any(zero_rows):
        feasible &= np.all(loads[:, zero_rows] <= p.supplies[zero_rows] + _FEAS_TOL, axis=1)

    tails = np.full(len(heads), p.demands[last])
    pos_rows = np.nonzero(col > 0.0)[0]
    for j in pos_rows:
        tails = np.minimum(tails, (p.supplies[j] - loads[:, j]) / col[j])
    feasible &= tails >= -_FEAS_TOL
    tails = np.maximum(tails, 0.0)

    if not np.any(feasible):
        return _finish(p, np.zeros(p.n_in))

    totals = heads.sum(axis=1) + tails
    totals[~feasible] = -np.inf
    best = totals.max()
    ties = np.nonzero(totals >= best - _TIE_TOL)[0]

    order = _priority_order(p)
    candidates = np.column_stack([heads, tails])[ties]
    ranked = max(range(len(ties)), key=lambda k: tuple(candidates[k, order]))
    return _finish(p, candidates[ranked])
