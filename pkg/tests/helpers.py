"""Shared generators and oracles for the test suite."""

import numpy as np

from tagflow.flux import FluxModel
from tagflow.junctions import JunctionProblem
from tagflow.network import Arc, BoundaryCondition, Junction, Network
from tagflow.simulate import Simulator


def single_arc_network(model: FluxModel, n_cells: int, rho_left: float) -> Network:
    """One arc fed at rho_left with free outflow; used for wave tests."""
    return Network(
        model=model,
        arcs=[Arc("A", 0.0, 1.0, n_cells, "generic")],
        junctions=[],
        boundary_conditions=[BoundaryCondition("A", rho_left)],
    )


def riemann_l1_error(
    model: FluxModel,
    left: float,
    right: float,
    x0: float,
    n_cells: int,
    t_final: float,
) -> float:
    """March two-state initial data and compare against the exact profile.

    Initial data are exact cell averages of the step; the comparison
    samples the exact solution at cell centres over the whole arc.
    """
    sim = Simulator(single_arc_network(model, n_cells, left))
    state = sim.init_state()
    dx = 1.0 / n_cells
    edges = np.linspace(0.0, 1.0, n_cells + 1)
    frac_right = np.clip((edges[1:] - x0) / dx, 0.0, 1.0)
    state.rho[:] = left * (1.0 - frac_right) + right * frac_right
    dt = sim.stable_dt(0.5)
    while state.time < t_final - 1e-12:
        state = sim.step(state, min(dt, t_final - state.time))
    x = sim.cell_centers("A")
    exact = model.riemann_eval(left, right, (x - x0) / t_final)
    return float(np.sum(np.abs(state.rho - exact)) * dx)


def random_junction_problem(rng: np.random.Generator) -> JunctionProblem:
    """Random problem with 1..3 incoming and outgoing arcs.

    Distribution columns are stochastic (sum to one) with occasional
    zero entries so constraint elimination gets exercised.
    """
    n_in = int(rng.integers(1, 4))
    n_out = int(rng.integers(1, 4))
    demands = rng.uniform(0.0, 0.25, n_in)
    supplies = rng.uniform(0.0, 0.3, n_out)
    cols = []
    for _ in range(n_in):
        col = rng.uniform(0.1, 1.0, n_out)
        if n_out > 1 and rng.random() < 0.3:
            col[rng.integers(0, n_out)] = 0.0
        cols.append(col / col.sum())
    priority = rng.uniform(0.0, 1.0, n_in)
    priority /= priority.sum()
    return JunctionProblem(
        demands=demands,
        supplies=supplies,
        distribution=np.stack(cols, axis=1),
        priority=priority,
    )


def random_network(rng: np.random.Generator, model: FluxModel | None = None) -> Network:
    """Small random layered network that passes validation.

    Sources feed the first junction layer, consecutive layers are wired
    so every junction keeps at least one incoming and one outgoing arc,
    and the last layer drains into sink arcs.  All junctions are static.
    """
    model = model or FluxModel()
    # single root layer keeps the graph connected by construction
    layers = [1] + [int(rng.integers(1, 3)) for _ in range(int(rng.integers(0, 3)))]
    arcs: list[Arc] = []
    junctions: list[Junction] = []
    bcs: list[BoundaryCondition] = []
    incoming: dict[str, list[str]] = {}
    outgoing: dict[str, list[str]] = {}

    def add_arc(kind: str) -> str:
        arc_id = f"A{len(arcs)}"
        arcs.append(
            Arc(id=arc_id, a=0.0, b=1.0, n_cells=int(rng.integers(3, 9)), kind=kind)
        )
        return arc_id

    layer_junctions: list[list[str]] = []
    for li, count in enumerate(layers):
        ids = [f"J{li}_{k}" for k in range(count)]
        layer_junctions.append(ids)
        for jid in ids:
            incoming[jid] = []
            outgoing[jid] = []

    for jid in layer_junctions[0]:
        for _ in range(int(rng.integers(1, 3))):
            arc_id = add_arc("external_in")
            incoming[jid].append(arc_id)
            bcs.append(
                BoundaryCondition(
                    arc_id=arc_id,
                    rho_bar=float(rng.uniform(0.0, model.sigma)),
                )
            )

    for li in range(len(layers) - 1):
        nxt = layer_junctions[li + 1]
        for jid in layer_junctions[li]:
            targets = {nxt[int(rng.integers(0, len(nxt)))] for _ in range(2)}
            for tgt in targets:
                arc_id = add_arc("generic")
                outgoing[jid].append(arc_id)
                incoming[tgt].append(arc_id)
        # make sure nobody in the next layer starves
        for tgt in nxt:
            if not incoming[tgt]:
                src = layer_junctions[li][int(rng.integers(0, len(layer_junctions[li])))]
                arc_id = add_arc("generic")
                outgoing[src].append(arc_id)
                incoming[tgt].append(arc_id)

    for jid in layer_junctions[-1]:
        for _ in range(int(rng.integers(1, 3))):
            arc_id = add_arc("external_out")
            outgoing[jid].append(arc_id)

    for ids in layer_junctions:
        for jid in ids:
            n_in, n_out = len(incoming[jid]), len(outgoing[jid])
            cols = []
            for _ in range(n_in):
                col = rng.uniform(0.1, 1.0, n_out)
                cols.append(col / col.sum())
            priority = rng.uniform(0.1, 1.0, n_in)
            junctions.append(
                Junction(
                    id=jid,
                    incoming=incoming[jid],
                    outgoing=outgoing[jid],
                    distribution=np.stack(cols, axis=1),
                    priority=priority / priority.sum(),
                )
            )

    return Network(model=model, arcs=arcs, junctions=junctions, boundary_conditions=bcs)
