"""Time-stepping engine for tag flow on a network.

First-order finite-volume updates per arc, demand/supply coupling at
junctions, reservoir inflows, absorbing outflows, destination-tracer
transport, and steady-state detection.

Every step has two phases.  Phase 1 is read-only: one flux per cell
interface is computed, using the interface rule inside arcs, the
junction allocation at arc ends, min(reservoir demand, first-cell
supply) at sources and the last cell's demand at sinks.  Phase 2 applies
the conservative update to every cell, transports tracer mass with the
donor-cell value of each flux, and refreshes the dynamic exit splits
from the composition that actually arrived.  Nothing in phase 2 feeds
back into phase 1 of the same step, so cell updates are order-free.

The tracer phi is the fraction of a cell's mass bound for the marked
exit class.  At a dynamic exit junction the bulk split follows the
current coefficients while the tracer mass is sorted: the class that
departs here leaves first, any overflow stays on the circle.  Junctions
with several incoming arcs mix tracer in proportion to granted flux.
Cells lighter than EPS_MASS hold the neutral placeholder 0.5 and never
contribute to mixtures.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass

import numpy as np

from . import junctions as _junctions
from .flux import FluxModel
from .network import Junction, Network

__all__ = [
    "EPS_FLUX",
    "EPS_MASS",
    "TRACER_PLACEHOLDER",
    "SimulationError",
    "SimConfig",
    "SimState",
    "FluxSnapshot",
    "RunResult",
    "Simulator",
    "detect_equilibrium",
    "dynamic_exit_coefficients",
    "init_state",
    "stable_dt",
    "step",
    "run",
]

# Cell mass below which the tracer is considered undefined.
EPS_MASS = 1e-12
# Arriving flux below which dynamic coefficients are left unchanged.
EPS_FLUX = 1e-12
TRACER_PLACEHOLDER = 0.5

_DENSITY_SLACK = 1e-12
_TRACER_SLACK = 1e-9


class SimulationError(RuntimeError):
    """An invariant broke beyond numerical tolerance; state is suspect."""


@dataclass
class SimConfig:
    """Run parameters.

    coefficient_mode "network" honours each junction's own mode;
    "static" freezes every split at its initial value.  A sample is
    recorded whenever the clock passes a multiple of sample_interval.
    """

    t_end: float = 100.0
    cfl_number: float = 0.5
    sample_interval: float = 0.25
    equilibrium_window: float = 10.0
    equilibrium_tol: float = 1e-3
    coefficient_mode: str = "network"
    record_profiles: bool = True

    def __post_init__(self):
        if not 0.0 < self.cfl_number <= 1.0:
            raise ValueError("cfl_number must lie in (0, 1]")
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if self.sample_interval <= 0.0:
            raise ValueError("sample_interval must be positive")
        if self.equilibrium_window <= 0.0 or self.equilibrium_tol <= 0.0:
            raise ValueError("equilibrium window and tolerance must be positive")
        if self.coefficient_mode not in ("network", "static"):
            raise ValueError("coefficient_mode must be 'network' or 'static'")


@dataclass
class SimState:
    """Mutable per-cell state: clock, densities, tracer, current splits.

    rho and phi are flat arrays over all cells in arc order (phi is None
    on networks without dynamic junctions); coefficients maps junction
    id to its current distribution matrix.
    """

    time: float
    step_count: int
    rho: np.ndarray
    phi: np.ndarray | None
    coefficients: dict[str, np.ndarray]

    def copy(self) -> "SimState":
        return SimState(
            time=self.time,
            step_count=self.step_count,
            rho=self.rho.copy(),
            phi=None if self.phi is None else self.phi.copy(),
            coefficients={k: v.copy() for k, v in self.coefficients.items()},
        )


@dataclass
class FluxSnapshot:
    """Phase-1 output: one bulk (and tracer) flux per cell interface."""

    fluxes: np.ndarray
    tracer_fluxes: np.ndarray | None
    inflow_total: float
    outflow_total: float


@dataclass
class RunResult:
    """Sampled trajectory of a run plus summary figures."""

    arc_ids: list[str]
    cells_per_arc: dict[str, int]
    junction_arcs: dict[str, tuple[list[str], list[str]]]  # id -> (incoming, outgoing)
    times: np.ndarray
    arc_fluxes: np.ndarray  # (n_samples, n_arcs), downstream interface
    coefficients: dict[str, np.ndarray]  # junction -> (n_samples, n_out, n_in)
    density: np.ndarray | None  # (n_samples, total_cells)
    tracer: np.ndarray | None
    first_arrival_coefficients: dict[str, tuple[float, np.ndarray]]
    equilibrium_time: float | None
    summary: dict

    def flux_of(self, arc_id: str) -> np.ndarray:
        return self.arc_fluxes[:, self.arc_ids.index(arc_id)]


def dynamic_exit_coefficients(
    junction: Junction,
    arriving_flux: float,
    arriving_tracer: float,
    current: np.ndarray,
) -> np.ndarray:
    """Split column for a dynamic exit junction given what arrives.

    The share sent to the external exit is the arriving fraction of the
    class that departs there; the rest keeps circulating.  Arrivals
    below EPS_FLUX carry no information, so the current column persists.
    """
    if junction.coefficient_mode != "dynamic" or junction.exit_arc is None:
        raise ValueError(f"junction {junction.id} is not a dynamic exit junction")
    if len(junction.incoming) != 1 or len(junction.outgoing) != 2:
        raise ValueError(f"junction {junction.id} must have 1 incoming and 2 outgoing arcs")
    if arriving_flux < EPS_FLUX:
        return np.asarray(current, dtype=float).reshape(2).copy()
    phi = min(max(float(arriving_tracer), 0.0), 1.0)
    to_exit = phi if junction.exit_tracer == 1.0 else 1.0 - phi
    exit_idx = junction.outgoing.index(junction.exit_arc)
    column = np.empty(2)
    column[exit_idx] = to_exit
    column[1 - exit_idx] = 1.0 - to_exit
    return column


def detect_equilibrium(
    times: np.ndarray,
    fluxes: np.ndarray,
    window: float,
    tol: float,
) -> float | None:
    """Earliest sample time after which every arc flux stays settled.

    Settled means within relative tol of that arc's mean over the final
    window of the series (an absolute floor of 1e-12 guards arcs whose
    mean is zero).  Returns None when even the tail violates that.
    """
    times = np.asarray(times, dtype=float)
    fluxes = np.asarray(fluxes, dtype=float)
    if times.size == 0 or fluxes.size == 0:
        raise ValueError("empty flux series")
    if window <= 0.0:
        raise ValueError("window must be positive")
    tail = times >= times[-1] - window
    means = fluxes[tail].mean(axis=0)
    scale = np.maximum(np.abs(means), 1e-12)
    ok = np.all(np.abs(fluxes - means) <= tol * scale, axis=1)
    if not ok[-1]:
        return None
    # earliest index from which ok holds through the end
    bad = np.nonzero(~ok)[0]
    first = 0 if bad.size == 0 else bad[-1] + 1
    return float(times[first])


class Simulator:
    """Stepping engine bound to one validated network.

    Construction flattens all arcs into one cell array and groups
    junctions into vectorized degree classes; odd degrees fall back to
    the allocation solver per junction.  Instances hold no per-run state
    and may be shared across runs, but one SimState must only ever be
    advanced by one thread at a time.
    """

    def __init__(self, net: Network, validate: bool = True):
        if validate:
            report = net.validate()
            if report:
                raise ValueError("invalid network: " + "; ".join(report))
        self.net = net
        self.model: FluxModel = net.model

        arcs = net.arcs
        self.arc_ids = [a.id for a in arcs]
        self._arc_index = {a: i for i, a in enumerate(self.arc_ids)}
        n_cells = np.array([a.n_cells for a in arcs], dtype=np.intp)
        self.n_cells = n_cells
        self.cell_offsets = np.concatenate([[0], np.cumsum(n_cells)])
        self.total_cells = int(self.cell_offsets[-1])
        self.dx = np.array([a.dx for a in arcs])
        self.dx_cell = np.repeat(self.dx, n_cells)

        arc_of_cell = np.repeat(np.arange(len(arcs), dtype=np.intp), n_cells)
        # interfaces of arc k occupy [cell_offsets[k] + k, ... + n_cells[k]]
        self._left_iface = np.arange(self.total_cells, dtype=np.intp) + arc_of_cell
        self._right_iface = self._left_iface + 1
        self.total_ifaces = self.total_cells + len(arcs)

        interior = np.nonzero(arc_of_cell[:-1] == arc_of_cell[1:])[0]
        self._int_left_cell = interior
        self._int_right_cell = interior + 1
        self._int_iface = self._right_iface[interior]

        first_cell = self.cell_offsets[:-1]
        last_cell = self.cell_offsets[1:] - 1
        self.arc_first_iface = self._left_iface[first_cell]
        self.arc_last_iface = self._right_iface[last_cell]
        self._arc_first_cell = first_cell
        self._arc_last_cell = last_cell

        self._build_boundaries()
        self._build_junction_classes()
        self.tracer_enabled = any(j.coefficient_mode == "dynamic" for j in net.junctions)
        self._check_interface_cover()

        # work buffers for the hot path; these make compute_fluxes/apply
        # non-reentrant, so a Simulator must not step from two threads
        self._D = np.empty(self.total_cells)
        self._S = np.empty(self.total_cells)
        self._adj = np.empty(max(self.total_cells - 1, 0))
        self._iface_diff = np.empty(max(self.total_ifaces - 1, 0))
        self._work = np.empty(self.total_cells)
        self._lam_cache: tuple[float | None, np.ndarray | None] = (None, None)

    # -- layout ------------------------------------------------------------

    def _build_boundaries(self):
        src, snk = [], []
        for k, arc in enumerate(self.net.arcs):
            if self.net.upstream_junction(arc.id) is None:
                src.append(k)
            if self.net.downstream_junction(arc.id) is None:
                snk.append(k)
        src = np.array(src, dtype=np.intp)
        snk = np.array(snk, dtype=np.intp)
        self._src_cell = self._arc_first_cell[src]
        self._src_iface = self.arc_first_iface[src]
        self._snk_cell = self._arc_last_cell[snk]
        self._snk_iface = self.arc_last_iface[snk]
        caps, tracers = [], []
        for k in src:
            bc = self.net.bc_for(self.net.arcs[k].id)
            caps.append(self.model.demand(bc.rho_bar))
            tracers.append(bc.tracer_in)
        self._src_cap = np.array(caps)
        self._src_tracer = np.array(tracers)

    def _build_junction_classes(self):
        idx = self._arc_index
        c11, c12, c21, generic = [], [], [], []
        self._diagnostics = []
        for junc in self.net.junctions:
            n_in, n_out = len(junc.incoming), len(junc.outgoing)
            in_arcs = np.array([idx[a] for a in junc.incoming], dtype=np.intp)
            out_arcs = np.array([idx[a] for a in junc.outgoing], dtype=np.intp)
            self._diagnostics.append(
                (junc.id, self.arc_last_iface[in_arcs], self.arc_first_iface[out_arcs])
            )
            if n_in == 1 and n_out == 1:
                c11.append((in_arcs[0], out_arcs[0]))
            elif n_in == 1 and n_out == 2:
                c12.append((junc, in_arcs[0], out_arcs))
            elif n_in == 2 and n_out == 1 and np.all(junc.distribution == 1.0):
                order = sorted(range(2), key=lambda i: (-junc.priority[i], i))
                c21.append((in_arcs[order], out_arcs[0]))
            else:
                generic.append((junc, in_arcs, out_arcs))

        def stack(rows, dtype=np.intp):
            return np.array(rows, dtype=dtype).reshape(len(rows), -1)

        ins = np.array([i for i, _ in c11], dtype=np.intp)
        outs = np.array([o for _, o in c11], dtype=np.intp)
        self._c11 = {
            "in_cell": self._arc_last_cell[ins],
            "in_iface": self.arc_last_iface[ins],
            "out_cell": self._arc_first_cell[outs],
            "out_iface": self.arc_first_iface[outs],
        }

        self._c12_junctions = [j for j, _, _ in c12]
        ins = np.array([i for _, i, _ in c12], dtype=np.intp)
        outs = stack([o for _, _, o in c12]) if c12 else np.zeros((0, 2), dtype=np.intp)
        self._c12 = {
            "in_cell": self._arc_last_cell[ins],
            "in_iface": self.arc_last_iface[ins],
            "out_cell": self._arc_first_cell[outs],
            "out_iface": self.arc_first_iface[outs],
            "A": np.stack([j.distribution[:, 0] for j, _, _ in c12])
            if c12
            else np.zeros((0, 2)),
        }
        dyn = [
            (row, j)
            for row, j in enumerate(self._c12_junctions)
            if j.coefficient_mode == "dynamic"
        ]
        self._dyn_rows = np.array([r for r, _ in dyn], dtype=np.intp)
        self._dyn_junctions = [j for _, j in dyn]
        self._dyn_exit_col = np.array(
            [j.outgoing.index(j.exit_arc) for _, j in dyn], dtype=np.intp
        )
        self._dyn_exit_tracer = np.array([j.exit_tracer for _, j in dyn])

        ins = stack([i for i, _ in c21]) if c21 else np.zeros((0, 2), dtype=np.intp)
        outs = np.array([o for _, o in c21], dtype=np.intp)
        self._c21 = {
            "in_cell": self._arc_last_cell[ins],
            "in_iface": self.arc_last_iface[ins],
            "out_cell": self._arc_first_cell[outs],
            "out_iface": self.arc_first_iface[outs],
        }

        self._generic = [
            {
                "junction": j,
                "in_cell": self._arc_last_cell[in_arcs],
                "in_iface": self.arc_last_iface[in_arcs],
                "out_cell": self._arc_first_cell[out_arcs],
                "out_iface": self.arc_first_iface[out_arcs],
            }
            for j, in_arcs, out_arcs in generic
        ]

    def _check_interface_cover(self):
        cover = np.zeros(self.total_ifaces, dtype=int)
        np.add.at(cover, self._int_iface, 1)
        for arr in (
            self._src_iface,
            self._snk_iface,
            self._c11["in_iface"],
            self._c11["out_iface"],
            self._c12["in_iface"],
            self._c12["out_iface"].ravel(),
            self._c21["in_iface"].ravel(),
            self._c21["out_iface"],
        ):
            np.add.at(cover, arr, 1)
        for entry in self._generic:
            np.add.at(cover, entry["in_iface"], 1)
            np.add.at(cover, entry["out_iface"], 1)
        if not np.all(cover == 1):
            raise AssertionError("internal layout error: interface not covered exactly once")

    # -- state -------------------------------------------------------------

    def init_state(self) -> SimState:
        """Empty network at t = 0 with the junctions' initial splits."""
        phi = np.full(self.total_cells, TRACER_PLACEHOLDER) if self.tracer_enabled else None
        return SimState(
            time=0.0,
            step_count=0,
            rho=np.zeros(self.total_cells),
            phi=phi,
            coefficients={j.id: j.distribution.copy() for j in self.net.junctions},
        )

    def cells(self, state_array: np.ndarray, arc_id: str) -> np.ndarray:
        """Writable view of one arc's slice of a flat cell array."""
        k = self._arc_index[arc_id]
        return state_array[self.cell_offsets[k] : self.cell_offsets[k + 1]]

    def cell_centers(self, arc_id: str) -> np.ndarray:
        arc = self.net.arc(arc_id)
        return arc.a + (np.arange(arc.n_cells) + 0.5) * arc.dx

    def total_mass(self, state: SimState) -> float:
        return float(np.sum(state.rho * self.dx_cell))

    def stable_dt(self, cfl_number: float = 0.5) -> float:
        """cfl * min cell width / max wave speed."""
        if not 0.0 < cfl_number <= 1.0:
            raise ValueError("cfl_number must lie in (0, 1]")
        if self.total_cells == 0:
            raise ValueError("network has no cells")
        return cfl_number * float(np.min(self.dx)) / self.model.max_wave_speed

    # -- phase 1 -----------------------------------------------------------

    def compute_fluxes(self, state: SimState) -> FluxSnapshot:
        """One bulk flux (and tracer flux) per interface; read-only."""
        rho = state.rho
        demand, supply = self.model.demand_and_supply(
            rho, out_demand=self._D, out_supply=self._S, check=False
        )
        F = np.empty(self.total_ifaces)

        if self.total_cells > 1:
            adjacent = np.minimum(demand[:-1], supply[1:], out=self._adj)
            F[self._int_iface] = adjacent[self._int_left_cell]
        F[self._src_iface] = np.minimum(self._src_cap, supply[self._src_cell])
        F[self._snk_iface] = demand[self._snk_cell]

        c11 = self._c11
        g11 = np.minimum(demand[c11["in_cell"]], supply[c11["out_cell"]])
        F[c11["in_iface"]] = g11
        F[c11["out_iface"]] = g11

        c12 = self._c12
        A = c12["A"]
        if A.shape[0]:
            for row, junc in zip(self._dyn_rows, self._dyn_junctions):
                A[row] = state.coefficients[junc.id][:, 0]
            with np.errstate(divide="ignore"):
                limit = np.where(A > 0.0, supply[c12["out_cell"]] / np.where(A > 0.0, A, 1.0), np.inf)
            g12 = np.minimum(demand[c12["in_cell"]], limit.min(axis=1))
            F[c12["in_iface"]] = g12
            F[c12["out_iface"]] = A * g12[:, None]

        c21 = self._c21
        if c21["out_iface"].size:
            d = demand[c21["in_cell"]]
            s = supply[c21["out_cell"]]
            g_first = np.minimum(d[:, 0], s)
            g_second = np.minimum(d[:, 1], s - g_first)
            F[c21["in_iface"][:, 0]] = g_first
            F[c21["in_iface"][:, 1]] = g_second
            F[c21["out_iface"]] = g_first + g_second

        for entry in self._generic:
            junc = entry["junction"]
            sol = _junctions.solve(
                _junctions.JunctionProblem(
                    demands=demand[entry["in_cell"]],
                    supplies=supply[entry["out_cell"]],
                    distribution=state.coefficients[junc.id],
                    priority=junc.priority,
                )
            )
            F[entry["in_iface"]] = sol.gamma_in
            F[entry["out_iface"]] = sol.gamma_out

        Fphi = self._tracer_fluxes(state, F) if state.phi is not None else None
        return FluxSnapshot(
            fluxes=F,
            tracer_fluxes=Fphi,
            inflow_total=float(np.sum(F[self._src_iface])),
            outflow_total=float(np.sum(F[self._snk_iface])),
        )

    def _tracer_fluxes(self, state: SimState, F: np.ndarray) -> np.ndarray:
        """Tracer mass flux per interface; bulk flux times donor value.

        Flow never runs backwards, so the donor of every in-arc
        interface is the cell (or reservoir, or junction mixture) on its
        left.
        """
        phi = np.clip(state.phi, 0.0, 1.0)
        Fphi = np.empty(self.total_ifaces)
        Fphi[self._int_iface] = F[self._int_iface] * phi[self._int_left_cell]
        Fphi[self._src_iface] = F[self._src_iface] * self._src_tracer
        Fphi[self._snk_iface] = F[self._snk_iface] * phi[self._snk_cell]

        c11 = self._c11
        through = F[c11["in_iface"]] * phi[c11["in_cell"]]
        Fphi[c11["in_iface"]] = through
        Fphi[c11["out_iface"]] = through

        c12 = self._c12
        if c12["A"].shape[0]:
            marked = F[c12["in_iface"]] * phi[c12["in_cell"]]
            Fphi[c12["in_iface"]] = marked
            # static splits mix; dynamic exits sort by destination below
            Fphi[c12["out_iface"]] = c12["A"] * marked[:, None]
            if self._dyn_rows.size:
                rows = self._dyn_rows
                exit_col = self._dyn_exit_col
                exit_iface = c12["out_iface"][rows, exit_col]
                other_iface = c12["out_iface"][rows, 1 - exit_col]
                m = marked[rows]
                bulk_exit = F[exit_iface]
                unmarked = F[c12["in_iface"]][rows] - m
                takes_marked = self._dyn_exit_tracer == 1.0
                to_exit = np.where(
                    takes_marked,
                    np.minimum(m, bulk_exit),
                    np.maximum(bulk_exit - np.minimum(unmarked, bulk_exit), 0.0),
                )
                to_exit = np.minimum(to_exit, m)
                Fphi[exit_iface] = to_exit
                Fphi[other_iface] = np.minimum(m - to_exit, F[other_iface])

        c21 = self._c21
        if c21["out_iface"].size:
            per_in = F[c21["in_iface"]] * phi[c21["in_cell"]]
            Fphi[c21["in_iface"]] = per_in
            Fphi[c21["out_iface"]] = per_in.sum(axis=1)

        for entry in self._generic:
            per_in = F[entry["in_iface"]] * phi[entry["in_cell"]]
            Fphi[entry["in_iface"]] = per_in
            A = state.coefficients[entry["junction"].id]
            Fphi[entry["out_iface"]] = np.minimum(A @ per_in, F[entry["out_iface"]])
        return Fphi

    # -- phase 2 -----------------------------------------------------------

    def _lambda(self, dt: float) -> np.ndarray:
        key, arr = self._lam_cache
        if key != dt:
            arr = dt / self.dx_cell
            self._lam_cache = (dt, arr)
        return arr

    def apply(self, state: SimState, snap: FluxSnapshot, dt: float, inplace: bool = False) -> SimState:
        """Advance state by dt using precomputed fluxes."""
        out = state if inplace else state.copy()
        lam = self._lambda(dt)
        F = snap.fluxes

        # consecutive interfaces bracket each cell, so the per-cell flux
        # divergence is a contiguous diff followed by one gather
        np.subtract(F[1:], F[:-1], out=self._iface_diff)
        rho_new = np.take(self._iface_diff, self._left_iface, out=self._work)
        np.multiply(rho_new, lam, out=rho_new)
        np.subtract(out.rho, rho_new, out=rho_new)

        lo, hi = float(np.min(rho_new)), float(np.max(rho_new))
        if lo < -_DENSITY_SLACK or hi > self.model.rho_max + _DENSITY_SLACK:
            raise SimulationError(
                f"density left [0, {self.model.rho_max}] at t={state.time:.6g} "
                f"(range [{lo:.3e}, {hi:.3e}]); check the CFL number"
            )

        if out.phi is not None:
            Fphi = snap.tracer_fluxes
            mu = out.rho * out.phi
            mu -= lam * (Fphi[self._right_iface] - Fphi[self._left_iface])
            np.clip(rho_new, 0.0, self.model.rho_max, out=out.rho)
            heavy = out.rho > EPS_MASS
            phi_new = np.full_like(mu, TRACER_PLACEHOLDER)
            np.divide(mu, out.rho, out=phi_new, where=heavy)
            if heavy.any():
                worst_lo = float(np.min(phi_new[heavy]))
                worst_hi = float(np.max(phi_new[heavy]))
                if worst_lo < -_TRACER_SLACK or worst_hi > 1.0 + _TRACER_SLACK:
                    raise SimulationError(
                        f"tracer left [0, 1] at t={state.time:.6g} "
                        f"(range [{worst_lo:.3e}, {worst_hi:.3e}])"
                    )
            np.clip(phi_new, 0.0, 1.0, out=out.phi)
        else:
            np.clip(rho_new, 0.0, self.model.rho_max, out=out.rho)

        out.time = state.time + dt
        out.step_count = state.step_count + 1
        return out

    def _update_dynamic_coefficients(self, state: SimState, snap: FluxSnapshot, donor_phi: np.ndarray):
        """Refresh exit splits from the composition that arrived this step."""
        c12 = self._c12
        for k, (row, junc) in enumerate(zip(self._dyn_rows, self._dyn_junctions)):
            gamma = snap.fluxes[c12["in_iface"][row]]
            if gamma < EPS_FLUX:
                continue
            column = dynamic_exit_coefficients(
                junc, gamma, donor_phi[k], state.coefficients[junc.id][:, 0]
            )
            state.coefficients[junc.id] = column.reshape(2, 1)

    def step(self, state: SimState, dt: float, update_coefficients: bool = True) -> SimState:
        """One two-phase step; returns a new state.

        dt must respect the CFL bound stable_dt(1.0).
        """
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        if dt > self.stable_dt(1.0) * (1.0 + 1e-12):
            raise SimulationError(
                f"dt={dt:.6g} violates the CFL bound {self.stable_dt(1.0):.6g}"
            )
        snap = self.compute_fluxes(state)
        donor = (
            np.clip(state.phi[self._c12["in_cell"][self._dyn_rows]], 0.0, 1.0)
            if state.phi is not None and self._dyn_rows.size
            else np.zeros(0)
        )
        new = self.apply(state, snap, dt, inplace=False)
        if update_coefficients:
            self._update_dynamic_coefficients(new, snap, donor)
        return new

    # -- diagnostics ---------------------------------------------------------

    def junction_balance_residuals(self, snap: FluxSnapshot) -> dict[str, float]:
        """Per-junction |sum incoming - sum outgoing| boundary flux."""
        F = snap.fluxes
        return {
            jid: abs(float(F[in_ifaces].sum() - F[out_ifaces].sum()))
            for jid, in_ifaces, out_ifaces in self._diagnostics
        }

    def arc_boundary_fluxes(self, snap: FluxSnapshot) -> np.ndarray:
        """Downstream interface flux of every arc, in arc order."""
        return snap.fluxes[self.arc_last_iface]

    # -- driver --------------------------------------------------------------

    def run(self, config: SimConfig) -> RunResult:
        """March to t_end, sampling states, fluxes, splits on the way."""
        dt = self.stable_dt(config.cfl_number)
        state = self.init_state()
        update = self.tracer_enabled and config.coefficient_mode != "static"

        times: list[float] = []
        flux_rows: list[np.ndarray] = []
        coeff_rows: dict[str, list[np.ndarray]] = {j.id: [] for j in self.net.junctions}
        density_rows: list[np.ndarray] = []
        tracer_rows: list[np.ndarray] = []
        first_arrival: dict[str, tuple[float, np.ndarray]] = {}

        mass_start = self.total_mass(state)
        boundary_integral = 0.0
        next_sample = 0.0
        wall_start = _time.perf_counter()

        def record(snap: FluxSnapshot):
            times.append(state.time)
            flux_rows.append(self.arc_boundary_fluxes(snap).copy())
            for jid, rows in coeff_rows.items():
                rows.append(state.coefficients[jid].copy())
            if config.record_profiles:
                density_rows.append(state.rho.copy())
                if state.phi is not None:
                    tracer_rows.append(state.phi.copy())

        while True:
            snap = self.compute_fluxes(state)
            if state.time >= next_sample - 1e-9:
                record(snap)
                while next_sample <= state.time + 1e-9:
                    next_sample += config.sample_interval
            remaining = config.t_end - state.time
            if remaining <= 1e-12:
                if not times or times[-1] < state.time - 1e-9:
                    record(snap)  # t_end that falls off the sampling grid
                break
            step_dt = min(dt, remaining)
            donor = (
                np.clip(state.phi[self._c12["in_cell"][self._dyn_rows]], 0.0, 1.0)
                if state.phi is not None and self._dyn_rows.size
                else np.zeros(0)
            )
            self.apply(state, snap, step_dt, inplace=True)
            if update:
                self._update_dynamic_coefficients(state, snap, donor)
                for row, junc in zip(self._dyn_rows, self._dyn_junctions):
                    if junc.id not in first_arrival and (
                        snap.fluxes[self._c12["in_iface"][row]] >= EPS_FLUX
                    ):
                        first_arrival[junc.id] = (
                            state.time,
                            state.coefficients[junc.id][:, 0].copy(),
                        )
            boundary_integral += step_dt * (snap.inflow_total - snap.outflow_total)

        wall = _time.perf_counter() - wall_start
        mass_residual = abs(self.total_mass(state) - mass_start - boundary_integral)

        times_arr = np.asarray(times)
        flux_arr = np.asarray(flux_rows)
        equilibrium_time = (
            detect_equilibrium(
                times_arr, flux_arr, config.equilibrium_window, config.equilibrium_tol
            )
            if len(times) >= 2
            else None
        )
        final_fluxes = {
            arc_id: float(flux_arr[-1, k]) for k, arc_id in enumerate(self.arc_ids)
        }
        summary = {
            "t_end": state.time,
            "steps": state.step_count,
            "cells": self.total_cells,
            "equilibrium_time": equilibrium_time,
            "final_fluxes": final_fluxes,
            "mass_residual": mass_residual,
            "wall_time_s": wall,
            "cell_updates_per_s": state.step_count * self.total_cells / wall
            if wall > 0
            else float("inf"),
        }
        return RunResult(
            arc_ids=list(self.arc_ids),
            cells_per_arc={a.id: a.n_cells for a in self.net.arcs},
            junction_arcs={
                j.id: (list(j.incoming), list(j.outgoing)) for j in self.net.junctions
            },
            times=times_arr,
            arc_fluxes=flux_arr,
            coefficients={jid: np.asarray(rows) for jid, rows in coeff_rows.items()},
            density=np.asarray(density_rows) if config.record_profiles else None,
            tracer=np.asarray(tracer_rows)
            if config.record_profiles and self.tracer_enabled
            else None,
            first_arrival_coefficients=first_arrival,
            equilibrium_time=equilibrium_time,
            summary=summary,
        )


def init_state(net: Network) -> SimState:
    return Simulator(net).init_state()


def stable_dt(net: Network, state: SimState | None = None, cfl_number: float = 0.5) -> float:
    """CFL-stable step for the network; state does not affect the bound."""
    del state
    return Simulator(net).stable_dt(cfl_number)


def step(net: Network, state: SimState, dt: float) -> SimState:
    """Convenience one-shot step; builds the engine each call."""
    return Simulator(net).step(state, dt)


def run(net: Network, config: SimConfig) -> RunResult:
    return Simulator(net).run(config)
