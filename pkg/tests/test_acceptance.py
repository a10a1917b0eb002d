"""Acceptance gate: one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdicts.
Criterion 7 (calibration against a proprietary social-media dataset) is
not reproducible because the data were never published; it is recorded
as an explicit skip rather than silently dropped.
"""

import math

import numpy as np
import pytest

from tagflow.bench import run_bench
from tagflow.flux import FluxModel
from tagflow.junctions import brute_force_solve, solve
from tagflow.network import build_roundabout, equilibrium_fluxes
from tagflow.simulate import SimConfig, Simulator

from helpers import random_junction_problem, random_network, riemann_l1_error

RHO_BAR = (1.0 - math.sqrt(0.6)) / 2.0  # unit-model density with flux 0.1


def _verdict(number: int, passed: bool, detail: str) -> None:
    print(f"ACCEPTANCE {number}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, detail


@pytest.fixture(scope="module")
def roundabout_run():
    net = build_roundabout(0.5, 0.5, RHO_BAR, RHO_BAR, cells_per_arc=50)
    return Simulator(net).run(SimConfig(t_end=100.0))


def test_criterion_1_roundabout_equilibrium(roundabout_run):
    res = roundabout_run
    expected = equilibrium_fluxes(0.5, 0.5, 0.1, 0.1)
    checks = [res.equilibrium_time is not None]
    worst = 0.0
    for arc in ("S1C", "S2C", "S3C", "S4C", "S3", "S4"):
        rel = abs(res.summary["final_fluxes"][arc] - expected[arc]) / expected[arc]
        worst = max(worst, rel)
        checks.append(rel <= 0.01)
    for jid in ("J2", "J4"):
        exit_coeff = res.coefficients[jid][-1][0, 0]
        rel = abs(exit_coeff - 2.0 / 3.0) / (2.0 / 3.0)
        worst = max(worst, rel)
        checks.append(rel <= 0.01)
    _verdict(
        1,
        all(checks),
        f"equilibrium at T={res.equilibrium_time}, worst relative error {worst:.2e} (limit 1e-2)",
    )


def test_criterion_2_coefficient_trajectory_endpoints(roundabout_run):
    res = roundabout_run
    checks = []
    worst_first = 0.0
    for jid in ("J2", "J4"):
        _, column = res.first_arrival_coefficients[jid]
        err = float(np.max(np.abs(column - 0.5)))
        worst_first = max(worst_first, err)
        checks.append(err <= 1e-9)
        final = res.coefficients[jid][-1][0, 0]
        checks.append(abs(final - 2.0 / 3.0) / (2.0 / 3.0) <= 0.01)
    _verdict(
        2,
        all(checks),
        f"first-arrival splits off by {worst_first:.2e} (limit 1e-9), converged to 2/3 within 1%",
    )


def test_criterion_3_conservation_suite():
    worst_mass = 0.0
    worst_junction = 0.0

    def march(net, steps):
        nonlocal worst_mass, worst_junction
        sim = Simulator(net)
        state = sim.init_state()
        dt = sim.stable_dt(0.5)
        for _ in range(steps):
            snap = sim.compute_fluxes(state)
            before = sim.total_mass(state)
            state = sim.apply(state, snap, dt)
            residual = abs(
                sim.total_mass(state) - before - dt * (snap.inflow_total - snap.outflow_total)
            )
            worst_mass = max(worst_mass, residual)
            balances = sim.junction_balance_residuals(snap)
            if balances:
                worst_junction = max(worst_junction, max(balances.values()))

    march(build_roundabout(0.5, 0.5, RHO_BAR, RHO_BAR, cells_per_arc=50), 2000)
    rng = np.random.default_rng(7)
    for _ in range(50):
        march(random_network(rng), 40)

    ok = worst_mass <= 1e-10 and worst_junction <= 1e-14
    _verdict(
        3,
        ok,
        f"worst per-step mass residual {worst_mass:.2e} (limit 1e-10), "
        f"worst junction imbalance {worst_junction:.2e} (limit 1e-14)",
    )


def test_criterion_4_junction_oracle_equivalence():
    rng = np.random.default_rng(2718)
    worst = 0.0
    for _ in range(1000):
        problem = random_junction_problem(rng)
        gap = abs(solve(problem).objective - brute_force_solve(problem, 1e-3).objective)
        worst = max(worst, gap)
    _verdict(4, worst <= 2e-3, f"worst objective gap {worst:.2e} over 1000 problems (limit 2e-3)")


def test_criterion_5_riemann_convergence():
    # the 0.2|0.8 jump is stationary under the unit normalization, which
    # a finite-volume scheme resolves exactly; rho_max = 2 keeps the
    # same states on a genuinely moving compressive shock
    shock_model = FluxModel(v_max=1.0, rho_max=2.0)
    shock_errors = [
        riemann_l1_error(shock_model, 0.2, 0.8, 0.4, n, 0.2) for n in (100, 200, 400, 800)
    ]
    fan_errors = [
        riemann_l1_error(FluxModel(), 0.8, 0.2, 0.5, n, 0.2) for n in (100, 200, 400, 800)
    ]
    shock_ratios = [a / b for a, b in zip(shock_errors, shock_errors[1:])]
    fan_ratios = [a / b for a, b in zip(fan_errors, fan_errors[1:])]
    ok = all(r >= 1.8 for r in shock_ratios) and all(r >= 1.5 for r in fan_ratios)
    _verdict(
        5,
        ok,
        f"shock ratios {[f'{r:.2f}' for r in shock_ratios]} (limit 1.8), "
        f"rarefaction ratios {[f'{r:.2f}' for r in fan_ratios]} (limit 1.5)",
    )


def test_criterion_6_benchmark_under_one_second():
    run_bench(10, 5, 3)  # warm-up
    best = None
    for _ in range(3):
        report = run_bench(2000, 25, 500)
        if best is None or report.wall_time_s < best.wall_time_s:
            best = report
    ok = best.wall_time_s < 1.0 and best.conservation_ok
    _verdict(
        6,
        ok,
        f"{best.total_cells * best.steps:.2e} cell updates in {best.wall_time_s:.3f} s "
        f"({best.cell_updates_per_s:.2e} updates/s, limit 1 s), "
        f"mass residual {best.mass_residual:.2e}",
    )


def test_criterion_7_external_calibration_not_reproducible():
    print("ACCEPTANCE 7: SKIP - external calibration dataset was never published")
    pytest.skip("calibration data unavailable; criteria 1-6 stand in")
