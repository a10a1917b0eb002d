import numpy as np
import pytest

from tagflow.flux import FluxModel
from tagflow.network import (
    Arc,
    BoundaryCondition,
    Junction,
    Network,
    UndefinedCoefficientsError,
    build_roundabout,
    check_low_flow,
    equilibrium_coefficients,
    equilibrium_fluxes,
    initial_coefficients,
)

from helpers import random_network

UNIT = FluxModel()


def commodity_routing(alpha, beta, f1, f2):
    """Independent oracle: sum path flows for the four origin/exit classes."""
    paths = {
        ("S1", "S3"): (alpha * f1, ["S1", "S1C", "S3"]),
        ("S1", "S4"): ((1 - alpha) * f1, ["S1", "S1C", "S2C", "S3C", "S4"]),
        ("S2", "S4"): (beta * f2, ["S2", "S3C", "S4"]),
        ("S2", "S3"): ((1 - beta) * f2, ["S2", "S3C", "S4C", "S1C", "S3"]),
    }
    totals: dict[str, float] = {}
    for flow, path in paths.values():
        for arc in path:
            totals[arc] = totals.get(arc, 0.0) + flow
    return totals


def test_roundabout_shape_and_validity():
    net = build_roundabout(0.5, 0.5, 0.1127, 0.1127, cells_per_arc=50)
    assert len(net.arcs) == 8
    assert len(net.junctions) == 4
    assert net.validate() == []
    np.testing.assert_allclose(net.junction("J2").distribution[:, 0], [0.5, 0.5])


def test_roundabout_directed_circle_exists():
    net = build_roundabout(0.3, 0.7, 0.05, 0.05)
    hops = {"S1C": "S2C", "S2C": "S3C", "S3C": "S4C", "S4C": "S1C"}
    for src, dst in hops.items():
        down = net.downstream_junction(src)
        assert down is not None
        assert dst in net.junction(down).outgoing


def test_roundabout_degenerate_split():
    net = build_roundabout(1.0, 1.0, 0.1, 0.1)
    np.testing.assert_allclose(net.junction("J2").distribution[:, 0], [1.0, 0.0])
    assert net.validate() == []


def test_roundabout_entry_junctions_prioritize_circle():
    net = build_roundabout(0.5, 0.5, 0.1, 0.1)
    j1 = net.junction("J1")
    assert j1.incoming == ["S1", "S4C"]
    np.testing.assert_allclose(j1.priority, [0.0, 1.0])


def test_roundabout_rejects_bad_parameters():
    with pytest.raises(ValueError):
        build_roundabout(-0.1, 0.5, 0.1, 0.1)
    with pytest.raises(ValueError):
        build_roundabout(0.5, 0.5, 0.9, 0.1)  # above sigma
    with pytest.raises(ValueError):
        build_roundabout(0.5, 0.5, 0.1, 0.1, cells_per_arc=0)


def test_initial_coefficients():
    coeffs = initial_coefficients(0.5, 0.5)
    np.testing.assert_allclose(coeffs["J2"], [0.5, 0.5])
    np.testing.assert_allclose(coeffs["J4"], [0.5, 0.5])
    coeffs = initial_coefficients(0.3, 0.8)
    np.testing.assert_allclose(coeffs["J2"], [0.3, 0.7])
    np.testing.assert_allclose(coeffs["J4"], [0.8, 0.2])


def test_initial_coefficients_sum_to_one():
    rng = np.random.default_rng(0)
    for _ in range(20):
        coeffs = initial_coefficients(rng.uniform(), rng.uniform())
        for pair in coeffs.values():
            assert pair.sum() == pytest.approx(1.0, abs=1e-15)


def test_equilibrium_coefficients_symmetric_case():
    coeffs = equilibrium_coefficients(0.5, 0.5, 0.1, 0.1)
    np.testing.assert_allclose(coeffs["J2"], [2 / 3, 1 / 3], atol=1e-15)
    np.testing.assert_allclose(coeffs["J4"], [2 / 3, 1 / 3], atol=1e-15)


def test_equilibrium_coefficients_no_through_traffic():
    coeffs = equilibrium_coefficients(1.0, 1.0, 0.07, 0.19)
    np.testing.assert_allclose(coeffs["J2"], [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(coeffs["J4"], [1.0, 0.0], atol=1e-15)


def test_equilibrium_coefficients_zero_flux_guard():
    with pytest.raises(UndefinedCoefficientsError):
        equilibrium_coefficients(0.5, 1.0, 0.0, 0.1)


def test_equilibrium_coefficients_limit_recovers_initial():
    # as the recirculated share vanishes the splits fall back to first-arrival
    alpha, beta = 0.4, 0.9
    for f2 in (1e-3, 1e-6, 1e-9):
        coeffs = equilibrium_coefficients(alpha, beta, 0.1, f2)
        np.testing.assert_allclose(coeffs["J2"], [alpha, 1 - alpha], atol=2e-2 * f2 / 1e-3)


def test_equilibrium_fluxes_example():
    fluxes = equilibrium_fluxes(0.5, 0.5, 0.1, 0.1)
    expected = {
        "S1C": 0.15,
        "S2C": 0.05,
        "S3C": 0.15,
        "S4C": 0.05,
        "S3": 0.1,
        "S4": 0.1,
    }
    for arc, value in expected.items():
        assert fluxes[arc] == pytest.approx(value, abs=1e-15)


def test_equilibrium_fluxes_match_commodity_routing():
    rng = np.random.default_rng(42)
    for _ in range(50):
        alpha, beta = rng.uniform(), rng.uniform()
        f1, f2 = rng.uniform(0, 0.12), rng.uniform(0, 0.12)
        fluxes = equilibrium_fluxes(alpha, beta, f1, f2)
        oracle = commodity_routing(alpha, beta, f1, f2)
        for arc, value in oracle.items():
            assert fluxes[arc] == pytest.approx(value, abs=1e-12)


def test_equilibrium_fluxes_zero_inflow_and_global_conservation():
    fluxes = equilibrium_fluxes(0.3, 0.8, 0.0, 0.0)
    assert all(v == 0.0 for v in fluxes.values())
    rng = np.random.default_rng(1)
    for _ in range(20):
        alpha, beta, f1, f2 = rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()
        fluxes = equilibrium_fluxes(alpha, beta, f1, f2)
        assert fluxes["S3"] + fluxes["S4"] == pytest.approx(f1 + f2, abs=1e-12)


def test_equilibrium_coefficients_consistent_with_fluxes():
    rng = np.random.default_rng(9)
    for _ in range(30):
        alpha, beta = rng.uniform(), rng.uniform()
        f1, f2 = rng.uniform(0.01, 0.12), rng.uniform(0.01, 0.12)
        fluxes = equilibrium_fluxes(alpha, beta, f1, f2)
        coeffs = equilibrium_coefficients(alpha, beta, f1, f2)
        arriving = fluxes["S1C"]
        assert coeffs["J2"][0] * arriving == pytest.approx(fluxes["S3"], abs=1e-12)
        assert coeffs["J2"][1] * arriving == pytest.approx(fluxes["S2C"], abs=1e-12)
        arriving = fluxes["S3C"]
        assert coeffs["J4"][0] * arriving == pytest.approx(fluxes["S4"], abs=1e-12)
        assert coeffs["J4"][1] * arriving == pytest.approx(fluxes["S4C"], abs=1e-12)


def test_check_low_flow():
    assert check_low_flow(UNIT, 0.1, 0.1)
    assert not check_low_flow(UNIT, 0.16, 0.16)
    assert check_low_flow(UNIT, 0.25, 0.0)


def test_validate_reports_bad_column_mass():
    net = build_roundabout(0.5, 0.5, 0.1, 0.1)
    net.junction("J2").distribution = np.array([[0.5], [0.4]])
    report = net.validate()
    assert any("column 0 mass 0.9" in msg for msg in report)


def test_validate_reports_dangling_reference():
    net = Network(
        model=UNIT,
        arcs=[Arc("A", 0.0, 1.0, 5, "external_in")],
        junctions=[Junction("J", ["A"], ["MISSING"], [[1.0]])],
        boundary_conditions=[BoundaryCondition("A", 0.1)],
    )
    assert any("dangling reference" in msg for msg in net.validate())


def test_validate_reports_disconnected_graph():
    net = Network(
        model=UNIT,
        arcs=[
            Arc("A", 0.0, 1.0, 5, "generic"),
            Arc("B", 0.0, 1.0, 5, "generic"),
        ],
        junctions=[],
        boundary_conditions=[BoundaryCondition("A", 0.1), BoundaryCondition("B", 0.1)],
    )
    assert any("not connected" in msg for msg in net.validate())


def test_validate_requires_inflow_specification():
    net = Network(
        model=UNIT,
        arcs=[Arc("A", 0.0, 1.0, 5, "generic")],
        junctions=[],
        boundary_conditions=[],
    )
    assert any("no upstream junction and no boundary condition" in msg for msg in net.validate())


def test_validate_rejects_double_use_of_an_arc():
    arcs = [
        Arc("A", 0.0, 1.0, 5, "external_in"),
        Arc("B", 0.0, 1.0, 5, "external_out"),
        Arc("C", 0.0, 1.0, 5, "external_out"),
    ]
    junctions = [
        Junction("J1", ["A"], ["B"], [[1.0]]),
        Junction("J2", ["A"], ["C"], [[1.0]]),
    ]
    net = Network(UNIT, arcs, junctions, [BoundaryCondition("A", 0.1)])
    assert any("consumed by 2 junctions" in msg for msg in net.validate())


def test_random_networks_validate_and_have_stochastic_columns():
    rng = np.random.default_rng(123)
    for _ in range(25):
        net = random_network(rng)
        assert net.validate() == []
        for junc in net.junctions:
            np.testing.assert_allclose(
                junc.distribution.sum(axis=0), 1.0, atol=1e-9
            )
