import math

import pytest

import edghdg


def test_permeability_spot_value():
    assert edghdg.demo_permeability(0.0, 0.0) == pytest.approx(800.0, abs=1e-9)


def test_mesh_counts():
    mesh = edghdg.generate_mesh(2)
    assert mesh.n_vertices == 9
    assert mesh.n_cells == 8
    assert mesh.n_region_cells("free-flow") == 4
    assert mesh.n_region_cells("porous") == 4
    assert mesh.n_interface_facets == 2


def test_mesh_roundtrip(tmp_path):
    path = str(tmp_path / "mesh.txt")
    edghdg.generate_mesh(4, perturb=True, seed=11).write(path)
    mesh = edghdg.read_mesh(path)
    assert mesh.n_cells == 32


def test_mesh_parameter_validation():
    with pytest.raises(ValueError):
        edghdg.generate_mesh(3)


def test_exact_solution_fields():
    exact = edghdg.exact_solution(1.0, 1.0)
    ux, uy = exact["velocity_free_flow"](0.5, 0.75)
    assert ux == pytest.approx(-math.exp(0.375) / (2.0 * math.pi**2), rel=1e-12)
    assert abs(uy) < 1e-15
    assert exact["mass_source"](0.0, 0.0) == pytest.approx(
        (4.0 * math.pi**2 - 1.0) / (2.0 * math.pi), rel=1e-12
    )
    assert exact["alpha"] == pytest.approx(0.5 * (1.0 + 4.0 * math.pi**2), rel=1e-12)


def test_benchmark_solve():
    report = edghdg.solve_benchmark(2, 1)
    assert report["total_cells"] == 8
    assert report["solver_residual"] < 1e-10
    for region in ("free_flow", "porous"):
        errors = report[region]
        assert math.isfinite(errors["err_u"])
        assert errors["err_u"] > 0.0
        assert errors["div_residual"] < 1e-9
        assert errors["jump_residual"] < 1e-9


def test_convergence_csv_header():
    csv = edghdg.convergence_csv([2, 4], 1)
    lines = csv.strip().splitlines()
    assert lines[0] == "cells,h,err_u,rate_u,err_p,rate_p,div_residual,jump_residual,region"
    assert len(lines) == 5


def test_patch_reproduction():
    result = edghdg.patch_test()
    assert result["pass"] is True
    assert result["max_deviation"] <= 1e-9


def test_demo_flux_balance():
    result = edghdg.run_demo(n=6, k=1)
    assert result["n_cells"] == 72
    assert abs(result["balance"]) <= 1e-8 * result["inflow_scale"]
    assert result["max_interface_pressure_jump"] > 0.0
