"""Coupled free-flow / porous-medium solver with facet unknowns."""

from ._core import (
    InputError,
    Mesh,
    SolverError,
    convergence_csv,
    demo_permeability,
    exact_solution,
    generate_mesh,
    patch_test,
    read_mesh,
    run_demo,
    solve_benchmark,
)

__all__ = [
    "InputError",
    "Mesh",
    "SolverError",
    "convergence_csv",
    "demo_permeability",
    "exact_solution",
    "generate_mesh",
    "patch_test",
    "read_mesh",
    "run_demo",
    "solve_benchmark",
]
