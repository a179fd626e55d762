"""Explicit and distributed MPC for coupled linear subsystems."""

from ._core import (
    FacetMpcError,
    Plant,
    Solution,
    facet_lp,
    feasible_initial_state,
    generate_plant,
    run_bench,
    sample_plant,
    simulate,
    solve_local,
)

CONTROLLERS = ("cmpc", "dimpc", "impdimpc", "ifmpdimpc", "facet")

__all__ = [
    "CONTROLLERS",
    "FacetMpcError",
    "Plant",
    "Solution",
    "facet_lp",
    "feasible_initial_state",
    "generate_plant",
    "run_bench",
    "sample_plant",
    "simulate",
    "solve_local",
]
