"""Tree tensor network ground states of the 2D transverse-field Ising model."""

from ._core import (
    FattnError,
    bond_schedule,
    ed_energy_per_site,
    isometry_residual,
    named_cut_budgets,
    optimize,
    polar_update,
    required_D,
    run_grid,
)

__all__ = [
    "FattnError",
    "bond_schedule",
    "ed_energy_per_site",
    "isometry_residual",
    "named_cut_budgets",
    "optimize",
    "polar_update",
    "required_D",
    "run_grid",
]
