"""Energies, monotonicity functionals, residuals and lifting."""

from .energy import (
    DIAGNOSTIC_COLUMNS,
    BochnerResult,
    DiagnosticsRecord,
    bochner_from_snapshots,
    bochner_ratio,
    bulk_density,
    diagnostics_records,
    dirichlet_density,
    energy_density,
    energy_parts,
)
from .lifting import director_gap, lift_director
from .monotonicity import (
    ParabolicPoint,
    kernel_gradient,
    monotonicity_violation,
    periodic_kernel,
    phi_functional,
    phi_ladder,
    phi_snap_tolerance,
    psi_functional,
    psi_ladder,
    raw_drops,
    scaled_heat_kernel,
    singular_set_scan,
    slab_energy_field,
)
from .residuals import harmonic_residual, limit_residual
