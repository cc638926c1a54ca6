"""Finite-difference micromagnetics with chiral (DMI) boundary conditions."""

from chiralmag.grid import (
    DegenerateStateError,
    GhostField,
    GridSpec,
    MagnetizationField,
    fill_ghosts,
    new_uniform,
    project,
)
from chiralmag.physics import (
    DimensionlessParams,
    DriveSpec,
    LocalField,
    PhysicalParams,
    SpinCurrent,
    effective_field,
    local_field_hhat,
    nondimensionalize,
)
from chiralmag.operators import (
    curl,
    energy,
    energy_density_maps,
    laplacian,
    skyrmion_number,
    spatial_average,
)

from chiralmag.stepping import (
    KrylovConfig,
    SolverFailure,
    SolverState,
    apply_operator,
    bdf1_heatflow_step,
    bdf1_ll_step,
    bdf2_heatflow_step,
    bdf2_ll_step,
    new_state,
    run_steps,
    run_to_steady,
)
from chiralmag.string_method import (
    PathString,
    arc_length_params,
    evolve_images,
    init_string,
    reparametrize,
    run_string,
    string_converged,
)
from chiralmag.initial import init_blocks, init_radial, init_random_circle

__version__ = "0.1.0"

__all__ = [
    "DegenerateStateError",
    "DimensionlessParams",
    "DriveSpec",
    "KrylovConfig",
    "PathString",
    "SolverFailure",
    "SolverState",
    "GhostField",
    "GridSpec",
    "LocalField",
    "MagnetizationField",
    "PhysicalParams",
    "SpinCurrent",
    "apply_operator",
    "arc_length_params",
    "bdf1_heatflow_step",
    "bdf1_ll_step",
    "bdf2_heatflow_step",
    "bdf2_ll_step",
    "curl",
    "effective_field",
    "energy",
    "energy_density_maps",
    "evolve_images",
    "fill_ghosts",
    "init_blocks",
    "init_radial",
    "init_random_circle",
    "init_string",
    "laplacian",
    "local_field_hhat",
    "new_state",
    "new_uniform",
    "nondimensionalize",
    "project",
    "reparametrize",
    "run_steps",
    "run_string",
    "run_to_steady",
    "skyrmion_number",
    "spatial_average",
    "string_converged",
]
