"""Finite element solver for the Cahn-Hilliard equation with dynamic
Cahn-Hilliard boundary conditions on a 2-D disk."""

from .analysis import ErrorReport, eoc, final_error, gl_energy, h1_norm, l2_norm, total_mass
from .assembly import (
    assemble_bulk_mass,
    assemble_bulk_stiffness,
    assemble_mass,
    assemble_stiffness,
    assemble_surface_mass,
    assemble_surface_stiffness,
    dump_matrix,
    load_vector,
    nodal_interpolate,
    nonlinearity_vector,
)
from .integrator import (
    BDFScheme,
    Trajectory,
    bdf_coefficients,
    bdf_scheme,
    extrapolation_coefficients,
    run,
    starting_values,
    step_linear,
    step_nonlinear,
)
from .mesh import (
    Mesh2D,
    MeshFormatError,
    boundary_length,
    bulk_area,
    export_mesh,
    generate_disk_mesh,
    import_mesh,
    mesh_size,
    validate_mesh,
)
from .problems import (
    ProblemSpec,
    evolution_problem,
    manufactured_linear,
    manufactured_nonlinear,
    problem_by_name,
    verify_manufactured,
)
from .saddle import StepMatrix, build_step_matrix, solve

__version__ = "0.1.0"

__all__ = [
    "BDFScheme",
    "ErrorReport",
    "Mesh2D",
    "MeshFormatError",
    "ProblemSpec",
    "StepMatrix",
    "Trajectory",
    "assemble_bulk_mass",
    "assemble_bulk_stiffness",
    "assemble_mass",
    "assemble_stiffness",
    "assemble_surface_mass",
    "assemble_surface_stiffness",
    "bdf_coefficients",
    "bdf_scheme",
    "boundary_length",
    "bulk_area",
    "dump_matrix",
    "eoc",
    "evolution_problem",
    "export_mesh",
    "extrapolation_coefficients",
    "final_error",
    "generate_disk_mesh",
    "gl_energy",
    "h1_norm",
    "import_mesh",
    "l2_norm",
    "load_vector",
    "manufactured_linear",
    "manufactured_nonlinear",
    "mesh_size",
    "nodal_interpolate",
    "nonlinearity_vector",
    "problem_by_name",
    "run",
    "solve",
    "starting_values",
    "step_linear",
    "step_nonlinear",
    "total_mass",
    "validate_mesh",
    "verify_manufactured",
]
