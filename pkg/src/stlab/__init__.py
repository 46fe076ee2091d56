"""Galerkin FEM and maximal-regularity spline discretizations of u'' + mu u = f.

The public API is re-exported here; see the submodules for details.
"""
from .analysis import (
    ErrorReport,
    ManufacturedSolution,
    PolynomialSolution,
    best_approx_h1,
    beta_from_system,
    convergence_slope,
    error_norms,
    infsup_beta,
    solve,
)
from .assembly import (
    AssembledSystem,
    FormSpec,
    Variant,
    assemble_load,
    assemble_matrix,
    assemble_system,
    bubnov_matrix,
    q0_project,
)
from .bounds import BoundsReport, optimal_b, stability_bounds
from .experiments import (
    ExperimentConfig,
    SweepResult,
    emit_outputs,
    run_convergence,
    run_infsup_sweep,
)
from .kernels import BACKEND
from .linalg import (
    BandedMatrix,
    CholeskyFactor,
    NotPositiveDefiniteError,
    SingularMatrixError,
    cholesky,
    lu_factor,
    lu_solve,
    min_gen_eig,
)
from .quadrature import QuadRule, gauss_legendre, integrate_mesh
from .spaces import Kind, ReducedSpace, eval_discrete, ht_inverse, ht_map, reduce
from .splines import (
    Mesh,
    SplineSpace,
    eval_basis,
    l2_project,
    make_maximal_space,
    quasi_interpolant,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
