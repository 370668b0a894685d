"""Bethe ansatz spectra for the Laplacian on Weyl alcoves with repulsive walls.

Solves the Bethe ansatz equations by damped Newton minimization of a strictly
convex potential, evaluates the resulting eigenfunctions, and checks the
quantitative facts that are verifiable at desk scale: wall residuals,
orthogonality, the norm determinant formula, and the zero-coupling limits.
"""

__version__ = "0.1.0"

from .baesolver import (
    BaeSolution,
    ChamberCertificateError,
    Coupling,
    PoleError,
    SolverError,
    SolverOptions,
    bethe_equation_residual,
    bethe_potential,
    bethe_potential_grad,
    bethe_potential_hessian,
    scattering_shift,
    solve_bethe,
)
from .eigenfn import (
    BetheWave,
    WallSample,
    bethe_directional_derivative,
    bethe_value,
    boundary_residual,
    boundary_residual_by_wall,
    c_function,
    free_wave,
    write_grid_csv,
)
from .quadrature import (
    GramResult,
    QuadratureRule,
    build_rule,
    facet_samples,
    gram_matrix,
    integrate,
    volume,
)
from .rootsys import (
    CartanLabel,
    DominantWeight,
    RootSystem,
    WeylGroup,
    alcove_vertices,
    build_root_system,
    dominant_weight,
    dominant_weights,
    weyl_group,
)

__all__ = [name for name in dir() if not name.startswith("_")]
