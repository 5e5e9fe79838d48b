"""Scattering theory for 1D Schroedinger operators with non-mixed interface conditions.

Modules: ``numerics`` (grids, quadrature, stencils), ``potential``, ``jost``
(Jost solutions and functions), ``krein`` (boundary maps, Green kernels,
perturbed resolvent, spectrum), ``eigen`` (generalized eigenfunctions),
``evolve`` (transforms, wave operator, propagators), ``acceptance`` and ``cli``.
"""

from .eigen import (
    adjoint_pairing_check,
    adjoint_theta,
    expansion_coefficients,
    psi_minus_free,
    psi_minus_theta,
)
from .estimator import GeneralizedFourierTransform
from .evolve import (
    SpectralData,
    SpectralFunction,
    WaveOperator,
    build_wave_operator,
    forward_transform,
    intertwining_residual,
    inverse_transform,
    propagate_free,
    propagate_theta,
    remainder_norm,
    wave_limit_deviation,
)
from .jost import jost_pair, jost_wronskian, jost_wronskian_w0, ode_jost_oracle, picard_jost
from .krein import (
    apply_resolvent_free,
    boundary_maps,
    eigenvalue_track,
    green_kernels,
    interface_matrices,
    interface_residuals,
    m_matrix,
    perturbed_resolvent_kernel,
    spectral_scan,
    weyl_matrix,
)
from .numerics import (
    ConfigurationError,
    NumericalError,
    SpatialGrid,
    SpectralGrid,
    WaveFunction,
    make_grid,
    make_kgrid,
    op_norm_estimate,
)
from .potential import Potential, build_potential

__all__ = [
    "ConfigurationError", "NumericalError", "SpatialGrid", "SpectralGrid", "WaveFunction",
    "make_grid", "make_kgrid", "op_norm_estimate", "Potential", "build_potential",
    "picard_jost", "ode_jost_oracle", "jost_pair", "jost_wronskian", "jost_wronskian_w0",
    "boundary_maps", "interface_residuals", "green_kernels", "apply_resolvent_free",
    "weyl_matrix", "interface_matrices", "m_matrix", "perturbed_resolvent_kernel",
    "spectral_scan", "eigenvalue_track", "psi_minus_free", "psi_minus_theta",
    "expansion_coefficients", "adjoint_theta", "adjoint_pairing_check", "SpectralData",
    "SpectralFunction", "WaveOperator", "forward_transform", "inverse_transform",
    "build_wave_operator", "intertwining_residual", "propagate_free", "propagate_theta",
    "remainder_norm", "wave_limit_deviation", "GeneralizedFourierTransform",
]
