"""Normalized Yamabe flow laboratory on model cone manifolds."""

from ._core import (
    Mesh,
    Model,
    average_scalar_rho,
    build_mesh,
    conformal_volume,
    first_eigenpair,
    initial_curvature,
    make_model,
    minimize_yamabe_functional,
    run_flow,
    scalar_curvature,
    total_scalar_functional,
    total_scalar_functional_direct,
    trichotomy,
)

__all__ = [
    "Mesh",
    "Model",
    "average_scalar_rho",
    "build_mesh",
    "conformal_volume",
    "first_eigenpair",
    "initial_curvature",
    "make_model",
    "minimize_yamabe_functional",
    "run_flow",
    "scalar_curvature",
    "total_scalar_functional",
    "total_scalar_functional_direct",
    "trichotomy",
]
