"""Python access to the mmphase core."""

from ._core import (
    F,
    K,
    MmphaseError,
    Parameters,
    alpha_isocline,
    eta_from_kappa,
    gamma1_entry,
    h_aux,
    horizontal_isocline,
    infinity_coefficients,
    integrate_time,
    nondimensionalize,
    origin_coefficients,
    slope,
    slow_manifold,
    spectrum,
    vertical_isocline,
)

__version__ = "0.1.0"

__all__ = [
    "F",
    "K",
    "MmphaseError",
    "Parameters",
    "alpha_isocline",
    "eta_from_kappa",
    "gamma1_entry",
    "h_aux",
    "horizontal_isocline",
    "infinity_coefficients",
    "integrate_time",
    "nondimensionalize",
    "origin_coefficients",
    "slope",
    "slow_manifold",
    "spectrum",
    "vertical_isocline",
]
