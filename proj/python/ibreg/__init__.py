"""Robust and maximum likelihood estimation for zero-or-one inflated beta regression."""

from ._core import (
    DomainError,
    InputError,
    NumericalError,
    fit,
    generate,
    ks_distance_normal,
    power_integral,
    quantile_residuals,
    sqv,
    wald_test,
)

__all__ = [
    "DomainError",
    "InputError",
    "NumericalError",
    "fit",
    "generate",
    "ks_distance_normal",
    "power_integral",
    "quantile_residuals",
    "sqv",
    "wald_test",
]
