"""Noisy-label correction: label correction with a noisy validation split,
clean-sample selection and semi-supervised representation learning."""

from ._core import (
    DegenerateSplitError,
    DivergenceError,
    FormatError,
    InputDomainError,
    NonConvergenceError,
    SingularityError,
    StctError,
    UsageError,
    gaussian_mixture,
    load_matrix,
    required_sampling_times,
    run_nmc,
    run_stct,
    save_matrix,
    symmetric_noise,
    verify,
)

__all__ = [
    "DegenerateSplitError",
    "DivergenceError",
    "FormatError",
    "InputDomainError",
    "NonConvergenceError",
    "SingularityError",
    "StctError",
    "UsageError",
    "gaussian_mixture",
    "load_matrix",
    "required_sampling_times",
    "run_nmc",
    "run_stct",
    "save_matrix",
    "symmetric_noise",
    "verify",
]
