"""Steklov spectra of warped balls: forward map, asymptotics, kernels and inversion."""

from ._steklov import (
    NumericalError,
    SpectrumEntry,
    SteklovSpectrum,
    TransversalSpectrum,
    TruncatedTerm,
    Warping,
    WeylOptions,
    beta_coefficients,
    blaschke_index,
    dirichlet_eigenvalues,
    expansion_sigma,
    forward_spectrum,
    kernel_diagonal,
    local_uniqueness_probe,
    reconstruct_warping,
    stability_experiment,
    transfer_identity,
    truncation_selector,
    weyl_m,
)

__all__ = [
    "NumericalError",
    "SpectrumEntry",
    "SteklovSpectrum",
    "TransversalSpectrum",
    "TruncatedTerm",
    "Warping",
    "WeylOptions",
    "beta_coefficients",
    "blaschke_index",
    "dirichlet_eigenvalues",
    "expansion_sigma",
    "forward_spectrum",
    "kernel_diagonal",
    "local_uniqueness_probe",
    "reconstruct_warping",
    "stability_experiment",
    "transfer_identity",
    "truncation_selector",
    "weyl_m",
]
