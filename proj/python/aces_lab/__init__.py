"""Averaged circuit eigenvalue sampling for syndrome extraction circuits."""

from ._core import (
    Circuit,
    Dataset,
    Design,
    NoiseModel,
    basic_design,
    build_rotated_circuit,
    build_unrotated_circuit,
    depolarising_noise,
    design_from_tuples,
    design_matrix,
    estimate,
    load_dataset,
    load_design,
    lognormal_noise,
    merit,
    optimise_design,
    project_simplex,
    save_dataset,
    save_design,
    simulate,
    transfer_design,
    true_eigenvalues,
    wht_forward,
    wht_inverse,
)

__all__ = [
    "Circuit",
    "Dataset",
    "Design",
    "NoiseModel",
    "basic_design",
    "build_rotated_circuit",
    "build_unrotated_circuit",
    "depolarising_noise",
    "design_from_tuples",
    "design_matrix",
    "estimate",
    "load_dataset",
    "load_design",
    "lognormal_noise",
    "merit",
    "optimise_design",
    "project_simplex",
    "save_dataset",
    "save_design",
    "simulate",
    "transfer_design",
    "true_eigenvalues",
    "wht_forward",
    "wht_inverse",
]
