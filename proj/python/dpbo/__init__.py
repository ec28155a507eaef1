"""Differentially private Bayesian optimization over a finite hyper-parameter grid.

Grids are numpy arrays with one point per row. Release functions return
dicts laid out like the CLI's JSON records.
"""

from ._dpbo import (
    ObjectiveError,
    beta,
    exponential_probabilities,
    exponential_select,
    gp_posterior,
    gram,
    info_gain,
    k2,
    laplace_samples,
    lattice_grid,
    likelihood_curve,
    plan_noisy,
    run_exact,
    run_lipschitz,
    run_noisy,
    sobol_grid,
    stability_bound,
    synthetic_matrices,
    train_erm,
    ucb_select,
)

__all__ = [
    "ObjectiveError",
    "beta",
    "exponential_probabilities",
    "exponential_select",
    "gp_posterior",
    "gram",
    "info_gain",
    "k2",
    "laplace_samples",
    "lattice_grid",
    "likelihood_curve",
    "plan_noisy",
    "run_exact",
    "run_lipschitz",
    "run_noisy",
    "sobol_grid",
    "stability_bound",
    "synthetic_matrices",
    "train_erm",
    "ucb_select",
]
