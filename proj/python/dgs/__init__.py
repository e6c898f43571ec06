"""Gradient-based Metropolis-Hastings samplers for discrete state spaces."""

import json as _json

from ._dgs import (
    DimensionError,
    IsingModel,
    OrdinalPolyMixture,
    ParameterError,
    QuadraticTarget,
    RegressionHyper,
    SparseRegressionPosterior,
    StateSpace,
    Target,
    __version__,
    adapt_gamma,
    ess,
    ess_chains,
    exact_distribution,
    lattice_ising,
    marginal_kl,
    ordinal_grid,
    read_npy,
    sample,
    stationarity_error,
    transition_matrix,
    write_npy,
)
from ._dgs import run_experiment as _run_experiment


def run_experiment(experiment, config=None, paper_scale=False):
    """Run ordinal, regression, ising-pcd or oracle-check.

    `config` is a dict with the keys of the CLI config file; missing keys
    keep their defaults. Set "out" to "" to skip writing files.
    """
    text = _json.dumps(config) if config else ""
    return _run_experiment(experiment, text, paper_scale)


__all__ = [name for name in dir() if not name.startswith("_")]
