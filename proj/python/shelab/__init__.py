"""Monte Carlo lab for the 1+1D stochastic heat equation with Dirac initial data."""

import json

from ._shelab import (
    ConfigError,
    DomainError,
    EstimationError,
    IoError,
    __version__,
    heat_kernel,
    kernel_product_identity,
    kernel_shift_identity,
    lemma_2,
    lemma_s0,
    lemma_twotime,
    lemma_y,
    limiting_constant,
    log_heat_kernel,
    reduced_cov_integral,
    second_moment_normalized,
    simulate_normalized,
)
from . import _shelab


def validation_errors(config: dict) -> list:
    """Every violated invariant of an experiment configuration (empty when valid)."""
    return _shelab.validation_errors(json.dumps(config))


def run(config: dict) -> dict:
    """Runs an experiment described by a config dict; returns the parsed report."""
    return json.loads(_shelab.run_json(json.dumps(config)))


def table(report: dict, series: str) -> list:
    """Rows (t, lag_or_N, estimate, se, n_effective) of one table of a report."""
    for t in report["tables"]:
        if t["series"] == series:
            return t["rows"]
    raise KeyError(series)
