"""Decomposition of a total effect through two mediators.

Thin wrappers over the compiled core. Structured inputs and outputs are plain
dicts; data columns are numpy arrays.
"""

import json

import numpy as np

from . import _twomed
from ._twomed import (
    ConfigError,
    DataError,
    DomainError,
    Error,
    EstimationError,
    StructuralError,
)

__version__ = _twomed.version()

__all__ = [
    "ConfigError",
    "DataError",
    "DomainError",
    "Error",
    "EstimationError",
    "StructuralError",
    "analyze",
    "analyze_csv",
    "closed_form",
    "simulate",
    "total_effect_polynomial",
    "validate",
]


def _dumps(obj):
    return json.dumps(obj if obj is not None else {})


def closed_form(coefficients, reference):
    """Components and aggregates implied by fitted linear model coefficients.

    ``coefficients`` holds theta (8), beta (4), gamma (2), the optional
    covariate slopes theta_c/beta_c/gamma_c and sigma_m1. ``reference`` holds
    a, a_star, m1_star, m2_star, covariates and topology.
    """
    return json.loads(_twomed.closed_form(_dumps(coefficients), _dumps(reference)))


def total_effect_polynomial(coefficients, reference):
    return _twomed.total_effect_polynomial(_dumps(coefficients), _dumps(reference))


def analyze(a, m1, m2, y, covariates=None, covariate_names=None, config=None):
    """Fit the models to in-memory columns and return the report as a dict.

    ``config`` uses the same keys as a JSON run configuration file; its
    column names are ignored in favour of the arrays passed here.
    """
    cols = [np.ascontiguousarray(v, dtype=float) for v in (a, m1, m2, y)]
    if covariates is not None:
        covariates = np.asarray(covariates, dtype=float)
        if covariates.ndim == 1:
            covariates = covariates.reshape(-1, 1)
    out = _twomed.analyze(*cols, covariates, list(covariate_names or []), _dumps(config))
    return json.loads(out)


def analyze_csv(path, config=None):
    return json.loads(_twomed.analyze_csv(str(path), _dumps(config)))


def simulate(spec, n, config=None, mc_n=0):
    """Draw ``n`` rows from a structural model spec.

    Returns ``(columns, truth)``: a dict of numpy arrays keyed by column name
    and the ground-truth dict.
    """
    columns, truth = _twomed.simulate(_dumps(spec), _dumps(config), int(n), int(mc_n))
    return dict(columns), json.loads(truth)


def validate(spec, config=None, tol=1e-12, se_multiplier=3.0, max_exceedances=0, mc_n=1_000_000):
    out = _twomed.validate(_dumps(spec), _dumps(config), tol, se_multiplier, max_exceedances, mc_n)
    return json.loads(out)
