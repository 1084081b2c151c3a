"""Sign-change counting and limit-set checks for cyclic feedback systems."""

import json

from . import _core
from ._core import (
    CyclofeedError,
    Model,
    OmegaSet,
    additive_compound,
    antithetic_controller,
    builtin_model,
    builtin_names,
    canonical_transform,
    feedback_signs,
    in_lambda,
    is_metzler,
    is_two_positive_pattern,
    ntilde,
    omega_limit,
    parse_model,
    poincare_map,
    random_two_positive_linear,
    sigma,
    sigma_min_max,
    simulate,
)

__version__ = "0.1.0"


def sigma_trace(model, x, y, t1=1.0, step=None):
    """Returns (times, sigma, report) with sigma 0 at samples off Lambda."""
    times, values, report = _core.sigma_trace(model, x, y, t1, step)
    return times, values, json.loads(report)


def verify_sigma_constancy(model, omega, pair_budget=50, periods=5.0):
    return json.loads(_core.verify_sigma_constancy(model, omega, pair_budget, periods))


def verify_embedding(omega):
    return json.loads(_core.verify_embedding(omega))


def verify_conjugacy(omega, model):
    return json.loads(_core.verify_conjugacy(omega, model))
