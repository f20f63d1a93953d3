"""Input checks shared by the estimator classes."""
from __future__ import annotations

import numbers

from .groups import Group, group_from_config
from .walk import Measure, build_measure, uniform_measure


def check_group(X) -> Group:
    """Accept a :class:`Group` or a group config block."""
    if isinstance(X, Group):
        return X
    if isinstance(X, dict):
        return group_from_config(X)
    raise TypeError(f"expected a Group or a group config dict, got {type(X).__name__}")


def check_measure(X) -> Measure:
    """Accept a :class:`Measure` or a dict ``{"group": ..., "measure": ...}``.

    The measure block is ``{"uniform": true}`` or ``{"support": [[elem, p], ...]}``.
    """
    if isinstance(X, Measure):
        return X
    if isinstance(X, dict) and "group" in X:
        group = check_group(X["group"])
        block = X.get("measure", {"uniform": True})
        if block.get("uniform"):
            return uniform_measure(group)
        return build_measure(group, [(x, p) for x, p in block["support"]])
    raise TypeError(f"expected a Measure or a config dict with a group block, got {type(X).__name__}")


def check_positive_int(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_nonnegative(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not value >= 0:
        raise ValueError(f"{name} must be a nonnegative number, got {value!r}")
    return float(value)


def check_seed(seed):
    if seed is None:
        raise ValueError("a seed is required for reproducible sampling")
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)
