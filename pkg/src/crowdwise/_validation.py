"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

MAX_SEED = 2**64 - 1


def check_stochastic(P, *, name="P"):
    """Return ``P`` as a :class:`~crowdwise.stochastic.RowStochasticMatrix`.

    Accepts an existing ``RowStochasticMatrix`` (returned unchanged), a dense
    array-like, or a scipy sparse matrix.
    """
    from .stochastic import RowStochasticMatrix

    if isinstance(P, RowStochasticMatrix):
        return P
    return RowStochasticMatrix(P)


def check_int(value, name, *, min_value=None, max_value=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if min_value is not None and value < min_value:
        raise ValueError(f"{name} must be >= {min_value}, got {value}")
    if max_value is not None and value > max_value:
        raise ValueError(f"{name} must be <= {max_value}, got {value}")
    return value


def check_scalar(value, name, *, gt=None, ge=None, lt=None, le=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if gt is not None and not value > gt:
        raise ValueError(f"{name} must be > {gt}, got {value}")
    if ge is not None and not value >= ge:
        raise ValueError(f"{name} must be >= {ge}, got {value}")
    if lt is not None and not value < lt:
        raise ValueError(f"{name} must be < {lt}, got {value}")
    if le is not None and not value <= le:
        raise ValueError(f"{name} must be <= {le}, got {value}")
    return value


def check_seed(seed, name="seed"):
    if seed is None:
        raise ValueError(f"{name} is required; wall-clock seeding is not supported")
    return check_int(seed, name, min_value=0, max_value=MAX_SEED)


def check_grid(grid, *, min_length=1, name="n_grid"):
    """Validate a strictly increasing list of positive integer sizes."""
    try:
        values = [check_int(v, name) for v in grid]
    except TypeError as err:
        raise TypeError(f"{name} must contain integers") from err
    if len(values) < min_length:
        raise ValueError(f"{name} must have at least {min_length} entries, got {len(values)}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing, got {values}")
    return values
