"""Input validation helpers shared by the public API and the estimators."""
from __future__ import annotations

import math
import numbers

import numpy as np


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_probability(value, name: str, *, open_low: bool = False, open_high: bool = False) -> float:
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    low_ok = value > 0 if open_low else value >= 0
    high_ok = value < 1 if open_high else value <= 1
    if not (low_ok and high_ok) or math.isnan(value):
        lo = "(" if open_low else "["
        hi = ")" if open_high else "]"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {value}")
    return value


def check_positive_real(value, name: str, *, allow_zero: bool = False) -> float:
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value}")
    return value


def check_node(node_count: int, v) -> int:
    if isinstance(v, (bool, np.bool_)) or not isinstance(v, numbers.Integral):
        raise TypeError(f"node id must be an integer, got {type(v).__name__}")
    v = int(v)
    if not 0 <= v < node_count:
        raise IndexError(f"node id {v} out of range [0, {node_count})")
    return v


def target_count(fraction: float, node_count: int) -> int:
    """Smallest adopted count that meets ``fraction`` of ``node_count``.

    A tiny tolerance absorbs binary rounding, so 0.99 * 10000 gives 9900
    rather than 9901.
    """
    return max(0, math.ceil(fraction * node_count - 1e-9))


def check_counts(counts) -> np.ndarray:
    """Coerce a growth curve (or anything array-like) to a 1-D int64 array."""
    arr = np.asarray(getattr(counts, "counts", counts))
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D sequence of counts, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError("counts must be finite")
    return arr.astype(np.int64, copy=False)


def check_curves(X) -> list:
    """Accept a GrowthCurve, a list of curves, or a 2-D array (one curve per row)."""
    if hasattr(X, "counts"):
        curves = [X]
    elif isinstance(X, np.ndarray) and X.ndim == 1 and X.dtype != object:
        curves = [X]
    else:
        curves = list(X)
    if not curves:
        raise ValueError("expected at least one curve")
    for i, c in enumerate(curves):
        arr = check_counts(c)
        if arr.size < 1 or np.any(np.diff(arr) < 0):
            raise ValueError(f"curve {i} must be a non-empty nondecreasing count sequence")
    return curves
