import math
import typing as t

import numpy as np

from .exception import ProdSpaceException

TPair = t.Tuple[float, float]
TIntPair = t.Tuple[int, int]
TPairLike = t.Union[float, int, t.Sequence[float]]
TIntPairLike = t.Union[int, t.Sequence[int]]

TINY = 1e-300


def as_pair(value: TPairLike, name: str = "value") -> TPair:
    if isinstance(value, (int, float, np.integer, np.floating)):
        return (float(value), float(value))
    items = tuple(float(v) for v in value)
    if len(items) != 2:
        raise ProdSpaceException(f"{name} must be a pair, got {value!r}")
    return (items[0], items[1])


def as_int_pair(value: TIntPairLike, name: str = "value") -> TIntPair:
    if isinstance(value, (int, np.integer)):
        return (int(value), int(value))
    items = tuple(int(v) for v in value)
    if len(items) != 2:
        raise ProdSpaceException(f"{name} must be a pair of integers, got {value!r}")
    return (items[0], items[1])


def positive_pair(value: TPairLike, name: str) -> TPair:
    pair = as_pair(value, name)
    if pair[0] <= 0 or pair[1] <= 0:
        raise ProdSpaceException(f"{name} must be positive componentwise, got {pair}")
    return pair


def grid_norm(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """
    Weighted L^p (quasi-)norm of grid samples; p = inf is the grid maximum.
    """
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float(np.sum(weights * a**p) ** (1.0 / p))


def ell_q(values: np.ndarray, q: float, axis: t.Optional[int] = None) -> np.ndarray:
    a = np.abs(values)
    if math.isinf(q):
        return a.max(axis=axis)
    return np.sum(a**q, axis=axis) ** (1.0 / q)


def relative_change(a: float, b: float) -> float:
    scale = max(abs(a), abs(b), TINY)
    return abs(a - b) / scale


def dyadic_radii(diameter: float, n_scales: int) -> np.ndarray:
    return diameter * 2.0 ** (-np.arange(n_scales + 1, dtype=float))


def format_float(value: float) -> str:
    if value is None:
        return ""
    if math.isinf(value) or math.isnan(value):
        return str(value)
    return f"{value:.12g}"
