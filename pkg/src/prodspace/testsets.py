import typing as t

import numpy as np

from .calculus import CoefField
from .exception import BandOverflowException
from .product import ProductSpace


def random_fields(ps: ProductSpace, n: int, seed: int = 0) -> t.List[CoefField]:
    """
    n fields with coefficients (1 + k)^-1 (1 + l)^-1 U(-1, 1), drawn from one
    seeded generator so the family is reproducible.
    """
    rng = np.random.default_rng(seed)
    rows, cols = ps.get_coef_shape()
    decay = np.outer(1.0 / (1.0 + np.arange(rows)), 1.0 / (1.0 + np.arange(cols)))
    return [CoefField(ps, decay * rng.uniform(-1.0, 1.0, size=(rows, cols))) for _ in range(n)]


def mode_field(ps: ProductSpace, k: int, l: int, amplitude: float = 1.0) -> CoefField:
    """
    amplitude * e_1k (x) e_2l.
    """
    rows, cols = ps.get_coef_shape()
    if not (0 <= k < rows and 0 <= l < cols):
        raise BandOverflowException(f"mode ({k}, {l}) lies outside the band {rows} x {cols}")
    coefs = np.zeros((rows, cols))
    coefs[k, l] = amplitude
    return CoefField(ps, coefs)


def mode_family(ps: ProductSpace, max_index: t.Optional[int] = None, stride: int = 1) -> t.List[CoefField]:
    """
    Single modes (k, l) for k, l < max_index taken with the given stride.
    """
    rows, cols = ps.get_coef_shape()
    limit = max_index if max_index is not None else max(rows, cols)
    return [
        mode_field(ps, k, l)
        for k in range(0, min(rows, limit), stride)
        for l in range(0, min(cols, limit), stride)
    ]
