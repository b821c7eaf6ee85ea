import math
import typing as t

import numpy as np
import typing_extensions as te

from .exception import ProdSpaceException
from .product import ProductSpace
from .utils import TIntPair, TPair, TPairLike, as_pair, positive_pair

TSymbolFunc = t.Callable[[np.ndarray, np.ndarray], np.ndarray]

# smoothness order recorded for C-infinity symbols
SMOOTH: te.Final = 10**6


class Symbol:
    """
    A spectral function F(lambda_1, lambda_2) on [0, inf)^2 together with the
    metadata the localization results depend on. The operator built from it is
    F(sqrt L_1, sqrt L_2).
    """

    _func: TSymbolFunc
    _name: str
    _even: bool = True
    _support_box: t.Optional[TPair] = None
    _smoothness_k: t.Optional[TIntPair] = None
    _decay_r: t.Optional[float] = None
    _zero_mode_excluded: bool = False
    _fourier_support: t.Optional[float] = None

    def __init__(
        self,
        func: TSymbolFunc,
        name: str = "symbol",
        even: bool = True,
        support_box: t.Optional[TPairLike] = None,
        smoothness_k: t.Optional[TIntPair] = None,
        decay_r: t.Optional[float] = None,
        zero_mode_excluded: bool = False,
        fourier_support: t.Optional[float] = None,
    ):
        self._func = func
        self._name = name
        self._even = even
        self._support_box = None if support_box is None else positive_pair(support_box, "support_box")
        self._smoothness_k = smoothness_k
        self._decay_r = decay_r
        self._zero_mode_excluded = zero_mode_excluded
        self._fourier_support = fourier_support
        if self._support_box is not None:
            leak = self.support_violation()
            if leak > 0:
                raise ProdSpaceException(
                    f"symbol {name} does not vanish outside its support box (max {leak:.3g})"
                )

    def __repr__(self) -> str:
        return f"Symbol({self._name})"

    def __call__(self, l1: t.Any, l2: t.Any) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(l1, dtype=float), np.asarray(l2, dtype=float))
        return np.asarray(self._func(a, b), dtype=float)

    def get_name(self) -> str:
        return self._name

    def is_even(self) -> bool:
        return self._even

    def get_support_box(self) -> t.Optional[TPair]:
        return self._support_box

    def get_smoothness_k(self) -> t.Optional[TIntPair]:
        return self._smoothness_k

    def get_decay_r(self) -> t.Optional[float]:
        return self._decay_r

    def is_zero_mode_excluded(self) -> bool:
        return self._zero_mode_excluded

    def get_fourier_support(self) -> t.Optional[float]:
        """
        A > 0 such that every univariate profile in lambda_1 has Fourier
        transform supported in [-A, A]; None if the symbol is not band-limited.
        """
        return self._fourier_support

    def support_violation(self, grid_size: int = 64) -> float:
        if self._support_box is None:
            return 0.0
        r1, r2 = self._support_box
        u1 = np.linspace(0.0, 2.0 * r1, grid_size)
        u2 = np.linspace(0.0, 2.0 * r2, grid_size)
        g1, g2 = np.meshgrid(u1, u2, indexing="ij")
        outside = (g1 >= r1) | (g2 >= r2)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.abs(self(g1, g2))
        vals = np.where(np.isfinite(vals), vals, 0.0)
        return float(vals[outside].max()) if outside.any() else 0.0

    def times(self, other: "Symbol") -> "Symbol":
        """
        Pointwise product. Decay orders add, and so do Fourier support radii.
        """
        f, g = self._func, other._func
        support = None
        if self._support_box is not None and other._support_box is not None:
            support = (
                min(self._support_box[0], other._support_box[0]),
                min(self._support_box[1], other._support_box[1]),
            )
        elif self._support_box is not None or other._support_box is not None:
            support = self._support_box or other._support_box
        return Symbol(
            lambda a, b: f(a, b) * g(a, b),
            name=f"{self._name}*{other._name}",
            even=self._even and other._even,
            support_box=support,
            smoothness_k=_min_pair(self._smoothness_k, other._smoothness_k),
            decay_r=_sum_or_none(self._decay_r, other._decay_r),
            fourier_support=_sum_or_none(self._fourier_support, other._fourier_support),
            zero_mode_excluded=self._zero_mode_excluded or other._zero_mode_excluded,
        )

    def grid(self, ps: ProductSpace, delta: TPairLike = 1.0) -> np.ndarray:
        """
        F(delta_1 sqrt(lambda_1k), delta_2 sqrt(lambda_2l)) on the coefficient
        grid. The (0, 0) mode is set to 0 for zero-mode-excluded symbols.
        """
        d1, d2 = as_pair(delta, "delta")
        s1, s2 = ps.get_sqrt_eigen_grid()
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = self(d1 * s1, d2 * s2)
        if self._zero_mode_excluded:
            vals = np.where((s1 == 0) & (s2 == 0), 0.0, vals)
        if not np.all(np.isfinite(vals)):
            raise ProdSpaceException(f"symbol {self._name} is not finite on the band")
        return vals


def _sum_or_none(a: t.Optional[float], b: t.Optional[float]) -> t.Optional[float]:
    return None if a is None or b is None else a + b


def _min_pair(a: t.Optional[TIntPair], b: t.Optional[TIntPair]) -> t.Optional[TIntPair]:
    if a is None or b is None:
        return None
    return (min(a[0], b[0]), min(a[1], b[1]))


def constant_symbol(value: float = 1.0) -> Symbol:
    return Symbol(
        lambda l1, l2: np.full(np.shape(l1), float(value)),
        name=f"constant({value:g})",
        smoothness_k=(SMOOTH, SMOOTH),
    )


def gaussian_symbol() -> Symbol:
    """
    exp(-l1^2 - l2^2), so that F(t sqrt L) = exp(-t1^2 L_1 - t2^2 L_2).
    """
    return Symbol(
        lambda l1, l2: np.exp(-(l1**2) - l2**2),
        name="gaussian",
        smoothness_k=(SMOOTH, SMOOTH),
        decay_r=math.inf,
    )


def heat_symbol(t_pair: TPairLike) -> Symbol:
    t1, t2 = positive_pair(t_pair, "t")
    return Symbol(
        lambda l1, l2: np.exp(-t1 * l1**2 - t2 * l2**2),
        name=f"heat(t={t1:g},{t2:g})",
        smoothness_k=(SMOOTH, SMOOTH),
        decay_r=math.inf,
    )


def bump_profile(u: np.ndarray) -> np.ndarray:
    """
    exp(1 - 1/(1 - u^2)) on |u| < 1, zero elsewhere; equals 1 at u = 0.
    """
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    safe = np.where(inside, u, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe**2)), 0.0)


def bump_symbol(radius: TPairLike) -> Symbol:
    r1, r2 = positive_pair(radius, "radius")
    return Symbol(
        lambda l1, l2: bump_profile(l1 / r1) * bump_profile(l2 / r2),
        name=f"bump(R={r1:g},{r2:g})",
        support_box=(r1, r2),
        smoothness_k=(SMOOTH, SMOOTH),
    )


def separable_symbol(
    f1: t.Callable[[np.ndarray], np.ndarray],
    f2: t.Callable[[np.ndarray], np.ndarray],
    name: str = "separable",
    **metadata: t.Any,
) -> Symbol:
    return Symbol(lambda l1, l2: f1(l1) * f2(l2), name=name, **metadata)


def fejer_symbol(a: float, order: int = 6) -> Symbol:
    """
    (sin(a l1 / m) / (a l1 / m))^(2m) exp(-l2^2). The Fourier transform of the
    first profile is supported in [-2a, 2a].
    """
    if a <= 0:
        raise ProdSpaceException(f"A must be positive, got {a}")
    return Symbol(
        lambda l1, l2: np.sinc(a * l1 / (order * math.pi)) ** (2 * order) * np.exp(-(l2**2)),
        name=f"fejer(A={a:g},m={order})",
        smoothness_k=(SMOOTH, SMOOTH),
        fourier_support=2.0 * a,
    )
