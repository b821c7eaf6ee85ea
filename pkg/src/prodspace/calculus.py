import csv
import io
import logging
import math
import typing as t

import numpy as np
import typing_extensions as te

from .coordspace import SpectralModel
from .exception import PreconditionException, ShapeException
from .product import (
    DKernelParams,
    ProductSpace,
    axis_dstar,
    axis_volumes,
    dkernel_slice,
    refine_product,
    sample_points,
)
from .report import VerificationReport
from .symbols import Symbol, fejer_symbol
from .utils import TPair, TPairLike, as_pair, positive_pair

logger = logging.getLogger(__name__)

TRect = t.Tuple[t.Tuple[float, float], t.Tuple[float, float]]

TRUNCATION_TOLERANCE: te.Final = 1e-8
SLOPE_SLACK: te.Final = 0.5


class CoefField:
    """
    f = sum_{k,l} c[k, l] e_1k (x) e_2l on a product space.
    """

    _ps: ProductSpace
    _coefs: np.ndarray

    def __init__(self, ps: ProductSpace, coefs: np.ndarray):
        coefs = np.array(coefs, dtype=float)
        if coefs.shape != ps.get_coef_shape():
            raise ShapeException(
                f"coefficients of shape {coefs.shape} do not match band {ps.get_coef_shape()}"
            )
        coefs.flags.writeable = False
        self._ps = ps
        self._coefs = coefs

    def __repr__(self) -> str:
        return f"CoefField(shape={self._coefs.shape})"

    def __add__(self, other: "CoefField") -> "CoefField":
        return self.with_coefs(self._coefs + other.get_coefs())

    def __sub__(self, other: "CoefField") -> "CoefField":
        return self.with_coefs(self._coefs - other.get_coefs())

    def get_space(self) -> ProductSpace:
        return self._ps

    def get_coefs(self) -> np.ndarray:
        return self._coefs

    def scaled(self, factor: float) -> "CoefField":
        return self.with_coefs(factor * self._coefs)

    def with_coefs(self, coefs: np.ndarray) -> "CoefField":
        return CoefField(self._ps, coefs)

    def with_space(self, ps: ProductSpace) -> "CoefField":
        """
        Same coefficients on another quadrature of the same band.
        """
        return CoefField(ps, self._coefs)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self._coefs**2)))

    def synthesize(self) -> np.ndarray:
        return synthesize(self)


def analyze(ps: ProductSpace, f: np.ndarray) -> CoefField:
    f = np.asarray(f, dtype=float)
    if f.shape != ps.get_shape():
        raise ShapeException(f"grid values of shape {f.shape} do not match grid {ps.get_shape()}")
    m1, m2 = ps.get_models()
    a1 = m1.get_eigenfunctions() * m1.get_weights()
    a2 = m2.get_eigenfunctions() * m2.get_weights()
    return CoefField(ps, a1 @ f @ a2.T)


def synthesize(cf: CoefField) -> np.ndarray:
    m1, m2 = cf.get_space().get_models()
    return m1.get_eigenfunctions().T @ cf.get_coefs() @ m2.get_eigenfunctions()


def apply_symbol(symbol: Symbol, cf: CoefField) -> CoefField:
    return cf.with_coefs(symbol.grid(cf.get_space()) * cf.get_coefs())


def apply_coef_weights(weights: np.ndarray, cf: CoefField) -> CoefField:
    return cf.with_coefs(weights * cf.get_coefs())


class KernelSlice:
    """
    One row y -> K(x0, y) of an operator kernel sampled on the product grid.
    """

    _ps: ProductSpace
    _anchor: t.Tuple[float, float]
    _values: np.ndarray
    _delta: TPair
    _tail_bound: float = 0.0

    def __init__(
        self,
        ps: ProductSpace,
        anchor: t.Tuple[float, float],
        values: np.ndarray,
        delta: TPairLike = 1.0,
        tail_bound: float = 0.0,
    ):
        values = np.array(values, dtype=float)
        values.flags.writeable = False
        self._ps = ps
        self._anchor = (float(anchor[0]), float(anchor[1]))
        self._values = values
        self._delta = as_pair(delta, "delta")
        self._tail_bound = float(tail_bound)

    def get_space(self) -> ProductSpace:
        return self._ps

    def get_anchor(self) -> t.Tuple[float, float]:
        return self._anchor

    def get_values(self) -> np.ndarray:
        return self._values

    def get_delta(self) -> TPair:
        return self._delta

    def get_tail_bound(self) -> float:
        return self._tail_bound

    def integral(self) -> float:
        return float(np.sum(self._ps.get_product_weights() * self._values))

    def max_abs(self) -> float:
        return float(np.abs(self._values).max())

    def to_csv(self) -> str:
        return grid_to_csv(self._ps, self._values)


def grid_to_csv(ps: ProductSpace, values: np.ndarray) -> str:
    """
    One row per grid node: node indices, coordinates and the value.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j", "y1", "y2", "value"])
    n1, n2 = values.shape
    y1, y2 = ps.get_m1().get_nodes(), ps.get_m2().get_nodes()
    for i in range(n1):
        for j in range(n2):
            writer.writerow([i, j, f"{y1[i]:.12g}", f"{y2[j]:.12g}", f"{values[i, j]:.12g}"])
    return buf.getvalue()


def _slice_from_grid(ps: ProductSpace, coef_grid: np.ndarray, x: t.Tuple[float, float]) -> np.ndarray:
    m1, m2 = ps.get_models()
    e1x = m1.eval_eigenfunctions([x[0]])[:, 0]
    e2x = m2.eval_eigenfunctions([x[1]])[:, 0]
    weighted = coef_grid * np.outer(e1x, e2x)
    return m1.get_eigenfunctions().T @ weighted @ m2.get_eigenfunctions()


def kernel_value(
    ps: ProductSpace, symbol: Symbol, delta: TPairLike, x: t.Tuple[float, float], y: t.Tuple[float, float]
) -> float:
    m1, m2 = ps.get_models()
    a = m1.eval_eigenfunctions([x[0]])[:, 0] * m1.eval_eigenfunctions([y[0]])[:, 0]
    b = m2.eval_eigenfunctions([x[1]])[:, 0] * m2.eval_eigenfunctions([y[1]])[:, 0]
    return float(a @ symbol.grid(ps, delta) @ b)


def heat_kernel(ps: ProductSpace, t_pair: TPairLike, x: t.Tuple[float, float]) -> KernelSlice:
    """
    p_t(x, .) = p_{1,t1}(x1, .) p_{2,t2}(x2, .) truncated to the band; the
    recorded tail bound is max_i exp(-t_i lambda_i,max).
    """
    t1, t2 = positive_pair(t_pair, "t")
    m1, m2 = ps.get_models()
    grid = np.outer(np.exp(-t1 * m1.get_eigenvalues()), np.exp(-t2 * m2.get_eigenvalues()))
    tail = max(
        math.exp(-t1 * float(m1.get_eigenvalues().max())),
        math.exp(-t2 * float(m2.get_eigenvalues().max())),
    )
    if tail > TRUNCATION_TOLERANCE:
        logger.warning("heat kernel at t=%s: truncation bound %.3g exceeds %.1g", (t1, t2), tail, TRUNCATION_TOLERANCE)
    return KernelSlice(ps, x, _slice_from_grid(ps, grid, x), delta=(math.sqrt(t1), math.sqrt(t2)), tail_bound=tail)


def _axis_heat_matrix(model: SpectralModel, xs: np.ndarray, tau: float) -> np.ndarray:
    ex = model.eval_eigenfunctions(xs)
    decay = np.exp(-tau * model.get_eigenvalues())
    return (ex * decay[:, None]).T @ model.get_eigenfunctions()


def gaussian_envelope_fit(
    ps: ProductSpace,
    t_values: t.Sequence[float] = (0.125, 0.25, 0.5, 1.0, 2.0, 4.0),
    sigma: TPairLike = (2.0, 2.0),
    max_samples: int = 32,
) -> VerificationReport:
    """
    c = max p_{(t,t)}(x, y) / D_{sqrt t, sigma}(x, y) over a t sweep and
    sampled anchors x. Both sides factor over the axes, so c is a product of
    per-axis maxima.
    """
    s1, s2 = as_pair(sigma, "sigma")

    def measure(space: ProductSpace) -> float:
        worst = 0.0
        for tau in t_values:
            c = 1.0
            for model, sig in zip(space.get_models(), (s1, s2)):
                xs = sample_points(model, max_samples)
                rt = math.sqrt(tau)
                p = _axis_heat_matrix(model, xs, tau)
                vx = axis_volumes(model, rt, xs)
                vy = axis_volumes(model, rt)
                d = axis_dstar(model, xs, model.get_nodes(), rt, sig) / np.sqrt(np.outer(vx, vy))
                c *= float(np.max(np.abs(p) / d))
            worst = max(worst, c)
        return worst

    coarse = measure(ps)
    fine = measure(refine_product(ps))
    report = VerificationReport("heat-gaussian-envelope", anchor="heat/gaussian-upper-bound")
    report.set_params({"t_values": list(t_values), "sigma": [s1, s2]})
    report.set_measured_constant(coarse).set_refined_constant(fine)
    return report


class RectUnion:
    """
    A finite union of half-open rectangles [a1, b1) x [a2, b2) in the
    eigenvalue plane of (L_1, L_2). Membership is a set predicate, so
    overlapping pieces are never counted twice.
    """

    _rects: t.Tuple[TRect, ...]

    def __init__(self, rects: t.Iterable[TRect] = ()):
        cleaned = []
        for (a1, b1), (a2, b2) in rects:
            if a1 < b1 and a2 < b2:
                cleaned.append(((float(a1), float(b1)), (float(a2), float(b2))))
        self._rects = tuple(cleaned)

    def __repr__(self) -> str:
        return f"RectUnion({list(self._rects)})"

    @classmethod
    def whole(cls) -> "RectUnion":
        return cls([((0.0, math.inf), (0.0, math.inf))])

    @classmethod
    def from_sqrt_boxes(cls, boxes: t.Iterable[TRect]) -> "RectUnion":
        """
        Half-open boxes in sqrt(lambda) mapped to the eigenvalue plane.
        """
        return cls(
            ((max(a1, 0.0) ** 2, b1**2), (max(a2, 0.0) ** 2, b2**2)) for (a1, b1), (a2, b2) in boxes
        )

    def get_rects(self) -> t.Tuple[TRect, ...]:
        return self._rects

    def is_empty(self) -> bool:
        return not self._rects

    def contains(self, l1: t.Any, l2: t.Any) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(l1, dtype=float), np.asarray(l2, dtype=float))
        out = np.zeros(a.shape, dtype=bool)
        for (a1, b1), (a2, b2) in self._rects:
            out |= (a >= a1) & (a < b1) & (b >= a2) & (b < b2)
        return out

    def intersect(self, other: "RectUnion") -> "RectUnion":
        pieces = []
        for (a1, b1), (a2, b2) in self._rects:
            for (c1, e1), (c2, e2) in other.get_rects():
                pieces.append(((max(a1, c1), min(b1, e1)), (max(a2, c2), min(b2, e2))))
        return RectUnion(pieces)

    def union(self, other: "RectUnion") -> "RectUnion":
        return RectUnion(self._rects + other.get_rects())


class SpectralProjector:
    """
    E(S) on the band: multiplication of coefficients by the indicator of S.
    """

    _ps: ProductSpace
    _mask: np.ndarray

    def __init__(self, ps: ProductSpace, mask: np.ndarray):
        mask = np.array(mask, dtype=bool)
        mask.flags.writeable = False
        self._ps = ps
        self._mask = mask

    def get_mask(self) -> np.ndarray:
        return self._mask

    def apply(self, cf: CoefField) -> CoefField:
        return cf.with_coefs(np.where(self._mask, cf.get_coefs(), 0.0))

    def compose(self, other: "SpectralProjector") -> "SpectralProjector":
        return SpectralProjector(self._ps, self._mask & other.get_mask())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpectralProjector):
            return NotImplemented
        return bool(np.array_equal(self._mask, other.get_mask()))

    def __hash__(self) -> int:
        return hash(self._mask.tobytes())


def spectral_projector(ps: ProductSpace, rects: t.Union[RectUnion, t.Iterable[TRect]]) -> SpectralProjector:
    union = rects if isinstance(rects, RectUnion) else RectUnion(rects)
    l1 = ps.get_m1().get_eigenvalues()[:, None]
    l2 = ps.get_m2().get_eigenvalues()[None, :]
    return SpectralProjector(ps, union.contains(l1, l2))


def _tail_bound(symbol: Symbol, ps: ProductSpace, delta: TPair) -> float:
    # sup |F(delta u)| just past the band edge along both axes, relative to the band sup
    (r1, r2), (d1, d2) = ps.get_band_radius(), delta
    band_sup = float(np.abs(symbol.grid(ps, delta)).max())
    if band_sup == 0:
        return 0.0
    u1 = np.linspace(r1, 4.0 * max(r1, 1.0), 64)
    u2 = np.linspace(r2, 4.0 * max(r2, 1.0), 64)
    with np.errstate(divide="ignore", invalid="ignore"):
        outside = np.concatenate(
            [np.abs(symbol(d1 * u1, 0.0 * u1)), np.abs(symbol(0.0 * u2, d2 * u2))]
        )
    outside = np.where(np.isfinite(outside), outside, 0.0)
    return float(outside.max()) / band_sup


def kernel_of_symbol(
    ps: ProductSpace, symbol: Symbol, delta: TPairLike, x: t.Tuple[float, float]
) -> KernelSlice:
    """
    K(x, y) = sum_{k,l} F(delta_1 sqrt(lambda_1k), delta_2 sqrt(lambda_2l))
    e_1k(x1) e_1k(y1) e_2l(x2) e_2l(y2).
    """
    if not symbol.is_even():
        raise PreconditionException(f"symbol {symbol.get_name()} is not even", check_name="kernel")
    dl = positive_pair(delta, "delta")
    tail = _tail_bound(symbol, ps, dl)
    if tail > TRUNCATION_TOLERANCE:
        logger.warning("kernel of %s at delta=%s: truncation bound %.3g", symbol.get_name(), dl, tail)
    values = _slice_from_grid(ps, symbol.grid(ps, dl), x)
    return KernelSlice(ps, x, values, delta=dl, tail_bound=tail)


def _anchor_indices(ps: ProductSpace) -> t.Tuple[int, int]:
    n1, n2 = ps.get_shape()
    return (n1 // 2, n2 // 2)


def far_envelope(rho: np.ndarray, values: np.ndarray) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Sorted distances and E(rho) = max_{rho' >= rho} |values(rho')|.
    """
    order = np.argsort(rho)
    r = rho[order]
    v = np.abs(values[order])
    env = np.maximum.accumulate(v[::-1])[::-1]
    return r, env


def decay_slope(rho: np.ndarray, values: np.ndarray, scale: float) -> t.Optional[float]:
    """
    Least-squares slope of -log E against log(1 + rho/scale) where
    1e-10 peak < E < 0.5 peak; None when fewer than three points qualify.
    """
    r, env = far_envelope(rho, values)
    peak = float(env.max()) if env.size else 0.0
    if peak <= 0:
        return None
    window = (env > 1e-10 * peak) & (env < 0.5 * peak)
    if int(window.sum()) < 3:
        return None
    xs = np.log1p(r[window] / scale)
    ys = np.log(env[window])
    slope = np.polyfit(xs, ys, 1)[0]
    return float(-slope)


def _smoothness_sufficient(symbol: Symbol, k: TPair, dims: TPair) -> bool:
    smooth = symbol.get_smoothness_k()
    if smooth is None or smooth[0] + smooth[1] < k[0] + k[1]:
        return False
    if symbol.get_support_box() is not None:
        return True
    decay = symbol.get_decay_r()
    return decay is not None and decay > dims[0] + dims[1] + k[0] + k[1]


def localization_fit(
    ps: ProductSpace,
    symbol: Symbol,
    delta: TPairLike,
    k_target: TPairLike,
    slack: float = SLOPE_SLACK,
) -> VerificationReport:
    """
    Fits |K(x0, y)| <= c D_{delta,k}(x0, y) on the slice anchored at the grid
    center, the per-axis decay slopes of |K| along the two axis lines through
    x0, and a Hoelder surrogate on nearest-neighbour node pairs.
    """
    dl = positive_pair(delta, "delta")
    k = as_pair(k_target, "k_target")
    i0, j0 = _anchor_indices(ps)
    x0 = ps.node_point(i0, j0)
    kernel = kernel_of_symbol(ps, symbol, dl, x0).get_values()
    dk = dkernel_slice(ps, DKernelParams(dl, k), x0)

    report = VerificationReport("localization", anchor="kernel/localization")
    report.set_params({"symbol": symbol.get_name(), "delta": list(dl), "k_target": list(k), "slack": slack})
    c_fit = float(np.max(np.abs(kernel) / dk))
    report.set_measured_constant(c_fit)

    m1, m2 = ps.get_models()
    rho1 = m1.metric(x0[0], m1.get_nodes())
    rho2 = m2.metric(x0[1], m2.get_nodes())
    for axis, rho, line, dli, ki in ((1, rho1, kernel[:, j0], dl[0], k[0]), (2, rho2, kernel[i0, :], dl[1], k[1])):
        slope = decay_slope(rho, line, dli)
        if slope is None:
            report.add_note(f"axis {axis}: kernel does not decay through the fitting window")
            continue
        report.set_measurement(f"slope_{axis}", slope)
        report.add_criterion(f"slope_{axis}", slope, ki - slack, op=">=")

    holder = 0.0
    for axis, model in enumerate((m1, m2)):
        nodes = model.get_nodes()
        step = model.metric(nodes[1:], nodes[:-1])
        alpha = model.get_holder_alpha()
        dist = (step / dl[axis]) ** alpha
        if axis == 0:
            diff = np.abs(kernel[1:, :] - kernel[:-1, :])
            denom = dist[:, None] * dk[:-1, :]
        else:
            diff = np.abs(kernel[:, 1:] - kernel[:, :-1])
            denom = dist[None, :] * dk[:, :-1]
        holder = max(holder, float(np.max(diff / denom)))
    report.set_measurement("holder_constant", holder)

    if not _smoothness_sufficient(symbol, k, ps.get_d_pair()):
        report.set_informational()
        report.add_note("symbol metadata does not meet the smoothness and decay hypothesis")
    logger.info("localization %s delta=%s: c_fit=%.4g", symbol.get_name(), dl, c_fit)
    return report


def _crossing_radius(rho: np.ndarray, values: np.ndarray, threshold: float) -> float:
    r, env = far_envelope(rho, values)
    peak = float(env.max())
    below = env < threshold * peak
    if not below.any():
        return float(r[-1])
    return float(r[int(np.argmax(below))])


def finite_speed_check(
    ps: ProductSpace,
    a: float,
    t_pair: TPairLike,
    symbol: t.Optional[Symbol] = None,
    threshold: float = 1e-6,
    stability: float = 0.1,
) -> VerificationReport:
    """
    The kernel of F(t sqrt L) for a profile whose Fourier transform lives in
    [-A', A'] vanishes for rho_1 > A' t_1 (unit propagation speed on the
    circle). Measures the tail beyond that radius and how the measured support
    radius scales when A is doubled.
    """
    name = "finite-speed"
    if ps.get_m1().get_name() != "circle":
        raise PreconditionException("the first factor must be a circle", check_name=name)
    if symbol is None:
        symbol = fejer_symbol(a)
        doubled: t.Optional[Symbol] = fejer_symbol(2.0 * a)
    else:
        doubled = None
    support = symbol.get_fourier_support()
    if support is None:
        raise PreconditionException(f"symbol {symbol.get_name()} is not band-limited", check_name=name)
    t1, t2 = positive_pair(t_pair, "t")
    i0, j0 = _anchor_indices(ps)
    x0 = ps.node_point(i0, j0)
    rho1 = ps.get_m1().metric(x0[0], ps.get_m1().get_nodes())

    def axis_profile(sym: Symbol) -> np.ndarray:
        values = kernel_of_symbol(ps, sym, (t1, t2), x0).get_values()
        return np.abs(values).max(axis=1)

    profile = axis_profile(symbol)
    peak = float(profile.max())
    outside = rho1 > support * t1
    tail = float(profile[outside].max()) / peak if outside.any() else 0.0

    report = VerificationReport(name, anchor="kernel/finite-speed")
    report.set_params({"A": a, "t": [t1, t2], "symbol": symbol.get_name(), "threshold": threshold})
    report.set_measurement("tail_ratio", tail)
    report.add_criterion("tail_ratio", tail, threshold, op="<")
    radius = _crossing_radius(rho1, profile, threshold)
    report.set_measurement("support_radius", radius)
    if doubled is not None:
        radius2 = _crossing_radius(rho1, axis_profile(doubled), threshold)
        ratio = radius2 / radius if radius > 0 else math.inf
        report.set_measurement("support_radius_doubled", radius2)
        report.set_measurement("radius_ratio", ratio)
        report.add_criterion("radius_ratio_deviation", abs(ratio - 2.0) / 2.0, stability)
    report.set_measured_constant(tail)
    return report


def kernel_symmetry_residual(
    ps: ProductSpace, symbol: Symbol, delta: TPairLike = 1.0, n_pairs: int = 100, seed: int = 0
) -> float:
    """
    max |K(x, y) - K(y, x)| / max|K| over random node pairs.
    """
    rng = np.random.default_rng(seed)
    n1, n2 = ps.get_shape()
    worst, scale = 0.0, 0.0
    for _ in range(n_pairs):
        i, k = rng.integers(0, n1, size=2)
        j, l = rng.integers(0, n2, size=2)
        x, y = ps.node_point(int(i), int(j)), ps.node_point(int(k), int(l))
        kxy = kernel_value(ps, symbol, delta, x, y)
        kyx = kernel_value(ps, symbol, delta, y, x)
        worst = max(worst, abs(kxy - kyx))
        scale = max(scale, abs(kxy))
    return worst / scale if scale > 0 else worst
