import logging
import math
import typing as t

import numpy as np
import typing_extensions as te

from .calculus import CoefField, grid_to_csv, synthesize
from .coordspace import BALL_EPS, SpectralModel
from .exception import PreconditionException, ProdSpaceException
from .product import ProductSpace, refine_product
from .report import VerificationReport
from .symbols import Symbol, bump_symbol, gaussian_symbol
from .utils import TPair, TPairLike, as_pair, dyadic_radii, grid_norm, relative_change

logger = logging.getLogger(__name__)

TTGrid = t.List[TPair]
TVariant = te.Literal["plain", "aperture", "peetre"]

VARIANTS: te.Final = ("plain", "aperture", "peetre")
DEFAULT_T_EXPONENTS: te.Final = (-9, 2)
# every maximal t grid must reach at least this far on both sides
REQUIRED_SPAN: te.Final = (-6, 2)


def default_t_grid(lo: int = DEFAULT_T_EXPONENTS[0], hi: int = DEFAULT_T_EXPONENTS[1]) -> TTGrid:
    values = [2.0**e for e in range(lo, hi + 1)]
    return [(a, b) for a in values for b in values]


class MaximalParams:
    _r: float = 1.0
    _t_grid: TTGrid
    _a: TPair = (1.0, 1.0)
    _gamma: TPair = (2.0, 2.0)

    def __init__(
        self,
        r: float = 1.0,
        t_grid: t.Optional[t.Sequence[TPairLike]] = None,
        a: TPairLike = (1.0, 1.0),
        gamma: TPairLike = (2.0, 2.0),
    ):
        if r <= 0:
            raise ProdSpaceException(f"r must be positive, got {r}")
        grid = default_t_grid() if t_grid is None else [as_pair(v, "t") for v in t_grid]
        if not grid:
            raise ProdSpaceException("t_grid is empty")
        exps = np.log2(np.asarray(grid, dtype=float))
        if not np.allclose(exps, np.round(exps), atol=1e-9):
            raise ProdSpaceException("t_grid must be dyadic")
        lo, hi = REQUIRED_SPAN
        if exps.min(axis=0).max() > lo or exps.max(axis=0).min() < hi:
            raise ProdSpaceException(f"t_grid must span 2^{lo}..2^{hi} on both axes")
        a_pair = as_pair(a, "a")
        gamma_pair = as_pair(gamma, "gamma")
        if min(a_pair) < 0 or min(gamma_pair) <= 0:
            raise ProdSpaceException(f"need a >= 0 and gamma > 0, got a={a_pair} gamma={gamma_pair}")
        self._r = float(r)
        self._t_grid = grid
        self._a = a_pair
        self._gamma = gamma_pair

    def get_r(self) -> float:
        return self._r

    def get_t_grid(self) -> TTGrid:
        return self._t_grid

    def get_a(self) -> TPair:
        return self._a

    def get_gamma(self) -> TPair:
        return self._gamma

    def to_dict(self) -> t.Dict[str, t.Any]:
        exps = np.log2(np.asarray(self._t_grid))
        return {
            "r": self._r,
            "a": list(self._a),
            "gamma": list(self._gamma),
            "t_exponents": [int(exps.min()), int(exps.max())],
        }


def separable_max(a1: np.ndarray, a2: np.ndarray, h: np.ndarray) -> np.ndarray:
    """
    out[x1, x2] = max_{y1, y2} a1[x1, y1] a2[x2, y2] h[y1, y2] for non-negative
    factors, one axis at a time.
    """
    n1, n2 = a1.shape[0], a2.shape[0]
    partial = np.empty((n1, h.shape[1]))
    for i in range(n1):
        partial[i] = np.max(a1[i][:, None] * h, axis=0)
    out = np.empty((n1, n2))
    for j in range(n2):
        out[:, j] = np.max(partial * a2[j][None, :], axis=1)
    return out


def default_n_scales(model: SpectralModel) -> int:
    # dyadic radii down to about two node spacings
    ratio = model.get_diameter() / (2.0 * model.get_max_spacing())
    return max(0, int(math.floor(math.log2(ratio))))


def centered_radii(
    ps: ProductSpace, n_scales: t.Optional[t.Tuple[int, int]] = None
) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Per axis: radius 0 followed by diam 2^-k, k = 0..n_scales.
    """
    out = []
    for axis, model in enumerate(ps.get_models()):
        k = default_n_scales(model) if n_scales is None else n_scales[axis]
        radii = dyadic_radii(model.get_diameter(), k)
        out.append(np.concatenate([[0.0], radii]))
    return out[0], out[1]


def _averaging_operators(model: SpectralModel, radii: np.ndarray) -> t.List[np.ndarray]:
    dist = model.distance_matrix()
    w = model.get_weights()
    ops = []
    for radius in radii:
        mask = (dist <= radius + BALL_EPS * max(1.0, radius)).astype(float) * w[None, :]
        ops.append(mask / mask.sum(axis=1, keepdims=True))
    return ops


def strong_maximal(
    ps: ProductSpace,
    f: np.ndarray,
    r: float = 1.0,
    radii: t.Optional[t.Tuple[np.ndarray, np.ndarray]] = None,
) -> np.ndarray:
    """
    M_r f(x) = max over centered rectangles B_1(x1, r1) x B_2(x2, r2) of the
    mean of |f|^r, to the power 1/r. Radius 0 is the point itself, so
    M_r f >= |f|.
    """
    if r <= 0:
        raise ProdSpaceException(f"r must be positive, got {r}")
    r1, r2 = centered_radii(ps) if radii is None else radii
    ops1 = _averaging_operators(ps.get_m1(), r1)
    ops2 = _averaging_operators(ps.get_m2(), r2)
    powered = np.abs(np.asarray(f, dtype=float)) ** r
    out = np.zeros(ps.get_shape())
    for a1 in ops1:
        partial = a1 @ powered
        for a2 in ops2:
            out = np.maximum(out, partial @ a2.T)
    return out ** (1.0 / r)


def directional_maximal(ps: ProductSpace, f: np.ndarray, r: float = 1.0, axis: int = 0) -> np.ndarray:
    """
    One-axis maximal function: centered balls in the given coordinate only.
    """
    if axis not in (0, 1):
        raise ProdSpaceException(f"axis must be 0 or 1, got {axis}")
    model = ps.get_models()[axis]
    k = default_n_scales(model)
    radii = np.concatenate([[0.0], dyadic_radii(model.get_diameter(), k)])
    powered = np.abs(np.asarray(f, dtype=float)) ** r
    out = np.zeros(ps.get_shape())
    for op in _averaging_operators(model, radii):
        averaged = op @ powered if axis == 0 else powered @ op.T
        out = np.maximum(out, averaged)
    return out ** (1.0 / r)


def iterated_maximal(ps: ProductSpace, f: np.ndarray, r: float = 1.0) -> np.ndarray:
    """
    (M_2 M_1 |f|^r)^(1/r), a pointwise upper bound for the strong maximal
    function on the same radii.
    """
    first = directional_maximal(ps, np.abs(f) ** r, 1.0, axis=0)
    return directional_maximal(ps, first, 1.0, axis=1) ** (1.0 / r)


def fefferman_stein_check(
    ps: ProductSpace, family: t.Sequence[np.ndarray], p: float = 2.0, r: float = 1.0
) -> VerificationReport:
    """
    c = ||(sum_j (M_r f_j)^2)^(1/2)||_p / ||(sum_j f_j^2)^(1/2)||_p.
    """
    if not family:
        raise PreconditionException("empty family", check_name="fefferman-stein")
    w = ps.get_product_weights()
    maximal = np.sqrt(sum(strong_maximal(ps, f, r) ** 2 for f in family))
    base = np.sqrt(sum(np.asarray(f, dtype=float) ** 2 for f in family))
    c = grid_norm(maximal, w, p) / grid_norm(base, w, p)
    report = VerificationReport("fefferman-stein", anchor="maximal/vector-valued")
    report.set_params({"p": p, "r": r, "family_size": len(family)})
    report.set_measured_constant(c)
    report.add_criterion("lower_bound", c, 1.0 - 1e-12, op=">=")
    return report


def _aperture_masks(model: SpectralModel, values: t.Iterable[float], a: float) -> t.Dict[float, np.ndarray]:
    dist = model.distance_matrix()
    return {
        v: (dist <= a * v + BALL_EPS * max(1.0, a * v)).astype(float) for v in sorted(set(values))
    }


def _peetre_weights(model: SpectralModel, values: t.Iterable[float], gamma: float) -> t.Dict[float, np.ndarray]:
    dist = model.distance_matrix()
    return {v: (1.0 + dist / v) ** (-gamma) for v in sorted(set(values))}


def symbol_maximal(
    cf: CoefField,
    symbol: Symbol,
    t_grid: t.Sequence[TPair],
    variant: str = "plain",
    a: TPairLike = (1.0, 1.0),
    gamma: TPairLike = (2.0, 2.0),
) -> np.ndarray:
    """
    sup over t in t_grid of |phi(t sqrt L) f| at x (plain), over the aperture
    rho_i(x_i, y_i) <= a_i t_i (aperture), or weighted by
    prod (1 + rho_i/t_i)^-gamma_i (peetre).
    """
    if variant not in VARIANTS:
        raise ProdSpaceException(f"Unknown maximal variant {variant}")
    ps = cf.get_space()
    m1, m2 = ps.get_models()
    a_pair, g_pair = as_pair(a, "a"), as_pair(gamma, "gamma")
    t1s = [tp[0] for tp in t_grid]
    t2s = [tp[1] for tp in t_grid]
    f1: t.Dict[float, np.ndarray] = {}
    f2: t.Dict[float, np.ndarray] = {}
    if variant == "aperture":
        f1, f2 = _aperture_masks(m1, t1s, a_pair[0]), _aperture_masks(m2, t2s, a_pair[1])
    elif variant == "peetre":
        f1, f2 = _peetre_weights(m1, t1s, g_pair[0]), _peetre_weights(m2, t2s, g_pair[1])
    out = np.zeros(ps.get_shape())
    for tp in t_grid:
        values = np.abs(synthesize(cf.with_coefs(symbol.grid(ps, tp) * cf.get_coefs())))
        if variant != "plain":
            values = separable_max(f1[tp[0]], f2[tp[1]], values)
        out = np.maximum(out, values)
    return out


def heat_maximal(cf: CoefField, params: t.Optional[MaximalParams] = None, variant: str = "plain") -> np.ndarray:
    """
    Maximal functions of f for Phi_0(lambda) = exp(-|lambda|^2), so that
    Phi_0(t sqrt L) = exp(-t1^2 L_1 - t2^2 L_2).
    """
    params = params or MaximalParams()
    return symbol_maximal(
        cf, gaussian_symbol(), params.get_t_grid(), variant, params.get_a(), params.get_gamma()
    )


def heat_maximal_csv(cf: CoefField, params: t.Optional[MaximalParams] = None, variant: str = "plain") -> str:
    return grid_to_csv(cf.get_space(), heat_maximal(cf, params, variant))


def hp_quasinorm(cf: CoefField, p: float, t_grid: t.Optional[t.Sequence[TPair]] = None) -> float:
    """
    || sup_t |exp(-t1^2 L_1 - t2^2 L_2) f| ||_p with the sup over t_grid.
    """
    if p <= 0:
        raise ProdSpaceException(f"p must be positive, got {p}")
    grid = default_t_grid() if t_grid is None else list(t_grid)
    maximal = symbol_maximal(cf, gaussian_symbol(), grid)
    return grid_norm(maximal, cf.get_space().get_product_weights(), p)


def _cos_gaussian(l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    return np.cos(l1) * np.cos(l2) * np.exp(-(l1**2) - l2**2)


def admissible_family() -> t.List[Symbol]:
    """
    Finite stand-in for the grand maximal class: five even Schwartz symbols
    with phi(0, 0) = 1.
    """
    squared = Symbol(lambda l1, l2: np.exp(-2.0 * (l1**2 + l2**2)), name="gaussian-squared")
    oscillating = Symbol(_cos_gaussian, name="cos-gaussian")
    return [gaussian_symbol(), squared, bump_symbol((1.0, 1.0)), bump_symbol((2.0, 2.0)), oscillating]


def grand_maximal_surrogate(cf: CoefField, t_grid: t.Sequence[TPair]) -> np.ndarray:
    out = np.zeros(cf.get_space().get_shape())
    for symbol in admissible_family():
        out = np.maximum(out, symbol_maximal(cf, symbol, t_grid))
    return out


def _coarser(t_grid: t.Sequence[TPair]) -> t.List[TPair]:
    # every other dyadic exponent on each axis
    exps = np.round(np.log2(np.asarray(t_grid, dtype=float))).astype(int)
    lo = exps.min(axis=0)
    keep = ((exps - lo) % 2 == 0).all(axis=1)
    return [(float(tp[0]), float(tp[1])) for tp, k in zip(t_grid, keep) if k]


def _equivalence_bands(
    test_set: t.Sequence[CoefField], p: float, t_grid: t.Sequence[TPair], a: TPair, gamma: TPair
) -> t.Tuple[t.Dict[str, t.Tuple[float, float]], float]:
    ratios: t.Dict[str, t.List[float]] = {"aperture": [], "peetre": [], "grand": []}
    surrogate_excess = 0.0
    gauss = gaussian_symbol()
    for cf in test_set:
        w = cf.get_space().get_product_weights()
        plain = grid_norm(symbol_maximal(cf, gauss, t_grid), w, p)
        if plain == 0:
            continue
        aperture = grid_norm(symbol_maximal(cf, gauss, t_grid, "aperture", a=a), w, p)
        peetre = grid_norm(symbol_maximal(cf, gauss, t_grid, "peetre", gamma=gamma), w, p)
        members = [symbol_maximal(cf, s, t_grid) for s in admissible_family()]
        grand = grid_norm(np.max(members, axis=0), w, p)
        best = max(grid_norm(m, w, p) for m in members)
        ratios["aperture"].append(aperture / plain)
        ratios["peetre"].append(peetre / plain)
        ratios["grand"].append(grand / plain)
        surrogate_excess = max(surrogate_excess, grand / best)
    bands = {k: (min(v), max(v)) for k, v in ratios.items() if v}
    return bands, surrogate_excess


def hp_equivalence_report(
    test_set: t.Sequence[CoefField],
    p: float,
    params: t.Optional[MaximalParams] = None,
    stability: float = 0.1,
) -> VerificationReport:
    """
    Ratio bands of ||M*_a||_p, ||M**_gamma||_p and the admissible-family
    surrogate of the grand maximal norm against ||M(f; Phi_0)||_p. The
    grand maximal term is a surrogate over a finite family. Stability: the
    band constant on every other t exponent.
    """
    name = "hp-equivalence"
    if not test_set:
        raise PreconditionException("empty test set", check_name=name)
    if p <= 0:
        raise PreconditionException(f"p must be positive, got {p}", check_name=name)
    ps = test_set[0].get_space()
    if params is None:
        d1, d2 = ps.get_d_pair()
        params = MaximalParams(gamma=(1.25 * 2.0 * d1 / p, 1.25 * 2.0 * d2 / p))
    gamma = params.get_gamma()
    if any(g <= 2.0 * d / p for g, d in zip(gamma, ps.get_d_pair())):
        raise PreconditionException(f"gamma={gamma} must exceed 2d/p", check_name=name)
    grid = params.get_t_grid()
    bands, excess = _equivalence_bands(test_set, p, grid, params.get_a(), gamma)
    coarse_bands, _ = _equivalence_bands(test_set, p, _coarser(grid), params.get_a(), gamma)

    def band_constant(b: t.Dict[str, t.Tuple[float, float]]) -> float:
        return max(max(hi, 1.0 / lo) for lo, hi in b.values()) if b else 1.0

    c = band_constant(bands)
    c_coarse = band_constant(coarse_bands)
    report = VerificationReport(name, anchor="hardy/maximal-equivalence")
    report.set_params(
        {
            **params.to_dict(),
            "p": p,
            "test_set_size": len(test_set),
            "grand_maximal": "surrogate",
            "compact_regime": compact_regime(ps, grid),
        }
    )
    for key, (lo, hi) in sorted(bands.items()):
        report.set_measurement(f"{key}_min", lo)
        report.set_measurement(f"{key}_max", hi)
    report.set_measurement("surrogate_over_best_member", excess)
    report.set_measured_constant(c)
    report.set_measurement("constant_coarse_t_grid", c_coarse)
    report.add_criterion("t_grid_change", relative_change(c, c_coarse), stability)
    report.add_criterion("surrogate_over_best_member", excess, 5.0 ** (1.0 / p) * (1 + 1e-12))
    if compact_regime(ps, grid):
        report.add_note("the t grid reaches the diameter of a finite-measure space")
    return report


def hp_lp_report(
    test_set: t.Sequence[CoefField],
    p: float = 2.0,
    t_grid: t.Optional[t.Sequence[TPair]] = None,
    slack: float = 0.02,
    stability: float = 0.1,
) -> VerificationReport:
    """
    ||f||_p <= (1 + slack) hp(f) and hp(f) / ||f||_p bounded by a constant
    that is stable under grid refinement and a coarser t grid.
    """
    name = "hp-lp"
    if not test_set:
        raise PreconditionException("empty test set", check_name=name)
    grid = default_t_grid() if t_grid is None else list(t_grid)

    def constants(fields: t.Sequence[CoefField], tg: t.Sequence[TPair]) -> t.Tuple[float, float]:
        lo, hi = math.inf, 0.0
        for cf in fields:
            lp = grid_norm(synthesize(cf), cf.get_space().get_product_weights(), p)
            if lp == 0:
                continue
            ratio = hp_quasinorm(cf, p, tg) / lp
            lo, hi = min(lo, ratio), max(hi, ratio)
        return lo, hi

    lo, hi = constants(test_set, grid)
    refined = [cf.with_space(refine_product(cf.get_space())) for cf in test_set]
    _, hi_fine = constants(refined, grid)
    _, hi_coarse = constants(test_set, _coarser(grid))
    report = VerificationReport(name, anchor="hardy/lebesgue-equivalence")
    report.set_params({"p": p, "test_set_size": len(test_set), "slack": slack})
    report.set_measurement("ratio_min", lo)
    report.set_measurement("ratio_max_coarse_t_grid", hi_coarse)
    report.set_measured_constant(hi).set_refined_constant(hi_fine)
    report.add_criterion("lp_below_hp", lo, 1.0 / (1.0 + slack), op=">=")
    report.add_criterion("refinement_change", relative_change(hi, hi_fine), stability)
    report.add_criterion("t_grid_change", relative_change(hi, hi_coarse), stability)
    return report


def peetre_vs_strong_check(
    test_set: t.Sequence[CoefField],
    theta: float = 0.9,
    params: t.Optional[MaximalParams] = None,
) -> VerificationReport:
    """
    c = max over the test set and the grid of M**_gamma(f) / M_theta(M(f; Phi_0)),
    the Peetre maximal function against the strong maximal function of the
    plain heat maximal function, with theta < 1 and gamma = 1.1 (2 / theta) d
    unless params carries its own gamma. The constant on every other t
    exponent is recorded alongside.
    """
    name = "peetre-vs-strong"
    if not test_set:
        raise PreconditionException("empty test set", check_name=name)
    if not 0 < theta < 1:
        raise PreconditionException(f"theta must lie in (0, 1), got {theta}", check_name=name)
    ps = test_set[0].get_space()
    if params is None:
        d1, d2 = ps.get_d_pair()
        params = MaximalParams(theta, gamma=(1.1 * 2.0 * d1 / theta, 1.1 * 2.0 * d2 / theta))
    gamma = params.get_gamma()

    def constant(t_grid: t.Sequence[TPair]) -> float:
        worst = 0.0
        for cf in test_set:
            peetre = symbol_maximal(cf, gaussian_symbol(), t_grid, "peetre", gamma=gamma)
            envelope = strong_maximal(ps, symbol_maximal(cf, gaussian_symbol(), t_grid), theta)
            positive = envelope > 0
            if np.any(peetre[~positive] > 0):
                return math.inf
            if positive.any():
                worst = max(worst, float(np.max(peetre[positive] / envelope[positive])))
        return worst

    c = constant(params.get_t_grid())
    report = VerificationReport(name, anchor="hardy/peetre-strong-maximal")
    report.set_params({**params.to_dict(), "theta": theta, "test_set_size": len(test_set)})
    report.set_measured_constant(c)
    report.set_measurement("constant_coarse_t_grid", constant(_coarser(params.get_t_grid())))
    report.add_criterion("constant", c, math.inf, op="<")
    logger.info("peetre vs strong maximal: c=%.4g", c)
    return report


def compact_regime(ps: ProductSpace, t_grid: t.Sequence[TPair]) -> bool:
    """
    True when the measure is finite and the largest t reaches the diameter on
    some axis, so the sup over t sees the whole space.
    """
    if not math.isfinite(ps.get_total_measure()):
        return False
    t_max = np.max(np.asarray(t_grid, dtype=float), axis=0)
    return any(tm >= model.get_diameter() for tm, model in zip(t_max, ps.get_models()))
