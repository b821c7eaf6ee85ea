import itertools
import logging
import math
import typing as t

import numpy as np
import typing_extensions as te
from scipy.special import comb

from .calculus import CoefField, apply_coef_weights, apply_symbol
from .cutoffs import CutoffSystem
from .exception import PreconditionException
from .funcspaces import SpaceParams, auto_J, lp_norm, resolve_J, space_norm
from .lpdecomp import lp_blocks
from .product import ProductSpace, refine_product
from .report import VerificationReport
from .symbols import SMOOTH, Symbol
from .utils import TIntPair, TIntPairLike, TPair, TPairLike, as_int_pair, as_pair, relative_change

logger = logging.getLogger(__name__)

TBeta = t.Tuple[int, int]

DEFAULT_BAND: te.Final = (32.0, 32.0)
BAND_MARGIN: te.Final = 1.25
DEFAULT_GRID_POINTS: te.Final = 65
GRID_WARP: te.Final = 5.0
MIN_STEP: te.Final = 1e-3
GROWTH_FACTOR: te.Final = 1.1
ABSOLUTE_SLACK: te.Final = 1e-2
DEFAULT_STABILITY: te.Final = 0.1
DEFAULT_RATIO_BOUND: te.Final = 4.0


def m_tau(tau: TPairLike) -> Symbol:
    """
    (1 + l1^2)^(tau_1/2) (1 + l2^2)^(tau_2/2); as an operator this is the
    lifting (I + L_1)^(tau_1/2) (x) (I + L_2)^(tau_2/2).
    """
    t1, t2 = as_pair(tau, "tau")
    return Symbol(
        lambda l1, l2: (1.0 + l1**2) ** (t1 / 2.0) * (1.0 + l2**2) ** (t2 / 2.0),
        name=f"m_tau({t1:g},{t2:g})",
        smoothness_k=(SMOOTH, SMOOTH),
    )


class MultiplierSpec:
    """
    A symbol m claimed to lie in the class M(tau, kappa):
    |d^beta m(l)| <= c_beta (1 + l1)^(tau_1 - beta_1) (1 + l2)^(tau_2 - beta_2)
    for beta <= kappa. The flag and the constants come from a derivative scan.
    """

    _symbol: Symbol
    _tau: TPair
    _kappa: TIntPair
    _admissible: bool = False
    _constants: t.Dict[TBeta, float]

    def __init__(self, symbol: Symbol, tau: TPairLike = 0.0, kappa: TIntPairLike = 3):
        kappa_pair = as_int_pair(kappa, "kappa")
        if min(kappa_pair) < 0:
            raise PreconditionException(f"kappa must be non-negative, got {kappa_pair}", check_name="multiplier")
        self._symbol = symbol
        self._tau = as_pair(tau, "tau")
        self._kappa = kappa_pair
        self._constants = {}

    def __repr__(self) -> str:
        return f"MultiplierSpec({self._symbol.get_name()}, tau={self._tau}, kappa={self._kappa})"

    def get_symbol(self) -> Symbol:
        return self._symbol

    def get_tau(self) -> TPair:
        return self._tau

    def get_kappa(self) -> TIntPair:
        return self._kappa

    def is_admissible(self) -> bool:
        return self._admissible

    def get_constants(self) -> t.Dict[TBeta, float]:
        return self._constants

    def set_admissibility(self, report: VerificationReport) -> "MultiplierSpec":
        self._admissible = report.is_passed()
        self._constants = {
            beta: report.get_measurement(_beta_key(beta)) for beta in betas(self._kappa)
        }
        return self

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {
            "symbol": self._symbol.get_name(),
            "tau": list(self._tau),
            "kappa": list(self._kappa),
            "admissible": self._admissible,
            "constants": {_beta_key(beta): c for beta, c in sorted(self._constants.items())},
        }


def betas(kappa: TIntPairLike) -> t.List[TBeta]:
    k1, k2 = as_int_pair(kappa, "kappa")
    return list(itertools.product(range(k1 + 1), range(k2 + 1)))


def _beta_key(beta: TBeta) -> str:
    return f"c_{beta[0]}_{beta[1]}"


def base_step(order: int, h0: t.Optional[float] = None) -> float:
    """
    h0 = max(1e-3, eps^(1/(|beta| + 2))), the step at lambda = 0.
    """
    if h0 is not None:
        return h0
    return max(MIN_STEP, float(np.finfo(float).eps) ** (1.0 / (order + 2)))


def central_difference(
    symbol: Symbol,
    l1: np.ndarray,
    l2: np.ndarray,
    beta: TBeta,
    h0: t.Optional[float] = None,
    step_scale: float = 1.0,
) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Mixed central difference of order beta with relative steps
    h_i = h0 (1 + l_i). Returns the derivative estimate and a mask of points
    whose stencil stays inside the evaluable region.
    """
    b1, b2 = beta
    h = base_step(b1 + b2, h0) * step_scale
    h1, h2 = h * (1.0 + l1), h * (1.0 + l2)
    total = np.zeros(np.broadcast(l1, l2).shape)
    ok = np.ones(total.shape, dtype=bool)
    for i in range(b1 + 1):
        a1 = l1 + (b1 / 2.0 - i) * h1
        for j in range(b2 + 1):
            a2 = l2 + (b2 / 2.0 - j) * h2
            if not symbol.is_even():
                ok &= (a1 >= 0) & (a2 >= 0)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                vals = symbol(a1, a2)
            finite = np.isfinite(vals)
            ok &= finite
            weight = (-1.0) ** (i + j) * comb(b1, i, exact=True) * comb(b2, j, exact=True)
            total = total + weight * np.where(finite, vals, 0.0)
    return total / (h1**b1 * h2**b2), ok


def scan_grid(extent: float, n_grid: int) -> np.ndarray:
    """
    Uniform n_grid points on [0, extent] merged with n_grid exponentially
    graded ones whose spacing at 0 is about 1/30 of the uniform step; scaled
    derivatives of lifting-type symbols peak at small lambda. Going from n to
    2n - 1 keeps every old point.
    """
    s = np.linspace(0.0, 1.0, n_grid)
    graded = extent * np.expm1(GRID_WARP * s) / math.expm1(GRID_WARP)
    return np.unique(np.concatenate([extent * s, graded]))


def _scan(
    symbol: Symbol,
    tau: TPair,
    kappa: TIntPair,
    band: TPair,
    n_grid: int,
    h0: t.Optional[float],
    step_scale: float = 1.0,
) -> t.Tuple[t.Dict[TBeta, float], t.Dict[TBeta, float], int]:
    """
    Per beta: sup of the scaled derivative over the full lambda-box and over
    its lower half, plus the count of dropped stencil points.
    """
    u1 = scan_grid(band[0], n_grid)
    u2 = scan_grid(band[1], n_grid)
    l1, l2 = np.meshgrid(u1, u2, indexing="ij")
    half = (l1 <= band[0] / 2.0) & (l2 <= band[1] / 2.0)
    full_sup: t.Dict[TBeta, float] = {}
    half_sup: t.Dict[TBeta, float] = {}
    dropped = 0
    for beta in betas(kappa):
        deriv, ok = central_difference(symbol, l1, l2, beta, h0, step_scale)
        ratios = np.abs(deriv) / ((1.0 + l1) ** (tau[0] - beta[0]) * (1.0 + l2) ** (tau[1] - beta[1]))
        dropped += int((~ok).sum())
        full_sup[beta] = float(ratios[ok].max()) if ok.any() else math.nan
        inner = ok & half
        half_sup[beta] = float(ratios[inner].max()) if inner.any() else math.nan
    return full_sup, half_sup, dropped


def multiplier_admissible_check(
    m: Symbol,
    tau: TPairLike,
    kappa: TIntPairLike,
    band: TPairLike = DEFAULT_BAND,
    n_grid: int = DEFAULT_GRID_POINTS,
    stability: float = DEFAULT_STABILITY,
    h0: t.Optional[float] = None,
) -> VerificationReport:
    """
    Scan c_beta = sup |d^beta m| / (1 + l1)^(tau_1 - beta_1) (1 + l2)^(tau_2 - beta_2)
    for beta <= kappa on a lambda-box covering band with a margin.

    Pass requires every c_beta to be finite, not to grow between the lower
    half of the box and the full box (sup_full <= 1.1 sup_half + 1e-2 c_00),
    and to agree within stability when the step is halved and when the
    lambda-grid is refined.
    """
    tau_pair = as_pair(tau, "tau")
    kappa_pair = as_int_pair(kappa, "kappa")
    b1, b2 = as_pair(band, "band")
    box = (BAND_MARGIN * b1, BAND_MARGIN * b2)

    full, half, dropped = _scan(m, tau_pair, kappa_pair, box, n_grid, h0)
    full_h, _, _ = _scan(m, tau_pair, kappa_pair, box, n_grid, h0, step_scale=0.5)
    full_g, _, _ = _scan(m, tau_pair, kappa_pair, box, 2 * n_grid - 1, h0)

    report = VerificationReport("multiplier-admissible", anchor="multiplier/derivative-bounds")
    report.set_params(
        {"symbol": m.get_name(), "tau": list(tau_pair), "kappa": list(kappa_pair), "box": list(box)}
    )
    if dropped:
        logger.warning("%s: %d stencil points left the evaluable region and were dropped", m.get_name(), dropped)
        report.add_note(f"{dropped} stencil points dropped at the edge of the evaluable region")

    c00 = abs(full[(0, 0)]) if math.isfinite(full[(0, 0)]) else 0.0
    slack = ABSOLUTE_SLACK * c00
    growth = step_change = grid_change = 0.0
    for beta in betas(kappa_pair):
        c = full[beta]
        report.set_measurement(_beta_key(beta), c)
        if not math.isfinite(c):
            continue
        growth = max(growth, c - GROWTH_FACTOR * half[beta] - slack)
        step_change = max(step_change, _slack_change(c, full_h[beta], slack))
        grid_change = max(grid_change, _slack_change(c, full_g[beta], slack))
    report.set_measured_constant(full[(0, 0)])
    report.add_criterion("growth_excess", growth, 0.0)
    report.add_criterion("step_change", step_change, stability)
    report.add_criterion("grid_change", grid_change, stability)
    return report


def _slack_change(a: float, b: float, slack: float) -> float:
    if not math.isfinite(b):
        return math.inf
    return max(abs(a - b) - slack, 0.0) / max(abs(a), abs(b), 1e-300)


def make_multiplier(
    m: Symbol, tau: TPairLike, kappa: TIntPairLike, band: TPairLike = DEFAULT_BAND
) -> t.Tuple[MultiplierSpec, VerificationReport]:
    report = multiplier_admissible_check(m, tau, kappa, band)
    return MultiplierSpec(m, tau, kappa).set_admissibility(report), report


def apply_multiplier(spec: MultiplierSpec, cf: CoefField) -> CoefField:
    """
    m(sqrt L) f by direct multiplication of the coefficients.
    """
    return apply_symbol(spec.get_symbol(), cf)


def apply_multiplier_dyadic(
    spec: MultiplierSpec, cf: CoefField, cs: CutoffSystem, J: t.Optional[TIntPairLike] = None
) -> CoefField:
    """
    sum_j m_j(sqrt L) f with m_j = m phi_j. On band-limited inputs and J past
    the band this equals apply_multiplier.
    """
    if not cs.satisfies("partition"):
        raise PreconditionException(f"{cs} is not a partition of unity", check_name="multiplier-dyadic")
    ps = cf.get_space()
    if J is None:
        J = auto_J(ps)
    blocks = lp_blocks(cs, cf, J)
    total = np.zeros(ps.get_coef_shape())
    for j in sorted(blocks):
        total = total + apply_symbol(spec.get_symbol(), blocks[j]).get_coefs()
    return cf.with_coefs(total)


def lifting_weights(ps: ProductSpace, tau: TPairLike) -> np.ndarray:
    t1, t2 = as_pair(tau, "tau")
    s1, s2 = ps.get_sqrt_eigen_grid()
    return (1.0 + s1**2) ** (t1 / 2.0) * (1.0 + s2**2) ** (t2 / 2.0)


def lifting(cf: CoefField, tau: TPairLike) -> CoefField:
    """
    (I_1 + L_1)^(tau_1/2) (x) (I_2 + L_2)^(tau_2/2) f.
    """
    return apply_coef_weights(lifting_weights(cf.get_space(), tau), cf)


def _shifted(params: SpaceParams, shift: TPair) -> SpaceParams:
    s1, s2 = params.get_s()
    if params.get_flavor() == "ordinary" and shift[0] != shift[1]:
        raise PreconditionException(
            f"ordinary spaces need an isotropic shift, got {shift}", check_name="space-shift"
        )
    return params.replace(s=(s1 + shift[0], s2 + shift[1]))


def _norm_band(
    cs: CutoffSystem,
    fields: t.Sequence[CoefField],
    image: t.Callable[[CoefField], CoefField],
    source: SpaceParams,
    target: t.Optional[SpaceParams],
) -> t.Tuple[float, float]:
    ratios = []
    for cf in fields:
        denom = space_norm(cs, cf, source)
        if denom == 0:
            logger.warning("skipping a test field with zero %r norm", source)
            continue
        out = image(cf)
        num = lp_norm(out, source.get_p()) if target is None else space_norm(cs, out, target)
        ratios.append(num / denom)
    if not ratios:
        return (math.nan, math.nan)
    return (min(ratios), max(ratios))


def _refined(fields: t.Sequence[CoefField]) -> t.List[CoefField]:
    fine = refine_product(fields[0].get_space())
    return [cf.with_space(fine) for cf in fields]


def lifting_equivalence_check(
    cs: CutoffSystem,
    test_set: t.Sequence[CoefField],
    params: SpaceParams,
    tau: TPairLike,
    ratio_bound: float = DEFAULT_RATIO_BOUND,
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    Band of ||lifting(tau) f||_{s - tau} / ||f||_s over the test set; C is the
    smallest constant with the band inside [1/C, C].
    """
    name = "lifting-equivalence"
    if not test_set:
        raise PreconditionException("empty test set", check_name=name)
    tau_pair = as_pair(tau, "tau")
    target = _shifted(params, (-tau_pair[0], -tau_pair[1]))

    def image(cf: CoefField) -> CoefField:
        return lifting(cf, tau_pair)

    lo, hi = _norm_band(cs, test_set, image, params, target)
    lo_f, hi_f = _norm_band(cs, _refined(test_set), image, params, target)
    c, c_fine = max(hi, 1.0 / lo), max(hi_f, 1.0 / lo_f)
    report = VerificationReport(name, anchor="multiplier/lifting")
    report.set_params({"tau": list(tau_pair), "space": params.to_dict()})
    report.set_measurement("ratio_min", lo).set_measurement("ratio_max", hi)
    report.set_measured_constant(c).set_refined_constant(c_fine)
    report.add_criterion("ratio_bound", c, ratio_bound)
    report.add_criterion("refinement_change", relative_change(c, c_fine), stability)
    return report


def kappa_threshold(ps: ProductSpace, params: SpaceParams) -> TPair:
    """
    Smallest admissible orders: kappa_i > 2 d_i / min(p, q) + 3 d_i / 2, plus
    |s_i| for the nonclassical kind.
    """
    pq = min(params.get_p(), params.get_q())
    out = []
    for d, s in zip(ps.get_d_pair(), params.get_s()):
        bound = 2.0 * d / pq + 1.5 * d
        if params.get_kind() == "nonclassical":
            bound += abs(s)
        out.append(bound)
    return (out[0], out[1])


def multiplier_boundedness_harness(
    spec: MultiplierSpec,
    cs: CutoffSystem,
    test_set: t.Sequence[CoefField],
    params: SpaceParams,
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    c_emp = max ||m(sqrt L) f||_target / ||f||_source over the test set, where
    target is params and source raises its smoothness by tau. Runs with kappa
    at or below the threshold are informational.
    """
    name = "multiplier-boundedness"
    if not test_set:
        raise PreconditionException("empty test set", check_name=name)
    ps = test_set[0].get_space()
    source = _shifted(params, spec.get_tau())

    def image(cf: CoefField) -> CoefField:
        return apply_multiplier(spec, cf)

    _, c = _norm_band(cs, test_set, image, source, params)
    _, c_fine = _norm_band(cs, _refined(test_set), image, source, params)
    threshold = kappa_threshold(ps, params)
    k1, k2 = spec.get_kappa()

    report = VerificationReport(name, anchor="multiplier/boundedness")
    report.set_params(
        {
            "multiplier": spec.to_dict(),
            "source": source.to_dict(),
            "target": params.to_dict(),
            "kappa_threshold": list(threshold),
            "J": list(resolve_J(ps, params)),
        }
    )
    report.set_measured_constant(c).set_refined_constant(c_fine)
    report.add_criterion("refinement_change", relative_change(c, c_fine), stability)
    if not (k1 > threshold[0] and k2 > threshold[1]):
        report.set_informational()
        report.add_note(f"kappa {spec.get_kappa()} is not above the threshold {threshold}")
    if not spec.is_admissible():
        report.add_note("symbol has no passing derivative scan")
    return report
