import itertools
import logging
import math
import typing as t

import numpy as np
import typing_extensions as te

from .calculus import CoefField, apply_coef_weights, synthesize
from .cutoffs import CutoffSystem
from .exception import PreconditionException
from .lpdecomp import TBlockIndex, eigen_power_weights, lp_blocks
from .product import ProductSpace, axis_volumes, refine_product, volume_power_grid
from .report import VerificationReport
from .utils import TIntPair, TIntPairLike, TPair, TPairLike, as_int_pair, as_pair, ell_q, grid_norm, relative_change

logger = logging.getLogger(__name__)

TFamily = te.Literal["B", "F"]
TKind = te.Literal["classical", "nonclassical"]
TFlavor = te.Literal["mixed", "ordinary"]

FAMILIES: te.Final = ("B", "F")
KINDS: te.Final = ("classical", "nonclassical")
FLAVORS: te.Final = ("mixed", "ordinary")
DEFAULT_RATIO_BOUND: te.Final = 4.0
DEFAULT_STABILITY: te.Final = 0.1


class SpaceParams:
    """
    One of the smoothness spaces: B or F family, classical (2^(j.s)) or
    nonclassical (V(x, 2^-j)^(-s/d)) weights, mixed (rectangle blocks) or
    ordinary (radial blocks) flavor, truncated at J (None picks J from the
    band).
    """

    _s: TPair
    _p: float
    _q: float
    _family: str = "B"
    _kind: str = "classical"
    _flavor: str = "mixed"
    _J: t.Optional[TIntPair] = None

    def __init__(
        self,
        s: TPairLike,
        p: float,
        q: float,
        family: str = "B",
        kind: str = "classical",
        flavor: str = "mixed",
        J: t.Optional[TIntPairLike] = None,
    ):
        name = "space-params"
        if family not in FAMILIES or kind not in KINDS or flavor not in FLAVORS:
            raise PreconditionException(f"unknown space {family}/{kind}/{flavor}", check_name=name)
        if not p > 0 or not q > 0:
            raise PreconditionException(f"p and q must be positive, got p={p}, q={q}", check_name=name)
        if family == "F" and math.isinf(p):
            raise PreconditionException("the F family needs p < inf", check_name=name)
        s_pair = as_pair(s, "s")
        if flavor == "ordinary" and s_pair[0] != s_pair[1]:
            raise PreconditionException(f"ordinary spaces take a single s, got {s_pair}", check_name=name)
        self._s = s_pair
        self._p = float(p)
        self._q = float(q)
        self._family = family
        self._kind = kind
        self._flavor = flavor
        self._J = None if J is None else as_int_pair(J, "J")

    def __repr__(self) -> str:
        return (
            f"SpaceParams({self._family}, s={self._s}, p={self._p:g}, q={self._q:g}, "
            f"{self._kind}, {self._flavor})"
        )

    def get_s(self) -> TPair:
        return self._s

    def get_p(self) -> float:
        return self._p

    def get_q(self) -> float:
        return self._q

    def get_family(self) -> str:
        return self._family

    def get_kind(self) -> str:
        return self._kind

    def get_flavor(self) -> str:
        return self._flavor

    def get_J(self) -> t.Optional[TIntPair]:
        return self._J

    def replace(self, **changes: t.Any) -> "SpaceParams":
        values = {
            "s": self._s,
            "p": self._p,
            "q": self._q,
            "family": self._family,
            "kind": self._kind,
            "flavor": self._flavor,
            "J": self._J,
        }
        values.update(changes)
        return SpaceParams(**values)

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {
            "family": self._family,
            "kind": self._kind,
            "flavor": self._flavor,
            "s": list(self._s) if self._flavor == "mixed" else self._s[0],
            "p": self._p,
            "q": self._q,
            "J": None if self._J is None else list(self._J),
        }


def auto_J(ps: ProductSpace, flavor: str = "mixed") -> TIntPair:
    """
    Smallest J with 2^(J_i - 1) >= band radius on each axis (radial band for
    the ordinary flavor), so every band point lies in the plateau region.
    """
    r1, r2 = ps.get_band_radius()
    if flavor == "ordinary":
        r1 = r2 = math.hypot(r1, r2)

    def pick(radius: float) -> int:
        return 0 if radius <= 0.5 else int(math.ceil(math.log2(radius))) + 1

    return (pick(r1), pick(r2))


def resolve_J(ps: ProductSpace, params: SpaceParams) -> TIntPair:
    return params.get_J() or auto_J(ps, params.get_flavor())


def block_weight(ps: ProductSpace, params: SpaceParams, j: TBlockIndex) -> t.Union[float, np.ndarray]:
    """
    The smoothness weight of block j: a scalar for classical spaces, a grid of
    V(x, 2^-j)^(-s/d) values for nonclassical ones. Nonclassical volumes are
    cell volumes, so scales finer than the grid spacing do not collapse to the
    weight of a single node.
    """
    s1, s2 = params.get_s()
    d1, d2 = ps.get_d_pair()
    if params.get_flavor() == "mixed":
        j1, j2 = j
        if params.get_kind() == "classical":
            return 2.0 ** (j1 * s1 + j2 * s2)
        return volume_power_grid(ps, (2.0**-j1, 2.0**-j2), (-s1 / d1, -s2 / d2), cells=True)
    (jr,) = j
    if params.get_kind() == "classical":
        return 2.0 ** (jr * s1)
    v1 = axis_volumes(ps.get_m1(), 2.0**-jr, cells=True)
    v2 = axis_volumes(ps.get_m2(), 2.0**-jr, cells=True)
    return np.outer(v1, v2) ** (-s1 / (d1 + d2))


def _weighted_blocks(cs: CutoffSystem, cf: CoefField, params: SpaceParams) -> t.List[np.ndarray]:
    ps = cf.get_space()
    if not cs.satisfies("norm-admissible"):
        raise PreconditionException(f"{cs} is not norm-admissible", check_name="space-norm")
    blocks = lp_blocks(cs, cf, resolve_J(ps, params), params.get_flavor())
    return [np.abs(block_weight(ps, params, j) * synthesize(blocks[j])) for j in sorted(blocks)]


def besov_norm(cs: CutoffSystem, cf: CoefField, params: SpaceParams) -> float:
    """
    ( sum_j ||w_j phi_j(sqrt L) f||_p^q )^(1/q), max over j for q = inf.
    """
    weights = cf.get_space().get_product_weights()
    terms = np.array([grid_norm(b, weights, params.get_p()) for b in _weighted_blocks(cs, cf, params)])
    return float(ell_q(terms, params.get_q()))


def tl_norm(cs: CutoffSystem, cf: CoefField, params: SpaceParams) -> float:
    """
    || ( sum_j |w_j phi_j(sqrt L) f|^q )^(1/q) ||_p with the inner sum taken
    pointwise on the grid.
    """
    if math.isinf(params.get_p()):
        raise PreconditionException("the F family needs p < inf", check_name="tl-norm")
    stacked = np.stack(_weighted_blocks(cs, cf, params))
    inner = ell_q(stacked, params.get_q(), axis=0)
    return grid_norm(inner, cf.get_space().get_product_weights(), params.get_p())


def space_norm(cs: CutoffSystem, cf: CoefField, params: SpaceParams) -> float:
    if params.get_family() == "B":
        return besov_norm(cs, cf, params)
    return tl_norm(cs, cf, params)


def lp_norm(cf: CoefField, p: float) -> float:
    return grid_norm(synthesize(cf), cf.get_space().get_product_weights(), p)


def test_norm(cf: CoefField, m: int, k: float, x0: t.Tuple[float, float]) -> float:
    """
    P_{m,k}(f) = max_x prod_i (1 + rho_i(x_i, x0_i))^k max_{0 <= nu <= m} |L^nu f(x)|.
    """
    ps = cf.get_space()
    m1, m2 = ps.get_models()
    growth = np.outer(
        (1.0 + m1.metric(x0[0], m1.get_nodes())) ** k,
        (1.0 + m2.metric(x0[1], m2.get_nodes())) ** k,
    )
    best = np.zeros(ps.get_shape())
    for nu in itertools.product(range(m + 1), range(m + 1)):
        applied = synthesize(apply_coef_weights(eigen_power_weights(ps, nu), cf))
        best = np.maximum(best, np.abs(applied))
    return float(np.max(growth * best))


def _check_embedding(source: SpaceParams, target: t.Optional[SpaceParams], ps: ProductSpace) -> None:
    name = "embedding"
    if target is None:
        if min(source.get_s()) <= 0:
            raise PreconditionException(f"embedding into L^p needs s > 0, got {source.get_s()}", check_name=name)
        return
    if source.get_family() != "B" or target.get_family() != "B":
        raise PreconditionException("embeddings are checked between B spaces", check_name=name)
    if source.get_kind() != target.get_kind() or source.get_flavor() != target.get_flavor():
        raise PreconditionException("source and target must share kind and flavor", check_name=name)
    p, r = source.get_p(), target.get_p()
    if p > r or source.get_q() > target.get_q():
        raise PreconditionException(f"need p <= r and q <= tau, got {source!r} -> {target!r}", check_name=name)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_r = 0.0 if math.isinf(r) else 1.0 / r
    dims = ps.get_d_pair()
    if source.get_flavor() == "ordinary":
        dims = (dims[0] + dims[1], dims[0] + dims[1])
    for s, s2, d in zip(source.get_s(), target.get_s(), dims):
        if abs((s / d - inv_p) - (s2 / d - inv_r)) > 1e-12:
            raise PreconditionException(
                f"smoothness balance s/d - 1/p = s'/d - 1/r fails for {source!r} -> {target!r}",
                check_name=name,
            )


def _max_ratio(
    cs: CutoffSystem, fields: t.Sequence[CoefField], source: SpaceParams, target: t.Optional[SpaceParams]
) -> float:
    worst = 0.0
    for cf in fields:
        denom = space_norm(cs, cf, source)
        if denom == 0:
            continue
        num = lp_norm(cf, source.get_p()) if target is None else space_norm(cs, cf, target)
        worst = max(worst, num / denom)
    return worst


def embedding_check(
    cs: CutoffSystem,
    test_set: t.Sequence[CoefField],
    source: SpaceParams,
    target: t.Optional[SpaceParams] = None,
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    c = max ||f||_target / ||f||_source over the test set, on the grid and on
    its 2x refinement. target None means L^p with the source p.
    """
    if not test_set:
        raise PreconditionException("empty test set", check_name="embedding")
    ps = test_set[0].get_space()
    _check_embedding(source, target, ps)
    c = _max_ratio(cs, test_set, source, target)
    fine_ps = refine_product(ps)
    c_fine = _max_ratio(cs, [cf.with_space(fine_ps) for cf in test_set], source, target)
    report = VerificationReport("embedding", anchor="spaces/embedding")
    report.set_params(
        {"source": source.to_dict(), "target": "Lp" if target is None else target.to_dict()}
    )
    report.set_measured_constant(c).set_refined_constant(c_fine)
    report.add_criterion("refinement_change", relative_change(c, c_fine), stability)
    return report


def _ratio_band(
    cs_a: CutoffSystem, cs_b: CutoffSystem, fields: t.Sequence[CoefField], params: SpaceParams
) -> t.Tuple[float, float]:
    ratios = []
    for cf in fields:
        nb = space_norm(cs_b, cf, params)
        if nb > 0:
            ratios.append(space_norm(cs_a, cf, params) / nb)
    if not ratios:
        return (1.0, 1.0)
    return (min(ratios), max(ratios))


def cutoff_independence_check(
    cs_a: CutoffSystem,
    cs_b: CutoffSystem,
    test_set: t.Sequence[CoefField],
    params: SpaceParams,
    ratio_bound: float = DEFAULT_RATIO_BOUND,
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    Band [min, max] of norm_A(f) / norm_B(f) over the test set; C is the
    smallest constant with the band inside [1/C, C]. C is recomputed with
    J + (2, 2) and on the refined grid.
    """
    name = "cutoff-independence"
    if not test_set:
        raise PreconditionException("empty test set", check_name=name)
    for cs in (cs_a, cs_b):
        if not cs.satisfies("norm-admissible"):
            raise PreconditionException(f"{cs} is not norm-admissible", check_name=name)
    ps = test_set[0].get_space()
    lo, hi = _ratio_band(cs_a, cs_b, test_set, params)
    j1, j2 = resolve_J(ps, params)
    lo_j, hi_j = _ratio_band(cs_a, cs_b, test_set, params.replace(J=(j1 + 2, j2 + 2)))
    fine_ps = refine_product(ps)
    lo_f, hi_f = _ratio_band(cs_a, cs_b, [cf.with_space(fine_ps) for cf in test_set], params)

    def constant(band: t.Tuple[float, float]) -> float:
        return max(band[1], 1.0 / band[0])

    c = constant((lo, hi))
    report = VerificationReport(name, anchor="spaces/cutoff-independence")
    report.set_params(
        {"cutoffs": [cs_a.get_name(), cs_b.get_name()], "space": params.to_dict(), "J": [j1, j2]}
    )
    report.set_measurement("ratio_min", lo)
    report.set_measurement("ratio_max", hi)
    report.set_measured_constant(c).set_refined_constant(constant((lo_f, hi_f)))
    report.set_measurement("constant_J_plus_2", constant((lo_j, hi_j)))
    report.add_criterion("ratio_bound", c, ratio_bound)
    report.add_criterion("J_change", relative_change(c, constant((lo_j, hi_j))), stability)
    report.add_criterion("refinement_change", relative_change(c, constant((lo_f, hi_f))), stability)
    return report
