import csv
import io
import itertools
import logging
import math
import typing as t

import numpy as np
import typing_extensions as te

from .calculus import CoefField, apply_coef_weights, synthesize
from .cutoffs import CutoffSystem
from .exception import PreconditionException
from .hardy import centered_radii, default_n_scales, separable_max, strong_maximal
from .product import ProductSpace, refine_product, volume_power_grid
from .report import VerificationReport
from .utils import TIntPairLike, TPairLike, as_int_pair, as_pair, grid_norm, positive_pair, relative_change

logger = logging.getLogger(__name__)

TBlockIndex = t.Tuple[int, ...]
TBlocks = t.Dict[TBlockIndex, CoefField]

BAND_TOLERANCE: te.Final = 1e-12
ZERO_GUARD: te.Final = 1e-14
DEFAULT_STABILITY: te.Final = 0.1


def block_indices(J: TIntPairLike, flavor: str = "mixed") -> t.List[TBlockIndex]:
    j1, j2 = as_int_pair(J, "J")
    if j1 < 0 or j2 < 0:
        raise PreconditionException(f"J must be non-negative, got {(j1, j2)}", check_name="lp-blocks")
    if flavor == "ordinary":
        return [(j,) for j in range(max(j1, j2) + 1)]
    return list(itertools.product(range(j1 + 1), range(j2 + 1)))


def block_weights(
    cs: CutoffSystem, ps: ProductSpace, J: TIntPairLike, flavor: str = "mixed"
) -> t.Dict[TBlockIndex, np.ndarray]:
    grid = ps.get_sqrt_eigen_grid()
    return {j: cs.coef_weights(grid, j, flavor) for j in block_indices(J, flavor)}


def lp_blocks(cs: CutoffSystem, cf: CoefField, J: TIntPairLike, flavor: str = "mixed") -> TBlocks:
    """
    phi_j(sqrt L) f for every j in [0, J]; mixed blocks are tensor products of
    the axis cutoffs, ordinary blocks are radial in sqrt(lambda_1 + lambda_2).
    """
    weights = block_weights(cs, cf.get_space(), J, flavor)
    return {j: apply_coef_weights(w, cf) for j, w in weights.items()}


def calderon_residual(
    cs: CutoffSystem, cf: CoefField, J: TIntPairLike, flavor: str = "mixed"
) -> float:
    """
    ||f - sum_{j <= J} phi_j(sqrt L) f||_2 / ||f||_2, computed on coefficients.
    """
    if not cs.satisfies("partition"):
        raise PreconditionException(f"{cs} is not a partition of unity", check_name="calderon")
    norm = cf.l2_norm()
    if norm == 0:
        return 0.0
    total = sum(block_weights(cs, cf.get_space(), J, flavor).values())
    return float(np.sqrt(np.sum(((1.0 - total) * cf.get_coefs()) ** 2)) / norm)


def band_project(cf: CoefField, t_pair: TPairLike) -> CoefField:
    """
    Keep modes with (sqrt lambda_1, sqrt lambda_2) in [0, t1] x [0, t2].
    """
    t1, t2 = positive_pair(t_pair, "t")
    s1, s2 = cf.get_space().get_sqrt_eigen_grid()
    mask = (s1 <= t1 * (1 + BAND_TOLERANCE)) & (s2 <= t2 * (1 + BAND_TOLERANCE))
    return cf.with_coefs(np.where(mask, cf.get_coefs(), 0.0))


def in_band(cf: CoefField, t_pair: TPairLike) -> bool:
    diff = (cf - band_project(cf, t_pair)).l2_norm()
    return diff <= BAND_TOLERANCE * max(cf.l2_norm(), 1.0)


def block_energies(blocks: TBlocks) -> t.List[t.Tuple[TBlockIndex, float]]:
    return [(j, blocks[j].l2_norm()) for j in sorted(blocks)]


def block_energies_csv(blocks: TBlocks) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    mixed = all(len(j) == 2 for j in blocks)
    writer.writerow(["j1", "j2", "l2_norm"] if mixed else ["j", "l2_norm"])
    for j, energy in block_energies(blocks):
        writer.writerow([*j, f"{energy:.12g}"])
    return buf.getvalue()


def eigen_power_weights(ps: ProductSpace, nu: TIntPairLike) -> np.ndarray:
    """
    lambda_1^nu_1 lambda_2^nu_2 on the coefficient grid (0^0 = 1).
    """
    n1, n2 = as_int_pair(nu, "nu")
    return np.outer(ps.get_m1().get_eigenvalues() ** n1, ps.get_m2().get_eigenvalues() ** n2)


def _check_band(g: CoefField, t_pair: t.Tuple[float, float], name: str) -> None:
    if t_pair[0] < 1 or t_pair[1] < 1:
        raise PreconditionException(f"t={t_pair} must be >= (1, 1)", check_name=name)
    if not in_band(g, t_pair):
        raise PreconditionException(f"function is not in the spectral space at t={t_pair}", check_name=name)


def nikolski_constant(
    g: CoefField, t_pair: TPairLike, p: float, q: float, gamma: TPairLike, nu: TIntPairLike
) -> float:
    """
    ||V(., 1/t)^gamma L^nu g||_q / (t^(2 nu) ||V(., 1/t)^(gamma + 1/q - 1/p) g||_p).
    """
    ps = g.get_space()
    t1, t2 = positive_pair(t_pair, "t")
    g1, g2 = as_pair(gamma, "gamma")
    n1, n2 = as_int_pair(nu, "nu")
    shift = (0.0 if math.isinf(q) else 1.0 / q) - (0.0 if math.isinf(p) else 1.0 / p)
    radius = (1.0 / t1, 1.0 / t2)
    weights = ps.get_product_weights()
    applied = synthesize(apply_coef_weights(eigen_power_weights(ps, (n1, n2)), g))
    lhs = grid_norm(volume_power_grid(ps, radius, (g1, g2)) * applied, weights, q)
    rhs_weight = volume_power_grid(ps, radius, (g1 + shift, g2 + shift))
    rhs = grid_norm(rhs_weight * synthesize(g), weights, p)
    scale = t1 ** (2 * n1) * t2 ** (2 * n2) * rhs
    if scale <= ZERO_GUARD * max(lhs, 1.0):
        return 0.0 if lhs == 0 else math.inf
    return lhs / scale


def nikolski_check(
    g: CoefField,
    t_pair: TPairLike,
    p: float,
    q: float,
    gamma: TPairLike = (0.0, 0.0),
    nu: TIntPairLike = (0, 0),
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    name = "nikolski"
    if p > q:
        raise PreconditionException(f"p={p} must not exceed q={q}", check_name=name)
    tp = positive_pair(t_pair, "t")
    _check_band(g, tp, name)
    c = nikolski_constant(g, tp, p, q, gamma, nu)
    c_fine = nikolski_constant(g.with_space(refine_product(g.get_space())), tp, p, q, gamma, nu)
    report = VerificationReport(name, anchor="spectral-space/nikolski")
    report.set_params({"t": list(tp), "p": p, "q": q, "gamma": list(as_pair(gamma)), "nu": list(as_int_pair(nu))})
    report.set_measured_constant(c).set_refined_constant(c_fine)
    report.add_criterion("refinement_change", relative_change(c, c_fine), stability)
    return report


def _nikolski_envelope(
    family: t.Sequence[CoefField],
    exponents: t.Sequence[int],
    p: float,
    q: float,
    gamma: TPairLike,
    nu: TIntPairLike,
    refine: bool = False,
) -> t.Tuple[float, int]:
    envelope, count = 0.0, 0
    for g in family:
        target = g.with_space(refine_product(g.get_space())) if refine else g
        for e1, e2 in itertools.product(exponents, exponents):
            tp = (2.0**e1, 2.0**e2)
            if not in_band(g, tp):
                continue
            envelope = max(envelope, nikolski_constant(target, tp, p, q, gamma, nu))
            count += 1
    return envelope, count


def nikolski_sweep(
    family: t.Sequence[CoefField],
    p: float,
    q: float,
    gamma: TPairLike = (0.0, 0.0),
    nu: TIntPairLike = (0, 0),
    exponents: t.Sequence[int] = tuple(range(6)),
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    Envelope of the Nikolski constant over a family and the dyadic sweep
    t in {2^e}^2 (pairs with g outside the spectral space skipped). Stable
    when dropping the largest t and refining the grid both move it by less
    than the tolerance.
    """
    name = "nikolski-sweep"
    if p > q:
        raise PreconditionException(f"p={p} must not exceed q={q}", check_name=name)
    if not family:
        raise PreconditionException("empty test family", check_name=name)
    exps = sorted(exponents)
    envelope, count = _nikolski_envelope(family, exps, p, q, gamma, nu)
    shorter, _ = _nikolski_envelope(family, exps[:-1], p, q, gamma, nu)
    refined, _ = _nikolski_envelope(family, exps, p, q, gamma, nu, refine=True)
    report = VerificationReport(name, anchor="spectral-space/nikolski")
    report.set_params(
        {
            "p": p,
            "q": q,
            "gamma": list(as_pair(gamma)),
            "nu": list(as_int_pair(nu)),
            "exponents": exps,
            "family_size": len(family),
        }
    )
    report.set_measured_constant(envelope).set_refined_constant(refined)
    report.set_measurement("evaluations", count)
    report.set_measurement("envelope_without_largest_t", shorter)
    report.add_criterion("sweep_extension_change", relative_change(envelope, shorter), stability)
    report.add_criterion("refinement_change", relative_change(envelope, refined), stability)
    return report


def peetre_lhs(ps: ProductSpace, h: np.ndarray, t_pair: TPairLike, exponent: TPairLike) -> np.ndarray:
    """
    max_y |h(y)| prod_i (1 + t_i rho_i(x_i, y_i))^(-exponent_i) at every node x.
    """
    t1, t2 = positive_pair(t_pair, "t")
    e1, e2 = as_pair(exponent, "exponent")
    m1, m2 = ps.get_models()
    a1 = (1.0 + t1 * m1.distance_matrix()) ** (-e1)
    a2 = (1.0 + t2 * m2.distance_matrix()) ** (-e2)
    return separable_max(a1, a2, np.abs(h))


def _peetre_ratio(
    g: CoefField,
    t_pair: t.Tuple[float, float],
    gamma: t.Tuple[float, float],
    tau: t.Tuple[float, float],
    r: float,
    n_scales: t.Tuple[int, int],
) -> t.Tuple[float, float, int]:
    ps = g.get_space()
    radius = (1.0 / t_pair[0], 1.0 / t_pair[1])
    vol = volume_power_grid(ps, radius, gamma)
    h = vol * synthesize(g)
    exponent = (tau[0] / r, tau[1] / r)
    lhs = peetre_lhs(ps, h, t_pair, exponent)
    rhs = strong_maximal(ps, h, r, radii=centered_radii(ps, n_scales))
    valid = rhs > ZERO_GUARD * max(float(rhs.max()), ZERO_GUARD)
    skipped = int((~valid).sum())
    c = float(np.max(lhs[valid] / rhs[valid])) if valid.any() else 0.0

    lifted = synthesize(apply_coef_weights(eigen_power_weights(ps, (1, 1)), g))
    lhs_lifted = peetre_lhs(ps, vol * lifted, t_pair, exponent) / (t_pair[0] ** 2 * t_pair[1] ** 2)
    lhs_valid = lhs > ZERO_GUARD * max(float(lhs.max()), ZERO_GUARD)
    left = float(np.max(lhs_lifted[lhs_valid] / lhs[lhs_valid])) if lhs_valid.any() else 0.0
    return c, left, skipped


def peetre_check(
    g: CoefField,
    t_pair: TPairLike,
    gamma: TPairLike = (0.0, 0.0),
    tau: TPairLike = (3.0, 3.0),
    r: float = 1.0,
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    One global c with sup_y V(y,1/t)^gamma |g(y)| prod (1 + t_i rho_i)^(-tau_i/r)
    <= c M_r(V(., 1/t)^gamma g) at every node; also measures the
    L^(1,1)-lifted left inequality and the change under 2x refinement.
    """
    name = "peetre"
    ps = g.get_space()
    tp = positive_pair(t_pair, "t")
    tau_pair = as_pair(tau, "tau")
    dims = ps.get_d_pair()
    if tau_pair[0] <= 2 * dims[0] or tau_pair[1] <= 2 * dims[1]:
        raise PreconditionException(f"tau={tau_pair} must exceed 2d={tuple(2 * d for d in dims)}", check_name=name)
    if r <= 0:
        raise PreconditionException(f"r must be positive, got {r}", check_name=name)
    _check_band(g, tp, name)
    gamma_pair = as_pair(gamma, "gamma")
    n_scales = (default_n_scales(ps.get_m1()), default_n_scales(ps.get_m2()))
    c, left, skipped = _peetre_ratio(g, tp, gamma_pair, tau_pair, r, n_scales)
    c_fine, left_fine, _ = _peetre_ratio(
        g.with_space(refine_product(ps)), tp, gamma_pair, tau_pair, r, n_scales
    )
    report = VerificationReport(name, anchor="spectral-space/peetre-maximal")
    report.set_params({"t": list(tp), "gamma": list(gamma_pair), "tau": list(tau_pair), "r": r})
    report.set_measured_constant(c).set_refined_constant(c_fine)
    report.set_measurement("left_constant", left)
    report.set_measurement("left_constant_refined", left_fine)
    report.set_measurement("skipped_points", skipped)
    if skipped:
        logger.warning("peetre check skipped %d points with vanishing maximal function", skipped)
    report.add_criterion("refinement_change", relative_change(c, c_fine), stability)
    return report
