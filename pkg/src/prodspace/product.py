import logging
import math
import typing as t

import numpy as np

from .coordspace import SpectralModel, ball_volume, cell_volume_table, volume_table
from .exception import PreconditionException, ProdSpaceException
from .report import VerificationReport
from .utils import TPair, TPairLike, as_pair, positive_pair, relative_change

logger = logging.getLogger(__name__)

TPoint = t.Tuple[float, float]

DEFAULT_MAX_SAMPLES = 64
DEFAULT_STABILITY = 0.1


class ProductSpace:
    """
    X = X_1 x X_2 with rho = max(rho_1, rho_2) and mu = mu_1 x mu_2 sampled on
    the Cartesian product of the two quadrature grids.
    """

    _m1: SpectralModel
    _m2: SpectralModel
    _product_weights: np.ndarray

    def __init__(self, m1: SpectralModel, m2: SpectralModel):
        self._m1 = m1
        self._m2 = m2
        weights = np.outer(m1.get_weights(), m2.get_weights())
        weights.flags.writeable = False
        self._product_weights = weights

    def __repr__(self) -> str:
        return f"ProductSpace({self._m1!r} x {self._m2!r})"

    def get_m1(self) -> SpectralModel:
        return self._m1

    def get_m2(self) -> SpectralModel:
        return self._m2

    def get_models(self) -> t.Tuple[SpectralModel, SpectralModel]:
        return (self._m1, self._m2)

    def get_d_pair(self) -> TPair:
        return (self._m1.get_dim_d(), self._m2.get_dim_d())

    def get_product_weights(self) -> np.ndarray:
        return self._product_weights

    def get_shape(self) -> t.Tuple[int, int]:
        return (self._m1.get_n_nodes(), self._m2.get_n_nodes())

    def get_coef_shape(self) -> t.Tuple[int, int]:
        return (self._m1.get_n_modes(), self._m2.get_n_modes())

    def get_total_measure(self) -> float:
        return float(self._product_weights.sum())

    def get_band_radius(self) -> TPair:
        return (self._m1.get_band_radius(), self._m2.get_band_radius())

    def get_sqrt_eigen_grid(self) -> t.Tuple[np.ndarray, np.ndarray]:
        """
        (sqrt(lambda_1k), sqrt(lambda_2l)) broadcast to the coefficient shape.
        """
        s1 = self._m1.get_sqrt_eigenvalues()[:, None]
        s2 = self._m2.get_sqrt_eigenvalues()[None, :]
        return np.broadcast_arrays(s1, s2)  # type: ignore

    def node_point(self, i: int, j: int) -> TPoint:
        return (float(self._m1.get_nodes()[i]), float(self._m2.get_nodes()[j]))

    def metric(self, x: TPoint, y: TPoint) -> float:
        return float(
            max(self._m1.metric(x[0], y[0]), self._m2.metric(x[1], y[1]))
        )


class DKernelParams:
    """
    delta > 0 and sigma >= 0 componentwise for the kernels
    D*_{delta,sigma}(x,y) = prod_i (1 + rho_i(x_i,y_i)/delta_i)^(-sigma_i).
    """

    _delta: TPair
    _sigma: TPair

    def __init__(self, delta: TPairLike, sigma: TPairLike):
        self._delta = positive_pair(delta, "delta")
        sigma_pair = as_pair(sigma, "sigma")
        if sigma_pair[0] < 0 or sigma_pair[1] < 0:
            raise ProdSpaceException(f"sigma must be non-negative, got {sigma_pair}")
        self._sigma = sigma_pair

    def get_delta(self) -> TPair:
        return self._delta

    def get_sigma(self) -> TPair:
        return self._sigma

    def to_dict(self) -> t.Dict[str, t.List[float]]:
        return {"delta": list(self._delta), "sigma": list(self._sigma)}


def make_product(m1: SpectralModel, m2: SpectralModel) -> ProductSpace:
    return ProductSpace(m1, m2)


def refine_product(ps: ProductSpace, factor: int = 2) -> ProductSpace:
    return ProductSpace(ps.get_m1().refined(factor), ps.get_m2().refined(factor))


def rect_volume(ps: ProductSpace, x: TPoint, delta: TPairLike) -> float:
    d1, d2 = positive_pair(delta, "delta")
    return ball_volume(ps.get_m1(), x[0], d1) * ball_volume(ps.get_m2(), x[1], d2)


def rect_volume_power(
    ps: ProductSpace, x: TPoint, delta: TPairLike, gamma: TPairLike
) -> float:
    """
    V(x, delta)^gamma := V_1(x_1, delta_1)^gamma_1 V_2(x_2, delta_2)^gamma_2
    """
    d1, d2 = positive_pair(delta, "delta")
    g1, g2 = as_pair(gamma, "gamma")
    return ball_volume(ps.get_m1(), x[0], d1) ** g1 * ball_volume(ps.get_m2(), x[1], d2) ** g2


def axis_volumes(
    model: SpectralModel, radius: float, points: t.Optional[np.ndarray] = None, cells: bool = False
) -> np.ndarray:
    table = cell_volume_table if cells else volume_table
    return table(model, points, [radius])[:, 0]


def volume_power_grid(ps: ProductSpace, delta: TPairLike, gamma: TPairLike, cells: bool = False) -> np.ndarray:
    """
    V(x, delta)^gamma at every grid node, shape of the product grid. cells
    switches from node counting to cell_volume_table.
    """
    d1, d2 = positive_pair(delta, "delta")
    g1, g2 = as_pair(gamma, "gamma")
    v1 = axis_volumes(ps.get_m1(), d1, cells=cells) ** g1
    v2 = axis_volumes(ps.get_m2(), d2, cells=cells) ** g2
    return np.outer(v1, v2)


def axis_dstar(
    model: SpectralModel,
    xs: np.ndarray,
    ys: np.ndarray,
    delta: float,
    sigma: float,
) -> np.ndarray:
    return (1.0 + model.distance_matrix(xs, ys) / delta) ** (-sigma)


def dstar(ps: ProductSpace, params: DKernelParams, x: TPoint, y: TPoint) -> float:
    (d1, d2), (s1, s2) = params.get_delta(), params.get_sigma()
    r1 = float(ps.get_m1().metric(x[0], y[0]))
    r2 = float(ps.get_m2().metric(x[1], y[1]))
    return (1.0 + r1 / d1) ** (-s1) * (1.0 + r2 / d2) ** (-s2)


def dstar_slice(ps: ProductSpace, params: DKernelParams, x: TPoint) -> np.ndarray:
    (d1, d2), (s1, s2) = params.get_delta(), params.get_sigma()
    m1, m2 = ps.get_models()
    a1 = axis_dstar(m1, np.array([x[0]]), m1.get_nodes(), d1, s1)[0]
    a2 = axis_dstar(m2, np.array([x[1]]), m2.get_nodes(), d2, s2)[0]
    return np.outer(a1, a2)


def dkernel(ps: ProductSpace, params: DKernelParams, x: TPoint, y: TPoint) -> float:
    """
    D_{delta,sigma}(x,y) = D*_{delta,sigma}(x,y) / sqrt(V(x,delta) V(y,delta))
    """
    delta = params.get_delta()
    vol = rect_volume(ps, x, delta) * rect_volume(ps, y, delta)
    return dstar(ps, params, x, y) / math.sqrt(vol)


def dkernel_slice(ps: ProductSpace, params: DKernelParams, x: TPoint) -> np.ndarray:
    delta = params.get_delta()
    vx = rect_volume(ps, x, delta)
    vy = volume_power_grid(ps, delta, (1.0, 1.0))
    return dstar_slice(ps, params, x) / np.sqrt(vx * vy)


def sample_points(model: SpectralModel, max_samples: int = DEFAULT_MAX_SAMPLES) -> np.ndarray:
    n = model.get_n_nodes()
    idx = np.unique(np.round(np.linspace(0, n - 1, min(n, max_samples))).astype(int))
    return model.get_nodes()[idx]


def _axis_estimates(
    model: SpectralModel,
    samples: np.ndarray,
    delta: float,
    sigma: float,
    dim: float,
    with_normalized: bool,
) -> t.Dict[str, float]:
    """
    Per-axis maxima of LHS/RHS of the integral estimates. Every kernel involved
    is a product over the two axes, so product-space maxima are products of
    these.
    """
    ys = model.get_nodes()
    w = model.get_weights()
    vol_s = axis_volumes(model, delta, samples)
    vol_y = axis_volumes(model, delta)
    a = axis_dstar(model, samples, ys, delta, sigma)
    out = {"single": float(np.max((a @ w) / vol_s))}
    pair = (a * w) @ a.T
    out["pair"] = float(
        np.max(pair / (vol_s[:, None] * axis_dstar(model, samples, samples, delta, sigma - dim)))
    )
    if not with_normalized:
        return out
    a_norm = a / np.sqrt(vol_y)
    normalized = (a_norm * w) @ a_norm.T
    out["normalized"] = float(np.max(normalized / axis_dstar(model, samples, samples, delta, sigma)))
    if delta <= 1.0:
        a_unit = axis_dstar(model, samples, ys, 1.0, sigma)
        mixed = (a * (w / vol_y)) @ a_unit.T
        out["mixed"] = float(np.max(mixed / axis_dstar(model, samples, samples, 1.0, sigma)))
    return out


def _integral_constants(
    ps: ProductSpace, params: DKernelParams, samples: t.Sequence[np.ndarray], with_normalized: bool
) -> t.Dict[str, float]:
    (d1, d2), (s1, s2) = params.get_delta(), params.get_sigma()
    dim1, dim2 = ps.get_d_pair()
    e1 = _axis_estimates(ps.get_m1(), samples[0], d1, s1, dim1, with_normalized)
    e2 = _axis_estimates(ps.get_m2(), samples[1], d2, s2, dim2, with_normalized)
    return {k: e1[k] * e2[k] for k in e1 if k in e2}


def verify_integral_estimates(
    ps: ProductSpace,
    params: DKernelParams,
    max_samples: int = DEFAULT_MAX_SAMPLES,
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    Measures c in
      single:     int D*(x,y) dmu(y) <= c V(x,delta)                   (sigma > d)
      pair:       int D*(x,y) D*(y,z) dmu(y) <= c V(x,delta) D*_{sigma-d}(x,z)
      normalized: int D(x,y) D(y,z) dmu(y) <= c D(x,z)                  (sigma > 2d)
      mixed:      int V(y,delta)^-1 D*(x,y) D*_{1,sigma}(y,z) dmu(y)
                  <= c D*_{1,sigma}(x,z)                                (also delta <= 1)
    on sampled x, z, then again with the same samples on a 2x refined quadrature.
    """
    name = "integral-estimates"
    sigma = params.get_sigma()
    dims = ps.get_d_pair()
    if sigma[0] <= dims[0] or sigma[1] <= dims[1]:
        raise PreconditionException(
            f"sigma={sigma} must exceed d={dims} componentwise", check_name=name
        )
    with_normalized = sigma[0] > 2 * dims[0] and sigma[1] > 2 * dims[1]
    samples = [sample_points(m, max_samples) for m in ps.get_models()]
    coarse = _integral_constants(ps, params, samples, with_normalized)
    fine = _integral_constants(refine_product(ps), params, samples, with_normalized)

    report = VerificationReport(name, anchor="geometry/integral-estimates")
    report.set_params({**params.to_dict(), "max_samples": max_samples})
    if not with_normalized:
        report.add_note("normalized and mixed estimates need sigma > 2d; skipped")
    elif "mixed" not in coarse:
        report.add_note("mixed estimate needs delta <= 1; skipped")
    for key in sorted(coarse):
        c, c_fine = coarse[key], fine[key]
        report.set_measurement(f"{key}_constant", c)
        report.set_measurement(f"{key}_refined", c_fine)
        report.add_criterion(f"{key}_refinement_change", relative_change(c, c_fine), stability)
    report.set_measured_constant(max(coarse.values()))
    report.set_refined_constant(max(fine.values()))
    logger.info("integral estimates %s: %s", params.to_dict(), coarse)
    return report


def _geometric_deltas(model: SpectralModel, count: int = 5) -> np.ndarray:
    lo = 2.0 * model.get_max_spacing()
    hi = 0.5 * model.get_diameter()
    return np.geomspace(lo, hi, count)


def _axis_doubling(model: SpectralModel, pts: np.ndarray, lambdas: np.ndarray, deltas: np.ndarray) -> float:
    base = cell_volume_table(model, pts, deltas)
    worst = 0.0
    for lam in lambdas:
        scaled = cell_volume_table(model, pts, lam * deltas)
        worst = max(worst, float(np.max(scaled / (lam ** model.get_dim_d() * base))))
    return worst


def rect_doubling_check(
    ps: ProductSpace,
    lambdas: t.Sequence[float] = (1.0, 2.0, 4.0, 8.0),
    max_samples: int = DEFAULT_MAX_SAMPLES,
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    c = max V(x, lam delta) / (lam^d V(x, delta)) over sampled x, a geometric
    delta sweep and lam >= (1,1); measured on the grid and its refinement
    with the same anchors and the same delta sweep, cell volumes throughout.
    """
    lams = np.asarray(lambdas, dtype=float)
    samples = [sample_points(m, max_samples) for m in ps.get_models()]
    deltas = [_geometric_deltas(m) for m in ps.get_models()]

    def measure(space: ProductSpace) -> float:
        c1 = _axis_doubling(space.get_m1(), samples[0], lams, deltas[0])
        c2 = _axis_doubling(space.get_m2(), samples[1], lams, deltas[1])
        return c1 * c2

    coarse, fine = measure(ps), measure(refine_product(ps))
    report = VerificationReport("rect-doubling", anchor="geometry/rect-doubling")
    report.set_params({"lambdas": list(lams), "max_samples": max_samples})
    report.set_measured_constant(coarse).set_refined_constant(fine)
    report.add_criterion("refinement_change", relative_change(coarse, fine), stability)
    return report


def center_change_check(
    ps: ProductSpace,
    delta: TPairLike,
    max_samples: int = DEFAULT_MAX_SAMPLES,
    stability: float = DEFAULT_STABILITY,
) -> VerificationReport:
    """
    c = max V(x,delta) / (V(y,delta) prod_i (1 + rho_i/delta_i)^d_i) over sampled pairs.
    """
    deltas = positive_pair(delta, "delta")
    samples = [sample_points(m, max_samples) for m in ps.get_models()]

    def measure(space: ProductSpace) -> float:
        c = 1.0
        for model, pts, dl in zip(space.get_models(), samples, deltas):
            vol = axis_volumes(model, dl, pts)
            growth = axis_dstar(model, pts, pts, dl, -model.get_dim_d())
            c *= float(np.max(vol[:, None] / (vol[None, :] * growth)))
        return c

    coarse, fine = measure(ps), measure(refine_product(ps))
    report = VerificationReport("center-change", anchor="geometry/center-change")
    report.set_params({"delta": list(deltas), "max_samples": max_samples})
    report.set_measured_constant(coarse).set_refined_constant(fine)
    report.add_criterion("refinement_change", relative_change(coarse, fine), stability)
    return report


def dstar_triangle_ratio(
    ps: ProductSpace, params: DKernelParams, max_samples: int = 16
) -> float:
    """
    min over sampled triples of D*(x,z) / (D*(x,y) D*(y,z)); at least 1 by the
    triangle inequality.
    """
    (d1, d2), (s1, s2) = params.get_delta(), params.get_sigma()
    worst = 1.0
    for model, delta, sigma in zip(ps.get_models(), (d1, d2), (s1, s2)):
        pts = sample_points(model, max_samples)
        a = axis_dstar(model, pts, pts, delta, sigma)
        ratio = a[:, None, :] / (a[:, :, None] * a[None, :, :])
        worst *= float(ratio.min())
    return worst
