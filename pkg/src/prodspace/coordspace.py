import logging
import math
import typing as t

import numpy as np
from numpy.polynomial import chebyshev
from scipy.special import eval_jacobi, gammaln, roots_jacobi

from .exception import ModelException, ProdSpaceException

logger = logging.getLogger(__name__)

TMetric = t.Callable[[np.ndarray, np.ndarray], np.ndarray]
TEigenEval = t.Callable[[np.ndarray], np.ndarray]
TGenerator = t.Callable[[np.ndarray], np.ndarray]

# closed balls: a node at distance exactly r belongs to B(x, r)
BALL_EPS = 1e-12


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


class SpectralModel:
    """
    One coordinate space: a non-negative self-adjoint operator truncated to its
    first eigenpairs, sampled on a quadrature grid.

    eigenfunctions[k, m] = e_k(nodes[m]) and the quadrature represents the
    measure, so sum_m weights[m] e_k e_l = delta_kl on the retained band.
    Instances are never mutated after construction.
    """

    _name: str
    _dim_d: float
    _holder_alpha: float
    _sqrt_eigenvalues: np.ndarray
    _nodes: np.ndarray
    _weights: np.ndarray
    _eigenfunctions: np.ndarray
    _diameter: float
    _metric: TMetric
    _eigen_eval: TEigenEval
    _generator: TGenerator
    _builder: t.Callable[[int], "SpectralModel"]
    _params: t.Dict[str, float]
    _cell_widths: np.ndarray

    def __init__(
        self,
        name: str,
        dim_d: float,
        holder_alpha: float,
        sqrt_eigenvalues: np.ndarray,
        nodes: np.ndarray,
        weights: np.ndarray,
        metric: TMetric,
        eigen_eval: TEigenEval,
        generator: TGenerator,
        diameter: float,
        builder: t.Callable[[int], "SpectralModel"],
        params: t.Optional[t.Dict[str, float]] = None,
        cell_widths: t.Optional[np.ndarray] = None,
    ):
        self._name = name
        self._dim_d = float(dim_d)
        self._holder_alpha = float(holder_alpha)
        self._sqrt_eigenvalues = _frozen(sqrt_eigenvalues)
        self._nodes = _frozen(nodes)
        self._weights = _frozen(weights)
        self._metric = metric
        self._eigen_eval = eigen_eval
        self._generator = generator
        self._diameter = float(diameter)
        self._builder = builder
        self._params = dict(params or {})
        self._eigenfunctions = _frozen(eigen_eval(self._nodes))
        if cell_widths is None:
            cell_widths = np.full(self._nodes.shape, self.get_max_spacing())
        self._cell_widths = _frozen(cell_widths)

    def __repr__(self) -> str:
        return (
            f"SpectralModel({self._name}, n_modes={self.get_n_modes()}, "
            f"n_nodes={self.get_n_nodes()})"
        )

    def get_name(self) -> str:
        return self._name

    def get_dim_d(self) -> float:
        return self._dim_d

    def get_holder_alpha(self) -> float:
        return self._holder_alpha

    def get_n_modes(self) -> int:
        return int(self._sqrt_eigenvalues.shape[0])

    def get_n_nodes(self) -> int:
        return int(self._nodes.shape[0])

    def get_sqrt_eigenvalues(self) -> np.ndarray:
        return self._sqrt_eigenvalues

    def get_eigenvalues(self) -> np.ndarray:
        return self._sqrt_eigenvalues**2

    def get_nodes(self) -> np.ndarray:
        return self._nodes

    def get_weights(self) -> np.ndarray:
        return self._weights

    def get_eigenfunctions(self) -> np.ndarray:
        return self._eigenfunctions

    def get_diameter(self) -> float:
        return self._diameter

    def get_params(self) -> t.Dict[str, float]:
        return dict(self._params)

    def get_band_radius(self) -> float:
        return float(self._sqrt_eigenvalues.max())

    def get_total_measure(self) -> float:
        return float(self._weights.sum())

    def get_max_spacing(self) -> float:
        """
        Largest metric gap between consecutive nodes.
        """
        order = np.argsort(self._nodes)
        sorted_nodes = self._nodes[order]
        gaps = self._metric(sorted_nodes[1:], sorted_nodes[:-1])
        return float(gaps.max()) if gaps.size else self._diameter

    def get_cell_widths(self) -> np.ndarray:
        """
        Metric length of the piece of the domain each node stands for.
        """
        return self._cell_widths

    def metric(self, x: t.Any, y: t.Any) -> np.ndarray:
        return self._metric(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def distance_matrix(
        self, xs: t.Optional[np.ndarray] = None, ys: t.Optional[np.ndarray] = None
    ) -> np.ndarray:
        xs = self._nodes if xs is None else np.asarray(xs, dtype=float)
        ys = self._nodes if ys is None else np.asarray(ys, dtype=float)
        return self._metric(xs[:, None], ys[None, :])

    def eval_eigenfunctions(self, points: t.Any) -> np.ndarray:
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        return self._eigen_eval(pts)

    def apply_generator(self, samples: np.ndarray) -> np.ndarray:
        return self._generator(np.asarray(samples, dtype=float))

    def refined(self, factor: int = 2) -> "SpectralModel":
        return self._builder(self.get_n_nodes() * factor)


def _circle_metric(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.mod(np.abs(a - b), 2.0 * math.pi)
    return np.minimum(d, 2.0 * math.pi - d)


def _circle_eigen(max_freq: int) -> TEigenEval:
    def evaluate(theta: np.ndarray) -> np.ndarray:
        k = np.arange(1, max_freq + 1, dtype=float)
        out = np.empty((2 * max_freq + 1, theta.shape[0]))
        out[0] = 1.0 / math.sqrt(2.0 * math.pi)
        phase = np.outer(k, theta)
        out[1::2] = np.cos(phase) / math.sqrt(math.pi)
        out[2::2] = np.sin(phase) / math.sqrt(math.pi)
        return out

    return evaluate


def _circle_generator(samples: np.ndarray) -> np.ndarray:
    # -d^2/dtheta^2 by spectral differentiation on uniform nodes
    n = samples.shape[-1]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    return np.fft.irfft(np.fft.rfft(samples, axis=-1) * k**2, n=n, axis=-1)


def make_circle(n_modes: int, n_nodes: t.Optional[int] = None) -> SpectralModel:
    """
    L = -d^2/dtheta^2 on [0, 2pi) with frequencies 0..n_modes-1, i.e.
    2*n_modes-1 real eigenfunctions {1/sqrt(2pi), cos(k.)/sqrt(pi), sin(k.)/sqrt(pi)}.
    The trapezoid rule on n_nodes >= 4*n_modes uniform nodes integrates every
    product of two retained eigenfunctions exactly.
    """
    if n_modes <= 0:
        raise ModelException(f"n_modes must be positive, got {n_modes}")
    if n_nodes is None:
        n_nodes = 4 * n_modes
    if n_nodes < 4 * n_modes:
        raise ModelException(
            f"circle needs n_nodes >= 4*n_modes = {4 * n_modes}, got {n_nodes}"
        )
    max_freq = n_modes - 1
    freqs = np.concatenate([[0.0], np.repeat(np.arange(1, max_freq + 1), 2)])
    nodes = 2.0 * math.pi * np.arange(n_nodes) / n_nodes
    weights = np.full(n_nodes, 2.0 * math.pi / n_nodes)
    return SpectralModel(
        name="circle",
        dim_d=1.0,
        holder_alpha=1.0,
        sqrt_eigenvalues=freqs,
        nodes=nodes,
        weights=weights,
        metric=_circle_metric,
        eigen_eval=_circle_eigen(max_freq),
        generator=_circle_generator,
        diameter=math.pi,
        builder=lambda n: make_circle(n_modes, n),
        params={"n_modes": n_modes, "n_nodes": n_nodes},
        cell_widths=weights,
    )


def _jacobi_metric(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(np.arccos(np.clip(a, -1.0, 1.0)) - np.arccos(np.clip(b, -1.0, 1.0)))


def _jacobi_log_norms(n_modes: int, alpha: float, beta: float) -> np.ndarray:
    """
    log of h_n = int P_n^{(alpha,beta)}(x)^2 (1-x)^alpha (1+x)^beta dx.
    """
    ab = alpha + beta
    out = np.empty(n_modes)
    out[0] = (
        (ab + 1.0) * math.log(2.0)
        + gammaln(alpha + 1.0)
        + gammaln(beta + 1.0)
        - gammaln(ab + 2.0)
    )
    if n_modes > 1:
        n = np.arange(1, n_modes, dtype=float)
        out[1:] = (
            (ab + 1.0) * math.log(2.0)
            - np.log(2.0 * n + ab + 1.0)
            + gammaln(n + alpha + 1.0)
            + gammaln(n + beta + 1.0)
            - gammaln(n + ab + 1.0)
            - gammaln(n + 1.0)
        )
    return out


def _jacobi_eigen(n_modes: int, alpha: float, beta: float) -> TEigenEval:
    scale = np.exp(-0.5 * _jacobi_log_norms(n_modes, alpha, beta))
    degrees = np.arange(n_modes)

    def evaluate(x: np.ndarray) -> np.ndarray:
        vals = eval_jacobi(degrees[:, None], alpha, beta, x[None, :])
        return vals * scale[:, None]

    return evaluate


def _jacobi_generator(nodes: np.ndarray, alpha: float, beta: float) -> TGenerator:
    drift = (beta - alpha) - (alpha + beta + 2.0) * nodes

    def apply(samples: np.ndarray) -> np.ndarray:
        # -[w (1-x^2) f']' / w through the interpolating Chebyshev series
        coef = chebyshev.chebfit(nodes, samples, nodes.shape[0] - 1)
        d1 = chebyshev.chebval(nodes, chebyshev.chebder(coef))
        d2 = chebyshev.chebval(nodes, chebyshev.chebder(coef, 2))
        return -(1.0 - nodes**2) * d2 - drift * d1

    return apply


def _jacobi_cells(nodes: np.ndarray) -> np.ndarray:
    # angle cells split at midpoints between neighbouring nodes, closed by 0 and pi
    theta = np.arccos(np.clip(nodes, -1.0, 1.0))
    order = np.argsort(theta)
    sorted_theta = theta[order]
    edges = np.concatenate([[0.0], 0.5 * (sorted_theta[1:] + sorted_theta[:-1]), [math.pi]])
    widths = np.empty_like(theta)
    widths[order] = np.diff(edges)
    return widths


def make_jacobi(
    n_modes: int, alpha: float, beta: float, n_nodes: t.Optional[int] = None
) -> SpectralModel:
    """
    Jacobi operator Lf = -[w(1-x^2)f']'/w on [-1, 1] with
    dmu = (1-x)^alpha (1+x)^beta dx and rho(x, y) = |arccos x - arccos y|.
    Eigenfunctions are the orthonormalized Jacobi polynomials with
    lambda_n = n(n + alpha + beta + 1); quadrature is Gauss-Jacobi.
    """
    if alpha <= -1 or beta <= -1:
        raise ModelException(
            f"Jacobi parameters must exceed -1, got alpha={alpha}, beta={beta}"
        )
    if n_modes <= 0:
        raise ModelException(f"n_modes must be positive, got {n_modes}")
    if n_nodes is None:
        n_nodes = 2 * n_modes
    if n_nodes < n_modes:
        raise ModelException(
            f"Gauss-Jacobi order must be >= n_modes = {n_modes}, got {n_nodes}"
        )
    nodes, weights = roots_jacobi(n_nodes, alpha, beta)
    n = np.arange(n_modes, dtype=float)
    sqrt_eig = np.sqrt(n * (n + alpha + beta + 1.0))
    return SpectralModel(
        name="jacobi",
        dim_d=1.0,
        holder_alpha=1.0,
        sqrt_eigenvalues=sqrt_eig,
        nodes=np.real(nodes),
        weights=np.real(weights),
        metric=_jacobi_metric,
        eigen_eval=_jacobi_eigen(n_modes, alpha, beta),
        generator=_jacobi_generator(np.real(nodes), alpha, beta),
        diameter=math.pi,
        builder=lambda m: make_jacobi(n_modes, alpha, beta, m),
        params={"n_modes": n_modes, "n_nodes": n_nodes, "alpha": alpha, "beta": beta},
        cell_widths=_jacobi_cells(np.real(nodes)),
    )


def refine_model(model: SpectralModel, factor: int = 2) -> SpectralModel:
    return model.refined(factor)


def ball_volume(model: SpectralModel, x: float, r: float) -> float:
    """
    V(x, r) = mu(B(x, r)) by node counting with quadrature weights.
    """
    if r <= 0:
        raise ProdSpaceException(f"radius must be positive, got {r}")
    dist = model.metric(x, model.get_nodes())
    mask = dist <= r + BALL_EPS * max(1.0, r)
    return float(np.sum(model.get_weights()[mask]))


def volume_table(
    model: SpectralModel, points: t.Optional[np.ndarray], radii: t.Sequence[float]
) -> np.ndarray:
    """
    V(points[i], radii[j]) for all pairs; points default to the nodes.
    Radius 0 is allowed here and gives the weight of coinciding nodes.
    """
    radii = np.asarray(radii, dtype=float)
    dist = model.distance_matrix(points)
    inside = dist[:, :, None] <= radii[None, None, :] + BALL_EPS * np.maximum(1.0, radii)
    return np.einsum("pnr,n->pr", inside.astype(float), model.get_weights())


def cell_volume_table(
    model: SpectralModel, points: t.Optional[np.ndarray], radii: t.Sequence[float]
) -> np.ndarray:
    """
    Like volume_table, but each node's weight is spread over a cell of metric
    width get_cell_widths() centred at the node, and B(x, r) takes the share of
    the cell it covers. Unlike node counting this converges under refinement
    for radii below the node spacing; on the circle it is exactly min(2r, 2pi)
    away from the antipode.
    """
    radii = np.asarray(radii, dtype=float)
    dist = model.distance_matrix(points)[:, :, None]
    half = 0.5 * model.get_cell_widths()[None, :, None]
    r = radii[None, None, :]
    covered = np.clip(np.minimum(r, dist + half) - np.maximum(-r, dist - half), 0.0, None) / (2.0 * half)
    covered = np.where(r >= model.get_diameter() * (1.0 - BALL_EPS), 1.0, np.minimum(covered, 1.0))
    return np.einsum("pnr,n->pr", covered, model.get_weights())


def orthonormality_residual(model: SpectralModel) -> float:
    e = model.get_eigenfunctions()
    gram = (e * model.get_weights()) @ e.T
    return float(np.abs(gram - np.eye(gram.shape[0])).max())


def eigen_equation_residual(model: SpectralModel, interior: float = 0.9) -> float:
    """
    max_k |L e_k - lambda_k e_k| / (max(1, lambda_k) max|e_k|) on nodes with
    |x| <= interior (Jacobi) or on all nodes (circle).
    """
    e = model.get_eigenfunctions()
    lam = model.get_eigenvalues()
    if model.get_name() == "jacobi":
        mask = np.abs(model.get_nodes()) <= interior
    else:
        mask = np.ones(model.get_n_nodes(), dtype=bool)
    worst = 0.0
    for k in range(e.shape[0]):
        applied = model.apply_generator(e[k])
        err = np.abs(applied - lam[k] * e[k])[mask].max()
        scale = max(1.0, lam[k]) * np.abs(e[k]).max()
        worst = max(worst, float(err / scale))
    return worst


def doubling_fit(model: SpectralModel) -> t.Tuple[float, float]:
    """
    c0 = max over nodes and dyadic radii of V(x, 2r)/V(x, r); d_est = max over
    nodes of the least-squares slope of log V(x, lam r0) against log lam on
    radii between a few node spacings and 0.9 diam.
    """
    diam = model.get_diameter()
    n_scales = int(math.ceil(math.log2(model.get_n_nodes()))) + 2
    radii = diam * 2.0 ** (-np.arange(1, n_scales + 1, dtype=float))
    doubled = volume_table(model, None, 2.0 * radii)
    base = volume_table(model, None, radii)
    valid = base > 0
    c0 = float(np.max(doubled[valid] / base[valid]))

    r_lo = min(4.0 * model.get_max_spacing(), 0.25 * diam)
    r_hi = 0.9 * diam
    lams = np.geomspace(1.0, r_hi / r_lo, 48)
    vols = volume_table(model, None, r_lo * lams)
    log_lam = np.log(lams)
    centered = log_lam - log_lam.mean()
    log_v = np.log(np.maximum(vols, np.finfo(float).tiny))
    slopes = (log_v - log_v.mean(axis=1, keepdims=True)) @ centered / (centered @ centered)
    d_est = float(slopes.max())
    logger.debug("doubling fit for %s: c0=%.4g d_est=%.4g", model, c0, d_est)
    return c0, d_est
