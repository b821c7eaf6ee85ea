import logging
import typing as t

import numpy as np
import typing_extensions as te

from .exception import ProdSpaceException

logger = logging.getLogger(__name__)

TProfile = t.Callable[[np.ndarray], np.ndarray]
TCutoffKind = te.Literal["partition", "norm-admissible", "orthogonal-partition"]
TFlavor = te.Literal["mixed", "ordinary"]

CUTOFF_KINDS: te.Final = ("partition", "norm-admissible", "orthogonal-partition")
IDENTITY_TOLERANCE: te.Final = 1e-10


def _h(u: np.ndarray) -> np.ndarray:
    positive = u > 0
    safe = np.where(positive, u, 1.0)
    return np.where(positive, np.exp(-1.0 / safe), 0.0)


def smooth_step(u: t.Any) -> np.ndarray:
    """
    C-infinity step: 0 for u <= 0, 1 for u >= 1.
    """
    u = np.asarray(u, dtype=float)
    a, b = _h(u), _h(1.0 - u)
    return a / (a + b)


def plateau(x: t.Any) -> np.ndarray:
    """
    Even C-infinity function, 1 on [-1, 1] and 0 outside (-2, 2).
    """
    return smooth_step(2.0 - np.abs(np.asarray(x, dtype=float)))


def _annulus(x: np.ndarray) -> np.ndarray:
    # non-negative since the plateau is nonincreasing in |x|
    return np.maximum(plateau(x) - plateau(2.0 * np.asarray(x, dtype=float)), 0.0)


class CutoffSystem:
    """
    Pairs (phi_0^i, phi^i), i = 1, 2, generating dyadic blocks
    phi_j(t) = phi_0(t) for j = 0 and phi(2^-j t) for j >= 1.
    """

    _name: str
    _kind: str
    _phi0: t.Tuple[TProfile, TProfile]
    _phi: t.Tuple[TProfile, TProfile]

    def __init__(
        self,
        phi0: t.Tuple[TProfile, TProfile],
        phi: t.Tuple[TProfile, TProfile],
        kind: str,
        name: t.Optional[str] = None,
    ):
        if kind not in CUTOFF_KINDS:
            raise ProdSpaceException(f"Unknown cutoff kind {kind}")
        self._phi0 = phi0
        self._phi = phi
        self._kind = kind
        self._name = name or kind

    def __repr__(self) -> str:
        return f"CutoffSystem({self._name})"

    def get_name(self) -> str:
        return self._name

    def get_kind(self) -> str:
        return self._kind

    def get_phi0(self, axis: int = 0) -> TProfile:
        return self._phi0[axis]

    def get_phi(self, axis: int = 0) -> TProfile:
        return self._phi[axis]

    def block_profile(self, axis: int, j: int, x: t.Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if j == 0:
            return self._phi0[axis](x)
        return self._phi[axis](x * 2.0 ** (-j))

    def partial_sum(self, axis: int, x: t.Any, n_terms: int, power: int = 1) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape)
        for j in range(n_terms + 1):
            total = total + self.block_profile(axis, j, x) ** power
        return total

    def lower_bound(self, n_points: int = 2001) -> float:
        """
        c-hat = min(min |phi_0| on [-5/3, 5/3], min |phi| on [3/5, 5/3]) over
        both axes.
        """
        inner = np.linspace(-5.0 / 3.0, 5.0 / 3.0, n_points)
        ring = np.linspace(3.0 / 5.0, 5.0 / 3.0, n_points)
        bound = np.inf
        for axis in (0, 1):
            bound = min(
                bound,
                float(np.abs(self._phi0[axis](inner)).min()),
                float(np.abs(self._phi[axis](ring)).min()),
            )
        return bound

    def support_violation(self, n_points: int = 4001) -> float:
        x = np.linspace(-4.0, 4.0, n_points)
        worst = 0.0
        for axis in (0, 1):
            outside = np.abs(x) >= 2.0
            worst = max(worst, float(np.abs(self._phi0[axis](x[outside])).max()))
            hole = (np.abs(x) <= 0.5) | outside
            worst = max(worst, float(np.abs(self._phi[axis](x[hole])).max()))
        return worst

    def identity_residual(self, power: int, n_terms: int = 8, n_points: int = 4001) -> float:
        """
        max |phi_0(x)^p + sum_{n=1..N} phi(2^-n x)^p - 1| on |x| <= 2^N.
        """
        x = np.linspace(-(2.0**n_terms), 2.0**n_terms, n_points)
        return max(
            float(np.abs(self.partial_sum(axis, x, n_terms, power) - 1.0).max()) for axis in (0, 1)
        )

    def satisfies(self, kind: str) -> bool:
        if kind not in CUTOFF_KINDS:
            raise ProdSpaceException(f"Unknown cutoff kind {kind}")
        if self.support_violation() > 0:
            return False
        if kind == "partition":
            return self.identity_residual(power=1) <= IDENTITY_TOLERANCE
        if kind == "orthogonal-partition":
            return self.identity_residual(power=2) <= IDENTITY_TOLERANCE
        return self.lower_bound() > 0

    def coef_weights(
        self,
        sqrt_grid: t.Tuple[np.ndarray, np.ndarray],
        j: t.Tuple[int, ...],
        flavor: str = "mixed",
    ) -> np.ndarray:
        """
        phi_j(sqrt lambda_1, sqrt lambda_2) on the coefficient grid; mixed
        blocks are indexed by (j1, j2), ordinary (radial) blocks by (j,).
        """
        s1, s2 = sqrt_grid
        if flavor == "mixed":
            return self.block_profile(0, j[0], s1) * self.block_profile(1, j[1], s2)
        if flavor == "ordinary":
            return self.block_profile(0, j[0], np.sqrt(s1**2 + s2**2))
        raise ProdSpaceException(f"Unknown flavor {flavor}")


def make_partition_cutoffs() -> CutoffSystem:
    """
    phi_0 = plateau, phi(x) = phi_0(x) - phi_0(2x); the sums telescope to
    phi_0(2^-N x) = 1 on |x| <= 2^N.
    """
    return CutoffSystem((plateau, plateau), (_annulus, _annulus), kind="partition", name="partition")


def _sqrt_plateau(x: np.ndarray) -> np.ndarray:
    return np.sqrt(plateau(x))


def _sqrt_annulus(x: np.ndarray) -> np.ndarray:
    return np.sqrt(_annulus(x))


def make_orthogonal_cutoffs() -> CutoffSystem:
    """
    Square roots of the partition system: squares sum to 1.
    """
    return CutoffSystem(
        (_sqrt_plateau, _sqrt_plateau),
        (_sqrt_annulus, _sqrt_annulus),
        kind="orthogonal-partition",
        name="orthogonal",
    )


CUTOFF_FACTORIES: te.Final[t.Dict[str, t.Callable[[], CutoffSystem]]] = {
    "partition": make_partition_cutoffs,
    "orthogonal": make_orthogonal_cutoffs,
}


def make_cutoffs(name: str) -> CutoffSystem:
    try:
        factory = CUTOFF_FACTORIES[name]
    except KeyError as e:
        raise ProdSpaceException(f"Unknown cutoff system {name}") from e
    return factory()
