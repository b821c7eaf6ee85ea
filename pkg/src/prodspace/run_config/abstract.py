import math
import typing as t
from abc import ABCMeta, abstractmethod

import typing_extensions as te

from ..coordspace import SpectralModel, make_circle, make_jacobi
from ..cutoffs import CutoffSystem, make_cutoffs
from ..exception import ProdSpaceException, RunConfigException
from ..funcspaces import SpaceParams
from ..hardy import MaximalParams, default_t_grid
from ..product import ProductSpace, make_product

TModelConf = te.TypedDict(
    "TModelConf",
    {
        "name": str,
        "n_modes": int,
        "n_nodes": t.Optional[int],
        "alpha": float,
        "beta": float,
    },
    total=False,
)

TCutoffConf = te.TypedDict("TCutoffConf", {"primary": str, "secondary": str}, total=False)

TSpaceConf = te.TypedDict(
    "TSpaceConf",
    {
        "family": str,
        "kind": str,
        "flavor": str,
        "s": t.Union[float, t.List[float]],
        "p": t.Union[float, str],
        "q": t.Union[float, str],
        "J": t.Optional[t.List[int]],
    },
    total=False,
)

TMaximalConf = te.TypedDict(
    "TMaximalConf",
    {
        "r": float,
        "t_exponents": t.List[int],
        "a": t.List[float],
        "gamma": t.Optional[t.List[float]],
    },
    total=False,
)

TTolerances = te.TypedDict(
    "TTolerances",
    {
        "orthonormality": float,
        "markov": float,
        "kernel_mass": float,
        "calderon": float,
        "stability": float,
        "finite_speed": float,
        "slope_slack": float,
        "ratio_bound": float,
    },
    total=False,
)

TRunConf = te.TypedDict(
    "TRunConf",
    {
        "models": t.List[TModelConf],
        "cutoffs": TCutoffConf,
        "spaces": t.List[TSpaceConf],
        "maximal": TMaximalConf,
        "suites": t.Dict[str, bool],
        "tolerances": TTolerances,
        "output_dir": str,
        "seed": int,
        "test_set_size": int,
        "threads": int,
    },
    total=False,
)

SUITE_NAMES: te.Final = ("geometry", "calculus", "lp", "spaces", "hardy", "multipliers")


def parse_exponent(value: t.Union[float, str]) -> float:
    """
    Lebesgue exponents may be given as numbers or as the string "inf".
    """
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity"):
            return math.inf
        raise RunConfigException(f"Invalid exponent {value!r}")
    return float(value)


class RunConfigAbstract:
    __metaclass__ = ABCMeta

    @abstractmethod
    def get_conf(self) -> TRunConf:
        """
        The validated configuration with every default filled in.
        """
        raise NotImplementedError

    def get_model(self, index: int) -> SpectralModel:
        conf = self.get_conf()["models"][index]
        try:
            if conf["name"] == "circle":
                return make_circle(conf["n_modes"], conf.get("n_nodes"))
            return make_jacobi(
                conf["n_modes"], conf.get("alpha", 0.0), conf.get("beta", 0.0), conf.get("n_nodes")
            )
        except ProdSpaceException as e:
            raise RunConfigException(f"models[{index}]: {e}") from e

    def get_product_space(self) -> ProductSpace:
        return make_product(self.get_model(0), self.get_model(1))

    def get_cutoffs(self, role: str = "primary") -> CutoffSystem:
        return make_cutoffs(self.get_conf()["cutoffs"][role])  # type: ignore

    def get_spaces(self) -> t.List[SpaceParams]:
        out = []
        for i, conf in enumerate(self.get_conf()["spaces"]):
            try:
                out.append(space_from_conf(conf))
            except ProdSpaceException as e:
                raise RunConfigException(f"spaces[{i}]: {e}") from e
        return out

    def get_maximal_params(self) -> MaximalParams:
        conf = self.get_conf()["maximal"]
        lo, hi = conf["t_exponents"]
        try:
            return MaximalParams(
                r=conf["r"],
                t_grid=default_t_grid(lo, hi),
                a=conf["a"],
                gamma=conf.get("gamma") or (2.0, 2.0),
            )
        except ProdSpaceException as e:
            raise RunConfigException(f"maximal: {e}") from e

    def get_maximal_gamma(self) -> t.Optional[t.List[float]]:
        return self.get_conf()["maximal"].get("gamma")

    def is_suite_enabled(self, name: str) -> bool:
        return bool(self.get_conf()["suites"].get(name, False))

    def get_tolerance(self, name: str) -> float:
        return float(self.get_conf()["tolerances"][name])  # type: ignore

    def get_output_dir(self) -> str:
        return self.get_conf()["output_dir"]

    def get_seed(self) -> int:
        return self.get_conf()["seed"]

    def get_test_set_size(self) -> int:
        return self.get_conf()["test_set_size"]

    def get_threads(self) -> int:
        return self.get_conf()["threads"]


def space_from_conf(conf: TSpaceConf) -> SpaceParams:
    J = conf.get("J")
    return SpaceParams(
        s=conf.get("s", 0.0),
        p=parse_exponent(conf.get("p", 2.0)),
        q=parse_exponent(conf.get("q", 2.0)),
        family=conf.get("family", "B"),
        kind=conf.get("kind", "classical"),
        flavor=conf.get("flavor", "mixed"),
        J=None if J is None else tuple(J),  # type: ignore
    )
