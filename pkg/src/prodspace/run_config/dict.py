import copy
import typing as t

import typing_extensions as te

from ..cutoffs import CUTOFF_FACTORIES
from ..exception import ProdSpaceException, RunConfigException
from .abstract import SUITE_NAMES, RunConfigAbstract, TRunConf, space_from_conf

DEFAULT_MODEL: te.Final = {"name": "circle", "n_modes": 32, "n_nodes": 128}

DEFAULT_TOLERANCES: te.Final = {
    "orthonormality": 1e-10,
    "markov": 1e-10,
    "kernel_mass": 1e-8,
    "calderon": 1e-12,
    "stability": 0.1,
    "finite_speed": 0.1,
    "slope_slack": 0.5,
    "ratio_bound": 4.0,
}

DEFAULT_CONF: te.Final = {
    "models": [DEFAULT_MODEL, DEFAULT_MODEL],
    "cutoffs": {"primary": "partition", "secondary": "orthogonal"},
    "spaces": [
        {"family": "B", "kind": "classical", "flavor": "mixed", "s": [0.0, 0.0], "p": 2.0, "q": 2.0},
        {"family": "F", "kind": "classical", "flavor": "mixed", "s": [0.0, 0.0], "p": 2.0, "q": 2.0},
        {"family": "B", "kind": "nonclassical", "flavor": "mixed", "s": [1.0, 0.0], "p": 2.0, "q": 2.0},
        {"family": "B", "kind": "classical", "flavor": "ordinary", "s": 0.5, "p": 2.0, "q": 2.0},
        {"family": "B", "kind": "classical", "flavor": "mixed", "s": [1.0, 1.0], "p": 2.0, "q": 1.0},
        {"family": "F", "kind": "classical", "flavor": "mixed", "s": [1.0, -1.0], "p": 1.0, "q": "inf"},
    ],
    "maximal": {"r": 1.0, "t_exponents": [-9, 2], "a": [1.0, 1.0], "gamma": None},
    "suites": {name: True for name in SUITE_NAMES},
    "tolerances": DEFAULT_TOLERANCES,
    "output_dir": "prodspace-out",
    "seed": 0,
    "test_set_size": 20,
    "threads": 1,
}

_MODEL_KEYS: te.Final = ("name", "n_modes", "n_nodes", "alpha", "beta")
_SPACE_KEYS: te.Final = ("family", "kind", "flavor", "s", "p", "q", "J")
_MAXIMAL_KEYS: te.Final = ("r", "t_exponents", "a", "gamma")


def _reject_unknown(section: str, data: t.Mapping[str, t.Any], allowed: t.Iterable[str]) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise RunConfigException(f"Unknown keys in {section}: {', '.join(unknown)}")


def _require_dict(section: str, value: t.Any) -> t.Dict[str, t.Any]:
    if not isinstance(value, dict):
        raise RunConfigException(f"Invalid {section} format. Must be dict")
    return value


def _positive_int(section: str, value: t.Any, allow_zero: bool = False) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise RunConfigException(f"{section} must be an integer, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise RunConfigException(f"{section} must be positive, got {value}")
    return value


class RunConfigDict(RunConfigAbstract):
    _conf: TRunConf

    def __init__(self, json_data: t.Mapping[str, t.Any]):
        """
        json_data is a dict with any subset of the keys below; missing keys
        take their defaults, unknown keys are rejected.

        Example:
            {
                "models": [
                    {"name": "circle", "n_modes": 32, "n_nodes": 128},
                    {"name": "jacobi", "n_modes": 32, "alpha": 0.0, "beta": 0.0}
                ],
                "cutoffs": {"primary": "partition", "secondary": "orthogonal"},
                "spaces": [{"family": "B", "s": [0, 0], "p": 2, "q": 2}],
                "maximal": {"r": 1, "t_exponents": [-9, 2], "a": [1, 1]},
                "suites": {"geometry": true, "hardy": false},
                "tolerances": {"stability": 0.1},
                "output_dir": "out",
                "seed": 0,
                "test_set_size": 20,
                "threads": 4
            }

        models - the two factors; name is circle or jacobi, n_nodes defaults
                 to 4 n_modes (circle) or 2 n_modes (jacobi)
        cutoffs - cutoff systems used for norms and for the independence check
        spaces - smoothness spaces measured by the spaces and multipliers suites;
                 p and q may be "inf"
        maximal - maximal-function parameters; gamma defaults to 1.25 * 2d/p
        tolerances - every value must be positive
        """
        super().__init__()
        data = _require_dict("run config", json_data)
        _reject_unknown("run config", data, DEFAULT_CONF)
        conf: t.Dict[str, t.Any] = copy.deepcopy(DEFAULT_CONF)

        if "models" in data:
            conf["models"] = self._validate_models(data["models"])
        if "cutoffs" in data:
            cutoffs = _require_dict("cutoffs", data["cutoffs"])
            _reject_unknown("cutoffs", cutoffs, ("primary", "secondary"))
            for role, name in cutoffs.items():
                if name not in CUTOFF_FACTORIES:
                    raise RunConfigException(f"Unknown cutoff system {name!r} for {role}")
            conf["cutoffs"].update(cutoffs)
        if "spaces" in data:
            conf["spaces"] = self._validate_spaces(data["spaces"])
        if "maximal" in data:
            conf["maximal"].update(self._validate_maximal(data["maximal"]))
        if "suites" in data:
            suites = _require_dict("suites", data["suites"])
            _reject_unknown("suites", suites, SUITE_NAMES)
            conf["suites"].update({k: bool(v) for k, v in suites.items()})
        if "tolerances" in data:
            conf["tolerances"].update(self._validate_tolerances(data["tolerances"]))
        if "output_dir" in data:
            if not isinstance(data["output_dir"], str) or not data["output_dir"]:
                raise RunConfigException("output_dir must be a non-empty string")
            conf["output_dir"] = data["output_dir"]
        if "seed" in data:
            conf["seed"] = _positive_int("seed", data["seed"], allow_zero=True)
        if "test_set_size" in data:
            conf["test_set_size"] = _positive_int("test_set_size", data["test_set_size"])
        if "threads" in data:
            conf["threads"] = _positive_int("threads", data["threads"])
        self._conf = t.cast(TRunConf, conf)

    def _validate_models(self, models: t.Any) -> t.List[t.Dict[str, t.Any]]:
        if not isinstance(models, list) or len(models) != 2:
            raise RunConfigException("models must be a list of two factor specs")
        out = []
        for i, model in enumerate(models):
            section = f"models[{i}]"
            model = _require_dict(section, model)
            _reject_unknown(section, model, _MODEL_KEYS)
            if model.get("name") not in ("circle", "jacobi"):
                raise RunConfigException(f"{section}: name must be circle or jacobi")
            if "n_modes" not in model:
                raise RunConfigException(f"Key 'n_modes' is missing in {section}")
            _positive_int(f"{section}.n_modes", model["n_modes"])
            if model.get("n_nodes") is not None:
                _positive_int(f"{section}.n_nodes", model["n_nodes"])
            if model["name"] == "circle" and ("alpha" in model or "beta" in model):
                raise RunConfigException(f"{section}: alpha and beta apply to jacobi only")
            out.append(dict(model))
        return out

    def _validate_spaces(self, spaces: t.Any) -> t.List[t.Dict[str, t.Any]]:
        if not isinstance(spaces, list):
            raise RunConfigException("spaces must be a list")
        for i, space in enumerate(spaces):
            section = f"spaces[{i}]"
            _reject_unknown(section, _require_dict(section, space), _SPACE_KEYS)
            try:
                space_from_conf(space)
            except (ProdSpaceException, TypeError, ValueError) as e:
                raise RunConfigException(f"{section}: {e}") from e
        return [dict(s) for s in spaces]

    def _validate_maximal(self, maximal: t.Any) -> t.Dict[str, t.Any]:
        maximal = _require_dict("maximal", maximal)
        _reject_unknown("maximal", maximal, _MAXIMAL_KEYS)
        exps = maximal.get("t_exponents")
        if exps is not None and (
            not isinstance(exps, list) or len(exps) != 2 or not all(isinstance(e, int) for e in exps)
        ):
            raise RunConfigException("maximal.t_exponents must be [lo, hi] integers")
        return dict(maximal)

    def _validate_tolerances(self, tolerances: t.Any) -> t.Dict[str, float]:
        tolerances = _require_dict("tolerances", tolerances)
        _reject_unknown("tolerances", tolerances, DEFAULT_TOLERANCES)
        for key, value in tolerances.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                raise RunConfigException(f"Tolerance {key} must be a positive number, got {value!r}")
        return {k: float(v) for k, v in tolerances.items()}

    def get_conf(self) -> TRunConf:
        return self._conf

    def with_overrides(self, **overrides: t.Any) -> "RunConfigDict":
        """
        A copy with top-level keys replaced; None values are ignored.
        """
        data = copy.deepcopy(t.cast(t.Dict[str, t.Any], self._conf))
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfigDict(data)
