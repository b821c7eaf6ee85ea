import typing as t

from ..exception import RunConfigException
from ..run_config import SUITE_NAMES, RunConfigAbstract
from .abstract import SuiteAbstract
from .calculus import CalculusSuite
from .geometry import GeometrySuite
from .hardy import HardySuite
from .lp import LpSuite
from .multipliers import MultipliersSuite
from .spaces import SpacesSuite

SUITES: t.Dict[str, t.Type[SuiteAbstract]] = {
    "geometry": GeometrySuite,
    "calculus": CalculusSuite,
    "lp": LpSuite,
    "spaces": SpacesSuite,
    "hardy": HardySuite,
    "multipliers": MultipliersSuite,
}


def get_suites(config: RunConfigAbstract, names: t.Optional[t.Sequence[str]] = None) -> t.List[SuiteAbstract]:
    """
    Suites in canonical order. Explicit names override the config's suite
    switches.
    """
    if names:
        unknown = [n for n in names if n not in SUITES]
        if unknown:
            raise RunConfigException(f"Unknown suites: {', '.join(unknown)}")
        selected = [n for n in SUITE_NAMES if n in names]
    else:
        selected = [n for n in SUITE_NAMES if config.is_suite_enabled(n)]
    return [SUITES[n](config) for n in selected]
