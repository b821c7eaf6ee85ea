import functools
import math
import typing as t

import typing_extensions as te

from ..calculus import CoefField
from ..cutoffs import CutoffSystem, make_partition_cutoffs
from ..funcspaces import auto_J
from ..lpdecomp import band_project, calderon_residual, nikolski_sweep, peetre_check
from ..report import VerificationReport
from ..testsets import mode_family
from .abstract import SuiteAbstract, TTask, residual_report

NIKOLSKI_CASES: te.Final = ((1.0, math.inf), (1.0, 2.0), (2.0, math.inf))
NIKOLSKI_NUS: te.Final = ((0, 0), (1, 1))
NIKOLSKI_MODES: te.Final = 4
PEETRE_T: te.Final = (8.0, 8.0)
PEETRE_RS: te.Final = (0.5, 1.0)
PEETRE_FIELDS: te.Final = 3


def calderon_report(
    cs: CutoffSystem, test_set: t.Sequence[CoefField], flavor: str, bound: float
) -> VerificationReport:
    ps = test_set[0].get_space()
    J = auto_J(ps, flavor)
    worst = max(calderon_residual(cs, cf, J, flavor) for cf in test_set)
    return residual_report(
        "calderon",
        "littlewood-paley/calderon",
        worst,
        bound,
        {"cutoffs": cs.get_name(), "flavor": flavor, "J": list(J), "test_set_size": len(test_set)},
    )


def peetre_report(g: CoefField, r: float, stability: float) -> VerificationReport:
    return peetre_check(band_project(g, PEETRE_T), PEETRE_T, tau=(3.0, 3.0), r=r, stability=stability)


class LpSuite(SuiteAbstract):
    name = "lp"

    def get_tasks(self) -> t.List[TTask]:
        ps = self.get_product_space()
        stability = self.get_stability()
        test_set = self.get_test_set()
        cs = make_partition_cutoffs()
        bound = self._config.get_tolerance("calderon")
        tasks: t.List[TTask] = [
            functools.partial(calderon_report, cs, test_set, flavor, bound) for flavor in ("mixed", "ordinary")
        ]
        modes = mode_family(ps, NIKOLSKI_MODES)
        for p, q in NIKOLSKI_CASES:
            for nu in NIKOLSKI_NUS:
                tasks.append(functools.partial(nikolski_sweep, modes, p, q, nu=nu, stability=stability))
        for g in test_set[:PEETRE_FIELDS]:
            for r in PEETRE_RS:
                tasks.append(functools.partial(peetre_report, g, r, stability))
        return tasks
