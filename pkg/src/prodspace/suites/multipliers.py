import functools
import typing as t

import typing_extensions as te

from ..calculus import CoefField
from ..cutoffs import CutoffSystem, make_partition_cutoffs
from ..funcspaces import SpaceParams
from ..multipliers import (
    MultiplierSpec,
    apply_multiplier,
    apply_multiplier_dyadic,
    lifting,
    lifting_equivalence_check,
    m_tau,
    make_multiplier,
    multiplier_admissible_check,
    multiplier_boundedness_harness,
)
from ..report import VerificationReport
from ..symbols import constant_symbol
from .abstract import SuiteAbstract, TTask, residual_report
from .calculus import half_band_bump

ADMISSIBLE_TAU: te.Final = (1.0, -1.0)
ADMISSIBLE_KAPPA: te.Final = (3, 3)
LIFTING_TAU: te.Final = (1.0, 0.0)
BOUNDED_TAU: te.Final = (1.0, 1.0)
BOUNDED_KAPPA: te.Final = (4, 4)
INVERSE_TOLERANCE: te.Final = 1e-10
DYADIC_TOLERANCE: te.Final = 1e-10


def lifting_inverse_report(test_set: t.Sequence[CoefField], tau: t.Tuple[float, float]) -> VerificationReport:
    worst = 0.0
    for cf in test_set:
        back = lifting(lifting(cf, tau), (-tau[0], -tau[1]))
        worst = max(worst, (back - cf).l2_norm() / max(cf.l2_norm(), 1e-300))
    return residual_report(
        "lifting-inverse", "multiplier/lifting-inverse", worst, INVERSE_TOLERANCE, {"tau": list(tau)}
    )


def dyadic_report(spec: MultiplierSpec, cs: CutoffSystem, test_set: t.Sequence[CoefField]) -> VerificationReport:
    """
    Direct multiplication against the sum of dyadic pieces on band-limited fields.
    """
    worst = 0.0
    for cf in test_set:
        direct = apply_multiplier(spec, cf)
        pieces = apply_multiplier_dyadic(spec, cf, cs)
        worst = max(worst, (pieces - direct).l2_norm() / max(direct.l2_norm(), 1e-300))
    return residual_report(
        "multiplier-dyadic",
        "multiplier/dyadic-sum",
        worst,
        DYADIC_TOLERANCE,
        {"multiplier": spec.to_dict(), "cutoffs": cs.get_name()},
    )


def boundedness_report(
    spec_factory: t.Callable[[], MultiplierSpec],
    cs: CutoffSystem,
    test_set: t.Sequence[CoefField],
    params: SpaceParams,
    stability: float,
) -> VerificationReport:
    return multiplier_boundedness_harness(spec_factory(), cs, test_set, params, stability=stability)


class MultipliersSuite(SuiteAbstract):
    name = "multipliers"

    def _classical_spec(self) -> MultiplierSpec:
        band = self.get_product_space().get_band_radius()
        spec, _ = make_multiplier(m_tau(BOUNDED_TAU), BOUNDED_TAU, BOUNDED_KAPPA, band)
        return spec

    def _bump_spec(self) -> MultiplierSpec:
        ps = self.get_product_space()
        spec, _ = make_multiplier(half_band_bump(ps), 0.0, BOUNDED_KAPPA, ps.get_band_radius())
        return spec

    def get_tasks(self) -> t.List[TTask]:
        ps = self.get_product_space()
        conf = self._config
        stability = self.get_stability()
        test_set = self.get_test_set()
        band = ps.get_band_radius()
        cs = conf.get_cutoffs("primary")
        tasks: t.List[TTask] = [
            functools.partial(
                multiplier_admissible_check,
                m_tau(ADMISSIBLE_TAU),
                ADMISSIBLE_TAU,
                ADMISSIBLE_KAPPA,
                band,
                stability=stability,
            ),
            functools.partial(
                multiplier_admissible_check, constant_symbol(), 0.0, ADMISSIBLE_KAPPA, band, stability=stability
            ),
            functools.partial(lifting_inverse_report, test_set, LIFTING_TAU),
            functools.partial(
                dyadic_report,
                MultiplierSpec(m_tau(BOUNDED_TAU), BOUNDED_TAU, BOUNDED_KAPPA),
                make_partition_cutoffs(),
                test_set,
            ),
        ]
        for params in conf.get_spaces():
            if params.get_flavor() == "mixed":
                tasks.append(
                    functools.partial(
                        lifting_equivalence_check,
                        cs,
                        test_set,
                        params,
                        LIFTING_TAU,
                        ratio_bound=conf.get_tolerance("ratio_bound"),
                        stability=stability,
                    )
                )
            factory = self._classical_spec if params.get_kind() == "classical" else self._bump_spec
            tasks.append(functools.partial(boundedness_report, factory, cs, test_set, params, stability))
        return tasks
