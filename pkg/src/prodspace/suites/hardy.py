import functools
import typing as t

import numpy as np
import typing_extensions as te

from ..calculus import CoefField, synthesize
from ..hardy import (
    MaximalParams,
    fefferman_stein_check,
    heat_maximal,
    hp_equivalence_report,
    hp_lp_report,
    iterated_maximal,
    peetre_vs_strong_check,
    strong_maximal,
)
from ..product import ProductSpace
from ..report import VerificationReport
from .abstract import SuiteAbstract, TTask

# the maximal sweeps are the expensive part of a run
HARDY_FIELDS: te.Final = 8
HP_EXPONENT: te.Final = 1.0
# aperture balls carry a relative radius slack of BALL_EPS
ORDER_TOLERANCE: te.Final = 1e-8
# strong maximal exponent below 1 for the Peetre comparison
PEETRE_THETA: te.Final = 0.9


def _excess(lower: np.ndarray, upper: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(upper))), 1e-300)
    return float(np.max(lower - upper)) / scale


def maximal_chain_report(fields: t.Sequence[CoefField], params: MaximalParams) -> VerificationReport:
    """
    M(f) <= M*_a(f) <= prod_i (1 + a_i)^gamma_i M**_gamma(f) pointwise.
    """
    (a1, a2), (g1, g2) = params.get_a(), params.get_gamma()
    factor = (1.0 + a1) ** g1 * (1.0 + a2) ** g2
    first, second = -np.inf, -np.inf
    for cf in fields:
        plain = heat_maximal(cf, params, "plain")
        aperture = heat_maximal(cf, params, "aperture")
        peetre = heat_maximal(cf, params, "peetre")
        first = max(first, _excess(plain, aperture))
        second = max(second, _excess(aperture, factor * peetre))
    report = VerificationReport("maximal-chain", anchor="hardy/maximal-ordering")
    report.set_params({**params.to_dict(), "fields": len(fields)})
    report.set_measurement("plain_over_aperture", first)
    report.set_measurement("aperture_over_peetre", second)
    report.set_measured_constant(max(first, second))
    report.add_criterion("plain_over_aperture", first, ORDER_TOLERANCE)
    report.add_criterion("aperture_over_peetre", second, ORDER_TOLERANCE)
    return report


def iterated_bound_report(ps: ProductSpace, fields: t.Sequence[np.ndarray], r: float) -> VerificationReport:
    worst = -np.inf
    for f in fields:
        worst = max(worst, _excess(strong_maximal(ps, f, r), iterated_maximal(ps, f, r)))
    report = VerificationReport("iterated-maximal", anchor="maximal/iterated-bound")
    report.set_params({"r": r, "fields": len(fields)})
    report.set_measured_constant(worst)
    report.add_criterion("strong_over_iterated", worst, ORDER_TOLERANCE)
    return report


class HardySuite(SuiteAbstract):
    name = "hardy"

    def _hp_params(self, p: float) -> MaximalParams:
        base = self._config.get_maximal_params()
        if self._config.get_maximal_gamma() is not None:
            return base
        d1, d2 = self.get_product_space().get_d_pair()
        return MaximalParams(
            r=base.get_r(),
            t_grid=base.get_t_grid(),
            a=base.get_a(),
            gamma=(1.25 * 2.0 * d1 / p, 1.25 * 2.0 * d2 / p),
        )

    def _peetre_params(self) -> MaximalParams:
        base = self._config.get_maximal_params()
        d1, d2 = self.get_product_space().get_d_pair()
        scale = 1.1 * 2.0 / PEETRE_THETA
        return MaximalParams(r=PEETRE_THETA, t_grid=base.get_t_grid(), a=base.get_a(), gamma=(scale * d1, scale * d2))

    def get_tasks(self) -> t.List[TTask]:
        ps = self.get_product_space()
        stability = self.get_stability()
        fields = self.get_test_set()[:HARDY_FIELDS]
        values = [synthesize(cf) for cf in fields]
        params = self._hp_params(HP_EXPONENT)
        r = params.get_r()
        return [
            functools.partial(fefferman_stein_check, ps, values, 2.0, r),
            functools.partial(iterated_bound_report, ps, values, r),
            functools.partial(maximal_chain_report, fields, params),
            functools.partial(hp_equivalence_report, fields, HP_EXPONENT, params, stability),
            functools.partial(hp_lp_report, fields, 2.0, params.get_t_grid(), stability=stability),
            functools.partial(peetre_vs_strong_check, fields, PEETRE_THETA, self._peetre_params()),
        ]
