import functools
import itertools
import typing as t

import numpy as np
import typing_extensions as te

from ..calculus import (
    CoefField,
    RectUnion,
    TRect,
    analyze,
    finite_speed_check,
    gaussian_envelope_fit,
    heat_kernel,
    kernel_of_symbol,
    kernel_symmetry_residual,
    localization_fit,
    spectral_projector,
    synthesize,
)
from ..coordspace import make_circle
from ..product import ProductSpace, make_product
from ..report import VerificationReport
from ..symbols import Symbol, bump_symbol, gaussian_symbol
from .abstract import SuiteAbstract, TTask, residual_report

MARKOV_EXPONENTS: te.Final = tuple(range(-5, 3))
MASS_DELTAS: te.Final = ((1.0, 1.0), (0.25, 0.5))
PROJECTOR_PAIRS: te.Final = 200
PARSEVAL_TOLERANCE: te.Final = 1e-8
SYMMETRY_TOLERANCE: te.Final = 1e-10
FINITE_SPEED_MODES: te.Final = 96
FINITE_SPEED_T: te.Final = (0.3, 0.3)


def half_band_bump(ps: ProductSpace) -> Symbol:
    r1, r2 = ps.get_band_radius()
    return bump_symbol((max(r1, 1.0) / 2.0, max(r2, 1.0) / 2.0))


def parseval_report(test_set: t.Sequence[CoefField]) -> VerificationReport:
    """
    Coefficient l2 norms against weighted grid norms, and analysis of the
    synthesized values.
    """
    worst_norm, worst_roundtrip = 0.0, 0.0
    for cf in test_set:
        ps = cf.get_space()
        values = synthesize(cf)
        grid_sq = float(np.sum(ps.get_product_weights() * values**2))
        coef_sq = cf.l2_norm() ** 2
        worst_norm = max(worst_norm, abs(grid_sq - coef_sq) / max(coef_sq, 1e-300))
        back = analyze(ps, values)
        worst_roundtrip = max(worst_roundtrip, (back - cf).l2_norm() / max(cf.l2_norm(), 1e-300))
    report = VerificationReport("parseval", anchor="calculus/parseval")
    report.set_params({"test_set_size": len(test_set)})
    report.set_measurement("roundtrip", worst_roundtrip)
    report.set_measured_constant(worst_norm)
    report.add_criterion("norm_residual", worst_norm, PARSEVAL_TOLERANCE)
    report.add_criterion("roundtrip", worst_roundtrip, PARSEVAL_TOLERANCE)
    return report


def markov_report(ps: ProductSpace, bound: float) -> VerificationReport:
    """
    |int p_t(x, y) dmu(y) - 1| over dyadic t pairs at the grid center.
    """
    n1, n2 = ps.get_shape()
    x = ps.node_point(n1 // 2, n2 // 2)
    worst = 0.0
    for e1, e2 in itertools.product(MARKOV_EXPONENTS, MARKOV_EXPONENTS):
        mass = heat_kernel(ps, (2.0**e1, 2.0**e2), x).integral()
        worst = max(worst, abs(mass - 1.0))
    return residual_report(
        "markov",
        "heat/markov",
        worst,
        bound,
        {"t_exponents": [MARKOV_EXPONENTS[0], MARKOV_EXPONENTS[-1]]},
    )


def kernel_mass_report(
    ps: ProductSpace, symbol: Symbol, delta: t.Tuple[float, float], bound: float
) -> VerificationReport:
    n1, n2 = ps.get_shape()
    x = ps.node_point(n1 // 2, n2 // 2)
    kernel = kernel_of_symbol(ps, symbol, delta, x)
    residual = abs(kernel.integral() - float(symbol(0.0, 0.0)))
    report = residual_report(
        "kernel-mass",
        "kernel/mass",
        residual,
        bound,
        {"symbol": symbol.get_name(), "delta": list(delta)},
    )
    report.set_measurement("tail_bound", kernel.get_tail_bound())
    return report


def _random_union(rng: np.random.Generator, top: float) -> RectUnion:
    rects: t.List[TRect] = []
    for _ in range(int(rng.integers(1, 3))):
        a1, b1 = np.sort(rng.uniform(0.0, top, size=2))
        a2, b2 = np.sort(rng.uniform(0.0, top, size=2))
        rects.append(((float(a1), float(b1)), (float(a2), float(b2))))
    return RectUnion(rects)


def projector_algebra_report(ps: ProductSpace, n_pairs: int = PROJECTOR_PAIRS, seed: int = 0) -> VerificationReport:
    """
    Counts mask mismatches in E(S)E(S) = E(S), E(S)E(R) = E(S n R) over random
    rectangle unions, and in the sum of E over a disjoint partition of the band.
    """
    rng = np.random.default_rng(seed)
    r1, r2 = ps.get_band_radius()
    top = 1.1 * max(r1, r2, 1.0) ** 2
    mismatches = 0
    for _ in range(n_pairs):
        s, r = _random_union(rng, top), _random_union(rng, top)
        es, er = spectral_projector(ps, s), spectral_projector(ps, r)
        mismatches += int(es.compose(es) != es)
        mismatches += int(es.compose(er) != spectral_projector(ps, s.intersect(r)))

    cuts = np.concatenate([[0.0], np.sort(rng.uniform(0.0, top, size=3)), [np.inf]])
    total = np.zeros(ps.get_coef_shape(), dtype=int)
    for (a1, b1), (a2, b2) in itertools.product(zip(cuts[:-1], cuts[1:]), zip(cuts[:-1], cuts[1:])):
        total += spectral_projector(ps, [((a1, b1), (a2, b2))]).get_mask()
    partition_mismatch = int(np.sum(total != 1))

    report = VerificationReport("projector-algebra", anchor="projector/intersection")
    report.set_params({"pairs": n_pairs, "seed": seed})
    report.set_measurement("partition_mismatch", partition_mismatch)
    report.set_measured_constant(mismatches)
    report.add_criterion("mask_mismatches", mismatches, 0)
    report.add_criterion("partition_mismatch", partition_mismatch, 0)
    return report


def symmetry_report(ps: ProductSpace, symbol: Symbol, seed: int) -> VerificationReport:
    return residual_report(
        "kernel-symmetry",
        "kernel/symmetry",
        kernel_symmetry_residual(ps, symbol, seed=seed),
        SYMMETRY_TOLERANCE,
        {"symbol": symbol.get_name()},
    )


def finite_speed_report(ps: ProductSpace, stability: float) -> VerificationReport:
    # the tail floor of the powered sinc profile needs a wide circle band
    space = make_product(make_circle(FINITE_SPEED_MODES), ps.get_m2())
    report = finite_speed_check(space, 1.0, FINITE_SPEED_T, stability=stability)
    report.add_note(f"first factor replaced by a circle with {FINITE_SPEED_MODES} modes")
    return report


def envelope_report(ps: ProductSpace) -> VerificationReport:
    return gaussian_envelope_fit(ps).set_informational()


class CalculusSuite(SuiteAbstract):
    name = "calculus"

    def get_tasks(self) -> t.List[TTask]:
        ps = self.get_product_space()
        conf = self._config
        bump = half_band_bump(ps)
        tasks: t.List[TTask] = [
            functools.partial(parseval_report, self.get_test_set()),
            functools.partial(markov_report, ps, conf.get_tolerance("markov")),
        ]
        for symbol in (gaussian_symbol(), bump):
            for delta in MASS_DELTAS:
                tasks.append(
                    functools.partial(kernel_mass_report, ps, symbol, delta, conf.get_tolerance("kernel_mass"))
                )
        tasks.append(functools.partial(projector_algebra_report, ps, seed=conf.get_seed()))
        tasks.append(functools.partial(symmetry_report, ps, gaussian_symbol(), conf.get_seed()))
        tasks.append(
            functools.partial(
                localization_fit, ps, bump, (1.0, 1.0), (3.0, 3.0), slack=conf.get_tolerance("slope_slack")
            )
        )
        tasks.append(functools.partial(finite_speed_report, ps, conf.get_tolerance("finite_speed")))
        tasks.append(functools.partial(envelope_report, ps))
        return tasks
