import functools
import typing as t

import typing_extensions as te

from ..coordspace import SpectralModel, doubling_fit, eigen_equation_residual, orthonormality_residual
from ..product import (
    DKernelParams,
    ProductSpace,
    center_change_check,
    dstar_triangle_ratio,
    rect_doubling_check,
    verify_integral_estimates,
)
from ..report import VerificationReport
from .abstract import SuiteAbstract, TTask, residual_report

EIGEN_TOLERANCE: te.Final = 1e-6
DIMENSION_TOLERANCE: te.Final = 0.1
INTEGRAL_PARAMS: te.Final = (((0.5, 0.5), (3.0, 3.0)), ((0.25, 0.5), (2.5, 2.5)))


def orthonormality_report(model: SpectralModel, axis: int, bound: float) -> VerificationReport:
    return residual_report(
        "orthonormality",
        "model/orthonormal-basis",
        orthonormality_residual(model),
        bound,
        {"axis": axis, "model": model.get_name(), **model.get_params()},
    )


def eigen_equation_report(model: SpectralModel, axis: int) -> VerificationReport:
    return residual_report(
        "eigen-equation",
        "model/eigen-equation",
        eigen_equation_residual(model),
        EIGEN_TOLERANCE,
        {"axis": axis, "model": model.get_name(), **model.get_params()},
    )


def doubling_report(model: SpectralModel, axis: int) -> VerificationReport:
    c0, d_est = doubling_fit(model)
    report = VerificationReport("doubling-fit", anchor="geometry/doubling-dimension")
    report.set_params({"axis": axis, "model": model.get_name(), "d": model.get_dim_d()})
    report.set_measurement("c0", c0)
    report.set_measurement("d_est", d_est)
    report.set_measured_constant(d_est)
    report.add_criterion("dimension_error", abs(d_est - model.get_dim_d()), DIMENSION_TOLERANCE)
    return report


def triangle_report(ps: ProductSpace, params: DKernelParams) -> VerificationReport:
    ratio = dstar_triangle_ratio(ps, params)
    report = VerificationReport("dstar-triangle", anchor="geometry/quasi-triangle")
    report.set_params(params.to_dict())
    report.set_measured_constant(ratio)
    report.set_informational()
    return report


class GeometrySuite(SuiteAbstract):
    name = "geometry"

    def get_tasks(self) -> t.List[TTask]:
        ps = self.get_product_space()
        stability = self.get_stability()
        tasks: t.List[TTask] = []
        for axis, model in enumerate(ps.get_models(), start=1):
            tasks.append(
                functools.partial(
                    orthonormality_report, model, axis, self._config.get_tolerance("orthonormality")
                )
            )
            tasks.append(functools.partial(eigen_equation_report, model, axis))
            tasks.append(functools.partial(doubling_report, model, axis))
        for delta, sigma in INTEGRAL_PARAMS:
            tasks.append(
                functools.partial(
                    verify_integral_estimates, ps, DKernelParams(delta, sigma), stability=stability
                )
            )
        tasks.append(functools.partial(rect_doubling_check, ps, stability=stability))
        tasks.append(functools.partial(center_change_check, ps, (0.5, 0.5), stability=stability))
        tasks.append(functools.partial(triangle_report, ps, DKernelParams((0.5, 0.5), (3.0, 3.0))))
        return tasks
