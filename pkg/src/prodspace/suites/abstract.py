import logging
import time
import typing as t
from abc import ABCMeta, abstractmethod
from concurrent.futures import Executor

from ..calculus import CoefField
from ..product import ProductSpace
from ..report import VerificationReport
from ..run_config import RunConfigAbstract
from ..testsets import random_fields

logger = logging.getLogger(__name__)

TTask = t.Callable[[], VerificationReport]


class SuiteAbstract:
    """
    A named group of independent checks. get_tasks() builds the checks from a
    run config; run() evaluates them in order or on an executor, which only
    changes where each check runs, never the order of the returned reports.
    """

    __metaclass__ = ABCMeta
    name: str = ""

    _config: RunConfigAbstract
    _ps: t.Optional[ProductSpace] = None
    _test_set: t.Optional[t.List[CoefField]] = None

    def __init__(self, config: RunConfigAbstract):
        self._config = config

    def get_config(self) -> RunConfigAbstract:
        return self._config

    def get_product_space(self) -> ProductSpace:
        if self._ps is None:
            self._ps = self._config.get_product_space()
        return self._ps

    def get_test_set(self) -> t.List[CoefField]:
        if self._test_set is None:
            self._test_set = random_fields(
                self.get_product_space(), self._config.get_test_set_size(), self._config.get_seed()
            )
        return self._test_set

    def get_stability(self) -> float:
        return self._config.get_tolerance("stability")

    @abstractmethod
    def get_tasks(self) -> t.List[TTask]:
        raise NotImplementedError

    def run(self, executor: t.Optional[Executor] = None) -> t.List[VerificationReport]:
        tasks = self.get_tasks()
        if executor is None:
            return [self._run_task(task) for task in tasks]
        return list(executor.map(self._run_task, tasks))

    def _run_task(self, task: TTask) -> VerificationReport:
        start = time.perf_counter()
        report = task()
        report.set_runtime(time.perf_counter() - start)
        logger.info(
            "%s/%s: %s in %.2fs",
            self.name,
            report.get_check_name(),
            "passed" if report.is_passed() else "FAILED",
            report.get_runtime(),
        )
        return report


def residual_report(
    check_name: str, anchor: str, value: float, bound: float, params: t.Optional[t.Mapping[str, t.Any]] = None
) -> VerificationReport:
    """
    A report for a single scalar residual compared against a bound.
    """
    report = VerificationReport(check_name, anchor=anchor)
    report.set_params(params or {})
    report.set_measured_constant(value)
    report.add_criterion("residual", value, bound)
    return report
