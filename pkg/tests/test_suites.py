import time
import typing as t
from concurrent.futures import ThreadPoolExecutor
from parameterized import parameterized
from prodspace.exception import RunConfigException
from prodspace.report import VerificationReport
from prodspace.run_config import SUITE_NAMES, RunConfigDict
from prodspace.suites import get_suites
from prodspace.suites.abstract import SuiteAbstract, residual_report
from prodspace.suites.calculus import half_band_bump, parseval_report
from prodspace.suites.geometry import GeometrySuite
from prodspace.suites.spaces import SpacesSuite, sobolev_target
from .base import TestProductBase, space

SMALL_CONF = {
    "models": [{"name": "circle", "n_modes": 8}, {"name": "circle", "n_modes": 8}],
    "test_set_size": 4,
}


class _SleepySuite(SuiteAbstract):
    name = "sleepy"

    def get_tasks(self):
        return [self._task(i, 0.01 * (5 - i)) for i in range(5)]

    def _task(self, i: int, delay: float) -> t.Callable[[], VerificationReport]:
        def run():
            time.sleep(delay)
            return residual_report(f"task-{i}", "test/order", float(i), 2.5)

        return run


class TestSuiteRegistry(TestProductBase):
    def test_canonical_order(self):
        config = RunConfigDict({})
        names = [s.name for s in get_suites(config, ["multipliers", "geometry", "lp"])]
        self.assertListEqual(names, ["geometry", "lp", "multipliers"])

    def test_config_switches(self):
        config = RunConfigDict({"suites": {"hardy": False, "multipliers": False}})
        self.assertListEqual([s.name for s in get_suites(config)], ["geometry", "calculus", "lp", "spaces"])
        # explicit names win over the switches
        self.assertListEqual([s.name for s in get_suites(config, ["hardy"])], ["hardy"])

    def test_unknown_suite(self):
        with self.assertRaises(RunConfigException):
            get_suites(RunConfigDict({}), ["wavelets"])


class TestSuiteRun(TestProductBase):
    @parameterized.expand([["serial", None], ["threaded", 4]])
    def test_report_order(self, name, workers):  # pylint: disable=unused-argument
        suite = _SleepySuite(RunConfigDict(SMALL_CONF))
        if workers is None:
            reports = suite.run()
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                reports = suite.run(executor)
        self.assertListEqual([r.get_check_name() for r in reports], [f"task-{i}" for i in range(5)])
        self.assertListEqual([r.is_passed() for r in reports], [True, True, True, False, False])
        self.assertTrue(all(r.get_runtime() is not None for r in reports))

    def test_shared_test_set(self):
        suite = GeometrySuite(RunConfigDict({**SMALL_CONF, "seed": 5}))
        first = suite.get_test_set()
        self.assertIs(first, suite.get_test_set())
        self.assertEqual(len(first), 4)
        self.assertEqual(suite.get_product_space().get_shape(), (32, 32))

    def test_geometry_tasks(self):
        self.assertEqual(len(GeometrySuite(RunConfigDict(SMALL_CONF)).get_tasks()), 11)

    def test_spaces_tasks(self):
        conf = {**SMALL_CONF, "spaces": [{"s": [0.5, 0.5]}, {"family": "F", "s": [0.0, 0.0]}]}
        # independence, Sobolev and Lp for the first space; independence only for the second
        self.assertEqual(len(SpacesSuite(RunConfigDict(conf)).get_tasks()), 4)


class TestSuiteHelpers(TestProductBase):
    def test_residual_report(self):
        self.assertTrue(residual_report("r", "a", 1e-13, 1e-12).is_passed())
        report = residual_report("r", "a", 1e-11, 1e-12, {"axis": 1})
        self.assertFalse(report.is_passed())
        self.assertDictEqual(report.get_params(), {"axis": 1})

    def test_parseval(self):
        self.assertTrue(parseval_report(self.fields).is_passed())

    def test_half_band_bump(self):
        self.assertAlmostEqual(float(half_band_bump(self.ps)(0.0, 0.0)), 1.0)
        self.assertEqual(float(half_band_bump(self.ps)(3.5, 0.0)), 0.0)

    @parameterized.expand(
        [
            ["mixed", space(s=(0.5, 0.5)), (0.25, 0.25)],
            ["ordinary", space(s=0.5, flavor="ordinary"), (0.0, 0.0)],
            ["nonclassical", space(kind="nonclassical", s=(1.0, 0.0)), (0.75, -0.25)],
        ]
    )
    def test_sobolev_target(self, name, source, s):  # pylint: disable=unused-argument
        target = sobolev_target(self.ps, source)
        self.assertEqual(target.get_p(), 4.0)
        self.assertAlmostEqual(target.get_s()[0], s[0])
        self.assertAlmostEqual(target.get_s()[1], s[1])

    def test_no_sobolev_target(self):
        self.assertIsNone(sobolev_target(self.ps, space(family="F")))
        self.assertIsNone(sobolev_target(self.ps, space(p=float("inf"))))


class TestDefaultRun(TestProductBase):
    @parameterized.expand([[name] for name in SUITE_NAMES])
    def test_default_suite_passes(self, name):
        (suite,) = get_suites(RunConfigDict({}), [name])
        with ThreadPoolExecutor(max_workers=4) as executor:
            reports = suite.run(executor)
        self.assertGreater(len(reports), 0)
        self.assertListEqual([r.get_check_name() for r in reports if r.counts_as_failure()], [])
