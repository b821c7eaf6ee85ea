import numpy as np
from parameterized import parameterized
from prodspace.calculus import synthesize
from prodspace.exception import PreconditionException, ProdSpaceException
from prodspace.funcspaces import lp_norm
from prodspace.hardy import (
    MaximalParams,
    admissible_family,
    compact_regime,
    default_t_grid,
    directional_maximal,
    fefferman_stein_check,
    heat_maximal,
    heat_maximal_csv,
    hp_equivalence_report,
    hp_lp_report,
    hp_quasinorm,
    iterated_maximal,
    peetre_vs_strong_check,
    strong_maximal,
    symbol_maximal,
)
from prodspace.symbols import gaussian_symbol
from prodspace.testsets import mode_field
from .base import TestProductBase

SHORT_GRID = default_t_grid(-6, 2)


class TestMaximalParams(TestProductBase):
    def test_default_grid(self):
        grid = default_t_grid(-1, 1)
        self.assertEqual(len(grid), 9)
        self.assertIn((0.5, 2.0), grid)
        self.assertDictEqual(
            MaximalParams().to_dict(), {"r": 1.0, "a": [1.0, 1.0], "gamma": [2.0, 2.0], "t_exponents": [-9, 2]}
        )

    @parameterized.expand(
        [
            ["zero_r", {"r": 0.0}],
            ["not_dyadic", {"t_grid": [(0.3, 0.3)]}],
            ["short_span", {"t_grid": default_t_grid(-3, 2)}],
            ["empty_grid", {"t_grid": []}],
            ["zero_gamma", {"gamma": (0.0, 1.0)}],
        ]
    )
    def test_invalid(self, name, kwargs):  # pylint: disable=unused-argument
        with self.assertRaises(ProdSpaceException):
            MaximalParams(**kwargs)


class TestMaximalFunctions(TestProductBase):
    def test_strong_dominates_values(self):
        values = synthesize(self.fields[0])
        self.assertTrue(np.all(strong_maximal(self.ps, values) >= np.abs(values) - 1e-12))

    def test_strong_below_iterated(self):
        for cf in self.fields[:2]:
            values = synthesize(cf)
            strong = strong_maximal(self.ps, values, r=0.5)
            iterated = iterated_maximal(self.ps, values, r=0.5)
            self.assertTrue(np.all(strong <= iterated * (1.0 + 1e-10)))

    def test_strong_rejects_bad_r(self):
        with self.assertRaises(ProdSpaceException):
            strong_maximal(self.ps, synthesize(self.fields[0]), r=-1.0)

    @parameterized.expand([["first_axis", 0], ["second_axis", 1]])
    def test_directional_dominates_values(self, name, axis):  # pylint: disable=unused-argument
        values = synthesize(self.fields[0])
        self.assertTrue(np.all(directional_maximal(self.ps, values, axis=axis) >= np.abs(values) - 1e-12))

    def test_directional_rejects_bad_axis(self):
        with self.assertRaises(ProdSpaceException):
            directional_maximal(self.ps, synthesize(self.fields[0]), axis=2)

    def test_admissible_family(self):
        family = admissible_family()
        self.assertEqual(len(family), 5)
        for symbol in family:
            self.assertAlmostEqual(float(symbol(0.0, 0.0)), 1.0)

    def test_variant_ordering(self):
        cf = self.fields[1]
        params = MaximalParams(t_grid=SHORT_GRID)
        plain = heat_maximal(cf, params)
        aperture = heat_maximal(cf, params, "aperture")
        peetre = heat_maximal(cf, params, "peetre")
        self.assertTrue(np.all(plain <= aperture * (1.0 + 1e-10)))
        self.assertTrue(np.all(plain <= peetre * (1.0 + 1e-10)))

    def test_unknown_variant(self):
        with self.assertRaises(ProdSpaceException):
            symbol_maximal(self.fields[0], gaussian_symbol(), SHORT_GRID, variant="grand")

    def test_csv(self):
        text = heat_maximal_csv(self.fields[0], MaximalParams(t_grid=SHORT_GRID))
        lines = text.splitlines()
        self.assertEqual(lines[0], "i,j,y1,y2,value")
        self.assertEqual(len(lines), 1 + 32 * 32)


class TestHardyNorms(TestProductBase):
    @parameterized.expand([["p1", 1.0], ["p2", 2.0]])
    def test_constant_field(self, name, p):  # pylint: disable=unused-argument
        # the heat semigroup fixes constants
        f = mode_field(self.ps, 0, 0)
        self.assertAlmostEqual(hp_quasinorm(f, p, SHORT_GRID), lp_norm(f, p))

    def test_hp_close_to_lp_from_below(self):
        # the smallest t damps frequency 7 by exp(-49 / 4096)
        for cf in self.fields:
            self.assertGreaterEqual(hp_quasinorm(cf, 2.0, SHORT_GRID), 0.98 * lp_norm(cf, 2.0))

    def test_rejects_bad_p(self):
        with self.assertRaises(ProdSpaceException):
            hp_quasinorm(self.fields[0], 0.0)

    def test_fefferman_stein(self):
        family = [synthesize(cf) for cf in self.fields]
        report = fefferman_stein_check(self.ps, family, 2.0)
        self.assertTrue(report.is_passed())
        self.assertEqual(report.get_params()["family_size"], len(family))
        with self.assertRaises(PreconditionException):
            fefferman_stein_check(self.ps, [])

    def test_hp_lp_report_on_constants(self):
        report = hp_lp_report([mode_field(self.ps, 0, 0)], 2.0, SHORT_GRID)
        self.assertTrue(report.is_passed())
        self.assertAlmostEqual(report.get_measured_constant(), 1.0)

    def test_hp_equivalence_on_constants(self):
        params = MaximalParams(t_grid=SHORT_GRID, gamma=3.0)
        report = hp_equivalence_report([mode_field(self.ps, 0, 0)], 1.0, params)
        self.assertTrue(report.is_passed())
        self.assertAlmostEqual(report.get_measured_constant(), 1.0)
        self.assertEqual(report.get_params()["grand_maximal"], "surrogate")

    def test_hp_equivalence_needs_large_gamma(self):
        with self.assertRaises(PreconditionException):
            hp_equivalence_report(self.fields, 1.0, MaximalParams(t_grid=SHORT_GRID, gamma=1.0))

    def test_empty_test_set(self):
        with self.assertRaises(PreconditionException):
            hp_lp_report([], 2.0)


class TestPeetreVsStrong(TestProductBase):
    def test_passes_on_random_fields(self):
        report = peetre_vs_strong_check(self.fields, params=MaximalParams(0.9, SHORT_GRID, gamma=(2.5, 2.5)))
        self.assertTrue(report.is_passed())
        self.assertGreaterEqual(report.get_measured_constant(), 1.0 - 1e-10)
        self.assertIn("constant_coarse_t_grid", report.get_measurements())

    def test_constant_field_is_tight(self):
        # every t fixes a constant, and the Peetre weight is 1 at the point itself
        report = peetre_vs_strong_check([mode_field(self.ps, 0, 0)], params=MaximalParams(0.9, SHORT_GRID))
        self.assertAlmostEqual(report.get_measured_constant(), 1.0)

    @parameterized.expand([["one", 1.0], ["zero", 0.0], ["above_one", 1.5]])
    def test_rejects_bad_theta(self, name, theta):  # pylint: disable=unused-argument
        with self.assertRaises(PreconditionException):
            peetre_vs_strong_check(self.fields, theta=theta)

    def test_empty_test_set(self):
        with self.assertRaises(PreconditionException):
            peetre_vs_strong_check([])


class TestCompactRegime(TestProductBase):
    @parameterized.expand(
        [
            ["small_t", [(0.5, 0.5)], False],
            ["one_axis_reaches", [(0.5, 4.0)], True],
            ["default_grid", default_t_grid(), True],
        ]
    )
    def test_compact_regime(self, name, grid, expected):  # pylint: disable=unused-argument
        self.assertEqual(compact_regime(self.ps, grid), expected)

    def test_equivalence_param_follows_grid(self):
        report = hp_equivalence_report([mode_field(self.ps, 0, 0)], 2.0, MaximalParams(t_grid=SHORT_GRID))
        self.assertTrue(report.get_params()["compact_regime"])
