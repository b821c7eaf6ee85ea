import math
import numpy as np
from parameterized import parameterized
from prodspace.coordspace import ball_volume, make_circle
from prodspace.exception import PreconditionException, ProdSpaceException
from prodspace.product import (
    DKernelParams,
    center_change_check,
    dkernel,
    dstar,
    dstar_slice,
    dstar_triangle_ratio,
    make_product,
    rect_doubling_check,
    rect_volume,
    rect_volume_power,
    refine_product,
    verify_integral_estimates,
    volume_power_grid,
)
from .base import TestProductBase


class TestProductSpace(TestProductBase):
    def test_shapes(self):
        self.assertEqual(self.ps.get_shape(), (32, 32))
        self.assertEqual(self.ps.get_coef_shape(), (15, 15))
        self.assertEqual(self.mixed_ps.get_shape(), (32, 16))
        self.assertEqual(self.mixed_ps.get_coef_shape(), (15, 8))

    def test_product_measure(self):
        self.assertAlmostEqual(self.ps.get_total_measure(), 4.0 * math.pi**2)
        self.assertAlmostEqual(self.mixed_ps.get_total_measure(), 4.0 * math.pi)

    def test_metric_is_max_of_axes(self):
        self.assertAlmostEqual(self.ps.metric((0.0, 0.0), (0.5, 1.5)), 1.5)
        self.assertAlmostEqual(self.ps.metric((0.0, 0.0), (2.0, 0.25)), 2.0)

    def test_rect_volume(self):
        x = (0.0, 1.0)
        expected = ball_volume(self.circle, 0.0, 0.5) * ball_volume(self.circle, 1.0, 1.5)
        self.assertAlmostEqual(rect_volume(self.ps, x, (0.5, 1.5)), expected)
        self.assertAlmostEqual(rect_volume_power(self.ps, x, (0.5, 1.5), (1.0, 1.0)), expected)

    def test_volume_power_grid(self):
        grid = volume_power_grid(self.ps, (0.5, 0.5), (1.0, 1.0))
        x = self.ps.node_point(3, 7)
        self.assertEqual(grid.shape, self.ps.get_shape())
        self.assertAlmostEqual(grid[3, 7], rect_volume(self.ps, x, (0.5, 0.5)))

    def test_refine_product(self):
        fine = refine_product(self.ps)
        self.assertEqual(fine.get_shape(), (64, 64))
        self.assertEqual(fine.get_coef_shape(), self.ps.get_coef_shape())


class TestDKernels(TestProductBase):
    @parameterized.expand(
        [
            ["zero_delta", (0.0, 1.0), (2.0, 2.0)],
            ["negative_sigma", (1.0, 1.0), (2.0, -1.0)],
            ["triple", (1.0, 1.0, 1.0), (2.0, 2.0)],
        ]
    )
    def test_invalid_params(self, name, delta, sigma):  # pylint: disable=unused-argument
        with self.assertRaises(ProdSpaceException):
            DKernelParams(delta, sigma)

    def test_dstar_value(self):
        params = DKernelParams((0.5, 1.0), (2.0, 3.0))
        x, y = (0.0, 0.0), (1.0, 0.5)
        expected = (1.0 + 1.0 / 0.5) ** -2.0 * (1.0 + 0.5 / 1.0) ** -3.0
        self.assertAlmostEqual(dstar(self.ps, params, x, y), expected)

    def test_dstar_slice_matches_pointwise(self):
        params = DKernelParams((0.5, 0.5), (2.0, 2.0))
        x = self.ps.node_point(0, 0)
        values = dstar_slice(self.ps, params, x)
        self.assertAlmostEqual(values[5, 9], dstar(self.ps, params, x, self.ps.node_point(5, 9)))
        self.assertAlmostEqual(values[0, 0], 1.0)

    def test_dkernel_normalization(self):
        params = DKernelParams((0.5, 0.5), (2.0, 2.0))
        x = y = self.ps.node_point(2, 2)
        self.assertAlmostEqual(dkernel(self.ps, params, x, y), 1.0 / rect_volume(self.ps, x, (0.5, 0.5)))

    def test_triangle_ratio(self):
        ratio = dstar_triangle_ratio(self.ps, DKernelParams((0.5, 0.5), (2.0, 2.0)), max_samples=8)
        self.assertGreaterEqual(ratio, 1.0 - 1e-12)

    def test_integral_estimates_need_sigma_above_d(self):
        with self.assertRaises(PreconditionException):
            verify_integral_estimates(self.ps, DKernelParams((0.5, 0.5), (1.0, 3.0)))

    def test_integral_estimates_report(self):
        report = verify_integral_estimates(self.ps, DKernelParams((0.5, 0.5), (3.0, 3.0)), max_samples=8)
        self.assertEqual(report.get_check_name(), "integral-estimates")
        self.assertTrue(np.isfinite(report.get_measured_constant()))
        self.assertIn("single_constant", report.get_measurements())

    def test_rect_doubling_report(self):
        report = rect_doubling_check(self.ps, max_samples=8)
        self.assertEqual(report.get_check_name(), "rect-doubling")
        # lambda = 1 is part of the sweep
        self.assertGreaterEqual(report.get_measured_constant(), 1.0 - 1e-12)
        self.assertTrue(np.isfinite(report.get_refined_constant()))

    def test_rect_doubling_passes_on_default_circles(self):
        ps = make_product(make_circle(32), make_circle(32))
        report = rect_doubling_check(ps)
        self.assertTrue(report.is_passed())
        # circle cell volumes are exactly 2r below the diameter
        self.assertAlmostEqual(report.get_measured_constant(), 1.0, places=9)
        self.assertAlmostEqual(report.get_refined_constant(), 1.0, places=9)

    def test_center_change_report(self):
        report = center_change_check(self.mixed_ps, (0.5, 0.5), max_samples=8)
        self.assertEqual(report.get_check_name(), "center-change")
        # x = y gives ratio 1
        self.assertGreaterEqual(report.get_measured_constant(), 1.0 - 1e-12)
