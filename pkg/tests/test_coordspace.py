import math
import unittest
import numpy as np
from parameterized import parameterized
from prodspace.coordspace import (
    ball_volume,
    cell_volume_table,
    doubling_fit,
    eigen_equation_residual,
    make_circle,
    make_jacobi,
    orthonormality_residual,
    refine_model,
    volume_table,
)
from prodspace.exception import ModelException, ProdSpaceException


class TestCircle(unittest.TestCase):
    def test_band_layout(self):
        model = make_circle(8)
        self.assertEqual(model.get_n_modes(), 15)
        self.assertEqual(model.get_n_nodes(), 32)
        self.assertEqual(model.get_band_radius(), 7.0)
        expected = [0.0] + [float(k) for k in range(1, 8) for _ in range(2)]
        self.assertListEqual(model.get_sqrt_eigenvalues().tolist(), expected)
        self.assertAlmostEqual(model.get_total_measure(), 2.0 * math.pi)

    def test_orthonormality(self):
        self.assertLess(orthonormality_residual(make_circle(16, 256)), 1e-12)

    def test_eigen_equation(self):
        self.assertLess(eigen_equation_residual(make_circle(8)), 1e-8)

    def test_eval_at_nodes(self):
        model = make_circle(8)
        np.testing.assert_allclose(
            model.eval_eigenfunctions(model.get_nodes()), model.get_eigenfunctions(), atol=1e-13
        )

    def test_generator_on_modes(self):
        # L cos(3 theta) = 9 cos(3 theta)
        model = make_circle(8)
        samples = np.cos(3.0 * model.get_nodes())
        np.testing.assert_allclose(model.apply_generator(samples), 9.0 * samples, atol=1e-9)

    def test_geodesic_metric(self):
        model = make_circle(4)
        self.assertAlmostEqual(float(model.metric(0.1, 2.0 * math.pi - 0.1)), 0.2)
        self.assertAlmostEqual(float(model.metric(0.0, math.pi)), math.pi)

    def test_ball_volume(self):
        model = make_circle(8)
        # 17 of the 32 nodes lie within pi/2 of node 0
        self.assertAlmostEqual(ball_volume(model, 0.0, math.pi / 2), 17 * 2.0 * math.pi / 32)
        self.assertAlmostEqual(ball_volume(model, 0.0, 4.0), 2.0 * math.pi)

    def test_volume_table_matches_ball_volume(self):
        model = make_circle(8)
        radii = [0.3, 1.0, 2.5]
        table = volume_table(model, np.array([0.0, 1.0]), radii)
        for i, x in enumerate((0.0, 1.0)):
            for j, r in enumerate(radii):
                self.assertAlmostEqual(table[i, j], ball_volume(model, x, r))

    @parameterized.expand([["below_spacing", 0.01, 0.02], ["one", 1.0, 2.0], ["whole_circle", math.pi, 2.0 * math.pi]])
    def test_cell_volumes(self, name, r, expected):  # pylint: disable=unused-argument
        # cells tile the circle, so balls away from the antipode have length 2r at any centre
        for model in (make_circle(8), refine_model(make_circle(8))):
            np.testing.assert_allclose(cell_volume_table(model, np.array([0.0, 0.3]), [r])[:, 0], expected)

    def test_doubling_fit(self):
        c0, d_est = doubling_fit(make_circle(16, 128))
        self.assertGreaterEqual(c0, 1.0)
        self.assertLess(abs(d_est - 1.0), 0.1)

    def test_refine_keeps_band(self):
        model = make_circle(8)
        fine = refine_model(model)
        self.assertEqual(fine.get_n_nodes(), 64)
        self.assertListEqual(fine.get_sqrt_eigenvalues().tolist(), model.get_sqrt_eigenvalues().tolist())


class TestJacobi(unittest.TestCase):
    @parameterized.expand([["legendre", 0.0, 0.0], ["chebyshev", -0.5, -0.5], ["skewed", 1.0, 0.5]])
    def test_orthonormality(self, name, alpha, beta):  # pylint: disable=unused-argument
        self.assertLess(orthonormality_residual(make_jacobi(8, alpha, beta)), 1e-10)

    def test_eigenvalues(self):
        model = make_jacobi(6, 1.0, 0.5)
        n = np.arange(6)
        np.testing.assert_allclose(model.get_eigenvalues(), n * (n + 2.5), atol=1e-12)
        self.assertEqual(model.get_n_nodes(), 12)

    def test_total_measure(self):
        # int_{-1}^{1} dx
        self.assertAlmostEqual(make_jacobi(8, 0.0, 0.0).get_total_measure(), 2.0)

    def test_eigen_equation(self):
        self.assertLess(eigen_equation_residual(make_jacobi(8, 0.0, 0.0)), 1e-6)

    def test_cell_widths_cover_the_angle_range(self):
        widths = make_jacobi(8, 0.0, 0.0).get_cell_widths()
        self.assertTrue(np.all(widths > 0))
        self.assertAlmostEqual(float(widths.sum()), math.pi)

    def test_metric_is_arccos_distance(self):
        model = make_jacobi(4, 0.0, 0.0)
        self.assertAlmostEqual(float(model.metric(-1.0, 1.0)), math.pi)
        self.assertAlmostEqual(float(model.metric(0.0, 1.0)), math.pi / 2)


class TestModelErrors(unittest.TestCase):
    @parameterized.expand(
        [
            ["circle_no_modes", lambda: make_circle(0)],
            ["circle_too_few_nodes", lambda: make_circle(8, 31)],
            ["jacobi_no_modes", lambda: make_jacobi(0, 0.0, 0.0)],
            ["jacobi_alpha", lambda: make_jacobi(4, -1.0, 0.0)],
            ["jacobi_too_few_nodes", lambda: make_jacobi(8, 0.0, 0.0, 7)],
        ]
    )
    def test_invalid_models(self, name, build):  # pylint: disable=unused-argument
        with self.assertRaises(ModelException):
            build()

    def test_non_positive_radius(self):
        with self.assertRaises(ProdSpaceException):
            ball_volume(make_circle(4), 0.0, 0.0)
