import unittest
import numpy as np
from parameterized import parameterized
from prodspace.cutoffs import (
    make_cutoffs,
    make_orthogonal_cutoffs,
    make_partition_cutoffs,
    plateau,
    smooth_step,
)
from prodspace.exception import ProdSpaceException


class TestProfiles(unittest.TestCase):
    def test_smooth_step(self):
        np.testing.assert_array_equal(smooth_step([-1.0, 0.0, 1.0, 2.0]), [0.0, 0.0, 1.0, 1.0])
        self.assertAlmostEqual(float(smooth_step(0.5)), 0.5)

    def test_plateau(self):
        np.testing.assert_array_equal(plateau([-1.0, 0.0, 0.5, 1.0]), [1.0, 1.0, 1.0, 1.0])
        np.testing.assert_array_equal(plateau([-2.0, 2.0, 3.0]), [0.0, 0.0, 0.0])
        inner = plateau(np.linspace(1.2, 1.8, 25))
        self.assertTrue(np.all((inner > 0) & (inner < 1)))
        self.assertTrue(np.all(np.diff(inner) <= 0))


class TestCutoffSystems(unittest.TestCase):
    @parameterized.expand(
        [
            ["partition", make_partition_cutoffs, "partition", True],
            ["partition_not_orthogonal", make_partition_cutoffs, "orthogonal-partition", False],
            ["partition_norm", make_partition_cutoffs, "norm-admissible", True],
            ["orthogonal", make_orthogonal_cutoffs, "orthogonal-partition", True],
            ["orthogonal_not_partition", make_orthogonal_cutoffs, "partition", False],
            ["orthogonal_norm", make_orthogonal_cutoffs, "norm-admissible", True],
        ]
    )
    def test_satisfies(self, name, factory, kind, expected):  # pylint: disable=unused-argument
        self.assertEqual(factory().satisfies(kind), expected)

    def test_lower_bound_positive(self):
        for cs in (make_partition_cutoffs(), make_orthogonal_cutoffs()):
            self.assertGreater(cs.lower_bound(), 0.0)
            self.assertEqual(cs.support_violation(), 0.0)

    def test_block_profiles(self):
        cs = make_partition_cutoffs()
        x = np.array([0.5, 3.0, 6.0, 100.0])
        np.testing.assert_allclose(cs.block_profile(0, 0, x), plateau(x))
        np.testing.assert_allclose(cs.block_profile(1, 3, x), cs.get_phi(1)(x / 8.0))

    def test_telescoping_sum(self):
        cs = make_partition_cutoffs()
        x = np.linspace(-60.0, 60.0, 241)
        np.testing.assert_allclose(cs.partial_sum(0, x, 6), np.ones_like(x), atol=1e-12)

    def test_factory(self):
        self.assertEqual(make_cutoffs("partition").get_kind(), make_partition_cutoffs().get_kind())
        with self.assertRaises(ProdSpaceException):
            make_cutoffs("wavelet")

    def test_unknown_kind(self):
        with self.assertRaises(ProdSpaceException):
            make_partition_cutoffs().satisfies("frame")
