import math
import numpy as np
from parameterized import parameterized
from prodspace.cutoffs import make_orthogonal_cutoffs, make_partition_cutoffs
from prodspace.exception import PreconditionException
from prodspace.funcspaces import auto_J
from prodspace.lpdecomp import (
    band_project,
    block_energies_csv,
    block_indices,
    calderon_residual,
    in_band,
    lp_blocks,
    nikolski_check,
    nikolski_constant,
    nikolski_sweep,
    peetre_check,
)
from prodspace.testsets import mode_family, mode_field
from .base import TestProductBase


class TestBlocks(TestProductBase):
    def test_block_indices(self):
        self.assertEqual(len(block_indices((1, 2))), 6)
        self.assertListEqual(block_indices((1, 3), "ordinary"), [(0,), (1,), (2,), (3,)])
        with self.assertRaises(PreconditionException):
            block_indices((-1, 2))

    def test_blocks_sum_to_field(self):
        cs = make_partition_cutoffs()
        cf = self.fields[0]
        blocks = lp_blocks(cs, cf, auto_J(self.ps))
        total = sum(b.get_coefs() for b in blocks.values())
        np.testing.assert_allclose(total, cf.get_coefs(), atol=1e-12)

    @parameterized.expand([["mixed", "mixed"], ["ordinary", "ordinary"]])
    def test_calderon(self, name, flavor):  # pylint: disable=unused-argument
        cs = make_partition_cutoffs()
        J = auto_J(self.ps, flavor)
        for cf in self.fields:
            self.assertLess(calderon_residual(cs, cf, J, flavor), 1e-12)

    def test_calderon_truncated_too_early(self):
        cs = make_partition_cutoffs()
        self.assertGreater(calderon_residual(cs, self.fields[0], (1, 1)), 1e-3)

    def test_calderon_needs_partition(self):
        with self.assertRaises(PreconditionException):
            calderon_residual(make_orthogonal_cutoffs(), self.fields[0], (4, 4))

    def test_orthogonal_energy(self):
        blocks = lp_blocks(make_orthogonal_cutoffs(), self.fields[1], auto_J(self.ps))
        energy = sum(b.l2_norm() ** 2 for b in blocks.values())
        self.assertAlmostEqual(energy, self.fields[1].l2_norm() ** 2, delta=1e-12)

    def test_block_energies_csv(self):
        blocks = lp_blocks(make_partition_cutoffs(), self.fields[0], (1, 1))
        lines = block_energies_csv(blocks).splitlines()
        self.assertEqual(lines[0], "j1,j2,l2_norm")
        self.assertEqual(len(lines), 5)


class TestBandProjection(TestProductBase):
    def test_band_project(self):
        cf = self.fields[0]
        projected = band_project(cf, (2.0, 3.0))
        s1, s2 = self.ps.get_sqrt_eigen_grid()
        outside = (s1 > 2.0) | (s2 > 3.0)
        self.assertTrue(np.all(projected.get_coefs()[outside] == 0))
        self.assertTrue(in_band(projected, (2.0, 3.0)))
        self.assertFalse(in_band(cf, (2.0, 3.0)))

    def test_full_band(self):
        self.assertTrue(in_band(self.fields[0], self.ps.get_band_radius()))


class TestNikolski(TestProductBase):
    def test_equal_exponents_give_one(self):
        g = mode_field(self.ps, 3, 4)
        self.assertAlmostEqual(nikolski_constant(g, (4.0, 4.0), 2.0, 2.0, (0.0, 0.0), (0, 0)), 1.0)

    def test_eigen_power(self):
        # L^nu acts on a single mode as lambda^nu; frequency 2 has lambda = 4 = t^2 at t = 2
        g = mode_field(self.ps, 3, 0)
        self.assertAlmostEqual(nikolski_constant(g, (2.0, 1.0), 2.0, 2.0, (0.0, 0.0), (1, 0)), 1.0)

    def test_p_above_q(self):
        with self.assertRaises(PreconditionException):
            nikolski_check(mode_field(self.ps, 1, 1), (2.0, 2.0), 2.0, 1.0)

    def test_outside_spectral_space(self):
        with self.assertRaises(PreconditionException):
            nikolski_check(mode_field(self.ps, 9, 1), (2.0, 2.0), 1.0, 2.0)

    def test_sweep(self):
        report = nikolski_sweep(mode_family(self.ps, 3), 1.0, math.inf, exponents=(0, 1, 2, 3))
        self.assertEqual(report.get_check_name(), "nikolski-sweep")
        self.assertGreater(report.get_measurement("evaluations"), 0)
        self.assertTrue(math.isfinite(report.get_measured_constant()))


class TestPeetre(TestProductBase):
    def test_tau_above_2d(self):
        g = band_project(self.fields[0], (4.0, 4.0))
        with self.assertRaises(PreconditionException):
            peetre_check(g, (4.0, 4.0), tau=(2.0, 3.0))

    def test_report(self):
        g = band_project(self.fields[0], (4.0, 4.0))
        report = peetre_check(g, (4.0, 4.0))
        self.assertEqual(report.get_check_name(), "peetre")
        self.assertGreater(report.get_measured_constant(), 0.0)
        self.assertTrue(report.is_passed())
