import math
import numpy as np
from parameterized import parameterized
from prodspace.cutoffs import make_orthogonal_cutoffs, make_partition_cutoffs
from prodspace.exception import PreconditionException
from prodspace.funcspaces import (
    SpaceParams,
    auto_J,
    besov_norm,
    block_weight,
    cutoff_independence_check,
    embedding_check,
    lp_norm,
    resolve_J,
    space_norm,
    tl_norm,
)
from prodspace.funcspaces import test_norm as pmk_norm
from prodspace.product import refine_product
from prodspace.run_config import RunConfigDict
from prodspace.testsets import mode_field
from .base import TestProductBase, space


class TestSpaceParams(TestProductBase):
    @parameterized.expand(
        [
            ["f_infinite_p", {"family": "F", "p": math.inf}],
            ["ordinary_anisotropic", {"flavor": "ordinary", "s": (1.0, 0.0)}],
            ["zero_p", {"p": 0.0}],
            ["negative_q", {"q": -1.0}],
            ["unknown_family", {"family": "Z"}],
        ]
    )
    def test_invalid(self, name, changes):  # pylint: disable=unused-argument
        with self.assertRaises(PreconditionException):
            space(**changes)

    def test_replace_and_dict(self):
        params = space(s=(1.0, 0.5), q=math.inf)
        changed = params.replace(family="F")
        self.assertEqual(changed.get_family(), "F")
        self.assertEqual(changed.get_s(), (1.0, 0.5))
        self.assertDictEqual(
            params.to_dict(),
            {
                "family": "B",
                "kind": "classical",
                "flavor": "mixed",
                "s": [1.0, 0.5],
                "p": 2.0,
                "q": math.inf,
                "J": None,
            },
        )

    def test_auto_J(self):
        # band radius 7 needs 2^(J-1) >= 7
        self.assertEqual(auto_J(self.ps), (4, 4))
        # radial band radius 7 sqrt 2 < 16
        self.assertEqual(auto_J(self.ps, "ordinary"), (5, 5))
        self.assertEqual(resolve_J(self.ps, space(J=(2, 3))), (2, 3))

    def test_classical_weight(self):
        self.assertEqual(block_weight(self.ps, space(s=(1.0, -1.0)), (3, 1)), 4.0)

    @parameterized.expand([["coarser_than_grid", (3, 0), 4.0], ["finer_than_grid", (5, 5), 256.0]])
    def test_nonclassical_weight(self, name, j, expected):  # pylint: disable=unused-argument
        # circle volumes are 2r at every scale, on the grid and on its refinement
        params = space(kind="nonclassical", s=(1.0, 1.0) if j[1] else (1.0, 0.0))
        for ps in (self.ps, refine_product(self.ps)):
            np.testing.assert_allclose(block_weight(ps, params, j), expected)


class TestNorms(TestProductBase):
    def test_orthogonal_l2_identity(self):
        cs = make_orthogonal_cutoffs()
        for cf in self.fields:
            self.assertAlmostEqual(besov_norm(cs, cf, space()), cf.l2_norm(), delta=1e-10 * cf.l2_norm())

    def test_single_mode_block_sum(self):
        # frequency 3 lies in blocks 1 and 2
        cs = make_orthogonal_cutoffs()
        f = mode_field(self.ps, 5, 0)
        self.assertAlmostEqual(besov_norm(cs, f, space()), 1.0, delta=1e-10)

    @parameterized.expand(
        [
            ["l2", (0.0, 0.0), 2.0],
            ["smooth", (1.0, 0.5), 2.0],
            ["p1", (0.5, 0.0), 1.0],
        ]
    )
    def test_tl_equals_besov_when_p_is_q(self, name, s, p):  # pylint: disable=unused-argument
        cs = make_partition_cutoffs()
        cf = self.fields[2]
        b = besov_norm(cs, cf, space(s=s, p=p, q=p))
        f = tl_norm(cs, cf, space(s=s, p=p, q=p, family="F"))
        self.assertAlmostEqual(b, f, delta=1e-10 * b)

    def test_homogeneity(self):
        cs = make_partition_cutoffs()
        cf = self.fields[0]
        for params in (space(s=(0.5, 0.5), q=1.0), space(family="F", q=math.inf), space(kind="nonclassical")):
            self.assertAlmostEqual(space_norm(cs, cf.scaled(-3.0), params), 3.0 * space_norm(cs, cf, params))

    def test_tl_monotone_in_q(self):
        cs = make_partition_cutoffs()
        cf = self.fields[3]
        norms = [tl_norm(cs, cf, space(family="F", q=q)) for q in (1.0, 2.0, math.inf)]
        self.assertGreaterEqual(norms[0], norms[1])
        self.assertGreaterEqual(norms[1], norms[2])

    def test_lp_norm_of_constant(self):
        # e_0 x e_0 = 1/(2 pi) on a space of measure 4 pi^2
        f = mode_field(self.ps, 0, 0)
        self.assertAlmostEqual(lp_norm(f, 2.0), 1.0)
        self.assertAlmostEqual(lp_norm(f, 1.0), 2.0 * math.pi)
        self.assertAlmostEqual(lp_norm(f, math.inf), 1.0 / (2.0 * math.pi))

    def test_test_norm_of_constant(self):
        f = mode_field(self.ps, 0, 0)
        self.assertAlmostEqual(pmk_norm(f, 2, 0.0, (0.0, 0.0)), 1.0 / (2.0 * math.pi))


class TestHarnesses(TestProductBase):
    def test_cutoff_independence(self):
        params = space()
        report = cutoff_independence_check(
            make_partition_cutoffs(), make_orthogonal_cutoffs(), self.fields, params
        )
        self.assertTrue(report.is_passed())
        self.assertGreaterEqual(report.get_measured_constant(), 1.0)
        self.assertAlmostEqual(report.get_measurement("constant_J_plus_2"), report.get_measured_constant())

    def test_embedding_into_lp(self):
        cs = make_partition_cutoffs()
        report = embedding_check(cs, self.fields, space(s=(0.5, 0.5)))
        self.assertEqual(report.get_params()["target"], "Lp")
        self.assertTrue(report.is_passed())

    @parameterized.expand(
        [
            ["lp_needs_positive_s", space(), None],
            ["unbalanced", space(), space(p=4.0)],
            ["f_family", space(family="F"), space(family="F", s=(-0.25, -0.25), p=4.0)],
        ]
    )
    def test_embedding_preconditions(self, name, source, target):  # pylint: disable=unused-argument
        with self.assertRaises(PreconditionException):
            embedding_check(make_partition_cutoffs(), self.fields, source, target)

    def test_sobolev_embedding(self):
        source = space(s=(0.5, 0.5))
        target = space(s=(0.25, 0.25), p=4.0)
        report = embedding_check(make_partition_cutoffs(), self.fields, source, target)
        self.assertTrue(report.is_passed())

    def test_nonclassical_sobolev_embedding(self):
        source = space(kind="nonclassical", s=(1.0, 1.0), p=1.0)
        target = space(kind="nonclassical", s=(0.5, 0.5), p=2.0)
        report = embedding_check(make_partition_cutoffs(), self.fields, source, target)
        self.assertTrue(report.is_passed())
        self.assertGreater(report.get_measured_constant(), 0.0)

    @parameterized.expand([["smooth_q1", 4], ["mixed_sign_q_inf", 5]])
    def test_default_space_independence(self, name, index):  # pylint: disable=unused-argument
        params = RunConfigDict({}).get_spaces()[index]
        self.assertGreater(params.get_s()[0], 0.0)
        report = cutoff_independence_check(make_partition_cutoffs(), make_orthogonal_cutoffs(), self.fields, params)
        self.assertTrue(report.is_passed())
        self.assertLess(report.get_measured_constant(), 4.0)
