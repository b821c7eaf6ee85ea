import unittest
import numpy as np
from prodspace.coordspace import make_circle, make_jacobi
from prodspace.funcspaces import SpaceParams
from prodspace.product import make_product
from prodspace.testsets import random_fields


class TestProductBase(unittest.TestCase):
    """
    Small circle x circle and circle x jacobi spaces shared by the numerical
    tests; circle(8) keeps 15 modes on 32 nodes, band radius 7.
    """

    n_modes = 8
    n_fields = 4

    @classmethod
    def setUpClass(cls):
        cls.circle = make_circle(cls.n_modes)
        cls.jacobi = make_jacobi(cls.n_modes, 0.0, 0.0)
        cls.ps = make_product(cls.circle, cls.circle)
        cls.mixed_ps = make_product(cls.circle, cls.jacobi)
        cls.fields = random_fields(cls.ps, cls.n_fields, seed=0)

    def assertFieldsClose(self, a, b, tol=1e-10):  # pylint: disable=invalid-name
        scale = max(np.abs(b.get_coefs()).max(), 1.0)
        self.assertLessEqual(float(np.abs(a.get_coefs() - b.get_coefs()).max()), tol * scale)


def space(**kwargs):
    values = {"s": 0.0, "p": 2.0, "q": 2.0}
    values.update(kwargs)
    return SpaceParams(**values)
