import os
import unittest
from shutil import rmtree

import numpy as np


class TestUtil(unittest.TestCase):
    tmp_folder = './tmp'

    def setUp(self):
        os.makedirs(self.tmp_folder, exist_ok=True)

    def tearDown(self):
        try:
            rmtree(self.tmp_folder)
        except OSError:
            pass

    def test_open_file(self):
        from heatobs.util import open_file
        path = os.path.join(self.tmp_folder, 'data.h5')
        with open_file(path, 'w') as f:
            f.attrs['value'] = 1.5
        with open_file(path, 'r') as f:
            self.assertEqual(f.attrs['value'], 1.5)
        with self.assertRaises(ValueError):
            open_file(os.path.join(self.tmp_folder, 'data.n5'), 'w')

    def test_check_dimension(self):
        from heatobs.util import check_dimension
        for dim in (1, 2, 3):
            self.assertEqual(check_dimension(dim), dim)
        for dim in (0, 4, 1.5):
            with self.assertRaises(ValueError):
                check_dimension(dim)

    def test_as_points(self):
        from heatobs.util import as_points
        pts, single = as_points(0.5, 1)
        self.assertEqual(pts.shape, (1, 1))
        self.assertTrue(single)
        pts, single = as_points([0., 1., 2.], 1)
        self.assertEqual(pts.shape, (3, 1))
        self.assertFalse(single)
        pts, single = as_points([0., 1.], 2)
        self.assertEqual(pts.shape, (1, 2))
        self.assertTrue(single)
        with self.assertRaises(ValueError):
            as_points(np.zeros((4, 3)), 2)

    def test_gauss_legendre_axis(self):
        from heatobs.util import gauss_legendre_axis
        nodes, weights = gauss_legendre_axis(-1., 2., 3, 8)
        self.assertEqual(len(nodes), 24)
        self.assertTrue(np.all(np.diff(nodes) > 0))
        self.assertTrue(np.all(weights > 0))
        # exact for polynomials up to degree 15
        value = weights @ (nodes ** 5 + nodes ** 2)
        expected = (2. ** 6 - 1.) / 6 + (2. ** 3 + 1.) / 3
        self.assertTrue(np.allclose(value, expected, rtol=1e-13))

    def test_tensor_apply(self):
        from heatobs.util import tensor_apply
        rng = np.random.default_rng(0)
        array = rng.standard_normal((3, 4))
        mats = [rng.standard_normal((5, 3)), rng.standard_normal((2, 4))]
        expected = np.einsum('ia,jb,ab->ij', mats[0], mats[1], array)
        self.assertTrue(np.allclose(tensor_apply(array, mats), expected))

    def test_cube_members(self):
        from heatobs.util import cube_members
        members = cube_members(2, 2)
        self.assertEqual(members.shape, (25, 2))
        self.assertEqual(members[0].tolist(), [-2, -2])
        self.assertEqual(members[1].tolist(), [-2, -1])
        self.assertEqual(members[-1].tolist(), [2, 2])

    def test_product_excess(self):
        from heatobs.util import product_excess
        bases = [1., 2., 3.]
        extras = [1e-20, 0.5, 0.25]
        expected = (1. + 1e-20) * 2.5 * 3.25 - 6.
        self.assertTrue(np.allclose(product_excess(bases, extras), expected, rtol=1e-14))
        # no cancellation for tiny extras
        tiny = product_excess([1., 1.], [1e-30, 0.])
        self.assertTrue(np.allclose(tiny, 1e-30, rtol=1e-12))

    def test_sqrt_interval(self):
        from heatobs.util import sqrt_interval
        res = sqrt_interval(4., 0.01, 0.02)
        self.assertEqual(res.value, 2.)
        self.assertGreaterEqual(2. + res.certificate, np.sqrt(4.03) - 1e-15)
        self.assertLessEqual(2. - res.certificate, np.sqrt(3.99) + 1e-15)

    def test_refine_until(self):
        from heatobs.util import Certified, CertificationError, refine_until
        res = refine_until(lambda level: 1. + 0.5 ** (20 * level), tol=1e-8)
        self.assertTrue(np.allclose(res.value, 1.))
        self.assertLessEqual(res.certificate, 1e-8)

        res = refine_until(lambda level: Certified(2. + 0.1 ** (4 * level), 1e-12), tol=1e-6)
        self.assertGreaterEqual(res.certificate, 1e-12)

        with self.assertRaises(CertificationError) as cm:
            refine_until(lambda level: float(level), tol=1e-3, max_doublings=3)
        self.assertEqual(cm.exception.value, 3.)
        self.assertEqual(cm.exception.certificate, 1.)

        with self.assertRaises(ValueError):
            refine_until(lambda level: 0., tol=0.)

    def test_parallel_map(self):
        from heatobs.util import parallel_map
        items = list(range(20))
        self.assertEqual(parallel_map(lambda x: x ** 2, items, n_threads=4), [x ** 2 for x in items])
        self.assertEqual(parallel_map(lambda x: -x, items), [-x for x in items])

    def test_periodized_tail(self):
        from heatobs.util import periodized_tail
        tails = [periodized_tail(1., 1., 1, k) for k in (0, 1, 4, 16)]
        self.assertTrue(all(a > b for a, b in zip(tails[:-1], tails[1:])))
        # bound on the shells k = +-1 for xi = 0
        exact = 2. / (1. + (2 * np.pi) ** 2)
        self.assertGreaterEqual(periodized_tail(1., 1., 1, 0), exact)
        with self.assertRaises(ValueError):
            periodized_tail(1., 0.5, 1, 4)


if __name__ == '__main__':
    unittest.main()
