import unittest

import numpy as np


class TestBump(unittest.TestCase):

    def test_values(self):
        from heatobs.bump import bump_1d
        t = np.linspace(-1, 1, 21)
        self.assertTrue(np.allclose(bump_1d(t), 1.))
        t = np.array([-3., -2., 2., 2.5])
        self.assertTrue(np.allclose(bump_1d(t), 0.))
        self.assertTrue(np.isclose(bump_1d(np.array([1.5]))[0], 0.5))
        t = np.linspace(1., 2., 41)
        values = bump_1d(t)
        self.assertTrue(np.all(np.diff(values) <= 1e-15))
        self.assertTrue(np.allclose(bump_1d(-t), values))

    def test_derivatives(self):
        from heatobs.bump import bump_1d
        h = 1e-5
        t = np.array([1.2, 1.45, 1.5, 1.7, -1.3])
        for order in range(3):
            fd = (bump_1d(t + h, order) - bump_1d(t - h, order)) / (2 * h)
            self.assertTrue(np.allclose(fd, bump_1d(t, order + 1), rtol=1e-4, atol=1e-6))
        self.assertTrue(np.allclose(bump_1d(np.array([0.5, 2.5]), 1), 0.))
        with self.assertRaises(ValueError):
            bump_1d(t, 9)

    def test_tensor(self):
        from heatobs.bump import bump, bump_1d, bump_on_axes
        x = np.array([[0.5, 1.7], [1.2, -1.4], [3., 0.]])
        expected = bump_1d(x[:, 0]) * bump_1d(x[:, 1])
        self.assertTrue(np.allclose(bump(x, 2), expected))
        expected = bump_1d(x[:, 0], 1) * bump_1d(x[:, 1], 2)
        self.assertTrue(np.allclose(bump(x, 2, alpha=(1, 2)), expected))
        axes = [np.linspace(-2, 2, 5), np.linspace(-2, 2, 7)]
        grid = bump_on_axes(axes)
        self.assertEqual(grid.shape, (5, 7))
        self.assertTrue(np.allclose(grid, np.outer(bump_1d(axes[0]), bump_1d(axes[1]))))

    def test_bessel_power(self):
        from heatobs.bump import bessel_power_on_axes, bessel_power_terms, bump_1d
        self.assertEqual(bessel_power_terms(1, 2), [(1, (0, 0)), (-1, (0, 2)), (-1, (2, 0))])
        self.assertEqual(bessel_power_terms(2, 1), [(1, (0,)), (-2, (2,)), (1, (4,))])
        ax = np.linspace(-2.5, 2.5, 51)
        values = bessel_power_on_axes(1, [ax])
        self.assertTrue(np.allclose(values, bump_1d(ax) - bump_1d(ax, 2)))
        with self.assertRaises(ValueError):
            bessel_power_on_axes(5, [ax])


if __name__ == '__main__':
    unittest.main()
