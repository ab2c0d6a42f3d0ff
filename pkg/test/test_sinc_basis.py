import os
import unittest
from abc import ABC
from shutil import rmtree

import numpy as np


class SincBasisTestMixin(ABC):
    tmp_folder = './tmp'

    def setUp(self):
        os.makedirs(self.tmp_folder, exist_ok=True)

    def tearDown(self):
        try:
            rmtree(self.tmp_folder)
        except OSError:
            pass

    def test_index_sets(self):
        from heatobs.sinc_basis import ball_index_set, cube_index_set
        cube = cube_index_set(2., self.dim, 3)
        self.assertEqual(len(cube), 7 ** self.dim)
        ball = ball_index_set(2., self.dim, 1.5)
        self.assertTrue(np.all(np.linalg.norm(ball.positions, axis=1) < 1.5))
        # ties |n/N| = r are excluded
        self.assertFalse(np.any(np.isclose(np.linalg.norm(ball.positions, axis=1), 1.5)))
        values = np.arange(len(ball), dtype='float64')
        self.assertTrue(np.allclose(ball.from_tensor(ball.to_tensor(values)), values))
        with self.assertRaises(ValueError):
            ball_index_set(2., self.dim, 0.)

    def test_adaptive_index_set(self):
        from heatobs.gaussian_field import gaussian, lattice_tail
        from heatobs.sinc_basis import adaptive_index_set
        mix = gaussian(self.dim, 1., None, 1.)
        index_set, tail = adaptive_index_set(2., self.dim, lambda m: lattice_tail(mix, 2., m), 1e-10)
        self.assertLessEqual(tail, 1e-10)
        self.assertEqual(index_set.shape, 'adaptive')

    def test_sinc_eval(self):
        from heatobs.sinc_basis import sinc_eval
        N = 2.5
        n = np.ones(self.dim)
        members = np.array([np.full(self.dim, k) for k in range(-2, 3)], dtype='float64')
        values = sinc_eval(N, n, members / N)
        expected = np.all(members == n[None], axis=1).astype('float64')
        self.assertTrue(np.allclose(values, expected, atol=1e-14))

    def test_sinc_fourier(self):
        from heatobs.sinc_basis import sinc_fourier
        N = 1.
        inside = sinc_fourier(N, np.zeros(self.dim), np.full(self.dim, 0.5 * np.pi))
        outside = sinc_fourier(N, np.zeros(self.dim), np.full(self.dim, 1.5 * np.pi))
        self.assertTrue(np.allclose(inside, (2 * np.pi) ** (-self.dim / 2.)))
        self.assertEqual(outside, 0.)

    def test_sample_gaussian(self):
        from heatobs.gaussian_field import gaussian, evaluate
        from heatobs.sinc_basis import cube_index_set, sample_gaussian
        mix = gaussian(self.dim, 1., np.full(self.dim, 0.3), 0.5)
        index_set = cube_index_set(1., self.dim, 4)
        samples = sample_gaussian(mix, index_set)
        self.assertTrue(np.allclose(samples.values, evaluate(mix, index_set.positions)))
        self.assertGreater(samples.tail_bound, 0.)
        self.assertLess(samples.tail_bound, 1e-3)

    def test_synthesize(self):
        from heatobs.sinc_basis import delta_samples, synthesize
        N = 2.
        series = synthesize(N, delta_samples(N, self.dim, value=N ** (self.dim / 2.)))
        self.assertTrue(np.allclose(series.norm().value, 1.))
        self.assertTrue(np.allclose(series.evaluate(np.zeros(self.dim)), N ** (self.dim / 2.)))
        samples = delta_samples(N, self.dim)
        samples.values[0] = np.nan
        with self.assertRaises(ValueError):
            synthesize(N, samples)

    def test_shannon_check(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.sinc_basis import shannon_check
        from heatobs.spectral_field import FrequencyGrid, band_project, from_gaussian
        from heatobs.util import PreconditionError
        N = 2.
        mix = gaussian(self.dim, 1., np.full(self.dim, 0.2), 1.)
        f = band_project(from_gaussian(mix, FrequencyGrid(self.dim, N, extent=1)), N, 'low')
        report = shannon_check(f, N)
        self.assertLess(report.measured, 1e-6)
        self.assertLess(report.extras['parseval_defect'], 1e-6)
        with self.assertRaises(PreconditionError):
            shannon_check(from_gaussian(mix, FrequencyGrid(self.dim, N)), N)

    def test_samples_csv(self):
        from heatobs.sinc_basis import cube_index_set, SampleVector, samples_from_csv, samples_to_csv
        index_set = cube_index_set(1.5, self.dim, 2)
        values = np.random.default_rng(0).standard_normal(len(index_set))
        samples = SampleVector(index_set, values, tail_bound=1e-3)
        path = os.path.join(self.tmp_folder, 'samples.csv')
        samples_to_csv(path, samples)
        loaded = samples_from_csv(path)
        self.assertTrue(np.allclose(loaded.values, values, rtol=1e-15, atol=0))
        self.assertEqual(loaded.tail_bound, 1e-3)
        self.assertEqual(loaded.N, 1.5)


class TestSincBasis1d(SincBasisTestMixin, unittest.TestCase):
    dim = 1

    def test_orthonormality(self):
        from heatobs.sinc_basis import delta_samples, synthesize
        from heatobs.spectral_field import FrequencyGrid, inner_product
        for N in (1., 2.5):
            grid = FrequencyGrid(1, N, panels=16, extent=1)
            fields = {n: synthesize(N, delta_samples(N, 1, [n], value=N ** 0.5)).to_spectral(grid)
                      for n in range(-3, 4)}
            for n, f in fields.items():
                for m, g in fields.items():
                    value = inner_product(f, g).value
                    self.assertLess(abs(value - float(n == m)), 1e-9)


class TestSincBasis2d(SincBasisTestMixin, unittest.TestCase):
    dim = 2


if __name__ == '__main__':
    unittest.main()
