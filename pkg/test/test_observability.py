import unittest
import warnings
from abc import ABC

import numpy as np


class ObservabilityTestMixin(ABC):
    dim = None

    def test_residual_decays(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.observability import residual
        u0 = gaussian(self.dim, 1., None, 1.)
        values = [residual(u0, 0.25, N) for N in (1., 2., 4.)]
        for report in values:
            self.assertEqual(report.backbone, 'gaussian')
            self.assertFalse(report.asserted)
        self.assertTrue(values[0].resolved)
        measured = [report.measured for report in values]
        self.assertTrue(measured[0] > measured[1] > measured[2])
        # the residual is part of the field
        self.assertLess(measured[0], values[0].extras['u0_norm'])

    def test_bandlimited_field(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.observability import residual
        u0 = gaussian(self.dim, 1., None, 0.5)
        report = residual(u0, 1., 2., band=1.)
        self.assertLess(report.measured, 1e-12)
        self.assertEqual(report.parameters['band'], 1.)

    def test_backbones_agree(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.observability import residual
        u0 = gaussian(self.dim, 1., np.full(self.dim, 0.3), 0.5)
        exact = residual(u0, 0.25, 1.)
        sampled = residual(u0, 0.25, 1., backbone='samples')
        self.assertEqual(sampled.parameters['policy'], 'adaptive')
        slack = exact.certificate + sampled.certificate + 1e-3 * exact.bound_form
        self.assertLessEqual(abs(exact.measured - sampled.measured), slack)
        with self.assertRaises(ValueError):
            residual(u0, 0.25, 1., backbone='fourier')
        with self.assertRaises(ValueError):
            residual(u0, 0., 1.)

    def test_sample_l2(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.observability import sample_l2_report
        u0 = gaussian(self.dim, 1., None, 1.)
        report = sample_l2_report(u0, 1., 2.)
        self.assertGreater(report.measured, 0.)
        self.assertTrue(report.resolved)
        self.assertFalse(report.asserted)
        self.assertEqual(report.parameters['N'], 2.)
        with self.assertRaises(ValueError):
            sample_l2_report(u0, 0., 2.)

    def test_residual_rate(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.observability import residual
        u0 = gaussian(self.dim, 1., None, 1.)
        densities = np.array([1., 1.5, 2., 2.5, 3.])
        measured = [residual(u0, 1., N).measured for N in densities]
        self.assertTrue(all(m > 0 for m in measured))
        slope = np.polyfit(densities ** 2, np.log(measured), 1)[0]
        self.assertLessEqual(slope, -0.9)

    def test_out_of_band_mass(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.observability import residual
        # a narrow field keeps energy outside the band cube
        u0 = gaussian(self.dim, 1., None, 0.1)
        report = residual(u0, 0.05, 1.)
        self.assertGreaterEqual(report.extras['out_of_band'], 1e-2)
        self.assertGreater(report.measured - report.certificate, 1e-3)

    def test_perturbation_linear(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.observability import perturbed_residual, perturbed_sample_gap
        u0 = gaussian(self.dim, 1., None, 1.)
        # T N^2 = 4, the eps term dominates
        eps = np.array([0.05, 0.1, 0.2])
        for check in (perturbed_residual, perturbed_sample_gap):
            measured = [check(u0, 1., 2., e).measured for e in eps]
            slope = np.polyfit(np.log(eps), np.log(measured), 1)[0]
            self.assertTrue(0.75 <= slope <= 1.25)

    def test_perturbed(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.observability import perturbed_residual, perturbed_sample_gap, residual
        u0 = gaussian(self.dim, 1., None, 1.)
        gap = perturbed_sample_gap(u0, 1., 2., 0.)
        self.assertLess(gap.measured, 1e-14)
        gap = perturbed_sample_gap(u0, 1., 2., 0.1, rule='radial')
        self.assertGreater(gap.measured, 0.)
        self.assertEqual(gap.parameters['rule'], 'radial')

        exact = residual(u0, 1., 2.)
        moved = perturbed_residual(u0, 1., 2., 0.1)
        self.assertGreater(moved.measured, exact.measured)
        self.assertEqual(moved.parameters['eps'], 0.1)


class TestObservability1d(ObservabilityTestMixin, unittest.TestCase):
    dim = 1

    def test_operator_decomposition(self):
        from heatobs.observability import operator_decomposition_report
        report = operator_decomposition_report(1, 1., 2., trials=2, seed=3)
        self.assertTrue(report.extras['w_ok'])
        self.assertLess(report.measured, 1e-3)
        self.assertFalse(report.asserted)
        # the residual constant would have to be large to fail the condition
        report = operator_decomposition_report(1, 1., 2., trials=1, constant=1.)
        self.assertTrue(report.asserted)
        self.assertTrue(report.passed)
        with self.assertRaises(ValueError):
            operator_decomposition_report(1, 1., 2., trials=0)

    def test_fit_constant(self):
        from heatobs.observability import fit_constant
        from heatobs.reports import make_report
        reports = [make_report('residual', 1., 0., 2.), make_report('residual', 3., 0., 4.),
                   make_report('residual', 5., 1., 1.)]
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter('always')
            calibration = fit_constant('residual', reports, 1)
        self.assertEqual(len(w), 1)
        self.assertEqual(calibration.value, 0.75)
        self.assertEqual(calibration.n_points, 2)
        self.assertEqual(calibration.n_skipped, 1)

        lower = [make_report('counterexample', 1., 0., 0.5, direction='lower')]
        with self.assertRaises(ValueError):
            fit_constant('counterexample', lower, 1)


    def test_calibrate_constant(self):
        from heatobs.corpus import standard_sweep
        from heatobs.calibration import sweep_fingerprint
        from heatobs.observability import calibrate_constant
        sweep = standard_sweep('residual', 1)[:2]
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            calibration = calibrate_constant('residual', sweep, n_threads=2)
        self.assertEqual(calibration.dim, 1)
        self.assertGreaterEqual(calibration.value, 0.)
        self.assertEqual(calibration.n_points + calibration.n_skipped, 2)
        self.assertEqual(calibration.fingerprint, sweep_fingerprint('residual', 1, sweep, None))
        with self.assertRaises(ValueError):
            calibrate_constant('residual', [])


class TestObservability2d(ObservabilityTestMixin, unittest.TestCase):
    dim = 2


if __name__ == '__main__':
    unittest.main()
