import unittest

import numpy as np


class TestHsAnalysis(unittest.TestCase):

    def test_hs_norm(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.hs_analysis import hs_norm
        for width in (0.5, 1.):
            norm = hs_norm(gaussian(1, 1., [0.4], width), 1.)
            expected = np.sqrt((8 * np.pi * width) ** -0.5 * (1 + 1. / (4 * width)))
            self.assertTrue(np.isclose(norm.value, expected, rtol=1e-6))

    def test_hs_residual(self):
        from heatobs import spectral_field as sf
        from heatobs.gaussian_field import gaussian
        from heatobs.hs_analysis import hs_residual
        from heatobs.util import PreconditionError
        u0 = gaussian(1, 1., None, 0.5)
        reports = [hs_residual(sf.from_gaussian(u0, sf.default_grid(1, N, extent=8)), N, 1.)
                   for N in (1., 2.)]
        self.assertLess(reports[1].measured, reports[0].measured)
        for report in reports:
            self.assertFalse(report.asserted)
            self.assertGreater(report.extras['out_of_band_hs'], 0.)
        f = sf.from_gaussian(u0, sf.default_grid(1, 1., extent=8))
        with self.assertRaises(PreconditionError):
            hs_residual(f, 1., 0.5)

    def test_criticality(self):
        from heatobs.hs_analysis import criticality_probe
        report = criticality_probe(1, 0.5, 2.)
        self.assertTrue(report.extras['rejection_ok'])
        self.assertGreater(report.measured, 0.)
        self.assertEqual(report.parameters['s'], 0.75)

    def test_local_sup(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.hs_analysis import local_sup_report
        u0 = gaussian(1, 1., None, 1.)
        profile, report = local_sup_report(u0, 1.)
        self.assertTrue(profile.certified)
        self.assertTrue(np.all(profile.lower <= profile.values))
        self.assertTrue(np.all(profile.values <= profile.upper))
        self.assertGreaterEqual(profile.upper.max(), (4 * np.pi) ** -0.5)
        self.assertLessEqual(profile.values.max(), (4 * np.pi) ** -0.5)
        self.assertEqual(report.parameters['s'], 1.)
        self.assertTrue(report.measured > 0)

    def test_profile_scaling(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.hs_analysis import profile_scaling_check
        for dim in (1, 2):
            report = profile_scaling_check(gaussian(dim, 1., None, 0.5), 0.5)
            self.assertTrue(report.asserted)
            self.assertTrue(report.passed)

    def test_commutator(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.hs_analysis import commutator_inequality_check
        f = gaussian(1, 1., [0.3], 0.5)
        for s in (1., 2.):
            report = commutator_inequality_check(f, s)
            self.assertTrue(report.extras['certified'])
            self.assertTrue(report.passed)
        with self.assertRaises(ValueError):
            commutator_inequality_check(gaussian(2), 1.5)
        with self.assertRaises(ValueError):
            commutator_inequality_check(f, 4.)

    def test_heat_local(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.hs_analysis import heat_local_bounds
        report = heat_local_bounds(gaussian(1, 1., None, 0.5), 1., 1.)
        self.assertTrue(report.extras['lattice_dominated_ok'])
        self.assertFalse(report.asserted)
        with self.assertRaises(ValueError):
            heat_local_bounds(gaussian(1), 0., 1.)

    def test_derivative_l2(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.hs_analysis import derivative_l2_check
        u0 = gaussian(1, 1., [0.2], 0.25)
        for order in (0, 1, 2):
            report = derivative_l2_check(u0, 0.5, (order,))
            self.assertTrue(report.passed)
        with self.assertRaises(ValueError):
            derivative_l2_check(u0, 0.5, (1, 1))

    def test_perturbed_bandlimited_gap(self):
        from heatobs import spectral_field as sf
        from heatobs.gaussian_field import gaussian
        from heatobs.hs_analysis import perturbed_bandlimited_gap
        from heatobs.util import PreconditionError
        N = 2.
        f = sf.from_gaussian(gaussian(1, 1., None, 0.5), sf.default_grid(1, N, extent=2))
        low = sf.band_project(f, N, 'low')
        report = perturbed_bandlimited_gap(low, N, 0.)
        self.assertLess(report.measured, 1e-10)
        report = perturbed_bandlimited_gap(low, N, 0.1, rule='radial')
        self.assertGreater(report.measured, 0.)
        self.assertTrue(report.passed)
        with self.assertRaises(PreconditionError):
            perturbed_bandlimited_gap(f, N, 0.1)


if __name__ == '__main__':
    unittest.main()
