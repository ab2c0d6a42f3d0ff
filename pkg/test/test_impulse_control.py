import unittest
from abc import ABC

import numpy as np


class ClosedLoopTestMixin(ABC):
    dim = None

    def _state_norm(self, y0, control, T, tau):
        from heatobs.gaussian_field import heat_evolve, l2_norm
        from heatobs.impulse_control import comb_evolve
        return l2_norm(heat_evolve(y0, T) + comb_evolve(control, T - tau))

    def test_final_state_follows_control(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.impulse_control import ClosedLoopRun, ControlVector, closed_loop_final, run_closed_loop
        y0 = gaussian(self.dim, 1., None, 1.)
        run = run_closed_loop(ClosedLoopRun(y0, 1., 0.5, 2.))
        report = closed_loop_final(run)
        self.assertGreaterEqual(report.certificate, report.extras['truncation_bound'])
        expected = self._state_norm(y0, run.control, 1., 0.5)
        self.assertLessEqual(abs(report.measured - expected), report.certificate + 1e-6)

        # a wrong sign doubles the in-band part instead of removing it
        control = ControlVector(run.control.index_set, -run.control.values)
        flipped = closed_loop_final(ClosedLoopRun(y0, 1., 0.5, 2., control=control))
        expected = self._state_norm(y0, control, 1., 0.5)
        self.assertTrue(np.isclose(flipped.measured, expected, rtol=1e-6))
        self.assertGreater(flipped.measured, flipped.extras['uncontrolled_norm'])
        self.assertFalse(flipped.passed)

        control = ControlVector(run.control.index_set, np.zeros(len(run.control)))
        idle = closed_loop_final(ClosedLoopRun(y0, 1., 0.5, 2., control=control))
        self.assertTrue(np.isclose(idle.measured, idle.extras['uncontrolled_norm'], rtol=1e-6))

    def test_decay_in_density(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.impulse_control import ClosedLoopRun, closed_loop_final
        y0 = gaussian(self.dim, 1., None, 1.)
        densities = (2., 3., 4.) if self.dim == 1 else (2., 4.)
        reports = [closed_loop_final(ClosedLoopRun(y0, 1., 0.5, N), eps=0.01) for N in densities]
        for report in reports:
            # ratio <= 2 C e^{-(T - tau) N^2} with C of order one
            self.assertIsNotNone(report.extras['decay_term'])
            self.assertLessEqual(report.extras['decay_term'], 0.)
            self.assertLess(report.extras['ratio_to_y0'], 1e-3)
        self.assertLessEqual(reports[-1].measured + reports[-1].certificate, 0.01 * reports[-1].extras['uncontrolled_norm'])


class TestImpulseControl(unittest.TestCase):

    def test_comb_evolve(self):
        from heatobs.gaussian_field import l2_norm
        from heatobs.impulse_control import ControlVector, comb_evolve
        from heatobs.sinc_basis import delta_samples
        samples = delta_samples(2., 1, n=[1])
        v = ControlVector(samples.index_set, samples.values)
        field = comb_evolve(v, 0.5)
        self.assertEqual(len(field), 1)
        self.assertTrue(np.allclose(field.centers, [[0.5]]))
        self.assertTrue(np.isclose(l2_norm(field), (8 * np.pi * 0.5) ** (-0.25)))
        with self.assertRaises(ValueError):
            comb_evolve(v, 0.)

    def test_feedback_gain(self):
        from heatobs.corpus import standard_fields
        from heatobs.gaussian_field import l2_norm
        from heatobs.impulse_control import feedback_gain
        N = 2.
        for name, g in standard_fields(1).items():
            v = feedback_gain(g, N)
            norm = v.l2_norm()
            self.assertLessEqual(norm.value - norm.certificate, N ** -0.5 * l2_norm(g) * (1 + 1e-9))
        g = standard_fields(1)['unit']
        window = feedback_gain(g, N, index_policy='ball', radius=2.)
        self.assertEqual(window.tail_bound, 0.)
        self.assertTrue(np.all(np.abs(window.index_set.positions) < 2.))
        with self.assertRaises(ValueError):
            feedback_gain(g, N, index_policy='ball')
        with self.assertRaises(ValueError):
            feedback_gain(g, N, index_policy='square')

    def test_feedback_norm(self):
        from heatobs.corpus import sinc_witness, standard_fields
        from heatobs.impulse_control import feedback_norm_report
        for N in (1., 2.):
            fields = standard_fields(1)
            fields['witness'] = sinc_witness(N, 1)
            report = feedback_norm_report(fields, N, witness='witness')
            self.assertTrue(report.passed)
            self.assertTrue(report.extras['attained_ok'])
            self.assertTrue(np.isclose(report.extras['witness_ratio'], N ** -0.5, rtol=1e-3))
        with self.assertRaises(ValueError):
            feedback_norm_report(standard_fields(1), 1., witness='witness')

    def test_closed_loop(self):
        from heatobs.gaussian_field import gaussian, heat_evolve, l2_norm
        from heatobs.impulse_control import ClosedLoopRun, closed_loop_final
        y0 = gaussian(1, 1., None, 1.)
        run = ClosedLoopRun(y0, 1., 0.5, 2.)
        free = closed_loop_final(run, zero_control=True)
        self.assertEqual(free.measured, l2_norm(heat_evolve(y0, 1.)))
        self.assertFalse(free.asserted)
        controlled = closed_loop_final(run)
        self.assertLess(controlled.measured + controlled.certificate, 1e-3 * free.measured)
        self.assertFalse(controlled.extras['threshold_met'])

        # a small density constant puts N above the threshold
        controlled = closed_loop_final(run, eps=0.1, constant=0.25)
        self.assertTrue(controlled.extras['threshold_met'])
        self.assertTrue(controlled.asserted)
        self.assertTrue(controlled.passed)
        with self.assertRaises(ValueError):
            closed_loop_final(ClosedLoopRun(y0, 1., 0.5, 2., r=2.))

    def test_windowed_closed_loop(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.impulse_control import ClosedLoopRun, windowed_closed_loop
        y0 = gaussian(1, 1., None, 1.)
        report = windowed_closed_loop(ClosedLoopRun(y0, 1., 0.5, 2., r=4.))
        self.assertTrue(report.extras['weight_ok'])
        self.assertLessEqual(report.measured, report.extras['unweighted_norm'] + report.certificate)
        self.assertGreater(report.extras['window_size'], 0)
        with self.assertRaises(ValueError):
            windowed_closed_loop(ClosedLoopRun(y0, 1., 0.5, 2.))

    def test_duality(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.impulse_control import duality_gap
        y0 = gaussian(1, 1., None, 1.)
        u0 = gaussian(1, 1., [0.7], 0.5)
        gap = duality_gap(y0, u0, 1., 0.5, 1.)
        self.assertLessEqual(gap.value, gap.certificate + 1e-8)
        with self.assertRaises(ValueError):
            duality_gap(y0, u0, 0.5, 0.5, 1.)

    def test_duality_random_pairs(self):
        from heatobs.gaussian_field import random_mixture
        from heatobs.impulse_control import duality_gap
        rng = np.random.default_rng(3)
        for _ in range(25):
            y0, u0 = random_mixture(1, rng), random_mixture(1, rng)
            N = float(rng.choice([1., 1.5, 2.]))
            gap = duality_gap(y0, u0, 1., 0.5, N)
            self.assertLessEqual(gap.value, gap.certificate + 1e-8)
            self.assertLess(gap.value, 1e-6)

    def test_control_sobolev(self):
        from heatobs.gaussian_field import gaussian
        from heatobs.impulse_control import control_sobolev_norm, feedback_gain
        from heatobs.util import PreconditionError
        v = feedback_gain(gaussian(1), 2.)
        report = control_sobolev_norm(v, 1.)
        self.assertGreater(report.measured, 0.)
        self.assertFalse(report.asserted)
        # H^{-s} norms decrease in s
        self.assertLess(control_sobolev_norm(v, 2.).measured, report.measured)
        with self.assertRaises(PreconditionError):
            control_sobolev_norm(v, 0.5)

    def test_thresholds(self):
        from heatobs.impulse_control import ClosedLoopRun, comb_operator_bound, density_threshold, window_threshold
        from heatobs.gaussian_field import gaussian
        self.assertTrue(np.isclose(density_threshold(1., 1., 0.5, 0.1), np.sqrt(2 * (1 + np.log(10.)))))
        self.assertTrue(np.isclose(window_threshold(1., 1., 0.1, 1), 40.))
        self.assertGreater(comb_operator_bound(2., 0.5, 1), np.sqrt(2.))
        for eps in (0., 1.):
            with self.assertRaises(ValueError):
                density_threshold(1., 1., 0.5, eps)
        with self.assertRaises(ValueError):
            ClosedLoopRun(gaussian(1), 1., 1., 2.)
        with self.assertRaises(ValueError):
            ClosedLoopRun(gaussian(1), 1., 0.5, 2., r=0.)


class TestClosedLoop1d(ClosedLoopTestMixin, unittest.TestCase):
    dim = 1


class TestClosedLoop2d(ClosedLoopTestMixin, unittest.TestCase):
    dim = 2


if __name__ == '__main__':
    unittest.main()
