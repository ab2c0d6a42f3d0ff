import unittest

import numpy as np


class TestPerturbation(unittest.TestCase):

    def test_named_rules(self):
        from heatobs.perturbation import RULES, perturbed_points
        from heatobs.util import cube_members
        N, eps = 2., 0.3
        for dim in (1, 2, 3):
            members = cube_members(3, dim)
            for rule in RULES:
                points = perturbed_points(rule, members, N, eps, seed=7)
                self.assertEqual(points.shape, members.shape)
                deviation = np.linalg.norm(points - members / N, axis=1)
                self.assertTrue(np.all(deviation <= eps / N * (1 + 1e-12)))

    def test_identity_and_zero_eps(self):
        from heatobs.perturbation import perturbed_points
        from heatobs.util import cube_members
        members = cube_members(2, 2)
        self.assertTrue(np.allclose(perturbed_points('identity', members, 1.5, 0.5), members / 1.5))
        for rule in ('alternating', 'radial', 'seeded'):
            self.assertTrue(np.allclose(perturbed_points(rule, members, 1.5, 0.), members / 1.5))

    def test_alternating(self):
        from heatobs.perturbation import perturbed_points
        members = np.arange(-2, 3)[:, None]
        points = perturbed_points('alternating', members, 1., 0.25)
        self.assertTrue(np.allclose(points[:, 0], [-1.75, -1.25, 0.25, 0.75, 2.25]))

    def test_seeded(self):
        from heatobs.perturbation import perturbed_points
        from heatobs.util import cube_members
        members = cube_members(3, 2)
        a = perturbed_points('seeded', members, 1., 0.5, seed=1)
        b = perturbed_points('seeded', members, 1., 0.5, seed=1)
        c = perturbed_points('seeded', members, 1., 0.5, seed=2)
        self.assertTrue(np.array_equal(a, b))
        self.assertFalse(np.allclose(a, c))
        # the shift of an index does not depend on the other members
        sub = perturbed_points('seeded', members[:5], 1., 0.5, seed=1)
        self.assertTrue(np.array_equal(sub, a[:5]))

    def test_invalid(self):
        from heatobs.perturbation import perturbed_points
        from heatobs.util import PreconditionError, cube_members
        members = cube_members(2, 1)
        with self.assertRaises(ValueError):
            perturbed_points('alternating', members, 1., 1.)
        with self.assertRaises(ValueError):
            perturbed_points('unknown', members, 1., 0.1)

        def too_far(members, N, eps):
            return members / N + 2 * eps / N

        with self.assertRaises(PreconditionError):
            perturbed_points(too_far, members, 1., 0.1)


if __name__ == '__main__':
    unittest.main()
