from functools import partial

import numpy as np

from .util import PreconditionError

RULES = ['identity', 'alternating', 'radial', 'seeded']
# keeps the per-index seed entropy nonnegative
SEED_OFFSET = 2 ** 20


def _identity(members, N, eps):
    return members / N


def _alternating(members, N, eps):
    # lambda_n = n/N + (-1)^{n_1} eps/N e_1
    points = members / N
    points[:, 0] += np.where(members[:, 0] % 2 == 0, 1., -1.) * eps / N
    return points


def _radial(members, N, eps):
    norms = np.linalg.norm(members, axis=1)
    direction = np.divide(members, norms[:, None], out=np.zeros(members.shape), where=norms[:, None] > 0)
    return members / N + eps / N * direction


def _seeded(members, N, eps, seed=0):
    # one generator per index, so the shift of n does not depend on the index set
    dim = members.shape[1]
    shifts = np.zeros(members.shape)
    for i, n in enumerate(members):
        rng = np.random.default_rng([int(seed)] + [int(v) + SEED_OFFSET for v in n])
        direction = rng.standard_normal(dim)
        direction /= max(np.linalg.norm(direction), 1e-300)
        shifts[i] = direction * rng.uniform() ** (1. / dim)
    return members / N + eps / N * shifts


def get_rule(rule, seed=0):
    """ Return the perturbation function (members, N, eps) -> points of a named rule or a callable.
    """
    if callable(rule):
        return rule
    if rule == 'identity':
        return _identity
    elif rule == 'alternating':
        return _alternating
    elif rule == 'radial':
        return _radial
    elif rule == 'seeded':
        return partial(_seeded, seed=seed)
    raise ValueError("Perturbation rule %s is not supported, expect one of %s or a callable" % (str(rule), RULES))


def rule_name(rule):
    return rule if isinstance(rule, str) else getattr(rule, '__name__', 'custom')


def perturbed_points(rule, members, N, eps, seed=0):
    """ Perturbed lattice points lambda_n, checked against sup_n |lambda_n - n/N| <= eps/N.

    Arguments:
        rule (str or callable): rule name or function (members, N, eps) -> points
        members (np.ndarray): lattice indices, shape (n_points, dim)
        N (float): lattice density
        eps (float): perturbation size in [0, 1)
        seed (int): seed of the 'seeded' rule (default: 0)
    """
    if not 0 <= eps < 1:
        raise ValueError("Invalid perturbation size %s, expect 0 <= eps < 1" % str(eps))
    members = np.asarray(members, dtype='float64')
    if members.ndim == 1:
        members = members[:, None]
    points = np.asarray(get_rule(rule, seed)(members.astype(int).astype('float64'), N, eps), dtype='float64')
    if points.shape != members.shape:
        raise ValueError("Rule returned points of shape %s for %s members" % (str(points.shape), str(members.shape)))
    deviation = np.linalg.norm(points - members / N, axis=1).max(initial=0.)
    if deviation > eps / N * (1 + 1e-12):
        raise PreconditionError("Rule %s moves a point by %g, more than eps/N = %g" % (rule_name(rule), deviation,
                                                                                       eps / N))
    return points
