from functools import lru_cache
from itertools import product
from math import factorial

import numpy as np
import sympy

from .util import as_points, check_dimension, outer

MAX_ORDER = 8
# distance to the transition ends below which the limits 1 and 0 are used
CLIP_MARGIN = 0.005


@lru_cache(maxsize=None)
def _transition_derivative(order, upper):
    """ Numpy function of the order-th derivative of the transition on 1 < t < 2.

    The transition h(2 - t) / (h(2 - t) + h(t - 1)) with h(u) = exp(-1/u) equals 1 / (1 + e^v)
    for v = 1 / (2 - t) - 1 / (t - 1). On the upper half, where v > 0, the equal form
    e^{-v} / (1 + e^{-v}) is differentiated so that no exponential overflows.
    """
    t = sympy.Symbol('t', real=True)
    v = 1 / (2 - t) - 1 / (t - 1)
    expr = sympy.exp(-v) / (1 + sympy.exp(-v)) if upper else 1 / (1 + sympy.exp(v))
    return sympy.lambdify(t, sympy.diff(expr, t, order), modules='numpy')


def _check_order(order):
    if int(order) != order or not 0 <= order <= MAX_ORDER:
        raise ValueError("Invalid derivative order %s, expect 0 to %i" % (str(order), MAX_ORDER))
    return int(order)


def bump_1d(t, order=0):
    """ order-th derivative of the even 1d cutoff, equal to 1 on [-1, 1] and 0 off (-2, 2).
    """
    order = _check_order(order)
    t = np.asarray(t, dtype='float64')
    a = np.abs(t)
    out = np.zeros_like(a)
    if order == 0:
        out[a <= 1 + CLIP_MARGIN] = 1.
    for upper, part in ((False, (a > 1 + CLIP_MARGIN) & (a <= 1.5)),
                        (True, (a > 1.5) & (a < 2 - CLIP_MARGIN))):
        if not np.any(part):
            continue
        values = np.broadcast_to(_transition_derivative(order, upper)(a[part]), a[part].shape)
        # phi^(k)(-t) = (-1)^k phi^(k)(t)
        out[part] = np.where(t[part] < 0, (-1.) ** order, 1.) * values
    return out


def bump(x, dim, alpha=None):
    """ Tensor cutoff phi(x) = prod_j phi_1(x_j) or its derivative D^alpha phi.
    """
    pts, single = as_points(x, dim)
    alpha = (0,) * dim if alpha is None else tuple(int(a) for a in alpha)
    if len(alpha) != dim:
        raise ValueError("Invalid multi-index %s for dimension %i" % (str(alpha), dim))
    out = np.ones(len(pts))
    for j, a in enumerate(alpha):
        out = out * bump_1d(pts[:, j], a)
    return out[0] if single else out


def bump_on_axes(axes, alpha=None):
    alpha = (0,) * len(axes) if alpha is None else alpha
    return outer([bump_1d(ax, a) for ax, a in zip(axes, alpha)])


def bessel_power_terms(m, dim):
    """ Expansion (1 - Laplace)^m = sum_beta c_beta D^{2 beta} as a list of (c_beta, 2 beta).
    """
    check_dimension(dim)
    terms = []
    for beta in product(range(m + 1), repeat=dim):
        k = sum(beta)
        if k > m:
            continue
        coef = factorial(m) // (factorial(m - k) * int(np.prod([factorial(b) for b in beta])))
        terms.append(((-1) ** k * coef, tuple(2 * b for b in beta)))
    return terms


def bessel_power_on_axes(m, axes):
    """ (1 - Laplace)^m phi on the tensor grid spanned by axes.
    """
    if 2 * m > MAX_ORDER:
        raise ValueError("(1 - Laplace)^%i needs derivatives above order %i" % (m, MAX_ORDER))
    total = 0.
    for coef, alpha in bessel_power_terms(m, len(axes)):
        total = total + coef * bump_on_axes(axes, alpha)
    return total
