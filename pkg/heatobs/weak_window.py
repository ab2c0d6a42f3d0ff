from dataclasses import dataclass
from math import factorial, floor

import numpy as np

from . import gaussian_field as gf
from . import sinc_basis as sb
from .observability import aliasing_residual, samples_residual
from .reports import make_report
from .util import PreconditionError, check_dimension

MAX_DERIVATIVE_ORDER = 4
MAX_WEIGHT_ORDER = 3
GROWTH_FUNCTIONS = ['constant', 'linear', 'quadratic', 'exp']


@dataclass
class WindowedExperiment:
    """ Reconstruction of u(T) from the samples in the window |n/N| < r.

    Arguments:
        u0 (GaussianMixtureField): initial field
        T (float): observation time
        N (float): lattice density
        r (float): window radius
        k (int): weight order of the initial field norm (default: 1)
    """
    u0: gf.GaussianMixtureField
    T: float
    N: float
    r: float
    k: int = 1

    def __post_init__(self):
        for name in ('T', 'N', 'r'):
            if not getattr(self, name) > 0:
                raise ValueError("Invalid %s = %s, expect a positive value" % (name, str(getattr(self, name))))
        if int(self.k) != self.k or self.k < 0:
            raise ValueError("Invalid weight order %s" % str(self.k))
        self.k = int(self.k)

    @property
    def dim(self):
        return self.u0.dim


def window_form(d, T, N, r, k, weighted_norm):
    """ Window bound with constant one; k = 1 is the finite moment case, other k the higher moment form.
    """
    TN2 = T * N ** 2
    if k == 1:
        window = (1. + T ** (d / 2.)) * (1. + T ** -0.5) / r
    else:
        window = (d ** (k / 2.) * 12. ** k * factorial(d + k) * (1. + r ** (-d) * T ** (d / 2.))
                  * (1. + T ** (-k / 2.)) * (1. + r) ** (-k))
    return (1. + TN2 ** (-d / 4.)) * (np.exp(-TN2) + window) * weighted_norm


def window_samples(u, N, r):
    """ Exact samples u(n/N) on the window {n : |n/N| < r}, nothing is omitted.
    """
    window = sb.ball_index_set(N, u.dim, r)
    values = gf.evaluate(u, window.positions) if len(window) else np.zeros(0)
    return sb.SampleVector(window, values)


def windowed_residual(exp, tol=1e-10, constant=None, bound=True):
    """ ||u(T) - sum_{|n/N| < r} u(T, n/N) f_{N,n}|| against the window bound.

    Arguments:
        exp (WindowedExperiment): the experiment
        tol (float): tolerance of the weighted norm quadrature (default: 1e-10)
        constant (float): calibrated constant (default: None)
        bound (bool): compute the bound, requires r >= 1 (default: True)
    Returns:
        BoundReport
    """
    if bound and exp.r < 1:
        raise PreconditionError("The window bound requires r >= 1, got r = %g" % exp.r)
    d, T, N = exp.dim, exp.T, exp.N
    u = gf.heat_evolve(exp.u0, T)
    res, extras = samples_residual(u, window_samples(u, N, exp.r))
    full, _ = aliasing_residual(u, N, None)
    extras.update(full_residual=full.value, window_size=extras.pop('max_index'),
                  window_excess=float(np.sqrt(max(res.value ** 2 - full.value ** 2, 0.))),
                  u_norm=gf.l2_norm(u))

    if bound:
        weighted = gf.weighted_l2_norm(exp.u0, exp.k, tol=tol)
        extras['weighted_norm'] = weighted.value
        form = window_form(d, T, N, exp.r, exp.k, weighted.value + weighted.certificate)
    else:
        form, constant = None, None
    params = dict(d=d, T=T, N=N, r=exp.r, k=exp.k, policy='window')
    return make_report('windowed_residual', res.value, res.certificate, form, constant=constant,
                       asserted=constant is not None and bound, parameters=params, backbone='samples',
                       extras=extras)


def moment_form(d, T, order, k, weighted_sq):
    return (2 * d) ** (k + 1) * (6 ** k * factorial(order + k)) ** 2 * (1. + T) ** k * T ** (-order) * weighted_sq


def moment_growth_check(u0, T, alpha, k, tol=1e-10):
    """ Weighted derivative moment int (1 + |x|)^{2k} |D^alpha u(T)|^2 against its explicit bound.

    The bound (2d)^{k+1} (6^k (|alpha| + k)!)^2 (1 + T)^k T^{-|alpha|} int (1 + |x|)^{2k} |u0|^2
    has no unknown constant and is always asserted.
    """
    if not T > 0:
        raise ValueError("Invalid time %s" % str(T))
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != u0.dim or min(alpha) < 0:
        raise ValueError("Invalid multi-index %s for dimension %i" % (str(alpha), u0.dim))
    order = sum(alpha)
    if order > MAX_DERIVATIVE_ORDER or not 0 <= k <= MAX_WEIGHT_ORDER:
        raise PreconditionError("Derivative order %i and weight order %i exceed %i and %i"
                                % (order, k, MAX_DERIVATIVE_ORDER, MAX_WEIGHT_ORDER))
    d = u0.dim
    measured = gf.derivative_moment(gf.heat_evolve(u0, T), alpha, k, tol=tol)
    weighted = gf.weighted_l2_norm(u0, k, tol=tol)
    # lower end of the weighted norm keeps the bound on the safe side
    lower = max(weighted.value - weighted.certificate, 0.)
    form = moment_form(d, T, order, k, lower ** 2)
    params = dict(d=d, T=T, k=k, alpha=alpha)
    return make_report('moment_growth', measured.value, measured.certificate, form, constant=1.,
                       parameters=params, backbone='gaussian')


#
# counterexample to a uniform finite window
#


def _constant(N):
    return 1.


def _linear(N):
    return float(N)


def _quadratic(N):
    return float(N) ** 2


def _exp(N):
    return float(np.exp(N))


def get_growth(growth):
    """ Growth function G of the counterexample: a name in GROWTH_FUNCTIONS or a callable.
    """
    if callable(growth):
        return growth
    if growth == 'constant':
        return _constant
    elif growth == 'linear':
        return _linear
    elif growth == 'quadratic':
        return _quadratic
    elif growth == 'exp':
        return _exp
    raise ValueError("Growth function %s is not supported, expect one of %s or a callable"
                     % (str(growth), GROWTH_FUNCTIONS))


def _growth_name(growth):
    return growth if isinstance(growth, str) else getattr(growth, '__name__', 'custom')


def counterexample_shift(d, T, N, G):
    """ L_N = G(N)/N + sqrt(2 (T + 1) [(2 (G(N) + 1))^d + 2 N^{-d/2} + ln 4^{1 + d/4}]).
    """
    g = get_growth(G)(N)
    if not g > 0:
        raise ValueError("Growth function returned %s, expect a positive value" % str(g))
    return g / N + np.sqrt(2 * (T + 1) * ((2 * (g + 1)) ** d + 2 * N ** (-d / 2.) + (1 + d / 4.) * np.log(4.)))


def counterexample_field(T, N, G, dim=1):
    """ u_N(0) = term(1, (L_N, 0, ..., 0), 1), a unit width Gaussian far outside the window |n| <= G(N).
    """
    d = check_dimension(dim)
    if not T > 0 or not N > 0:
        raise ValueError("Invalid time %s or density %s" % (str(T), str(N)))
    center = np.zeros(d)
    center[0] = counterexample_shift(d, T, N, G)
    return gf.gaussian(d, 1., center, 1.)


def counterexample_gap(T, N, G, dim=1):
    """ Lower bound on the reconstruction error from the samples in the window |n| <= G(N).

    Asserts ||u_N(T) - sum_{|n| <= G(N)} u_N(T, n/N) f_{N,n}|| >= (1/2) (8 pi)^{-d/4} (T + 1)^{-d/4}
    and that the window sum has norm at most this value.
    """
    d = check_dimension(dim)
    growth = get_growth(G)
    g = growth(N)
    u0 = counterexample_field(T, N, growth, d)
    u = gf.heat_evolve(u0, T)

    cube = sb.cube_index_set(N, d, int(floor(g)))
    inside = (cube.members.astype('float64') ** 2).sum(axis=1) <= g ** 2
    values = np.where(inside, gf.evaluate(u, cube.positions), 0.)
    samples = sb.SampleVector(cube, values)
    res, extras = samples_residual(u, samples)

    half = 0.5 * (8 * np.pi) ** (-d / 4.) * (T + 1) ** (-d / 4.)
    window_norm = sb.synthesize(N, samples).norm().value
    extras.update(u0_norm=gf.l2_norm(u0), uT_norm=gf.l2_norm(u), window_sum_norm=window_norm,
                  window_ok=bool(window_norm <= half), L=float(u0.centers[0, 0]), growth_value=g,
                  window_size=int(inside.sum()))
    extras.pop('max_index')
    params = dict(d=d, T=T, N=N, G=_growth_name(G), policy='window')
    return make_report('counterexample', res.value, res.certificate, half, constant=1., direction='lower',
                       parameters=params, backbone='samples', extras=extras)

