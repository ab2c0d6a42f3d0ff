from dataclasses import dataclass
from math import ceil

import numpy as np
from scipy.special import comb, erfc, gammaln, wofz
from numpy.polynomial.hermite import hermval

from .util import (Certified, MIN_WIDTH, as_points, blocking, check_dimension,
                   gauss_legendre_axis, outer, product_excess, refine_until, sqrt_interval)

# max |H_n(y)| e^{-y^2/2} / sqrt(2^n n!) over all n and y
CRAMER_CONSTANT = 1.086435
EVAL_BLOCK = 2 ** 21


@dataclass(frozen=True)
class GaussianTerm:
    """ x -> amplitude * (4 pi width)^{-d/2} exp(-|x - center|^2 / (4 width))
    """
    amplitude: float
    center: tuple
    width: float

    def __post_init__(self):
        object.__setattr__(self, 'amplitude', float(self.amplitude))
        object.__setattr__(self, 'center',
                           tuple(float(c) for c in np.atleast_1d(np.asarray(self.center, dtype='float64'))))
        object.__setattr__(self, 'width', float(self.width))
        if not self.width >= MIN_WIDTH:
            raise ValueError("Invalid width %s, expect at least %g" % (str(self.width), MIN_WIDTH))

    @property
    def dim(self):
        return len(self.center)


class GaussianMixtureField:
    """ Finite sum of isotropic Gaussian terms in dimension 1, 2 or 3.

    Arguments:
        dim (int): spatial dimension
        terms (iterable[GaussianTerm]): the terms
    """
    def __init__(self, dim, terms=()):
        self._dim = check_dimension(dim)
        terms = tuple(terms)
        for term in terms:
            if term.dim != self._dim:
                raise ValueError("Term of dimension %i in mixture of dimension %i" % (term.dim, self._dim))
        self._terms = terms
        self._amplitudes = np.array([term.amplitude for term in terms], dtype='float64')
        self._centers = np.array([term.center for term in terms], dtype='float64').reshape(len(terms), self._dim)
        self._widths = np.array([term.width for term in terms], dtype='float64')
        for arr in (self._amplitudes, self._centers, self._widths):
            arr.setflags(write=False)

    @classmethod
    def from_arrays(cls, dim, amplitudes, centers, widths):
        amplitudes = np.broadcast_to(np.asarray(amplitudes, dtype='float64'), (len(centers),))
        widths = np.broadcast_to(np.asarray(widths, dtype='float64'), (len(centers),))
        return cls(dim, [GaussianTerm(a, c, s) for a, c, s in zip(amplitudes, centers, widths)])

    @property
    def dim(self):
        return self._dim

    @property
    def terms(self):
        return self._terms

    @property
    def amplitudes(self):
        return self._amplitudes

    @property
    def centers(self):
        return self._centers

    @property
    def widths(self):
        return self._widths

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __eq__(self, other):
        if not isinstance(other, GaussianMixtureField):
            return NotImplemented
        return self._dim == other._dim and self._terms == other._terms

    def __hash__(self):
        return hash((self._dim, self._terms))

    def __add__(self, other):
        if other.dim != self._dim:
            raise ValueError("Dimension mismatch: %i, %i" % (self._dim, other.dim))
        return GaussianMixtureField(self._dim, self._terms + other.terms)

    def __repr__(self):
        return "GaussianMixtureField(dim=%i, n_terms=%i)" % (self._dim, len(self))

    def scaled(self, factor):
        return GaussianMixtureField(self._dim, [GaussianTerm(factor * t.amplitude, t.center, t.width)
                                                for t in self._terms])


def gaussian(dim, amplitude=1., center=None, width=1.):
    """ Single term mixture, centered at the origin by default.
    """
    center = np.zeros(dim) if center is None else center
    return GaussianMixtureField(dim, [GaussianTerm(amplitude, center, width)])


def random_mixture(dim, rng, n_terms=None):
    """ Mixture with 1 to 3 terms drawn from a seeded generator.

    Amplitudes have modulus in [0.5, 1.5] and random sign, centers lie in [-2, 2]^d
    and widths in [0.1, 2].
    """
    n_terms = int(rng.integers(1, 4)) if n_terms is None else int(n_terms)
    amplitudes = rng.choice([-1., 1.], size=n_terms) * rng.uniform(0.5, 1.5, size=n_terms)
    centers = rng.uniform(-2., 2., size=(n_terms, dim))
    widths = rng.uniform(0.1, 2., size=n_terms)
    return GaussianMixtureField.from_arrays(dim, amplitudes, centers, widths)


def _check_same_dim(f, g):
    if f.dim != g.dim:
        raise ValueError("Dimension mismatch: %i, %i" % (f.dim, g.dim))


#
# point values and derivatives
#


def evaluate(mix, x):
    """ Evaluate the mixture at one point or an array of points.
    """
    pts, single = as_points(x, mix.dim)
    out = np.zeros(len(pts))
    if len(mix):
        pref = mix.amplitudes * (4 * np.pi * mix.widths) ** (-mix.dim / 2.)
        for bb in blocking(len(pts), EVAL_BLOCK // (len(mix) * mix.dim)):
            sq = ((pts[bb, None, :] - mix.centers[None]) ** 2).sum(axis=-1)
            out[bb] = (pref * np.exp(-sq / (4 * mix.widths))).sum(axis=-1)
    return out[0] if single else out


def _hermite_factor(y, order):
    # d^m/dy^m exp(-y^2) = (-1)^m H_m(y) exp(-y^2)
    coef = np.zeros(order + 1)
    coef[-1] = 1.
    return (-1) ** order * hermval(y, coef) * np.exp(-y ** 2)


def evaluate_derivative(mix, x, alpha):
    """ Evaluate the partial derivative D^alpha of the mixture.

    Arguments:
        mix (GaussianMixtureField): the field
        x (np.ndarray): point or points
        alpha (tuple[int]): multi-index of length dim
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != mix.dim or min(alpha) < 0:
        raise ValueError("Invalid multi-index %s for dimension %i" % (str(alpha), mix.dim))
    pts, single = as_points(x, mix.dim)
    out = np.zeros(len(pts))
    for term in mix:
        rs = 2 * np.sqrt(term.width)
        val = term.amplitude * (4 * np.pi * term.width) ** (-mix.dim / 2.)
        for axis, order in enumerate(alpha):
            y = (pts[:, axis] - term.center[axis]) / rs
            val = val * _hermite_factor(y, order) * rs ** (-order)
        out += val
    return out[0] if single else out


def evaluate_gradient(mix, x):
    """ Gradient of the mixture, shape (n_points, dim).
    """
    pts, single = as_points(x, mix.dim)
    grad = np.stack([evaluate_derivative(mix, pts, tuple(int(i == j) for i in range(mix.dim)))
                     for j in range(mix.dim)], axis=-1)
    return grad[0] if single else grad


def _gradient_profile(y):
    # sup over |x - c|^2 = 2 w y of |grad term| in units of |a| (4 pi w)^{-d/2} / sqrt(2 w)
    return np.sqrt(y) * np.exp(-y / 2.)


def _hessian_profile(y):
    # the same for the spectral norm of the Hessian, in units of |a| (4 pi w)^{-d/2} / (2 w)
    return np.maximum(1., y - 1.) * np.exp(-y / 2.)


def box_envelope(mix, lo, hi, order=1):
    """ Upper bound on sup |grad f| (order 1) or on the sup of the Hessian norm (order 2) over boxes.

    Arguments:
        mix (GaussianMixtureField): the field
        lo (np.ndarray): lower box corners, shape (n_boxes, dim)
        hi (np.ndarray): upper box corners, shape (n_boxes, dim)
        order (int): 1 or 2 (default: 1)
    Returns:
        np.ndarray: one bound per box
    """
    if order not in (1, 2):
        raise ValueError("Invalid envelope order %s, expect 1 or 2" % str(order))
    lo, hi = np.atleast_2d(lo), np.atleast_2d(hi)
    out = np.zeros(len(lo))
    for term in mix:
        c, w = term.center, term.width
        near = np.maximum(np.maximum(lo - c, c - hi), 0.)
        far = np.maximum(np.abs(lo - c), np.abs(hi - c))
        y_min = (near ** 2).sum(axis=1) / (2 * w)
        y_max = (far ** 2).sum(axis=1) / (2 * w)
        pref = abs(term.amplitude) * (4 * np.pi * w) ** (-mix.dim / 2.)
        if order == 1:
            # the profile peaks at y = 1
            out += pref / np.sqrt(2 * w) * _gradient_profile(np.clip(1., y_min, y_max))
        else:
            # decreasing on [0, 2], increasing on [2, 3], decreasing beyond
            peak = _hessian_profile(np.clip(3., y_min, y_max))
            out += pref / (2 * w) * np.maximum(_hessian_profile(y_min), peak)
    return out


#
# heat flow and rescaling
#


def heat_evolve(mix, t):
    """ Apply the heat semigroup e^{t Laplace}: every width s becomes s + t.
    """
    if t < 0:
        raise ValueError("Invalid time %s, backward heat flow is not supported" % str(t))
    if t == 0:
        return mix
    return GaussianMixtureField(mix.dim, [GaussianTerm(term.amplitude, term.center, term.width + t)
                                          for term in mix])


def dilate(mix, lam):
    """ Return the field x -> mix(lam * x).
    """
    if not lam > 0:
        raise ValueError("Invalid dilation factor %s" % str(lam))
    d = mix.dim
    return GaussianMixtureField(d, [GaussianTerm(term.amplitude * lam ** (-d),
                                                 np.asarray(term.center) / lam,
                                                 term.width / lam ** 2) for term in mix])


#
# Fourier side
#


def fourier_at(mix, xi):
    """ Fourier transform (2 pi)^{-d/2} int f(x) e^{-i x.xi} dx at one or more frequencies.
    """
    pts, single = as_points(xi, mix.dim)
    out = np.zeros(len(pts), dtype='complex128')
    if len(mix):
        pref = mix.amplitudes * (2 * np.pi) ** (-mix.dim / 2.)
        for bb in blocking(len(pts), EVAL_BLOCK // (len(mix) * mix.dim)):
            phase = pts[bb] @ mix.centers.T
            sq = (pts[bb] ** 2).sum(axis=-1)[:, None]
            out[bb] = (pref * np.exp(-1j * phase - mix.widths * sq)).sum(axis=-1)
    return out[0] if single else out


_AXIS_LETTERS = 'abc'


def fourier_on_axes(mix, axes):
    """ Fourier transform on the tensor grid spanned by one node array per axis.
    """
    if len(axes) != mix.dim:
        raise ValueError("Expected %i axes, got %i" % (mix.dim, len(axes)))
    shape = tuple(len(ax) for ax in axes)
    if len(mix) == 0:
        return np.zeros(shape, dtype='complex128')
    factors = [np.exp(-1j * mix.centers[:, j, None] * ax[None] - mix.widths[:, None] * ax[None] ** 2)
               for j, ax in enumerate(axes)]
    letters = _AXIS_LETTERS[:mix.dim]
    expr = 't,' + ','.join('t' + a for a in letters) + '->' + letters
    pref = mix.amplitudes * (2 * np.pi) ** (-mix.dim / 2.)
    return np.einsum(expr, pref, *factors, optimize=True)


#
# inner products and norms
#


def inner_product(f, g):
    """ Exact L2 inner product of two mixtures.
    """
    _check_same_dim(f, g)
    if len(f) == 0 or len(g) == 0:
        return 0.
    sigma = f.widths[:, None] + g.widths[None, :]
    sq = ((f.centers[:, None, :] - g.centers[None, :, :]) ** 2).sum(axis=-1)
    kernel = (4 * np.pi * sigma) ** (-f.dim / 2.) * np.exp(-sq / (4 * sigma))
    return float(f.amplitudes @ kernel @ g.amplitudes)


def l2_norm(mix):
    return float(np.sqrt(max(inner_product(mix, mix), 0.)))


def _outside_box_probability(centers, var, lo, hi):
    # P(X outside [lo, hi]) for X ~ N(center, var I), per row of centers
    sd = np.sqrt(2 * np.asarray(var))[..., None]
    q = 0.5 * erfc((hi - centers) / sd) + 0.5 * erfc((centers - lo) / sd)
    q = np.clip(q, 0., 1.)
    with np.errstate(divide='ignore'):
        return -np.expm1(np.log1p(-q).sum(axis=-1))


def _moment_bound(shift, var, dim, power):
    # upper bound on E (shift + |Z|)^power for Z ~ N(0, var I_dim)
    shift = np.atleast_1d(np.asarray(shift, dtype='float64'))
    var = np.broadcast_to(np.asarray(var, dtype='float64'), shift.shape)
    j = np.arange(power + 1)
    abs_moment = np.exp(0.5 * j[None] * np.log(2 * var[:, None])
                        + gammaln((dim + j[None]) / 2.) - gammaln(dim / 2.))
    terms = comb(power, j)[None] * shift[:, None] ** (power - j[None]) * abs_moment
    return terms.sum(axis=-1)


def _term_tails(amplitudes, centers, var, mass, lo, hi, k):
    # per term bound on (int_{outside box} (1 + |x|)^{2k} a^2 mass phi_{c, var}(x) dx)^{1/2}
    dim = centers.shape[1]
    var = np.broadcast_to(np.asarray(var, dtype='float64'), amplitudes.shape)
    p_out = _outside_box_probability(centers, var, lo, hi)
    if k <= 0:
        factor = p_out
    else:
        shift = 1. + np.linalg.norm(centers, axis=1)
        factor = np.sqrt(p_out) * np.sqrt(_moment_bound(shift, var, dim, 4 * k))
    return np.abs(amplitudes) * np.sqrt(mass * factor)


def tail_l2_outside_cube(mix, halfwidth, domain='spatial'):
    """ Upper bound on the L2 mass outside the centered cube [-halfwidth, halfwidth]^d.

    Exact for a single term, triangle inequality across terms.

    Arguments:
        mix (GaussianMixtureField): the field
        halfwidth (float): cube halfwidth
        domain (str): 'spatial' or 'fourier' (default: 'spatial')
    """
    if not halfwidth > 0:
        raise ValueError("Invalid halfwidth %s" % str(halfwidth))
    if len(mix) == 0:
        return 0.
    d = mix.dim
    lo, hi = -halfwidth * np.ones(d), halfwidth * np.ones(d)
    mass = (8 * np.pi * mix.widths) ** (-d / 2.)
    if domain == 'spatial':
        tails = _term_tails(mix.amplitudes, mix.centers, mix.widths, mass, lo, hi, 0)
    elif domain == 'fourier':
        tails = _term_tails(mix.amplitudes, np.zeros_like(mix.centers), 1. / (4 * mix.widths), mass, lo, hi, 0)
    else:
        raise ValueError("Invalid domain %s, expect 'spatial' or 'fourier'" % domain)
    return float(tails.sum())


def fourier_weighted_tail(mix, halfwidth, sigma=0.):
    """ Upper bound on (int_{outside cube} (1 + |xi|^2)^sigma |f^(xi)|^2 dxi)^{1/2}.
    """
    if len(mix) == 0:
        return 0.
    tail = tail_l2_outside_cube(mix, halfwidth, domain='fourier')
    if sigma <= 0:
        return float((1. + halfwidth ** 2) ** (sigma / 2.) * tail)
    d = mix.dim
    var = 1. / (4 * mix.widths)
    lo, hi = -halfwidth * np.ones(d), halfwidth * np.ones(d)
    p_out = _outside_box_probability(np.zeros_like(mix.centers), var, lo, hi)
    moments = _moment_bound(np.ones(len(mix)), var, d, int(ceil(4 * sigma)))
    mass = (8 * np.pi * mix.widths) ** (-d / 2.)
    return float((np.abs(mix.amplitudes) * np.sqrt(mass * np.sqrt(p_out * moments))).sum())


def gaussian_multiplier_tail(t, halfwidth, dim, power=2):
    """ int_{outside the cube Q_halfwidth} exp(-power t |xi|^2) dxi.
    """
    a = power * t
    p_out = _outside_box_probability(np.zeros((1, dim)), [1. / (2 * a)],
                                     -halfwidth * np.ones(dim), halfwidth * np.ones(dim))[0]
    return float((np.pi / a) ** (dim / 2.) * p_out)


def fourier_l1_tail(mix, halfwidth, sigma=0.):
    """ Upper bound on int_{outside cube} (1 + |xi|^2)^{sigma/2} |f^(xi)| dxi.
    """
    if len(mix) == 0:
        return 0.
    d = mix.dim
    var = 1. / (2 * mix.widths)
    lo, hi = -halfwidth * np.ones(d), halfwidth * np.ones(d)
    p_out = _outside_box_probability(np.zeros_like(mix.centers), var, lo, hi)
    mass = (2 * np.pi) ** (-d / 2.) * (np.pi / mix.widths) ** (d / 2.)
    if sigma <= 0:
        factor = (1. + halfwidth ** 2) ** (sigma / 2.) * p_out
    else:
        factor = np.sqrt(p_out * _moment_bound(np.ones(len(mix)), var, d, int(ceil(2 * sigma))))
    return float((np.abs(mix.amplitudes) * mass * factor).sum())


#
# exact band energies and low-pass values
#


def _interval_full(sigma, y):
    # int_R exp(-sigma xi^2) cos(y xi) dxi
    return np.sqrt(np.pi / sigma) * np.exp(-y ** 2 / (4 * sigma))


def _interval_outside(sigma, y, h):
    # int_{|xi| > h} exp(-sigma xi^2) cos(y xi) dxi, via the Faddeeva function
    if np.isinf(h):
        return np.zeros(np.broadcast(sigma, y).shape)
    rs = np.sqrt(sigma)
    z = 1j * rs * h + y / (2 * rs)
    return np.sqrt(np.pi / sigma) * np.real(np.exp(-sigma * h ** 2 + 1j * h * y) * wofz(z))


def _interval_inside(sigma, y, h):
    return _interval_full(sigma, y) - _interval_outside(sigma, y, h)


def band_energy(mix, inner=0., outer=np.inf):
    """ Exact energy int |f^(xi)|^2 over the cube shell Q_outer minus Q_inner.

    Arguments:
        mix (GaussianMixtureField): the field
        inner (float): halfwidth of the excluded inner cube (default: 0)
        outer (float): halfwidth of the outer cube (default: inf)
    """
    if not 0 <= inner <= outer:
        raise ValueError("Invalid cube shell %s, %s" % (str(inner), str(outer)))
    if len(mix) == 0 or inner == outer:
        return 0.
    sigma = mix.widths[:, None] + mix.widths[None, :]
    bases, extras = [], []
    for j in range(mix.dim):
        y = mix.centers[None, :, j] - mix.centers[:, None, j]
        out_inner = _interval_full(sigma, y) if inner == 0 else _interval_outside(sigma, y, inner)
        bases.append(_interval_inside(sigma, y, inner) if inner > 0 else np.zeros_like(sigma))
        extras.append(out_inner - _interval_outside(sigma, y, outer))
    pair = product_excess(bases, extras)
    energy = (2 * np.pi) ** (-mix.dim) * (mix.amplitudes @ pair @ mix.amplitudes)
    return float(max(energy, 0.))


def lowpass_values(mix, N, x):
    """ Point values of chi_{<=N}(D) mix, the projection onto Fourier support Q_{pi N}.
    """
    pts, single = as_points(x, mix.dim)
    out = np.zeros(len(pts))
    h = np.pi * N
    for term in mix:
        val = term.amplitude * (2 * np.pi) ** (-mix.dim) * np.ones(len(pts))
        for axis in range(mix.dim):
            val = val * _interval_inside(term.width, pts[:, axis] - term.center[axis], h)
        out += val
    return out[0] if single else out


def _alias_count(width, N):
    # shifts m with exp(-width (pi N (2m - 1))^2) above double underflow
    return int(ceil(0.5 * (np.sqrt(745. / width) / (np.pi * N) + 1))) + 1


def aliasing_on_axes(mix, N, axes, band=None):
    """ The in-band defect -sum_{k != 0} f^(xi + 2 pi N k) on the tensor grid of axes.

    By Poisson summation this equals f^ minus the Fourier transform of the full
    lattice sinc series sum_n f(n/N) f_{N,n} on Q_{pi N}. If band is given the
    field is replaced by its low-pass part chi_{<=band}(D) mix.
    """
    shape = tuple(len(ax) for ax in axes)
    result = np.zeros(shape, dtype='complex128')
    period = 2 * np.pi * N

    def _factor(xi, c, s):
        val = np.exp(-1j * c * xi - s * xi ** 2)
        if band is not None:
            val = np.where(np.abs(xi) <= np.pi * band, val, 0.)
        return val

    for term in mix:
        n_alias = _alias_count(term.width, N)
        bases, extras = [], []
        for axis, xi in enumerate(axes):
            c = term.center[axis]
            bases.append(_factor(xi, c, term.width))
            ext = np.zeros(len(xi), dtype='complex128')
            for m in range(1, n_alias + 1):
                ext += _factor(xi + m * period, c, term.width) + _factor(xi - m * period, c, term.width)
            extras.append(ext)
        result -= term.amplitude * (2 * np.pi) ** (-mix.dim / 2.) * product_excess(bases, extras, tensor=True)
    return result


#
# lattice tails
#


def _axis_lattice_sums(center, q, N, max_index, slack):
    # in-cube sum and certified outside sum of exp(-((|n/N - c| - slack)_+)^2 / q)
    n = np.arange(-max_index, max_index + 1)
    dist = np.maximum(np.abs(n / N - center) - slack, 0.)
    inside = np.exp(-dist ** 2 / q).sum()
    total_bound = 2 * slack * N + 2 + N * np.sqrt(np.pi * q)
    outside = 0.
    for c in (center, -center):
        u = (max_index + 1) / N - c - slack
        if u >= 0:
            outside += np.exp(-u ** 2 / q) + N * np.sqrt(np.pi * q) / 2 * erfc(u / np.sqrt(q))
        else:
            outside += total_bound
    return inside, outside


def separable_lattice_tail(prefactors, centers, q, N, max_index, slack=0.):
    """ Bound on the l2 norm over n outside the cube |n_j| <= max_index of
    sum_j prefactors_j prod_k exp(-((|n_k/N - c_jk| - slack)_+)^2 / (2 q_j)).
    """
    tail = 0.
    for pref, center, qq in zip(prefactors, centers, q):
        if pref == 0:
            continue
        sums = [_axis_lattice_sums(c, qq, N, max_index, slack) for c in center]
        excess = product_excess([s[0] for s in sums], [s[1] for s in sums])
        tail += abs(pref) * np.sqrt(max(excess, 0.))
    return float(tail)


def lattice_tail(mix, N, max_index, slack=0.):
    """ Certified l2 bound of the samples mix(x_n) omitted by the cube |n_j| <= max_index.

    The sample points x_n may deviate from n/N by at most slack in every coordinate.
    """
    if len(mix) == 0:
        return 0.
    pref = mix.amplitudes * (4 * np.pi * mix.widths) ** (-mix.dim / 2.)
    return separable_lattice_tail(pref, mix.centers, 2 * mix.widths, N, max_index, slack)


def aliased_sample_bound(mix, band, N):
    """ Bound on the l2 norm of all samples at n/N of the high-band part chi_{>band}(D) mix.
    """
    if len(mix) == 0:
        return 0.
    d = mix.dim
    total = 0.
    for term in mix:
        # Fourier modulus is a centered normal density with variance 1 / (4 s)
        scale = np.sqrt(2 * term.width)
        mass = (8 * np.pi * term.width) ** (-d / 2.)
        edge = lambda m: erfc((2 * m - 1) * np.pi * N * scale)
        center_cell = 1. - erfc(np.pi * N * scale)
        side = 0.
        m = 1
        while True:
            p = 0.5 * (edge(m) - edge(m + 1))
            if p <= 0 or m > 10000:
                break
            side += 2 * np.sqrt(p)
            m += 1
        outer_cells = product_excess([np.sqrt(center_cell)] * d, [side] * d)
        if N > band:
            p_out = float(_outside_box_probability(np.zeros((1, d)), [1. / (4 * term.width)],
                                                   -np.pi * band * np.ones(d), np.pi * band * np.ones(d))[0])
            outer_cells += np.sqrt(p_out)
        total += abs(term.amplitude) * np.sqrt(mass) * outer_cells
    return float(N ** (d / 2.) * total)


#
# spatial quadrature
#


def _spatial_integral(mix, integrand, tail_fn, tol, rtol, spread=1.):
    # in-box Gauss-Legendre quadrature of integrand(points), the box chosen so that tail_fn(lo, hi) <= tol / 4
    d = mix.dim
    s_max, s_min = spread * mix.widths.max(), spread * mix.widths.min()
    cmin, cmax = mix.centers.min(axis=0), mix.centers.max(axis=0)
    lam = 6.
    while True:
        lo, hi = cmin - lam * np.sqrt(s_max), cmax + lam * np.sqrt(s_max)
        tail = tail_fn(lo, hi)
        if tail <= tol / 4 or lam > 60:
            break
        lam *= 1.25
    n_panels = [max(4, int(ceil((h - l) / np.sqrt(s_min)))) for l, h in zip(lo, hi)]

    def task(level):
        rules = [gauss_legendre_axis(l, h, n * 2 ** level, 8) for l, h, n in zip(lo, hi, n_panels)]
        weights = outer([r[1] for r in rules]).ravel()
        grids = np.meshgrid(*[r[0] for r in rules], indexing='ij')
        pts = np.stack([g.ravel() for g in grids], axis=1)
        total = 0.
        for bb in blocking(len(pts), max(EVAL_BLOCK // max(len(mix) * d, 1), 1)):
            total += float(weights[bb] @ integrand(pts[bb]))
        return total

    value = refine_until(task, tol=tol * tol, rtol=rtol)
    return value, tail


def spatial_weighted_norm(mix, power, tol=1e-10, rtol=1e-10):
    """ (int (1 + |x|)^{2 power} |mix(x)|^2 dx)^{1/2} with certificate, power may be negative.
    """
    if len(mix) == 0:
        return Certified(0., 0.)
    d = mix.dim
    mass = (8 * np.pi * mix.widths) ** (-d / 2.)

    def integrand(pts):
        return (1. + np.linalg.norm(pts, axis=1)) ** (2 * power) * evaluate(mix, pts) ** 2

    def tail_fn(lo, hi):
        return float(_term_tails(mix.amplitudes, mix.centers, mix.widths, mass, lo, hi, max(power, 0)).sum())

    integral, tail = _spatial_integral(mix, integrand, tail_fn, tol, rtol)
    return sqrt_interval(integral.value, integral.certificate, tail ** 2)


def weighted_l2_norm(mix, k, tol=1e-10, rtol=1e-10):
    """ Weighted norm (int (1 + |x|)^{2k} |mix(x)|^2 dx)^{1/2} by adaptive spatial quadrature.

    Arguments:
        mix (GaussianMixtureField): the field
        k (int): weight order, nonnegative
        tol (float): absolute tolerance (default: 1e-10)
        rtol (float): relative tolerance of the squared integral (default: 1e-10)
    Returns:
        Certified: norm and error bound
    """
    if int(k) != k or k < 0:
        raise ValueError("Invalid weight order %s" % str(k))
    return spatial_weighted_norm(mix, int(k), tol=tol, rtol=rtol)


def derivative_moment(mix, alpha, k, tol=1e-10, rtol=1e-10):
    """ int (1 + |x|)^{2k} |D^alpha mix(x)|^2 dx with certificate.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(mix) == 0:
        return Certified(0., 0.)
    d = mix.dim
    order = sum(alpha)
    if order == 0:
        var, mass = mix.widths, (8 * np.pi * mix.widths) ** (-d / 2.)
    else:
        # |D^alpha G_s| <= K_alpha (4 pi s)^{-d/2} exp(-|x - c|^2 / (8 s))
        k_alpha = np.ones(len(mix))
        for a in alpha:
            if a > 0:
                k_alpha = k_alpha * CRAMER_CONSTANT * (2 * np.sqrt(mix.widths)) ** (-a) \
                    * np.sqrt(2. ** a * np.prod(np.arange(1, a + 1)))
        var = 2 * mix.widths
        mass = (k_alpha * (4 * np.pi * mix.widths) ** (-d / 2.)) ** 2 * (4 * np.pi * mix.widths) ** (d / 2.)

    def integrand(pts):
        return (1. + np.linalg.norm(pts, axis=1)) ** (2 * k) * evaluate_derivative(mix, pts, alpha) ** 2

    def tail_fn(lo, hi):
        return float(_term_tails(mix.amplitudes, mix.centers, var, mass, lo, hi, k).sum())

    integral, tail = _spatial_integral(mix, integrand, tail_fn, tol, rtol, spread=2. if order else 1.)
    return Certified(integral.value, integral.certificate + tail ** 2)


#
# text records
#


def to_text(mix):
    """ Plain record: dimension, then one line 'amplitude center... width' per term.
    """
    lines = ['%i' % mix.dim]
    for term in mix:
        values = (term.amplitude,) + term.center + (term.width,)
        lines.append(' '.join('%.17g' % v for v in values))
    return '\n'.join(lines) + '\n'


def from_text(text):
    lines = [line.strip() for line in text.splitlines()
             if line.strip() and not line.strip().startswith('#')]
    if not lines:
        raise ValueError("Empty mixture record")
    dim = check_dimension(int(lines[0]))
    terms = []
    for line in lines[1:]:
        values = [float(v) for v in line.split()]
        if len(values) != dim + 2:
            raise ValueError("Invalid term record '%s' for dimension %i" % (line, dim))
        terms.append(GaussianTerm(values[0], values[1:-1], values[-1]))
    return GaussianMixtureField(dim, terms)


def save_mixture(path, mix):
    with open(path, 'w') as f:
        f.write(to_text(mix))


def load_mixture(path):
    with open(path) as f:
        return from_text(f.read())
