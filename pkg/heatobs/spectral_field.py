import csv
import warnings
from functools import reduce
from math import ceil

import numpy as np

from . import gaussian_field as gf
from .util import (Certified, CertificationError, PreconditionError, as_points, check_dimension,
                   gauss_legendre_axis, outer, refine_until, tensor_apply)

__all__ = ['FrequencyGrid', 'SpectralGridField', 'default_grid', 'aligned_panels',
           'from_gaussian', 'from_symbol', 'apply_heat_multiplier', 'band_project',
           'band_factor', 'bessel_apply', 'derivative_apply', 'linear_combination', 'inner_product',
           'l2_norm', 'hs_norm', 'point_value', 'values_on_axes', 'lattice_values',
           'sample_tail', 'is_bandlimited', 'refined', 'regrid', 'oscillation_panels',
           'refine_until', 'to_csv', 'from_csv']

DEFAULT_ORDER = 8
DEFAULT_PANELS = 2


class FrequencyGrid:
    """ Tensor grid of composite Gauss-Legendre panels on [-Xi, Xi]^d.

    The panel breakpoints are the multiples of pi N / panels, the coverage is
    Xi = extent * pi * N. A band cube of halfwidth pi N' is a union of panels
    whenever N' * panels / N is an integer.

    Arguments:
        dim (int): dimension
        N (float): lattice density the grid is built for
        panels (int): number of panels per unit pi N (default: 2)
        order (int): Gauss-Legendre nodes per panel (default: 8)
        extent (int): coverage in units of pi N (default: 4)
    """
    def __init__(self, dim, N, panels=DEFAULT_PANELS, order=DEFAULT_ORDER, extent=4):
        self.dim = check_dimension(dim)
        if not N > 0:
            raise ValueError("Invalid density %s" % str(N))
        if int(panels) != panels or panels < 1:
            raise ValueError("Invalid number of panels %s" % str(panels))
        if int(extent) != extent or extent < 1:
            raise ValueError("Invalid extent %s" % str(extent))
        self.N = float(N)
        self.panels = int(panels)
        self.order = int(order)
        self.extent = int(extent)
        self.coverage = self.extent * np.pi * self.N
        nodes, weights = gauss_legendre_axis(-self.coverage, self.coverage,
                                             2 * self.extent * self.panels, self.order)
        # exact symmetry about the origin
        self.nodes = 0.5 * (nodes - nodes[::-1])
        self.weights = 0.5 * (weights + weights[::-1])

    @property
    def axes(self):
        return [self.nodes] * self.dim

    @property
    def shape(self):
        return (len(self.nodes),) * self.dim

    def __eq__(self, other):
        if not isinstance(other, FrequencyGrid):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.dim, self.N, self.panels, self.order, self.extent)

    def __repr__(self):
        return "FrequencyGrid(dim=%i, N=%g, panels=%i, order=%i, extent=%i)" % self._key()

    def refine(self, level=1):
        return FrequencyGrid(self.dim, self.N, self.panels * 2 ** level, self.order, self.extent)

    def weight_tensor(self):
        return outer([self.weights] * self.dim)

    def radius_sq(self):
        return reduce(np.add.outer, [ax ** 2 for ax in self.axes])

    def is_aligned(self, band):
        if band >= self.extent * self.N:
            return True
        ratio = band / self.N * self.panels
        return abs(ratio - round(ratio)) <= 1e-9 * max(ratio, 1.)

    def band_mask(self, band):
        """ Boolean mask of the nodes in the closed cube Q_{pi band}.
        """
        if not band > 0:
            raise ValueError("Invalid band %s" % str(band))
        if not self.is_aligned(band):
            raise PreconditionError("Band %g is not aligned with %r, regenerate the grid with panels from aligned_panels"
                                    % (band, self))
        axis_mask = (np.abs(self.nodes) <= np.pi * band).astype('float64')
        return outer([axis_mask] * self.dim) > 0


def default_grid(dim, N, T=None, panels=DEFAULT_PANELS, order=DEFAULT_ORDER, extent=None):
    """ Grid for density N; the coverage is chosen so that e^{-T Xi^2} is negligible.
    """
    if extent is None:
        extent = 4 if T is None else max(4, int(ceil(6. / np.sqrt(T * N ** 2))))
    return FrequencyGrid(dim, N, panels=panels, order=order, extent=extent)


def aligned_panels(N, bands, base=DEFAULT_PANELS, max_panels=512):
    """ Smallest multiple of base panels for which all bands are panel breakpoints.
    """
    panels = base
    while panels <= max_panels:
        ratios = [b / N * panels for b in bands]
        if all(abs(r - round(r)) <= 1e-9 * max(r, 1.) for r in ratios):
            return panels
        panels += base
    raise PreconditionError("Bands %s cannot be aligned with density %g" % (str(bands), N))


class SpectralGridField:
    """ Samples of a Fourier transform on a FrequencyGrid.

    Arguments:
        grid (FrequencyGrid): the grid
        coefficients (np.ndarray): values of f^ at the grid nodes
        tail_bound (float): certified L2 mass of f^ beyond the coverage, inf if uncertified
        l1_tail (float): certified L1 mass of f^ beyond the coverage, inf if uncertified
        symbol (callable): maps per-axis node arrays to coefficients, enables refinement
        source (GaussianMixtureField): Gaussian field the coefficients derive from
        sigma (float): the coefficients are bounded by (1 + |xi|^2)^{sigma/2} |source^|
        band_low (float): band of the low projection applied to the source, if any
        band_high (float): band of the high projection applied to the source, if any
        envelope (callable): (N, max_index, slack) -> l2 bound of omitted lattice samples
    """
    def __init__(self, grid, coefficients, tail_bound=0., l1_tail=None, symbol=None,
                 source=None, sigma=0., band_low=None, band_high=None, envelope=None):
        coefficients = np.asarray(coefficients, dtype='complex128')
        if coefficients.shape != grid.shape:
            raise ValueError("Coefficient shape %s does not match grid shape %s"
                             % (str(coefficients.shape), str(grid.shape)))
        if tail_bound < 0:
            raise ValueError("Invalid tail bound %s" % str(tail_bound))
        coefficients.setflags(write=False)
        self.grid = grid
        self.coefficients = coefficients
        self.tail_bound = float(tail_bound)
        self.l1_tail = float(np.inf if l1_tail is None else l1_tail)
        self.symbol = symbol
        self.source = source
        self.sigma = float(sigma)
        self.band_low = band_low
        self.band_high = band_high
        self.envelope = envelope

    @property
    def dim(self):
        return self.grid.dim

    @property
    def tail_certified(self):
        return bool(np.isfinite(self.tail_bound))

    def replace(self, **changes):
        kwargs = dict(grid=self.grid, coefficients=self.coefficients, tail_bound=self.tail_bound,
                      l1_tail=self.l1_tail, symbol=self.symbol, source=self.source, sigma=self.sigma,
                      band_low=self.band_low, band_high=self.band_high, envelope=self.envelope)
        kwargs.update(changes)
        return SpectralGridField(**kwargs)

    def __repr__(self):
        return "SpectralGridField(%r, tail_bound=%g)" % (self.grid, self.tail_bound)


def _source_tails(source, grid, sigma, band_low):
    if band_low is not None and np.pi * band_low <= grid.coverage:
        return 0., 0.
    return (gf.fourier_weighted_tail(source, grid.coverage, sigma),
            gf.fourier_l1_tail(source, grid.coverage, sigma))


def _compose(symbol, multiplier):
    if symbol is None:
        return None
    return lambda axes: symbol(axes) * multiplier(axes)


def from_gaussian(mix, grid):
    """ Sample the exact Fourier transform of a Gaussian mixture on the grid.
    """
    if mix.dim != grid.dim:
        raise ValueError("Dimension mismatch: %i, %i" % (mix.dim, grid.dim))
    coefficients = gf.fourier_on_axes(mix, grid.axes)
    tail, l1 = _source_tails(mix, grid, 0., None)
    return SpectralGridField(grid, coefficients, tail_bound=tail, l1_tail=l1,
                             symbol=lambda axes: gf.fourier_on_axes(mix, axes), source=mix)


def from_symbol(grid, symbol, tail_bound=np.inf, l1_tail=np.inf):
    """ Field given by a coefficient function of the per-axis nodes.
    """
    return SpectralGridField(grid, symbol(grid.axes), tail_bound=tail_bound, l1_tail=l1_tail, symbol=symbol)


def _heat_factor(t):
    return lambda axes: outer([np.exp(-t * ax ** 2) for ax in axes])


def apply_heat_multiplier(f, t):
    """ Multiply by e^{-t |xi|^2}.
    """
    if t < 0:
        raise ValueError("Invalid time %s, backward heat flow is not supported" % str(t))
    if t == 0:
        return f
    factor = _heat_factor(t)
    coefficients = f.coefficients * factor(f.grid.axes)
    if f.source is not None:
        source = gf.heat_evolve(f.source, t)
        tail, l1 = _source_tails(source, f.grid, f.sigma, f.band_low)
        tail, l1 = min(tail, f.tail_bound), min(l1, f.l1_tail)
    else:
        source = None
        damp = np.exp(-t * f.grid.coverage ** 2)
        tail, l1 = f.tail_bound * damp, f.l1_tail * damp
    return f.replace(coefficients=coefficients, tail_bound=tail, l1_tail=l1,
                     symbol=_compose(f.symbol, factor), source=source, envelope=None)


def band_factor(band, part):
    def factor(axes):
        masks = [(np.abs(ax) <= np.pi * band).astype('float64') for ax in axes]
        low = outer(masks)
        return low if part == 'low' else 1. - low
    return factor


def band_project(f, N, part):
    """ Restrict to the closed cube Q_{pi N} (part='low') or its complement (part='high').
    """
    if part not in ('low', 'high'):
        raise ValueError("Invalid band part %s, expect 'low' or 'high'" % str(part))
    mask = f.grid.band_mask(N)
    if part == 'low':
        coefficients = np.where(mask, f.coefficients, 0.)
        low = N if f.band_low is None else min(N, f.band_low)
        tail = l1 = 0. if np.pi * N <= f.grid.coverage else None
        return f.replace(coefficients=coefficients,
                         tail_bound=f.tail_bound if tail is None else tail,
                         l1_tail=f.l1_tail if l1 is None else l1,
                         symbol=_compose(f.symbol, band_factor(N, 'low')), band_low=low, envelope=None)
    coefficients = np.where(mask, 0., f.coefficients)
    high = N if f.band_high is None else max(N, f.band_high)
    return f.replace(coefficients=coefficients, symbol=_compose(f.symbol, band_factor(N, 'high')),
                     band_high=high, envelope=None)


def _bessel_factor(s):
    return lambda axes: (1. + reduce(np.add.outer, [ax ** 2 for ax in axes])) ** (s / 2.)


def bessel_apply(f, s, envelope=None):
    """ Multiply by the Bessel weight (1 + |xi|^2)^{s/2}.

    Arguments:
        f (SpectralGridField): the field
        s (float): order
        envelope (callable): (halfwidth, s) -> weighted L2 tail bound, needed to keep
            the tail certified for s > 0 when the field has no Gaussian source (default: None)
    """
    if s == 0:
        return f
    factor = _bessel_factor(s)
    coefficients = f.coefficients * factor(f.grid.axes)
    cov = f.grid.coverage
    if f.source is not None:
        tail, l1 = _source_tails(f.source, f.grid, f.sigma + s, f.band_low)
    elif s < 0:
        damp = (1. + cov ** 2) ** (s / 2.)
        tail, l1 = f.tail_bound * damp, f.l1_tail * damp
    elif f.tail_bound == 0 and f.l1_tail == 0:
        tail, l1 = 0., 0.
    elif envelope is not None:
        tail, l1 = float(envelope(cov, s)), np.inf
    else:
        warnings.warn("Bessel weight of order %g on a field without decay envelope, tail is uncertified" % s)
        tail, l1 = np.inf, np.inf
    return f.replace(coefficients=coefficients, tail_bound=tail, l1_tail=l1,
                     symbol=_compose(f.symbol, factor), sigma=f.sigma + s, envelope=None)


def derivative_apply(f, alpha):
    """ Apply D^alpha, the multiplier (i xi)^alpha.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.dim or min(alpha) < 0:
        raise ValueError("Invalid multi-index %s for dimension %i" % (str(alpha), f.dim))
    order = sum(alpha)
    if order == 0:
        return f

    def factor(axes):
        return outer([(1j * ax) ** a for ax, a in zip(axes, alpha)])

    coefficients = f.coefficients * factor(f.grid.axes)
    if f.source is not None:
        tail, l1 = _source_tails(f.source, f.grid, f.sigma + order, f.band_low)
    elif f.tail_bound == 0 and f.l1_tail == 0:
        tail, l1 = 0., 0.
    else:
        tail, l1 = np.inf, np.inf
    return f.replace(coefficients=coefficients, tail_bound=tail, l1_tail=l1,
                     symbol=_compose(f.symbol, factor), sigma=f.sigma + order, envelope=None)


def linear_combination(fields, weights):
    """ sum_j weights_j fields_j on a common grid, tails combined by the triangle inequality.
    """
    grid = fields[0].grid
    if any(field.grid != grid for field in fields):
        raise ValueError("Fields live on different grids")
    coefficients = sum(w * field.coefficients for field, w in zip(fields, weights))
    tail = sum(abs(w) * field.tail_bound for field, w in zip(fields, weights) if w != 0)
    l1 = sum(abs(w) * field.l1_tail for field, w in zip(fields, weights) if w != 0)
    symbols = [field.symbol for field in fields]
    symbol = None
    if all(sym is not None for sym in symbols):
        def symbol(axes):
            return sum(w * sym(axes) for sym, w in zip(symbols, weights))
    return SpectralGridField(grid, coefficients, tail_bound=tail, l1_tail=l1, symbol=symbol)


def refined(f, level=1):
    """ The same field on a grid with 2^level times more panels.
    """
    if level == 0:
        return f
    if f.symbol is None:
        raise ValueError("Field has no symbol, refinement is not possible")
    grid = f.grid.refine(level)
    return f.replace(grid=grid, coefficients=f.symbol(grid.axes))


def regrid(f, panels):
    """ Re-sample the symbol on the grid with the given number of panels.

    The number of panels must be a multiple of the current one so that aligned bands stay aligned.
    """
    if panels == f.grid.panels:
        return f
    if panels % f.grid.panels != 0:
        raise ValueError("Panels %i are not a multiple of %i" % (panels, f.grid.panels))
    if f.symbol is None:
        raise ValueError("Field has no symbol, regridding is not possible")
    grid = FrequencyGrid(f.dim, f.grid.N, panels=panels, order=f.grid.order, extent=f.grid.extent)
    return f.replace(grid=grid, coefficients=f.symbol(grid.axes))


def oscillation_panels(grid, max_position):
    """ Panel count, a multiple of the current one, resolving e^{i x.xi} for |x_j| <= max_position.
    """
    # at most one period of the phase per panel
    needed = max_position * grid.N / 2.
    factor = max(1, int(ceil(needed / grid.panels)))
    return grid.panels * factor


def _quadrature_norm(f):
    sq = np.abs(f.coefficients) ** 2
    for weights in [f.grid.weights] * f.dim:
        sq = np.tensordot(weights, sq, axes=([0], [0]))
    return float(np.sqrt(max(sq, 0.)))


def _refinement_task(f, compute, tail):
    if f.symbol is None:
        warnings.warn("Field without symbol, the quadrature error is not estimated")

    def task(level):
        g = f if f.symbol is None else refined(f, level)
        return Certified(compute(g), tail)
    return task


def l2_norm(f, tol=None):
    """ L2 norm by quadrature.

    The certificate combines the difference to the refined grid and the tail bound.

    Arguments:
        f (SpectralGridField): the field
        tol (float): raise CertificationError if the certificate exceeds it (default: None)
    Returns:
        Certified: norm and error bound
    """
    if tol is not None and not f.tail_certified:
        value = _quadrature_norm(f)
        raise CertificationError("Uncertified tail, cannot reach tolerance %g" % tol,
                                 value=value, certificate=np.inf)
    task = _refinement_task(f, _quadrature_norm, f.tail_bound)
    return refine_until(task, np.inf if tol is None else tol, max_doublings=1 if tol is None else 6)


def hs_norm(f, s, tol=None):
    """ Bessel potential norm ||<D>^s f||.
    """
    return l2_norm(bessel_apply(f, s), tol=tol)


def inner_product(f, g):
    """ Quadrature of f^ conj(g^) on the common grid, with certificate from the tail bounds.
    """
    if f.grid != g.grid:
        raise ValueError("Fields live on different grids")
    prod = f.coefficients * np.conj(g.coefficients)
    for weights in [f.grid.weights] * f.dim:
        prod = np.tensordot(weights, prod, axes=([0], [0]))
    value = complex(prod)
    norm_f, norm_g = _quadrature_norm(f), _quadrature_norm(g)
    certificate = f.tail_bound * (norm_g + g.tail_bound) + g.tail_bound * norm_f
    return Certified(value, certificate)


def _inverse_matrices(f, x_axes):
    return [np.exp(1j * np.asarray(x, dtype='float64')[:, None] * f.grid.nodes[None]) * f.grid.weights[None]
            for x in x_axes]


def _values_on_axes(f, x_axes):
    return (2 * np.pi) ** (-f.dim / 2.) * tensor_apply(f.coefficients, _inverse_matrices(f, x_axes))


def _point_values(f, pts):
    out = np.zeros(len(pts), dtype='complex128')
    letters = 'abc'[:f.dim]
    expr = ','.join('p' + a for a in letters) + ',' + letters + '->p'
    block = max(1, 2 ** 24 // f.coefficients.size)
    for start in range(0, len(pts), block):
        chunk = pts[start:start + block]
        mats = _inverse_matrices(f, [chunk[:, j] for j in range(f.dim)])
        out[start:start + block] = np.einsum(expr, *mats, f.coefficients, optimize=True)
    return (2 * np.pi) ** (-f.dim / 2.) * out


def _inversion_certified(f, compute, tol):
    l1 = (2 * np.pi) ** (-f.dim / 2.) * f.l1_tail
    task = _refinement_task(f, compute, l1)
    return refine_until(task, np.inf if tol is None else tol, max_doublings=1 if tol is None else 6)


def point_value(f, x, tol=None):
    """ Inverse transform (2 pi)^{-d/2} sum_nodes w e^{i x.xi} f^ at one or more points.

    Returns:
        Certified: complex value(s) and a bound from refinement plus the L1 tail
    """
    pts, single = as_points(x, f.dim)
    res = _inversion_certified(f, lambda g: _point_values(g, pts), tol)
    return Certified(res.value[0], res.certificate) if single else res


def values_on_axes(f, x_axes, tol=None):
    """ Point values on the tensor grid spanned by x_axes, by separable contraction.
    """
    if len(x_axes) != f.dim:
        raise ValueError("Expected %i axes, got %i" % (f.dim, len(x_axes)))
    return _inversion_certified(f, lambda g: _values_on_axes(g, x_axes), tol)


def lattice_values(f, N, max_index, tol=None):
    """ Samples f(n/N) for the cube |n_j| <= max_index, as a tensor in C order.
    """
    axis = np.arange(-max_index, max_index + 1) / N
    return values_on_axes(f, [axis] * f.dim, tol=tol)


def sample_tail(f, N, max_index, slack=0.):
    """ Certified l2 bound of the samples at points within slack of n/N omitted by the cube |n_j| <= max_index.
    """
    if f.envelope is not None:
        return float(f.envelope(N, max_index, slack))
    if f.band_low is not None and f.band_high is not None and f.band_high >= f.band_low:
        # low projection of a high projection, the field vanishes
        return 0.
    if f.source is None or f.sigma != 0:
        return np.inf
    if f.band_high is not None:
        return np.inf if slack > 0 else gf.aliased_sample_bound(f.source, f.band_high, N)
    tail = gf.lattice_tail(f.source, N, max_index, slack)
    if f.band_low is not None:
        if slack > 0:
            return np.inf
        tail += gf.aliased_sample_bound(f.source, f.band_low, N)
    return tail


def is_bandlimited(f, N):
    """ Whether f^ vanishes outside the closed cube Q_{pi N} on the grid and beyond.
    """
    mask = f.grid.band_mask(N)
    outside_tail = f.tail_bound
    if f.band_low is not None and f.band_low <= N:
        outside_tail = 0.
    return bool(not np.any(f.coefficients[~mask]) and outside_tail == 0)


#
# csv import and export
#


def to_csv(path, f):
    """ One row per node: xi_1..xi_d, real, imag. The grid parameters are stored in a comment line.
    """
    grid = f.grid
    with open(path, 'w', newline='') as fh:
        fh.write("# dim=%i N=%.17g panels=%i order=%i extent=%i tail_bound=%.17g l1_tail=%.17g\n"
                 % (grid.dim, grid.N, grid.panels, grid.order, grid.extent, f.tail_bound, f.l1_tail))
        writer = csv.writer(fh)
        writer.writerow(['xi_%i' % (j + 1) for j in range(grid.dim)] + ['real', 'imag'])
        for index in np.ndindex(*grid.shape):
            xi = [grid.nodes[i] for i in index]
            value = f.coefficients[index]
            writer.writerow(['%.17g' % v for v in xi + [value.real, value.imag]])


def from_csv(path):
    """ Import a field written by to_csv, validating the node coordinates against the grid.
    """
    with open(path, newline='') as fh:
        head = fh.readline()
        if not head.startswith('#'):
            raise ValueError("Missing grid description in %s" % path)
        params = dict(item.split('=') for item in head[1:].split())
        grid = FrequencyGrid(int(params['dim']), float(params['N']), panels=int(params['panels']),
                             order=int(params['order']), extent=int(params['extent']))
        reader = csv.reader(fh)
        next(reader)
        rows = np.array([[float(v) for v in row] for row in reader if row])
    if rows.shape != (int(np.prod(grid.shape)), grid.dim + 2):
        raise ValueError("Expected %i rows with %i columns" % (int(np.prod(grid.shape)), grid.dim + 2))
    expected = np.stack(np.meshgrid(*grid.axes, indexing='ij'), axis=-1).reshape(-1, grid.dim)
    if not np.allclose(rows[:, :grid.dim], expected, rtol=1e-14, atol=0):
        raise ValueError("Node coordinates in %s do not match %r" % (path, grid))
    coefficients = (rows[:, -2] + 1j * rows[:, -1]).reshape(grid.shape)
    warnings.warn("Imported field has no symbol, quadrature errors are not estimated")
    return SpectralGridField(grid, coefficients, tail_bound=float(params['tail_bound']),
                             l1_tail=float(params['l1_tail']))
