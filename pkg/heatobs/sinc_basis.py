import csv
from math import ceil

import numpy as np

from . import gaussian_field as gf
from . import spectral_field as sf
from .reports import make_report
from .util import (Certified, CertificationError, PreconditionError, as_points, blocking,
                   check_dimension, cube_members, tensor_apply)

MAX_INDEX_LIMIT = 2 ** 16
SHAPES = ('cube', 'ball', 'adaptive')


class LatticeIndexSet:
    """ Finite set of lattice indices n in Z^d for density N.

    Members are stored in C order of the enclosing cube |n_j| <= max_index.

    Arguments:
        N (float): lattice density
        dim (int): dimension
        shape (str): 'cube', 'ball' or 'adaptive'
        max_index (int): halfwidth of the enclosing cube
        radius (float): ball radius r, the members are {n : |n/N| < r} (default: None)
    """
    def __init__(self, N, dim, shape, max_index, radius=None):
        if not N > 0:
            raise ValueError("Invalid density %s" % str(N))
        if shape not in SHAPES:
            raise ValueError("Invalid index set shape %s, expect one of %s" % (str(shape), str(SHAPES)))
        self.N = float(N)
        self.dim = check_dimension(dim)
        self.shape = shape
        self.max_index = int(max_index)
        self.radius = radius
        members = cube_members(self.max_index, self.dim)
        if shape == 'ball':
            # strict inequality, ties |n/N| = r are excluded
            keep = (members.astype('float64') ** 2).sum(axis=1) < (radius * self.N) ** 2
            self._mask = keep.reshape((2 * self.max_index + 1,) * self.dim)
            members = members[keep]
        else:
            self._mask = None
        self.members = members

    def __len__(self):
        return len(self.members)

    def __repr__(self):
        return "LatticeIndexSet(N=%g, dim=%i, shape=%s, max_index=%i)" % (self.N, self.dim, self.shape,
                                                                         self.max_index)

    @property
    def positions(self):
        return self.members / self.N

    @property
    def cube_shape(self):
        return (2 * self.max_index + 1,) * self.dim

    @property
    def inscribed_cube(self):
        """ Halfwidth of the largest index cube inside the set, -1 if there is none.
        """
        if self.shape != 'ball':
            return self.max_index
        return int(ceil(self.radius * self.N / np.sqrt(self.dim))) - 1

    def to_tensor(self, values):
        """ Place member values into the enclosing cube, zeros elsewhere.
        """
        out = np.zeros(self.cube_shape, dtype=np.asarray(values).dtype)
        if self._mask is None:
            out[...] = np.asarray(values).reshape(self.cube_shape)
        else:
            out[self._mask] = values
        return out

    def from_tensor(self, tensor):
        tensor = np.asarray(tensor)
        return tensor.ravel() if self._mask is None else tensor[self._mask]


def cube_index_set(N, dim, max_index):
    return LatticeIndexSet(N, dim, 'cube', max_index)


def ball_index_set(N, dim, radius):
    """ The window {n : |n/N| < radius}.
    """
    if not radius > 0:
        raise ValueError("Invalid radius %s" % str(radius))
    return LatticeIndexSet(N, dim, 'ball', int(ceil(radius * N)), radius=radius)


def adaptive_index_set(N, dim, tail_fn, tol, start=2):
    """ Grow an index cube until the certified tail of the omitted samples is below tol.

    Arguments:
        N (float): lattice density
        dim (int): dimension
        tail_fn (callable): max_index -> certified l2 tail of the omitted samples
        tol (float): tail tolerance
        start (int): initial cube halfwidth (default: 2)
    Returns:
        LatticeIndexSet: the index set
        float: the tail bound reached
    """
    max_index = int(start)
    while True:
        tail = tail_fn(max_index)
        if tail <= tol:
            return LatticeIndexSet(N, dim, 'adaptive', max_index), float(tail)
        if max_index >= MAX_INDEX_LIMIT:
            raise CertificationError("Lattice tail %g above tolerance %g at max index %i"
                                     % (tail, tol, max_index), value=max_index, certificate=tail)
        max_index *= 2


class SampleVector:
    """ Real samples indexed by a LatticeIndexSet.

    Arguments:
        index_set (LatticeIndexSet): the indices
        values (np.ndarray): one value per member
        tail_bound (float): certified l2 norm of the omitted samples (default: 0)
        value_error (float): certified l2 norm of the errors of the listed values (default: 0)
    """
    def __init__(self, index_set, values, tail_bound=0., value_error=0.):
        values = np.asarray(values, dtype='float64').ravel()
        if len(values) != len(index_set):
            raise ValueError("Expected %i values, got %i" % (len(index_set), len(values)))
        if tail_bound < 0 or value_error < 0:
            raise ValueError("Invalid tail bound %s or value error %s" % (str(tail_bound), str(value_error)))
        self.index_set = index_set
        self.values = values
        self.tail_bound = float(tail_bound)
        self.value_error = float(value_error)

    def __len__(self):
        return len(self.values)

    @property
    def N(self):
        return self.index_set.N

    @property
    def dim(self):
        return self.index_set.dim

    def l2_norm(self):
        return Certified(float(np.linalg.norm(self.values)), self.tail_bound + self.value_error)

    def tensor(self):
        return self.index_set.to_tensor(self.values)


class SincSeries:
    """ The band-limited field sum_n a_n f_{N,n}.

    Its Fourier transform is (2 pi)^{-d/2} N^{-d} sum_n a_n e^{-i (n/N).xi} on the closed cube Q_{pi N}.
    """
    def __init__(self, N, samples):
        if abs(samples.N - N) > 1e-12 * N:
            raise ValueError("Sample density %g does not match series density %g" % (samples.N, N))
        self.N = float(N)
        self.samples = samples

    @property
    def dim(self):
        return self.samples.dim

    def fourier_on_axes(self, axes):
        idx = np.arange(-self.samples.index_set.max_index, self.samples.index_set.max_index + 1)
        mats = []
        for xi in axes:
            inside = np.abs(xi) <= np.pi * self.N
            mats.append(np.where(inside[:, None], np.exp(-1j * xi[:, None] * idx[None] / self.N), 0.))
        pref = (2 * np.pi) ** (-self.dim / 2.) * self.N ** (-self.dim)
        return pref * tensor_apply(self.samples.tensor().astype('complex128'), mats)

    def evaluate(self, x):
        pts, single = as_points(x, self.dim)
        members = self.samples.index_set.members
        out = np.zeros(len(pts))
        for bb in blocking(len(pts), max(1, 2 ** 22 // max(len(members), 1))):
            kernel = np.ones((len(pts[bb]), len(members)))
            for j in range(self.dim):
                kernel *= np.sinc(self.N * pts[bb, j, None] - members[None, :, j])
            out[bb] = kernel @ self.samples.values
        return out[0] if single else out

    def norm(self):
        """ Closed form N^{-d/2} ||a||, the certificate covers the omitted samples.
        """
        scale = self.N ** (-self.dim / 2.)
        norm = self.samples.l2_norm()
        return Certified(scale * norm.value, scale * norm.certificate)

    def to_spectral(self, grid=None):
        """ Exact Fourier form on a grid aligned with N.
        """
        if grid is None:
            max_index = self.samples.index_set.max_index
            grid = sf.FrequencyGrid(self.dim, self.N, panels=max(2, 2 * int(ceil(max_index / 4.))), extent=1)
        if not grid.is_aligned(self.N) or grid.coverage < np.pi * self.N * (1 - 1e-12):
            raise PreconditionError("Grid %r does not carry the band of density %g" % (grid, self.N))
        field = sf.from_symbol(grid, self.fourier_on_axes, tail_bound=0., l1_tail=0.)
        return field.replace(band_low=self.N, envelope=self.sample_envelope)

    def sample_envelope(self, N, max_index, slack=0.):
        if slack == 0 and abs(N - self.N) <= 1e-12 * N and max_index >= self.samples.index_set.max_index:
            return self.samples.tail_bound
        return np.inf


def sinc_eval(N, n, x):
    """ f_{N,n}(x) = prod_j sin(pi (N x_j - n_j)) / (pi (N x_j - n_j)), with value one at N x_j = n_j.
    """
    n = np.atleast_1d(np.asarray(n, dtype='float64'))
    pts, single = as_points(x, len(n))
    out = np.prod(np.sinc(N * pts - n[None]), axis=1)
    return out[0] if single else out


def sinc_fourier(N, n, xi):
    """ (2 pi)^{-d/2} N^{-d} e^{-i (n/N).xi} on the closed cube Q_{pi N}, zero outside.
    """
    n = np.atleast_1d(np.asarray(n, dtype='float64'))
    d = len(n)
    pts, single = as_points(xi, d)
    inside = np.all(np.abs(pts) <= np.pi * N, axis=1)
    out = np.where(inside, (2 * np.pi) ** (-d / 2.) * N ** (-d) * np.exp(-1j * (pts @ n) / N), 0.)
    return out[0] if single else out


def synthesize(N, samples):
    """ The sinc series sum_n a_n f_{N,n} of a sample vector.
    """
    if not np.all(np.isfinite(samples.values)):
        raise ValueError("Samples must be finite")
    return SincSeries(N, samples)


def delta_samples(N, dim, n=None, value=1.):
    """ Sample vector with a single nonzero value at index n (default: the origin).
    """
    n = np.zeros(dim, dtype=int) if n is None else np.asarray(n, dtype=int)
    index_set = cube_index_set(N, dim, int(np.abs(n).max()))
    values = np.all(index_set.members == n[None], axis=1).astype('float64') * value
    return SampleVector(index_set, values)


#
# sampling of fields
#


def sample_gaussian(mix, index_set, points=None):
    """ Samples of a mixture at the members of the index set, or at perturbed points.

    Arguments:
        mix (GaussianMixtureField): the field
        index_set (LatticeIndexSet): the indices
        points (np.ndarray): sample positions replacing n/N, one row per member (default: None)
    """
    positions = index_set.positions if points is None else points
    values = gf.evaluate(mix, positions) if len(positions) else np.zeros(0)
    slack = 0. if points is None else float(np.abs(points - index_set.positions).max(initial=0.))
    inner = index_set.inscribed_cube
    tail = gf.lattice_tail(mix, index_set.N, max(inner, -1), slack)
    return SampleVector(index_set, values, tail_bound=tail)


def adaptive_gaussian_samples(mix, N, tol, points_fn=None, slack=0.):
    """ Samples of a mixture on an index cube grown until the omitted tail is below tol.

    Arguments:
        mix (GaussianMixtureField): the field
        N (float): lattice density
        tol (float): tail tolerance
        points_fn (callable): members -> sample positions, for perturbed lattices (default: None)
        slack (float): max deviation of the positions from n/N (default: 0)
    """
    index_set, tail = adaptive_index_set(N, mix.dim, lambda m: gf.lattice_tail(mix, N, m, slack), tol)
    points = None if points_fn is None else points_fn(index_set.members)
    positions = index_set.positions if points is None else points
    return SampleVector(index_set, gf.evaluate(mix, positions), tail_bound=tail)


def adaptive_lowpass_samples(mix, N, tol, band=None, start=2):
    """ Samples (chi_{<=band}(D) mix)(n/N) on an index cube grown until the omitted tail is below tol.

    For band <= N the omitted samples are also bounded by the sampling Parseval identity
    sum_n |g(n/N)|^2 = N^d ||g||^2 of band-limited g, which is much sharper for narrow fields.

    Arguments:
        mix (GaussianMixtureField): the field
        N (float): lattice density
        tol (float): tail tolerance
        band (float): band of the low-pass projection (default: N)
        start (int): initial cube halfwidth (default: 2)
    """
    band = N if band is None else band
    d = mix.dim
    total_sq = N ** d * gf.band_energy(mix, 0., np.pi * band) if band <= N else None
    aliased = gf.aliased_sample_bound(mix, band, N)
    max_index = int(start)
    while True:
        index_set = cube_index_set(N, d, max_index)
        values = gf.lowpass_values(mix, band, index_set.positions)
        tail = gf.lattice_tail(mix, N, max_index) + aliased
        if total_sq is not None:
            rest = total_sq - float(values @ values)
            tail = min(tail, float(np.sqrt(max(rest, 0.) + 1e-12 * total_sq)))
        if tail <= tol:
            return SampleVector(index_set, values, tail_bound=tail)
        if max_index >= MAX_INDEX_LIMIT:
            raise CertificationError("Low-pass sample tail %g above tolerance %g at max index %i"
                                     % (tail, tol, max_index), value=max_index, certificate=tail)
        max_index *= 2


def sample_spectral(f, index_set, tol=None):
    """ Samples f(n/N) of a spectral field by separable inverse transform.
    """
    N, M = index_set.N, index_set.max_index
    f = sf.regrid(f, sf.oscillation_panels(f.grid, M / N)) if f.symbol is not None else f
    vals = sf.lattice_values(f, N, M, tol=tol)
    values = index_set.from_tensor(vals.value.real)
    inner = index_set.inscribed_cube
    tail = sf.sample_tail(f, N, max(inner, -1))
    value_error = vals.certificate * np.sqrt(len(values))
    return SampleVector(index_set, values, tail_bound=tail, value_error=value_error)


def adaptive_spectral_samples(f, N, tol, value_tol=None):
    """ Samples of a spectral field on an index cube grown until the omitted tail is below tol.
    """
    index_set, _ = adaptive_index_set(N, f.dim, lambda m: sf.sample_tail(f, N, m), tol)
    return sample_spectral(f, index_set, tol=value_tol)


#
# Shannon identity
#


def series_residual(f, samples):
    """ ||f - sum_n a_n f_{N,n}|| by quadrature on the grid of f, refined to resolve the series phases.

    The certificate includes N^{-d/2} times the omitted and erroneous sample mass.
    """
    N = samples.N
    series = synthesize(N, samples)
    panels = sf.oscillation_panels(f.grid, samples.index_set.max_index / N) if f.symbol is not None else None
    g = sf.regrid(f, panels) if panels is not None else f
    series_field = sf.from_symbol(g.grid, series.fourier_on_axes, tail_bound=0., l1_tail=0.)
    residual = sf.l2_norm(sf.linear_combination([g, series_field], [1., -1.]))
    omitted = N ** (-f.dim / 2.) * (samples.tail_bound + samples.value_error)
    return Certified(residual.value, residual.certificate + omitted)


def shannon_check(f, N, tol=1e-8):
    """ Check the sampling theorem for a band-limited spectral field.

    Measures the reconstruction residual ||f - sum_n f(n/N) f_{N,n}|| and the
    sampling Parseval defect | ||f||^2 - N^{-d} sum_n |f(n/N)|^2 |, both of which vanish.

    Arguments:
        f (SpectralGridField): field with Fourier support in Q_{pi N}
        N (float): lattice density
        tol (float): tolerance of the omitted sample tail (default: 1e-8)
    Returns:
        BoundReport: residual report, the Parseval defect is in the extras
    """
    if not sf.is_bandlimited(f, N):
        raise PreconditionError("Field is not band-limited at density %g" % N)
    samples = adaptive_spectral_samples(f, N, tol)
    d = f.dim
    max_index = samples.index_set.max_index
    measured, certificate = series_residual(f, samples)

    g = sf.regrid(f, sf.oscillation_panels(f.grid, max_index / N)) if f.symbol is not None else f
    norm_f = sf.l2_norm(g)
    sample_norm = np.linalg.norm(samples.values)
    sampled_sq = N ** (-d) * sample_norm ** 2
    defect = abs(norm_f.value ** 2 - sampled_sq)
    c_f = norm_f.certificate
    err = samples.tail_bound + samples.value_error
    defect_cert = 2 * norm_f.value * c_f + c_f ** 2 + N ** (-d) * (2 * sample_norm * err + err ** 2)

    params = dict(d=d, N=N, policy='adaptive')
    extras = dict(parseval_defect=defect, parseval_certificate=defect_cert,
                  parseval_ok=defect - defect_cert <= 0., max_index=max_index)
    return make_report('shannon', measured, certificate, 0., constant=1., parameters=params,
                       backbone='spectral', extras=extras)


#
# csv import and export
#


def samples_to_csv(path, samples):
    """ Columns n_1..n_d, value. Tail and value error go to a comment line.
    """
    with open(path, 'w', newline='') as f:
        f.write('# N=%.17g tail_bound=%.17g value_error=%.17g\n' % (samples.N, samples.tail_bound,
                                                                     samples.value_error))
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['n_%i' % (j + 1) for j in range(samples.dim)] + ['value'])
        for n, value in zip(samples.index_set.members, samples.values):
            writer.writerow(['%i' % v for v in n] + ['%.17g' % value])


def samples_from_csv(path):
    """ Read samples written by samples_to_csv; indices not on the enclosing cube are rejected.
    """
    with open(path, newline='') as f:
        head = f.readline()
        params = dict(item.split('=') for item in head.lstrip('#').split())
        reader = csv.reader(f)
        header = next(reader)
        rows = [row for row in reader if row]
    dim = len(header) - 1
    members = np.array([[int(v) for v in row[:-1]] for row in rows], dtype=int).reshape(-1, dim)
    values = np.array([float(row[-1]) for row in rows])
    max_index = int(np.abs(members).max(initial=0))
    index_set = cube_index_set(float(params['N']), dim, max_index)
    full = np.zeros(len(index_set))
    lookup = {tuple(n): i for i, n in enumerate(index_set.members)}
    for n, value in zip(members, values):
        full[lookup[tuple(n)]] = value
    return SampleVector(index_set, full, tail_bound=float(params['tail_bound']),
                        value_error=float(params['value_error']))
