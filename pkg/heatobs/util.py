import os
from concurrent import futures
from collections import namedtuple
from functools import reduce
from itertools import product

import numpy as np
from numpy.polynomial.legendre import leggauss

import h5py
from tqdm import tqdm


HDF5_EXTENSIONS = ['.h5', '.hdf', '.hdf5']

MAX_DIM = 3
MIN_WIDTH = 1e-12
MAX_DOUBLINGS = 6


class PreconditionError(ValueError):
    """ A mathematical precondition of an operation is violated.
    """


class CertificationError(RuntimeError):
    """ An adaptive computation did not reach the requested tolerance.

    Arguments:
        msg (str): error message
        value (float or np.ndarray): best available estimate
        certificate (float): error bound achieved for this estimate
    """
    def __init__(self, msg, value=None, certificate=None):
        super().__init__(msg)
        self.value = value
        self.certificate = certificate


# a value together with a certified upper bound on its error
Certified = namedtuple('Certified', ['value', 'certificate'])


def open_file(path, mode='r'):
    ext = os.path.splitext(path)[1].lower()
    if ext in HDF5_EXTENSIONS:
        return h5py.File(path, mode=mode)
    raise ValueError(f"Invalid extension: {ext}")


def check_dimension(dim):
    if int(dim) != dim or not 1 <= dim <= MAX_DIM:
        raise ValueError("Invalid dimension %s, expect 1, 2 or 3" % str(dim))
    return int(dim)


def as_points(x, dim):
    """ Bring point input to shape (n_points, dim).

    Returns the points and whether a single point was passed.
    """
    pts = np.asarray(x, dtype='float64')
    single = pts.ndim <= 1
    if pts.ndim == 0:
        pts = pts[None]
    if single:
        if dim == 1 and pts.size != 1:
            # a flat list of 1d points
            pts = pts[:, None]
            single = False
        else:
            pts = pts[None]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError("Invalid point shape %s for dimension %i" % (str(np.shape(x)), dim))
    return pts, single


def blocking(n_items, block_size):
    """ Generator over slices that split n_items into blocks.

    Arguments:
        n_items (int): number of items
        block_size (int): maximal number of items per block
    """
    block_size = max(int(block_size), 1)
    for start in range(0, n_items, block_size):
        yield slice(start, min(start + block_size, n_items))


def gauss_legendre_axis(lo, hi, n_panels, order):
    """ Composite Gauss-Legendre rule on [lo, hi] with equal panels.

    Arguments:
        lo (float): left end
        hi (float): right end
        n_panels (int): number of panels
        order (int): number of nodes per panel
    Returns:
        np.ndarray: nodes, strictly increasing
        np.ndarray: positive weights
    """
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None]).ravel()
    weights = (half[:, None] * w[None]).ravel()
    return nodes, weights


def outer(vectors):
    """ Tensor (outer) product of a list of 1d arrays.
    """
    return reduce(np.multiply.outer, vectors)


def tensor_apply(array, matrices):
    """ Apply one matrix per axis to a tensor (separable linear map).

    Axis j of the result has length matrices[j].shape[0].
    """
    out = array
    for axis, mat in enumerate(matrices):
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return out


def cube_members(max_index, dim):
    """ All integer points n with |n_j| <= max_index, in C order.
    """
    rng = np.arange(-max_index, max_index + 1)
    grids = np.meshgrid(*([rng] * dim), indexing='ij')
    return np.stack([g.ravel() for g in grids], axis=1)


def product_excess(bases, extras, tensor=False):
    """ Compute prod(bases + extras) - prod(bases) without cancellation.

    Expands into the sum over nonempty axis subsets S of
    prod_{j in S} extras_j * prod_{j not in S} bases_j.
    If tensor is True the factors are 1d arrays combined by outer products.
    """
    dim = len(bases)
    total = 0.
    for choice in product((False, True), repeat=dim):
        if not any(choice):
            continue
        factors = [ext if use else base for use, base, ext in zip(choice, bases, extras)]
        total = total + (outer(factors) if tensor else reduce(np.multiply, factors))
    return total


def sqrt_interval(value_sq, error_sq, tail_sq=0.):
    """ Certified square root of a quadrature value.

    The true squared quantity lies in [value_sq - error_sq, value_sq + error_sq + tail_sq].
    """
    value = np.sqrt(max(value_sq, 0.))
    upper = np.sqrt(max(value_sq, 0.) + error_sq + tail_sq)
    lower = np.sqrt(max(value_sq - error_sq, 0.))
    return Certified(float(value), float(max(upper - value, value - lower)))


def refine_until(task, tol, max_doublings=MAX_DOUBLINGS, rtol=0.):
    """ Run task at increasing resolution until successive results agree.

    Arguments:
        task (callable): maps the refinement level (0, 1, ...) to a value or to
            a Certified(value, tail) where tail is a resolution independent error bound
        tol (float): absolute tolerance for the certificate
        max_doublings (int): maximal number of resolution doublings (default: 6)
        rtol (float): relative tolerance, compared against the largest value magnitude (default: 0)
    Returns:
        Certified: last value, last successive difference plus tail
    """
    if not tol > 0:
        raise ValueError("Invalid tolerance %s" % str(tol))

    def _split(res):
        if isinstance(res, Certified):
            return np.asarray(res.value), float(res.certificate)
        return np.asarray(res), 0.

    prev, _ = _split(task(0))
    value, tail, certificate = prev, 0., np.inf
    for level in range(1, max_doublings + 1):
        value, tail = _split(task(level))
        diff = float(np.max(np.abs(value - prev))) if value.size else 0.
        certificate = diff + tail
        scale = float(np.max(np.abs(value))) if value.size else 0.
        if certificate <= max(tol, rtol * scale):
            break
        prev = value
    else:
        out = value.item() if value.ndim == 0 else value
        raise CertificationError("No convergence after %i doublings, certificate %g > tolerance %g"
                                 % (max_doublings, certificate, tol),
                                 value=out, certificate=certificate)
    out = value.item() if value.ndim == 0 else value
    return Certified(out, certificate)


def parallel_map(fn, items, n_threads=1, verbose=False):
    """ Map fn over items in a thread pool, results in input order.

    Arguments:
        fn (callable): function of one item
        items (list): the items
        n_threads (int): number of threads (default: 1)
        verbose (bool): show a progress bar (default: False)
    """
    items = list(items)
    if n_threads > 1:
        with futures.ThreadPoolExecutor(n_threads) as tp:
            return list(tqdm(tp.map(fn, items), total=len(items), disable=not verbose))
    return [fn(item) for item in tqdm(items, total=len(items), disable=not verbose)]


def periodized_tail(N, s, dim, max_shift):
    """ Bound on sup_{xi in Q_{pi N}} sum_{|k|_inf > max_shift} (1 + |xi + 2 pi N k|^2)^{-s}, s > dim/2.

    Uses |xi + 2 pi N k| >= pi N (2 |k|_inf - 1) and counts the shells of the lattice.
    """
    p = 2 * s - dim + 1
    if not p > 1:
        raise ValueError("The periodization converges only for s > dim/2, got s = %g" % s)
    base = 2 * max_shift + 1.
    return 2 * dim * 3. ** (dim - 1) * (np.pi * N) ** (-2 * s) * (base ** (-p) + base ** (1 - p) / (2 * (p - 1)))
