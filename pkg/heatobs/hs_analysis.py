from dataclasses import dataclass
from functools import reduce
from itertools import product
from math import ceil, floor

import numpy as np
from scipy.special import comb, gammaln

from . import bump
from . import gaussian_field as gf
from . import sinc_basis as sb
from . import spectral_field as sf
from .perturbation import perturbed_points, rule_name
from .reports import make_report
from .util import (Certified, PreconditionError, cube_members, gauss_legendre_axis, outer,
                   periodized_tail, refine_until, sqrt_interval, tensor_apply)

# relative L2 mass left outside the profile cube
PROFILE_MASS_TOL = 1e-4
DEFAULT_SUBSAMPLING = 16
# default index cube of the perturbed gap per dimension
GAP_INDEX = {1: 64, 2: 16, 3: 6}
# Gauss-Legendre order of the spatial rules on the cutoff support
SPATIAL_ORDER = 8
# the high cutoff derivatives limit the relative accuracy of the spatial rules
CUTOFF_RTOL = 1e-8
MAX_PROFILE_INDEX = 2 ** 10


def _check_order(s, d):
    if not s > d / 2.:
        raise PreconditionError("Point values need s > d/2, got s = %g in dimension %i" % (s, d))


def _is_gaussian(f):
    return isinstance(f, gf.GaussianMixtureField)


def hs_norm(f, s):
    """ ||f||_{H^s} of a mixture (on a grid fitted to its widths and centers) or of a spectral field.
    """
    if not _is_gaussian(f):
        return sf.hs_norm(f, s)
    if len(f) == 0:
        return Certified(0., 0.)
    # e^{-w Xi^2} is below e^{-40} at the coverage
    extent = max(4, int(ceil(np.sqrt(40. / f.widths.min()) / np.pi)) + 1)
    base = sf.FrequencyGrid(f.dim, 1., extent=extent)
    spread = float(np.abs(f.centers).max())
    grid = sf.FrequencyGrid(f.dim, 1., panels=sf.oscillation_panels(base, 2 * spread + 1), extent=extent)
    return sf.hs_norm(sf.from_gaussian(f, grid), s)


#
# residual of the sampling identity in H^s
#


def hs_residual(f, N, s, tol=None, constant=None):
    """ ||f - sum_n f(n/N) f_{N,n}|| against C (1 + N^{-d/2}) ||chi_{>N}(D) f||_{H^s}.

    Arguments:
        f (SpectralGridField): field with certified tails
        N (float): lattice density
        s (float): order, s > d/2
        tol (float): tolerance of the omitted samples, defaults to 1e-3 of the bound (default: None)
        constant (float): calibrated constant (default: None)
    Returns:
        BoundReport
    """
    d = f.dim
    _check_order(s, d)
    if not f.tail_certified:
        raise PreconditionError("Point values of a field with uncertified tail are not defined")
    if not f.grid.is_aligned(N):
        f = sf.regrid(f, sf.aligned_panels(f.grid.N, [N], base=f.grid.panels, max_panels=2 ** 16))
    high = sf.hs_norm(sf.band_project(f, N, 'high'), s)
    form = (1. + N ** (-d / 2.)) * (high.value + high.certificate)
    if tol is None:
        tol = max(1e-3 * form * (1. if constant is None else constant), 1e-10 * sf.l2_norm(f).value)
    samples = sb.adaptive_spectral_samples(f, N, tol * N ** (d / 2.))
    res = sb.series_residual(f, samples)
    params = dict(d=d, N=N, s=s, policy='adaptive')
    extras = dict(out_of_band_hs=high.value, max_index=samples.index_set.max_index)
    return make_report('hs_residual', res.value, res.certificate, form, constant=constant, parameters=params,
                       backbone='spectral', extras=extras)


def _sphere_area(d):
    return 2 * np.pi ** (d / 2.) * np.exp(-gammaln(d / 2.))


def power_law_field(dim, N, delta, extent=4):
    """ Spectral field with f^(xi) = (1 + |xi|^2)^{-d/2 - delta}, in H^s exactly for s < d/2 + 2 delta.

    The tails beyond the grid are bounded by the radial integrals of |xi|^{-2d-4 delta} and |xi|^{-d-2 delta}.
    """
    if not delta > 0:
        raise ValueError("Invalid decay excess %s" % str(delta))
    a = dim / 2. + delta

    def symbol(axes):
        return (1. + _radius_sq(axes)) ** (-a) + 0j

    grid = sf.FrequencyGrid(dim, N, extent=extent)
    cov = grid.coverage
    area = _sphere_area(dim)
    tail = np.sqrt(area * cov ** (-dim - 4 * delta) / (dim + 4 * delta))
    l1 = area * cov ** (-2 * delta) / (2 * delta)
    return sf.from_symbol(grid, symbol, tail_bound=tail, l1_tail=l1)


def _radius_sq(axes):
    return reduce(np.add.outer, [ax ** 2 for ax in axes])



def criticality_probe(dim, delta, N, max_shift=8):
    """ Residual of the sampling identity for the power law field at s = d/2 + delta/2.

    The samples of the field are not summable in closed form, so the in-band defect is computed
    from the periodization sum_{k != 0} f^(xi + 2 pi N k) truncated at |k|_inf <= max_shift, with the
    remainder bounded by the lattice shell sums. The extras record that s = d/2 is rejected.
    """
    f = power_law_field(dim, N, delta)
    a = dim / 2. + delta
    s = dim / 2. + delta / 2.
    try:
        hs_residual(f, N, dim / 2.)
        rejected = False
    except PreconditionError:
        rejected = True

    period = 2 * np.pi * N
    shifts = [k for k in cube_members(max_shift, dim) if np.any(k != 0)]
    rest = periodized_tail(N, a, dim, max_shift)

    def inband(level):
        grid = sf.FrequencyGrid(dim, N, panels=2 * 2 ** level, extent=1)
        defect = 0.
        for k in shifts:
            defect = defect + (1. + _radius_sq([ax + period * kj for ax, kj in zip(grid.axes, k)])) ** (-a)
        w = grid.weight_tensor()
        sq = float((w * defect ** 2).sum())
        # |true defect - truncated defect| <= rest pointwise
        err = 2 * rest * float((w * defect).sum()) + rest ** 2 * period ** dim
        return Certified(sq, err)

    def outband(level):
        g = sf.refined(sf.band_project(f, N, 'high'), level)
        return float((g.grid.weight_tensor() * np.abs(g.coefficients) ** 2).sum())

    defect_sq = refine_until(inband, tol=1e-300, rtol=1e-10)
    high_sq = refine_until(outband, tol=1e-300, rtol=1e-10)
    res = sqrt_interval(defect_sq.value + high_sq.value, defect_sq.certificate + high_sq.certificate,
                        f.tail_bound ** 2)

    # weighted out-of-band norm, the tail is the radial integral of |xi|^{2s - 2d - 4 delta}
    high = sf.band_project(f, N, 'high').replace(tail_bound=0., l1_tail=0.)
    weighted = sf.hs_norm(high, s)
    w_tail = _weighted_power_tail(dim, a, s, f.grid.coverage)
    form = (1. + N ** (-dim / 2.)) * (weighted.value + weighted.certificate + w_tail)
    params = dict(d=dim, N=N, s=s, policy='full')
    extras = dict(delta=delta, rejection_ok=rejected, shift_remainder=rest)
    return make_report('criticality', res.value, res.certificate, form, parameters=params,
                       backbone='spectral', extras=extras)


def _weighted_power_tail(dim, a, s, coverage):
    # (int_{|xi| > coverage} |xi|^{2s - 4a} dxi)^{1/2}, finite for 4a - 2s > dim
    p = 4 * a - 2 * s - dim
    return float(np.sqrt(_sphere_area(dim) * coverage ** (-p) / p))


#
# local sup profiles
#


@dataclass
class LocalSupProfile:
    """ Sup norms of a field over the cubes Q_r(r n), |n_j| <= max_index.

    Arguments:
        r (float): cube halfwidth and lattice spacing
        max_index (int): halfwidth of the index cube
        values (np.ndarray): sampled sup per cube, tensor over the index cube
        upper (np.ndarray): certified upper bound per cube
        lower (np.ndarray): certified lower bound per cube
        certified (bool): whether the upper bounds are certified
        tail_policy (str): what is left outside the index cube
    """
    r: float
    max_index: int
    values: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    certified: bool = True
    tail_policy: str = ''

    def l2(self):
        value = float(np.linalg.norm(self.values))
        upper, lower = float(np.linalg.norm(self.upper)), float(np.linalg.norm(self.lower))
        return Certified(value, max(upper - value, value - lower))


def profile_index(f, r):
    """ Smallest doubling index cube whose union of cubes leaves relative L2 mass below PROFILE_MASS_TOL.
    """
    mix = f if _is_gaussian(f) else f.source
    if mix is None:
        raise ValueError("The profile index cube of a field without Gaussian source must be given")
    if len(mix) == 0:
        return 1
    norm = gf.l2_norm(mix)
    max_index = 1
    while gf.tail_l2_outside_cube(mix, r * (max_index + 1)) > PROFILE_MASS_TOL * norm:
        if max_index >= MAX_PROFILE_INDEX:
            break
        max_index *= 2
    return max_index


def _profile_axis(r, max_index, m):
    offsets = np.linspace(-r, r, m)
    return (r * np.arange(-max_index, max_index + 1)[:, None] + offsets[None]).ravel()


def _cube_max(values, max_index, m, dim):
    shape = []
    for _ in range(dim):
        shape += [2 * max_index + 1, m]
    blocks = np.abs(values).reshape(shape)
    return blocks.max(axis=tuple(range(1, 2 * dim, 2)))


def _cube_boxes(r, max_index, dim):
    centers = r * cube_members(max_index, dim)
    return centers - r, centers + r


def _spectral_values(f, axes):
    if f.symbol is not None:
        f = sf.regrid(f, sf.oscillation_panels(f.grid, float(np.abs(axes[0]).max())))
    return sf.values_on_axes(f, axes)


def _spectral_gradient_bound(f):
    # sup |grad f| <= sum_j (2 pi)^{-d/2} int |xi_j f^|
    total = 0.
    for j in range(f.dim):
        g = sf.derivative_apply(f, tuple(int(i == j) for i in range(f.dim)))
        total += float((g.grid.weight_tensor() * np.abs(g.coefficients)).sum()) + g.l1_tail
    return (2 * np.pi) ** (-f.dim / 2.) * total


def local_sup_profile(f, r, max_index=None, m=DEFAULT_SUBSAMPLING):
    """ Sup of |f| over every cube Q_r(r n) by sub-sampling with a mean value correction.

    Each cube is sampled on m^d points; every point of the cube is within r sqrt(d) / (m - 1)
    of a sample, so the sampled max plus this distance times a gradient bound bounds the sup.

    Arguments:
        f (GaussianMixtureField or SpectralGridField): the field
        r (float): cube halfwidth
        max_index (int): index cube, chosen from the field's mass if not given (default: None)
        m (int): samples per cube and axis (default: 16)
    Returns:
        LocalSupProfile
    """
    if not r > 0:
        raise ValueError("Invalid cube size %s" % str(r))
    if m < 2:
        raise ValueError("Invalid subsampling %s, expect at least 2" % str(m))
    d = f.dim
    max_index = profile_index(f, r) if max_index is None else int(max_index)
    axis = _profile_axis(r, max_index, m)
    spacing = r * np.sqrt(d) / (m - 1)
    if _is_gaussian(f):
        pts = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing='ij')], axis=1)
        values = gf.evaluate(f, pts) if len(pts) else np.zeros(0)
        value_error = 0.
        lo, hi = _cube_boxes(r, max_index, d)
        gradient = gf.box_envelope(f, lo, hi, order=1).reshape((2 * max_index + 1,) * d)
    else:
        res = _spectral_values(f, [axis] * d)
        values, value_error = res.value.real, res.certificate
        gradient = _spectral_gradient_bound(f)
    sups = _cube_max(values, max_index, m, d)
    upper = sups + value_error + spacing * gradient
    lower = np.maximum(sups - value_error, 0.)
    certified = bool(np.all(np.isfinite(upper)))
    policy = 'relative mass %g outside the index cube' % PROFILE_MASS_TOL
    return LocalSupProfile(r, max_index, sups, upper, lower, certified=certified, tail_policy=policy)


def local_sup_report(f, r, s=None, max_index=None, m=DEFAULT_SUBSAMPLING, constant=None):
    """ l2 norm of the local sup profile against C (1 + r^{-d/2}) ||f||_{H^s}.

    Returns:
        LocalSupProfile: the profile
        BoundReport: the report
    """
    d = f.dim
    s = float(d) if s is None else s
    _check_order(s, d)
    profile = local_sup_profile(f, r, max_index=max_index, m=m)
    norm = hs_norm(f, s)
    res = profile.l2()
    form = (1. + r ** (-d / 2.)) * (norm.value + norm.certificate)
    params = dict(d=d, r=r, s=s, policy='cube')
    extras = dict(max_index=profile.max_index, certified=profile.certified, hs_norm=norm.value)
    report = make_report('local_sup', res.value, res.certificate, form, constant=constant, parameters=params,
                         backbone='gaussian' if _is_gaussian(f) else 'spectral', extras=extras)
    return profile, report


def profile_scaling_check(f, r, max_index=None, m=DEFAULT_SUBSAMPLING):
    """ sum_n ||f||^2_{C(Q_{2r}(2rn))} <= 3^d sum_n ||f||^2_{C(Q_r(rn))}.

    The cubes of size 2r with |n_j| <= M are covered by the cubes of size r with |n_j| <= 2M + 1.
    """
    d = f.dim
    coarse_index = profile_index(f, 2 * r) if max_index is None else int(max_index)
    coarse = local_sup_profile(f, 2 * r, max_index=coarse_index, m=m).l2()
    fine = local_sup_profile(f, r, max_index=2 * coarse_index + 1, m=m).l2()
    factor = 3 ** (d / 2.)
    params = dict(d=d, r=r, policy='cube')
    extras = dict(fine_l2=fine.value, max_index=coarse_index)
    return make_report('profile_scaling', coarse.value, coarse.certificate + factor * fine.certificate,
                       factor * fine.value, constant=1., parameters=params, backbone='gaussian', extras=extras)


#
# commutator type inequality for the cutoff
#


def _spatial_axis(level, base=4):
    # panels are a multiple of 4, so +-1 are breakpoints
    return gauss_legendre_axis(-2., 2., base * 2 ** level, SPATIAL_ORDER)


def _leibniz(f, axes, alpha):
    """ D^alpha (phi f) on the tensor grid spanned by axes.
    """
    d = f.dim
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing='ij')], axis=1)
    shape = tuple(len(ax) for ax in axes)
    total = 0.
    for beta in product(*[range(a + 1) for a in alpha]):
        coef = float(np.prod([comb(a, b, exact=True) for a, b in zip(alpha, beta)]))
        rest = tuple(a - b for a, b in zip(alpha, beta))
        deriv = gf.evaluate_derivative(f, pts, rest).reshape(shape) if len(f) else np.zeros(shape)
        total = total + coef * bump.bump_on_axes(axes, beta) * deriv
    return total


def _bessel_multi_indices(s, d):
    # (1 + |xi|^2)^s = sum_{|alpha| <= s} s! / ((s - |alpha|)! alpha!) xi^{2 alpha} for integer s
    out = []
    for alpha in product(range(s + 1), repeat=d):
        k = sum(alpha)
        if k > s:
            continue
        coef = comb(s, k, exact=True)
        rest = k
        for a in alpha:
            coef *= comb(rest, a, exact=True)
            rest -= a
        out.append((coef, alpha))
    return out


def _cutoff_hs_spatial(f, s, tol):
    d = f.dim
    terms = _bessel_multi_indices(int(s), d)

    def task(level):
        nodes, weights = _spatial_axis(level)
        axes = [nodes] * d
        w = outer([weights] * d)
        return sum(coef * float((w * _leibniz(f, axes, alpha) ** 2).sum()) for coef, alpha in terms)

    return refine_until(task, tol=tol, rtol=CUTOFF_RTOL)


def _cutoff_hs_fourier(f, s, tol):
    # (phi f)^ by quadrature on [-2, 2]^d, the frequency tail beyond the grid is not certified
    d = f.dim

    def task(level):
        nodes, weights = _spatial_axis(level, base=16)
        axes = [nodes] * d
        product_values = _leibniz(f, axes, (0,) * d) * outer([weights] * d)
        grid = sf.FrequencyGrid(d, 1., panels=4 * 2 ** level, extent=8)
        mats = [np.exp(-1j * grid.nodes[:, None] * nodes[None]) for _ in range(d)]
        transform = (2 * np.pi) ** (-d / 2.) * tensor_apply(product_values.astype('complex128'), mats)
        weight = (1. + grid.radius_sq()) ** s
        return float((grid.weight_tensor() * weight * np.abs(transform) ** 2).sum())

    return refine_until(task, tol=tol, max_doublings=3, rtol=1e-8)


def _bessel_values(f, s, axes):
    """ <D>^s f on the tensor grid spanned by axes, certified by the L1 tail of the weighted transform.
    """
    if len(f) == 0:
        return Certified(np.zeros(tuple(len(ax) for ax in axes)), 0.)
    extent = max(4, int(ceil(np.sqrt(40. / f.widths.min()) / np.pi)) + 1)
    base = sf.FrequencyGrid(f.dim, 1., extent=extent)
    reach = 2. + float(np.abs(f.centers).max())
    grid = sf.FrequencyGrid(f.dim, 1., panels=sf.oscillation_panels(base, 2 * reach), extent=extent)
    res = sf.values_on_axes(sf.bessel_apply(sf.from_gaussian(f, grid), s), axes)
    return Certified(res.value.real, res.certificate)


def commutator_inequality_check(f, s, tol=1e-10):
    """ ||phi f||^2_{H^s} <= 4^s (||((1 - Laplace)^{[s]+1} phi) f||^2 + ||phi <D>^s f||^2) for the tensor cutoff phi.

    Integer s are computed in space through the Leibniz rule, other s through the quadrature
    transform of phi f with an uncertified frequency tail. The right hand side uses the lower ends
    of its quadratures and is always asserted.

    Arguments:
        f (GaussianMixtureField): the field
        s (float): order, 0 <= s < 4
        tol (float): tolerance of the quadratures (default: 1e-10)
    """
    d = f.dim
    if not 0 <= s < bump.MAX_ORDER / 2.:
        raise ValueError("Invalid order %s, expect 0 <= s < %g" % (str(s), bump.MAX_ORDER / 2.))
    m = int(floor(s)) + 1
    integer = float(s).is_integer()
    if not integer and d > 1:
        raise ValueError("Non-integer orders are supported in dimension 1, got s = %g in dimension %i" % (s, d))
    lhs = _cutoff_hs_spatial(f, s, tol) if integer else _cutoff_hs_fourier(f, s, tol)

    def commutator_task(level):
        nodes, weights = _spatial_axis(level)
        axes = [nodes] * d
        values = np.stack([g for g in np.meshgrid(*axes, indexing='ij')], axis=-1).reshape(-1, d)
        f_values = gf.evaluate(f, values).reshape((len(nodes),) * d) if len(f) else 0.
        weighted = bump.bessel_power_on_axes(m, axes) * f_values
        return float((outer([weights] * d) * weighted ** 2).sum())

    def localized_task(level):
        nodes, weights = _spatial_axis(level)
        axes = [nodes] * d
        vals = _bessel_values(f, s, axes)
        phi_sq = bump.bump_on_axes(axes) ** 2
        w = outer([weights] * d)
        value = float((w * phi_sq * vals.value ** 2).sum())
        # (|v| + e)^2 - |v|^2 integrated against phi^2
        err = 2 * vals.certificate * float((w * phi_sq * np.abs(vals.value)).sum()) \
            + vals.certificate ** 2 * float((w * phi_sq).sum())
        return Certified(value, err)

    first = refine_until(commutator_task, tol=tol, rtol=CUTOFF_RTOL)
    second = refine_until(localized_task, tol=tol, rtol=CUTOFF_RTOL)
    lower = max(first.value - first.certificate, 0.) + max(second.value - second.certificate, 0.)
    form = 4. ** s * lower
    params = dict(d=d, s=s, policy='bump')
    extras = dict(commutator_term=first.value, localized_term=second.value, certified=integer,
                  derivative_order=2 * m)
    return make_report('commutator', lhs.value, lhs.certificate, form, constant=1., parameters=params,
                       backbone='gaussian' if integer else 'spectral', extras=extras)


#
# heat local bounds
#


def heat_local_form(d, T, r, norm):
    return (1. + (T / r ** 2) ** (d / 4.)) * T ** (-d / 4.) * norm


def heat_local_bounds(u0, T, r, max_index=None, m=DEFAULT_SUBSAMPLING, constant=None):
    """ l2 norms of the local sups of u(T) and |grad u(T)| and of the samples u(T, r n).

    The local sups and the samples are bounded by C (1 + (T r^{-2})^{d/4}) T^{-d/4} ||u0||,
    the gradient sups by the same times T^{-1/2}. The main value of the report is the local sup
    norm, gradient and samples are checked through the extras when a constant is given.
    """
    if not T > 0 or not r > 0:
        raise ValueError("Invalid time %s or cube size %s" % (str(T), str(r)))
    d = u0.dim
    u = gf.heat_evolve(u0, T)
    profile = local_sup_profile(u, r, max_index=max_index, m=m)
    M = profile.max_index
    sup_l2 = profile.l2()

    axis = _profile_axis(r, M, m)
    pts = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing='ij')], axis=1)
    grad = np.linalg.norm(gf.evaluate_gradient(u, pts).reshape(-1, d), axis=1) if len(u) else np.zeros(len(pts))
    grad_sups = _cube_max(grad, M, m, d)
    lo, hi = _cube_boxes(r, M, d)
    hessian = gf.box_envelope(u, lo, hi, order=2).reshape((2 * M + 1,) * d)
    grad_upper = grad_sups + r * np.sqrt(d) / (m - 1) * hessian
    grad_l2 = float(np.linalg.norm(grad_sups))
    grad_cert = float(np.linalg.norm(grad_upper)) - grad_l2

    lattice = sb.cube_index_set(1. / r, d, M)
    samples = gf.evaluate(u, lattice.positions) if len(u) else np.zeros(len(lattice))
    lattice_l2 = float(np.linalg.norm(samples))
    lattice_cert = gf.lattice_tail(u, 1. / r, M)

    norm = gf.l2_norm(u0)
    form = heat_local_form(d, T, r, norm)
    extras = dict(gradient_l2=grad_l2, gradient_certificate=grad_cert, lattice_l2=lattice_l2,
                  lattice_certificate=lattice_cert, max_index=M,
                  lattice_dominated_ok=bool(lattice_l2 <= sup_l2.value + sup_l2.certificate))
    if constant is not None:
        extras.update(gradient_ok=bool(grad_l2 <= constant * form * T ** -0.5),
                      lattice_ok=bool(lattice_l2 <= constant * form))
    params = dict(d=d, T=T, r=r, policy='cube')
    return make_report('heat_local', sup_l2.value, sup_l2.certificate, form, constant=constant,
                       parameters=params, backbone='gaussian', extras=extras)


def derivative_l2_check(u0, T, alpha, tol=1e-10):
    """ ||D^alpha u(T)|| <= (|alpha| / 2T)^{|alpha|/2} e^{-|alpha|/2} ||u0||, always asserted.
    """
    if not T > 0:
        raise ValueError("Invalid time %s" % str(T))
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != u0.dim or min(alpha) < 0:
        raise ValueError("Invalid multi-index %s for dimension %i" % (str(alpha), u0.dim))
    order = sum(alpha)
    sq = gf.derivative_moment(gf.heat_evolve(u0, T), alpha, 0, tol=tol)
    res = sqrt_interval(sq.value, sq.certificate)
    factor = (order / (2. * T)) ** (order / 2.) * np.exp(-order / 2.) if order else 1.
    params = dict(d=u0.dim, T=T, alpha=alpha)
    return make_report('derivative_l2', res.value, res.certificate, factor * gf.l2_norm(u0), constant=1.,
                       parameters=params, backbone='gaussian')


#
# perturbation of band-limited samples
#


def perturbed_bandlimited_gap(f, N, eps, rule='alternating', seed=0, max_index=None):
    """ ||{f(lambda_n) - f(n/N)}|| <= eps pi d e^{pi d} N^{d/2} ||f|| for band-limited f, always asserted.

    The samples are taken in two passes, first on the lattice and then at the perturbed points,
    over a finite index cube. Dropping indices only lowers the left side, so the check stays sound;
    the certificate covers the errors of the listed values.

    Arguments:
        f (SpectralGridField): field band-limited at density N
        N (float): lattice density
        eps (float): perturbation size in [0, 1)
        rule (str or callable): perturbation rule (default: 'alternating')
        seed (int): seed of the 'seeded' rule (default: 0)
        max_index (int): halfwidth of the index cube (default: None)
    """
    d = f.dim
    if not sf.is_bandlimited(f, N):
        raise PreconditionError("Field is not band-limited at density %g" % N)
    max_index = GAP_INDEX[d] if max_index is None else int(max_index)
    cube = sb.cube_index_set(N, d, max_index)
    points = perturbed_points(rule, cube.members, N, eps, seed=seed)

    lattice = sb.sample_spectral(f, cube)
    g = sf.regrid(f, sf.oscillation_panels(f.grid, max_index / N + 1.)) if f.symbol is not None else f
    moved = sf.point_value(g, points)
    gap = moved.value.real - lattice.values
    measured = float(np.linalg.norm(gap))
    certificate = lattice.value_error + np.sqrt(len(gap)) * moved.certificate

    norm = sf.l2_norm(f)
    form = eps * np.pi * d * np.exp(np.pi * d) * N ** (d / 2.) * max(norm.value - norm.certificate, 0.)
    params = dict(d=d, N=N, eps=eps, rule=rule_name(rule), policy='cube')
    extras = dict(max_index=max_index, omitted_lattice_tail=lattice.tail_bound)
    return make_report('perturbed_bandlimited_gap', measured, certificate, form, constant=1., parameters=params,
                       backbone='spectral', extras=extras)
