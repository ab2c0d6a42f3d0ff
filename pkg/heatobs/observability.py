import warnings
from math import ceil

import numpy as np

from . import gaussian_field as gf
from . import sinc_basis as sb
from . import spectral_field as sf
from .calibration import sweep_fingerprint
from .perturbation import perturbed_points, rule_name
from .reports import ConstantCalibration, make_report
from .util import CertificationError, parallel_map, refine_until, sqrt_interval

BACKBONES = ('gaussian', 'samples', 'spectral')
# relative rounding of the closed form band energies
ENERGY_ROUNDING = 1e-13
# quadrature tolerance relative to the squared in-band integrals
QUADRATURE_RTOL = 1e-10


#
# bound forms with constant one
#


def residual_form(d, T, N, norm):
    TN2 = T * N ** 2
    return (1. + TN2 ** (-d / 4.)) * np.exp(-TN2) * norm


def sample_form(d, T, N, norm):
    TN2 = T * N ** 2
    return (1. + TN2 ** (d / 4.)) * T ** (-d / 4.) * norm


def perturbed_residual_form(d, T, N, eps, norm):
    TN2 = T * N ** 2
    return (eps + (1. + TN2 ** (-0.5)) * TN2 ** (-d / 4.) * np.exp(-TN2)) * norm


def sample_gap_form(d, T, N, eps, norm):
    TN2 = T * N ** 2
    return eps * N ** (d / 2.) * (1. + TN2 ** (-d / 4. - 0.5) * np.exp(-TN2)) * norm


def _check_times(T, N):
    if not T > 0:
        raise ValueError("Invalid time %s, expect T > 0" % str(T))
    if not N > 0:
        raise ValueError("Invalid density %s, expect N > 0" % str(N))


def _default_tol(form, constant):
    return 1e-3 * form * (1. if constant is None else constant)


#
# in-band quadrature for the aliasing backbone
#


def base_panels(mix, N, band=None):
    # a panel per Fourier standard deviation of the narrowest |f^|^2 term
    panels = max(2, 2 * int(ceil(np.pi * N * np.sqrt(mix.widths.max()) / 2.))) if len(mix) else 2
    return panels if band is None else sf.aligned_panels(N, [band], base=panels, max_panels=2 ** 20)


def _inband_integral(mix, N, integrand, band=None):
    """ Certified int_{Q_{pi N}} integrand(grid) over a panel-refined grid of the band cube.
    """
    panels = base_panels(mix, N, band)

    def task(level):
        grid = sf.FrequencyGrid(mix.dim, N, panels=panels * 2 ** level, extent=1)
        return float((grid.weight_tensor() * integrand(grid.axes)).sum())

    return refine_until(task, tol=1e-300, rtol=QUADRATURE_RTOL)


def aliasing_defect_energy(mix, N, band=None):
    """ int_{Q_{pi N}} |f^ - S^|^2 for the full lattice sinc series S of the samples f(n/N).
    """
    return _inband_integral(mix, N, lambda axes: np.abs(gf.aliasing_on_axes(mix, N, axes, band=band)) ** 2,
                            band=band)


def series_energy(mix, N, band=None):
    """ ||sum_n f(n/N) f_{N,n}||^2, the in-band integral of the periodized transform.
    """
    def integrand(axes):
        values = gf.fourier_on_axes(mix, axes)
        if band is not None:
            values = values * sf.band_factor(band, 'low')(axes)
        return np.abs(values - gf.aliasing_on_axes(mix, N, axes, band=band)) ** 2
    return _inband_integral(mix, N, integrand, band=band)


def _out_of_band_energy(mix, N, band=None):
    if band is None:
        return gf.band_energy(mix, np.pi * N)
    return gf.band_energy(mix, np.pi * N, np.pi * band) if band > N else 0.


def _field_norm(u0, band=None):
    if band is None:
        return gf.l2_norm(u0)
    return float(np.sqrt(gf.band_energy(u0, 0., np.pi * band)))


#
# residual backbones
#


def aliasing_residual(u, N, band=None):
    inband = aliasing_defect_energy(u, N, band=band)
    outband = _out_of_band_energy(u, N, band)
    res = sqrt_interval(inband.value + outband, inband.certificate + ENERGY_ROUNDING * outband)
    return res, dict(in_band=float(np.sqrt(max(inband.value, 0.))), out_of_band=float(np.sqrt(outband)))


def samples_residual(u, samples, band=None):
    """ ||u - sum_n a_n f_{N,n}|| for samples a of u: in-band quadrature plus exact out-of-band energy.
    """
    N = samples.N
    series = sb.synthesize(N, samples)
    panels = max(base_panels(u, N, band), 2 * int(ceil(samples.index_set.max_index / 4.)))
    if band is not None:
        panels = sf.aligned_panels(N, [band], base=panels, max_panels=2 ** 20)

    def integrand(axes):
        values = gf.fourier_on_axes(u, axes)
        if band is not None:
            values = values * sf.band_factor(band, 'low')(axes)
        return np.abs(values - series.fourier_on_axes(axes)) ** 2

    def task(level):
        grid = sf.FrequencyGrid(u.dim, N, panels=panels * 2 ** level, extent=1)
        return float((grid.weight_tensor() * integrand(grid.axes)).sum())

    inband = refine_until(task, tol=1e-300, rtol=QUADRATURE_RTOL)
    outband = _out_of_band_energy(u, N, band)
    res = sqrt_interval(inband.value + outband, inband.certificate + ENERGY_ROUNDING * outband)
    omitted = N ** (-u.dim / 2.) * (samples.tail_bound + samples.value_error)
    extras = dict(in_band=float(np.sqrt(max(inband.value, 0.))), out_of_band=float(np.sqrt(outband)),
                  max_index=samples.index_set.max_index)
    return res._replace(certificate=res.certificate + omitted), extras


def _lattice_samples(u, N, tol, band=None):
    if band is None:
        return sb.adaptive_gaussian_samples(u, N, tol)
    return sb.adaptive_lowpass_samples(u, N, tol, band=band)


def _residual_spectral(u0, T, N, tol, band):
    panels = sf.DEFAULT_PANELS if band is None else sf.aligned_panels(N, [band])
    f = sf.from_gaussian(u0, sf.default_grid(u0.dim, N, T, panels=panels))
    if band is not None:
        f = sf.band_project(f, band, 'low')
    f = sf.apply_heat_multiplier(f, T)
    samples = sb.adaptive_spectral_samples(f, N, tol)
    res = sb.series_residual(f, samples)
    return res, dict(max_index=samples.index_set.max_index)


def residual(u0, T, N, tol=None, backbone='gaussian', band=None, constant=None):
    """ Residual of the observability identity u(T) = sum_n u(T, n/N) f_{N,n} + R.

    Arguments:
        u0 (GaussianMixtureField): initial field
        T (float): observation time
        N (float): lattice density
        tol (float): tolerance of the sample truncation, defaults to 1e-3 of the bound (default: None)
        backbone (str): 'gaussian' (aliasing formula, no truncation), 'samples'
            (truncated sinc series of point values) or 'spectral' (grid field) (default: 'gaussian')
        band (float): replace u0 by its low-pass part chi_{<=band}(D) u0 (default: None)
        constant (float): calibrated constant, the bound is asserted if given (default: None)
    Returns:
        BoundReport
    """
    _check_times(T, N)
    if backbone not in BACKBONES:
        raise ValueError("Invalid backbone %s, expect one of %s" % (str(backbone), str(BACKBONES)))
    d = u0.dim
    norm = _field_norm(u0, band)
    form = residual_form(d, T, N, norm)
    tol = _default_tol(form, constant) if tol is None else tol
    u = gf.heat_evolve(u0, T)

    if backbone == 'gaussian':
        res, extras = aliasing_residual(u, N, band)
    elif backbone == 'samples':
        samples = _lattice_samples(u, N, tol * N ** (d / 2.), band=band)
        res, extras = samples_residual(u, samples, band=band)
    else:
        res, extras = _residual_spectral(u0, T, N, tol * N ** (d / 2.), band)

    params = dict(d=d, T=T, N=N, policy='full' if backbone == 'gaussian' else 'adaptive')
    if band is not None:
        params['band'] = band
    extras['u0_norm'] = norm
    return make_report('residual', res.value, res.certificate, form, constant=constant,
                       parameters=params, backbone=backbone, extras=extras)


def sample_l2_report(u0, T, N, tol=None, constant=None):
    """ l2 norm of the lattice samples u(T, n/N) against C (1 + (TN^2)^{d/4}) T^{-d/4} ||u0||.
    """
    _check_times(T, N)
    d = u0.dim
    form = sample_form(d, T, N, gf.l2_norm(u0))
    tol = 1e-10 * form if tol is None else tol
    samples = sb.adaptive_gaussian_samples(gf.heat_evolve(u0, T), N, tol)
    norm = samples.l2_norm()
    params = dict(d=d, T=T, N=N, policy='adaptive')
    return make_report('sample_l2', norm.value, norm.certificate, form, constant=constant, parameters=params,
                       backbone='samples', extras=dict(max_index=samples.index_set.max_index))


#
# perturbed lattices
#


def _perturbed_samples(u, N, eps, rule, seed, tol):
    def points_fn(members):
        return perturbed_points(rule, members, N, eps, seed=seed)
    # every coordinate moves by at most eps / N
    return sb.adaptive_gaussian_samples(u, N, tol, points_fn=points_fn, slack=eps / N)


def perturbed_residual(u0, T, N, eps, rule='alternating', seed=0, tol=None, constant=None):
    """ Residual of the identity with samples taken at perturbed points lambda_n, |lambda_n - n/N| <= eps/N.

    Arguments:
        u0 (GaussianMixtureField): initial field
        T (float): observation time
        N (float): lattice density
        eps (float): perturbation size in [0, 1)
        rule (str or callable): perturbation rule (default: 'alternating')
        seed (int): seed of the 'seeded' rule (default: 0)
        tol (float): tolerance of the sample truncation (default: None)
        constant (float): calibrated constant (default: None)
    """
    _check_times(T, N)
    d = u0.dim
    form = perturbed_residual_form(d, T, N, eps, gf.l2_norm(u0))
    tol = _default_tol(form, constant) if tol is None else tol
    u = gf.heat_evolve(u0, T)
    samples = _perturbed_samples(u, N, eps, rule, seed, tol * N ** (d / 2.))
    res, extras = samples_residual(u, samples)
    params = dict(d=d, T=T, N=N, eps=eps, rule=rule_name(rule), policy='adaptive')
    return make_report('perturbed_residual', res.value, res.certificate, form, constant=constant,
                       parameters=params, backbone='samples', extras=extras)


def perturbed_sample_gap(u0, T, N, eps, rule='alternating', seed=0, tol=None, constant=None):
    """ l2 norm of u(T, lambda_n) - u(T, n/N) against C eps N^{d/2} (1 + (TN^2)^{-d/4-1/2} e^{-TN^2}) ||u0||.
    """
    _check_times(T, N)
    d = u0.dim
    norm = gf.l2_norm(u0)
    form = sample_gap_form(d, T, N, eps, norm)
    if tol is None:
        tol = 1e-8 * (form if eps > 0 else sample_form(d, T, N, norm))
    u = gf.heat_evolve(u0, T)
    perturbed = _perturbed_samples(u, N, eps, rule, seed, tol / 2.)
    index_set = perturbed.index_set
    exact = sb.sample_gaussian(u, index_set)
    diff = perturbed.values - exact.values
    tail = gf.lattice_tail(u, N, index_set.max_index, eps / N) + gf.lattice_tail(u, N, index_set.max_index)
    params = dict(d=d, T=T, N=N, eps=eps, rule=rule_name(rule), policy='adaptive')
    return make_report('perturbed_sample_gap', float(np.linalg.norm(diff)), tail, form, constant=constant,
                       parameters=params, backbone='samples', extras=dict(max_index=index_set.max_index))


#
# operator decomposition W_N + R_N
#


def operator_decomposition_report(dim, T, N, trials, seed=0, constant=None):
    """ Sampled operator norms of the reconstruction W_N u0 = sum_n u(T, n/N) f_{N,n} and of R_N = e^{T Laplace} - W_N.

    The trial fields are a wide Gaussian of width 1e3 T and trials - 1 seeded random mixtures.
    When the calibrated constant satisfies C (1 + (TN^2)^{-d/4}) e^{-TN^2} <= 1/10, the report
    asserts that the residual ratio stays below 1/10.
    """
    _check_times(T, N)
    if int(trials) != trials or trials < 1:
        raise ValueError("Invalid number of trials %s, expect at least 1" % str(trials))
    rng = np.random.default_rng(seed)
    fields = [gf.gaussian(dim, width=1e3 * T)] + [gf.random_mixture(dim, rng) for _ in range(int(trials) - 1)]

    r_ratios, r_certs, w_ratios, w_certs = [], [], [], []
    for u0 in fields:
        norm = gf.l2_norm(u0)
        u = gf.heat_evolve(u0, T)
        res, _ = aliasing_residual(u, N, None)
        series = sqrt_interval(*series_energy(u, N))
        r_ratios.append(res.value / norm)
        r_certs.append(res.certificate / norm)
        w_ratios.append(series.value / norm)
        w_certs.append(series.certificate / norm)

    best = int(np.argmax(r_ratios))
    holds = constant is not None and constant * residual_form(dim, T, N, 1.) <= 0.1
    params = dict(d=dim, T=T, N=N, policy='full')
    extras = dict(max_w_ratio=max(w_ratios), wide_w_ratio=w_ratios[0], condition_holds=holds,
                  residual_constant=constant, trials=int(trials),
                  w_ok=bool(max(w - c for w, c in zip(w_ratios, w_certs)) <= 1.))
    return make_report('operator_decomposition', r_ratios[best], max(r_certs), 0.1, constant=1.,
                       asserted=holds, parameters=params, backbone='gaussian', extras=extras)


#
# calibration
#


def fit_constant(bound_id, reports, dim, sweep=(), fingerprint=''):
    """ Largest ratio to the bound form over the resolved reports; unresolved reports are skipped.
    """
    if any(rep.direction != 'upper' for rep in reports):
        raise ValueError("Only upper bounds can be calibrated, got a lower bound for %s" % bound_id)
    resolved = [rep for rep in reports if rep.resolved and rep.form_ratio is not None]
    n_skipped = len(reports) - len(resolved)
    if n_skipped:
        warnings.warn("%i of %i points of %s are not resolved above their certificate and are skipped"
                      % (n_skipped, len(reports), bound_id))
    if resolved:
        value = max(rep.form_ratio for rep in resolved)
    else:
        warnings.warn("No resolved point for %s, the fitted constant is zero" % bound_id)
        value = 0.
    return ConstantCalibration(bound_id, dim, float(value), list(sweep), float(value), len(resolved),
                               n_skipped=n_skipped, fingerprint=fingerprint)


def calibrate_constant(bound_id, sweep, dim=None, tol=None, n_threads=1, verbose=False):
    """ Empirical constant of a bound: the largest measured / bound form ratio over a sweep.

    Arguments:
        bound_id (str): name of a registered bound
        sweep (list[dict]): parameter points, see corpus.standard_sweep
        dim (int): dimension, read from the points if not given (default: None)
        tol (float): tolerance passed to the evaluator (default: None)
        n_threads (int): number of threads (default: 1)
        verbose (bool): show progress (default: False)
    Returns:
        ConstantCalibration
    """
    from .corpus import get_evaluator
    sweep = list(sweep)
    if not sweep:
        raise ValueError("Empty sweep for %s" % bound_id)
    dim = int(sweep[0]['d']) if dim is None else int(dim)
    evaluator = get_evaluator(bound_id)

    def _evaluate(point):
        try:
            return evaluator(dict(point), tol=tol)
        except CertificationError as e:
            raise CertificationError("Calibration of %s failed at point %s: %s" % (bound_id, str(point), str(e)),
                                     value=e.value, certificate=e.certificate)

    if verbose:
        print("Calibrating", bound_id, "in dimension", dim, "on", len(sweep), "points")
    reports = parallel_map(_evaluate, sweep, n_threads=n_threads, verbose=verbose)
    fingerprint = sweep_fingerprint(bound_id, dim, sweep, tol)
    return fit_constant(bound_id, reports, dim, sweep=sweep, fingerprint=fingerprint)
