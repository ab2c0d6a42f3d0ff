from dataclasses import dataclass
from functools import reduce
from math import ceil

import numpy as np

from . import gaussian_field as gf
from . import sinc_basis as sb
from . import spectral_field as sf
from .calibration import sweep_fingerprint
from .observability import base_panels
from .reports import ConstantCalibration, make_report
from .util import (Certified, CertificationError, PreconditionError, cube_members, outer,
                   parallel_map, periodized_tail, refine_until, sqrt_interval, tensor_apply)

# feedback truncation relative to N^{-d/2} ||g||
FEEDBACK_RTOL = 1e-4
# candidate values for the threshold constants
CONSTANT_GRID = (0.25, 0.5, 0.75, 1., 1.25, 1.5, 2., 2.5, 3., 4., 5., 6., 8.)
# maximal periodization shifts of the Bessel weight per dimension
MAX_SHIFTS = {1: 256, 2: 24, 3: 6}
INDEX_POLICIES = ('adaptive', 'ball')


class ControlVector(sb.SampleVector):
    """ Impulse amplitudes v_n at the lattice points n/N, B_N v = sum_n v_n delta_{n/N}.

    Arguments:
        index_set (LatticeIndexSet): the actuated lattice points
        values (np.ndarray): one amplitude per member
        tail_bound (float): certified l2 norm of the amplitudes outside the index set (default: 0)
        value_error (float): certified l2 norm of the errors of the listed amplitudes (default: 0)
    """


@dataclass
class ClosedLoopRun:
    """ Heat equation with a single feedback impulse at time tau, observed at time T.

    Arguments:
        y0 (GaussianMixtureField): initial state
        T (float): final time
        tau (float): impulse time, 0 < tau < T
        N (float): actuator density
        r (float): window radius of the actuators, None for the full lattice (default: None)
        control (ControlVector): control after the run (default: None)
        final (object): final state y(T), spectral for the full lattice and a mixture for a window (default: None)
    """
    y0: gf.GaussianMixtureField
    T: float
    tau: float
    N: float
    r: float = None
    control: ControlVector = None
    final: object = None

    def __post_init__(self):
        if not self.T > self.tau > 0:
            raise ValueError("Invalid times T = %s, tau = %s, expect T > tau > 0" % (str(self.T), str(self.tau)))
        if not self.N > 0:
            raise ValueError("Invalid density %s" % str(self.N))
        if self.r is not None and not self.r > 0:
            raise ValueError("Invalid window radius %s" % str(self.r))

    @property
    def dim(self):
        return self.y0.dim


#
# feedback and actuation
#


def feedback_gain(g, N, tol=None, index_policy='adaptive', radius=None):
    """ The feedback v_n = <g, -f_{N,n}> = -N^{-d} (chi_{<=N}(D) g)(n/N).

    Arguments:
        g (GaussianMixtureField or SpectralGridField): the state
        N (float): actuator density
        tol (float): l2 tolerance of the omitted amplitudes, defaults to 1e-4 N^{-d/2} ||g|| (default: None)
        index_policy (str): 'adaptive' cube or 'ball' window {n : |n/N| < radius} (default: 'adaptive')
        radius (float): window radius for the 'ball' policy (default: None)
    Returns:
        ControlVector
    """
    if index_policy not in INDEX_POLICIES:
        raise ValueError("Invalid index policy %s, expect one of %s" % (str(index_policy), str(INDEX_POLICIES)))
    if index_policy == 'ball' and radius is None:
        raise ValueError("The 'ball' index policy needs a radius")
    d = g.dim
    scale = N ** (-d)
    is_gaussian = isinstance(g, gf.GaussianMixtureField)

    if index_policy == 'ball':
        window = sb.ball_index_set(N, d, radius)
        if is_gaussian:
            samples = sb.SampleVector(window, gf.lowpass_values(g, N, window.positions))
        else:
            samples = sb.sample_spectral(_lowpass(g, N), window)
            # the window defines the control, nothing outside it is omitted
            samples.tail_bound = 0.
    else:
        if tol is None:
            norm = gf.l2_norm(g) if is_gaussian else sf.l2_norm(g).value
            tol = FEEDBACK_RTOL * N ** (-d / 2.) * norm
        sample_tol = max(tol / scale, 1e-300)
        if is_gaussian:
            samples = sb.adaptive_lowpass_samples(g, N, sample_tol)
        else:
            samples = sb.adaptive_spectral_samples(_lowpass(g, N), N, sample_tol)

    return ControlVector(samples.index_set, -scale * samples.values, tail_bound=scale * samples.tail_bound,
                         value_error=scale * samples.value_error)


def _lowpass(f, N):
    return f if sf.is_bandlimited(f, N) else sf.band_project(f, N, 'low')


def _state_norm(g):
    if isinstance(g, gf.GaussianMixtureField):
        return Certified(gf.l2_norm(g), 0.)
    return sf.l2_norm(g)


def feedback_norm_report(fields, N, witness=None, tol=None):
    """ Largest ratio ||K_N g|| / ||g|| over the fields against the operator norm N^{-d/2}.

    Arguments:
        fields (dict): name -> GaussianMixtureField or SpectralGridField, nonzero
        N (float): actuator density
        witness (str): name of the field expected to attain the norm, checked
            to reach 0.999 N^{-d/2} (default: None)
        tol (float): feedback truncation tolerance (default: None)
    """
    if not fields:
        raise ValueError("Need at least one field")
    dims = set(g.dim for g in fields.values())
    if len(dims) != 1:
        raise ValueError("Fields of mixed dimensions %s" % str(sorted(dims)))
    d = dims.pop()
    ratios, certificates = {}, {}
    for name, g in sorted(fields.items()):
        norm = _state_norm(g)
        if not norm.value > norm.certificate:
            raise ValueError("Field %s has no resolved norm" % name)
        v = feedback_gain(g, N, tol=tol)
        v_norm = v.l2_norm()
        lower = norm.value - norm.certificate
        ratios[name] = v_norm.value / norm.value
        # enclosures of both norms plus rounding
        certificates[name] = (v_norm.value + v_norm.certificate) / lower - ratios[name] + 1e-12 * ratios[name]

    best = max(ratios, key=ratios.get)
    bound = N ** (-d / 2.)
    extras = dict(argmax=best, n_fields=len(fields))
    if witness is not None:
        if witness not in ratios:
            raise ValueError("Witness %s is not one of the fields" % str(witness))
        extras.update(witness_ratio=ratios[witness],
                      attained_ok=bool(ratios[witness] + certificates[witness] >= 0.999 * bound))
    params = dict(d=d, N=N, policy='adaptive')
    return make_report('feedback_norm', ratios[best], certificates[best], bound, constant=1.,
                       parameters=params, backbone='samples', extras=extras)


def comb_evolve(v, t):
    """ e^{t Laplace} B_N v = sum_n v_n term(1, n/N, t), exact.
    """
    if not t > 0:
        raise ValueError("Invalid time %s, the Dirac comb is only evolved for t > 0" % str(t))
    keep = v.values != 0
    return gf.GaussianMixtureField.from_arrays(v.dim, v.values[keep], v.index_set.positions[keep], t)


def comb_operator_bound(N, t, d):
    """ Bound on the norm of e^{t Laplace} B_N from l2 to L2: N^{d/2} (1 + sqrt(pi / (2t)) / (2 pi N))^{d/2}.
    """
    if not t > 0:
        raise ValueError("Invalid time %s" % str(t))
    return N ** (d / 2.) * (1. + np.sqrt(np.pi / (2 * t)) / (2 * np.pi * N)) ** (d / 2.)


#
# H^{-s} norm of the Dirac comb
#


def _periodized_weight(axes, N, s, K):
    period = 2 * np.pi * N
    weight = 0.
    for k in cube_members(K, len(axes)):
        shifted = [(ax + period * kj) ** 2 for ax, kj in zip(axes, k)]
        weight = weight + (1. + reduce(np.add.outer, shifted)) ** (-s)
    return weight


def control_sobolev_norm(v, s, constant=None, tol=1e-10):
    """ ||B_N v||_{H^{-s}}, the Dirac comb in the Bessel potential space of order -s.

    The integral over R^d is folded into Q_{pi N} with the periodized weight
    W(xi) = sum_k (1 + |xi + 2 pi N k|^2)^{-s}, whose omitted shifts are bounded in closed form.

    Arguments:
        v (ControlVector): the amplitudes
        s (float): order, s > d/2
        constant (float): calibrated constant of the bound C (1 + N^{d/2}) ||v|| (default: None)
        tol (float): tolerance of the squared norm (default: 1e-10)
    """
    d, N = v.dim, v.N
    if not s > d / 2.:
        raise PreconditionError("The comb lies in H^{-s} only for s > d/2, got s = %g in dimension %i" % (s, d))
    norm_v = float(np.linalg.norm(v.values))
    K = 0
    while K < MAX_SHIFTS[d] and periodized_tail(N, s, d, K) * N ** d * norm_v ** 2 > tol:
        K = max(1, 2 * K)
    K = min(K, MAX_SHIFTS[d])
    w_tail = periodized_tail(N, s, d, K)

    M = v.index_set.max_index
    idx = np.arange(-M, M + 1)
    coefficients = v.tensor().astype('complex128')
    panels = max(2, 2 * int(ceil(M / 4.)))

    def task(level):
        grid = sf.FrequencyGrid(d, N, panels=panels * 2 ** level, extent=1)
        mats = [np.exp(-1j * ax[:, None] * idx[None] / N) for ax in grid.axes]
        symbol = np.abs(tensor_apply(coefficients, mats)) ** 2
        weight = _periodized_weight(grid.axes, N, s, K)
        return float((grid.weight_tensor() * symbol * weight).sum()) * (2 * np.pi) ** (-d)

    value_sq = refine_until(task, tol=tol, rtol=1e-10)
    tail_sq = w_tail * N ** d * norm_v ** 2
    res = sqrt_interval(value_sq.value, value_sq.certificate, tail_sq)
    # omitted amplitudes: the weight is at most 1 + the tail of all nonzero shifts
    omitted = np.sqrt(N ** d * (1. + periodized_tail(N, s, d, 0))) * (v.tail_bound + v.value_error)
    form = (1. + N ** (d / 2.)) * norm_v
    params = dict(d=d, N=N, s=s, policy=v.index_set.shape)
    return make_report('control_sobolev', res.value, res.certificate + omitted, form, constant=constant,
                       parameters=params, backbone='spectral', extras=dict(shifts=K))


#
# closed loop
#


def density_threshold(constant, T, tau, eps):
    """ Actuator density C sqrt((1 + ln(1/eps)) / (T - tau)) reaching eps ||y0|| at time T.
    """
    if not 0 < eps < 1:
        raise ValueError("Invalid eps %s, expect 0 < eps < 1" % str(eps))
    return constant * np.sqrt((1. + np.log(1. / eps)) / (T - tau))


def window_threshold(constant, T, eps, d):
    """ Window radius C (1 + T^{d/2}) (1 + T^{-1/2}) / eps.
    """
    if not 0 < eps < 1:
        raise ValueError("Invalid eps %s, expect 0 < eps < 1" % str(eps))
    return constant * (1. + T ** (d / 2.)) * (1. + T ** -0.5) / eps


def _final_extent(t, N):
    # e^{-t Xi^2} at the coverage is e^{-80} below its value at the band edge
    return max(2, int(ceil(np.sqrt(1. + 80. / (t * (np.pi * N) ** 2)))))


def final_state_symbol(y0, T, tau, N):
    """ Fourier transform of the closed loop state y(T) for the full lattice feedback.

    With g = e^{tau Laplace} y0 the impulse removes the periodization of chi_{<=N} g^, so
    y^(T, xi) = e^{-(T - tau)|xi|^2} (g^(xi) - g^(xi - 2 pi N k(xi))), where xi - 2 pi N k(xi)
    lies in Q_{pi N}; the state vanishes on Q_{pi N}.
    """
    g = gf.heat_evolve(y0, tau)
    t = T - tau
    period = 2 * np.pi * N

    def symbol(axes):
        reduced = [ax - period * np.round(ax / period) for ax in axes]
        if len(g):
            diff = gf.fourier_on_axes(g, axes) - gf.fourier_on_axes(g, reduced)
        else:
            diff = np.zeros(tuple(len(ax) for ax in axes), dtype='complex128')
        return diff * outer([np.exp(-t * ax ** 2) for ax in axes])
    return symbol


def final_state_field(y0, T, tau, N):
    """ y(T) as a SpectralGridField with certified tails beyond the grid.
    """
    d = y0.dim
    t = T - tau
    g = gf.heat_evolve(y0, tau)
    grid = sf.FrequencyGrid(d, N, panels=base_panels(g, N), extent=_final_extent(t, N))
    cov = grid.coverage
    # |g^(reduced xi)| <= (2 pi)^{-d/2} sum |a_j|
    amp = (2 * np.pi) ** (-d / 2.) * float(np.abs(g.amplitudes).sum()) if len(g) else 0.
    y_free = gf.heat_evolve(y0, T)
    tail = (gf.tail_l2_outside_cube(y_free, cov, domain='fourier') if len(y_free) else 0.) \
        + amp * np.sqrt(gf.gaussian_multiplier_tail(t, cov, d, power=2))
    l1 = (gf.fourier_l1_tail(y_free, cov) if len(y_free) else 0.) \
        + amp * gf.gaussian_multiplier_tail(t, cov, d, power=1)
    return sf.from_symbol(grid, final_state_symbol(y0, T, tau, N), tail_bound=tail, l1_tail=l1)


def control_state_field(y0, control, T, tau):
    """ y(T) = e^{T Laplace} y0 + e^{(T - tau) Laplace} B_N v driven by the listed amplitudes of a control.

    y^(T, xi) = e^{-t |xi|^2} (g^(xi) + (2 pi)^{-d/2} sum_n v_n e^{-i (n/N).xi}) with g = e^{tau Laplace} y0
    and t = T - tau. Omitted amplitudes are not part of the field, see comb_operator_bound.
    """
    if control.dim != y0.dim:
        raise ValueError("Dimension mismatch: %i, %i" % (y0.dim, control.dim))
    d, N = y0.dim, control.N
    t = T - tau
    g = gf.heat_evolve(y0, tau)
    M = control.index_set.max_index
    idx = np.arange(-M, M + 1)
    coefficients = control.tensor().astype('complex128')
    pref = (2 * np.pi) ** (-d / 2.)

    def symbol(axes):
        mats = [np.exp(-1j * ax[:, None] * idx[None] / N) for ax in axes]
        comb = pref * tensor_apply(coefficients, mats)
        return (gf.fourier_on_axes(g, axes) + comb) * outer([np.exp(-t * ax ** 2) for ax in axes])

    # about half a period of the highest comb frequency per panel
    panels = max(base_panels(g, N), 2 * int(ceil(M / 2.)))
    grid = sf.FrequencyGrid(d, N, panels=panels, extent=_final_extent(t, N))
    cov = grid.coverage
    # |comb^| <= (2 pi)^{-d/2} ||v||_1
    amp = pref * float(np.abs(control.values).sum())
    y_free = gf.heat_evolve(y0, T)
    tail = (gf.tail_l2_outside_cube(y_free, cov, domain='fourier') if len(y_free) else 0.) \
        + amp * np.sqrt(gf.gaussian_multiplier_tail(t, cov, d, power=2))
    l1 = (gf.fourier_l1_tail(y_free, cov) if len(y_free) else 0.) \
        + amp * gf.gaussian_multiplier_tail(t, cov, d, power=1)
    return sf.from_symbol(grid, symbol, tail_bound=tail, l1_tail=l1)


def _squared_norm(field, tol=1e-300, rtol=1e-10):
    def task(level):
        g = sf.refined(field, level)
        return float((g.grid.weight_tensor() * np.abs(g.coefficients) ** 2).sum())
    return refine_until(task, tol=tol, rtol=rtol)


def run_closed_loop(run, tol=None):
    """ Compute the control and the final state of a run.

    For the full lattice the final state is the spectral form driven by the computed amplitudes,
    for a window it is the closed form mixture e^{T Laplace} y0 + e^{(T - tau) Laplace} B_{N,r} v.
    """
    g = gf.heat_evolve(run.y0, run.tau)
    if run.r is None:
        control = feedback_gain(g, run.N, tol=tol)
        final = control_state_field(run.y0, control, run.T, run.tau)
    else:
        control = feedback_gain(g, run.N, index_policy='ball', radius=run.r)
        final = gf.heat_evolve(run.y0, run.T) + comb_evolve(control, run.T - run.tau)
    return ClosedLoopRun(run.y0, run.T, run.tau, run.N, r=run.r, control=control, final=final)


def closed_loop_final(run, eps=0.1, constant=None, tol=None, zero_control=False):
    """ Final norm ||y(T)|| of the full lattice closed loop against eps ||y0||.

    Arguments:
        run (ClosedLoopRun): the run, without window
        eps (float): target ratio (default: 0.1)
        constant (float): calibrated density constant C_1, the check is asserted
            when N reaches the density threshold (default: None)
        tol (float): feedback truncation tolerance (default: None)
        zero_control (bool): replace the control by zero (default: False)
    Returns:
        BoundReport
    """
    if run.r is not None:
        raise ValueError("Use windowed_closed_loop for a run with window radius")
    d, T, tau, N = run.dim, run.T, run.tau, run.N
    norm_y0 = gf.l2_norm(run.y0)
    uncontrolled = gf.l2_norm(gf.heat_evolve(run.y0, T))
    extras = dict(uncontrolled_norm=uncontrolled, density_constant=constant)
    if zero_control:
        measured, certificate = uncontrolled, 0.
    else:
        if run.control is None:
            run = run_closed_loop(run, tol=tol)
            final = run.final
        else:
            final = control_state_field(run.y0, run.control, T, tau)
        # the cancellation in the band leaves rounding noise below 1e-10 ||y0||
        sq = _squared_norm(final, tol=max((1e-10 * norm_y0) ** 2, 1e-300), rtol=1e-8)
        res = sqrt_interval(sq.value, sq.certificate, final.tail_bound ** 2)
        control_norm = run.control.l2_norm()
        # omitted and inexact amplitudes move y(T) by at most this much in L2
        truncation = comb_operator_bound(N, T - tau, d) * control_norm.certificate
        measured, certificate = res.value, res.certificate + truncation
        extras.update(control_norm=control_norm.value, max_index=run.control.index_set.max_index,
                      truncation_bound=truncation)

    ratio = measured / norm_y0 if norm_y0 > 0 else 0.
    extras.update(ratio_to_y0=ratio, decay_term=float(np.log(ratio) + (T - tau) * N ** 2) if ratio > 0 else None)
    met = False
    if constant is not None:
        threshold = density_threshold(constant, T, tau, eps)
        met = bool(N >= threshold)
        extras.update(threshold_N=threshold)
    extras['threshold_met'] = met
    params = dict(d=d, T=T, tau=tau, N=N, eps=eps, policy='zero' if zero_control else 'adaptive')
    return make_report('closed_loop', measured, certificate, eps * norm_y0, constant=1., asserted=met,
                       parameters=params, backbone='spectral', extras=extras)


def windowed_closed_loop(run, eps=0.1, constant=None, tol=1e-10):
    """ Weighted final norm (int (1 + |x|)^{-2} |y(T, x)|^2 dx)^{1/2} with actuators in the window |n/N| < r.

    Arguments:
        run (ClosedLoopRun): the run, with window radius
        eps (float): target ratio (default: 0.1)
        constant (float): calibrated constant of both thresholds, the check is asserted
            when N and r reach them (default: None)
        tol (float): tolerance of the spatial quadrature (default: 1e-10)
    """
    if run.r is None:
        raise ValueError("The windowed closed loop needs a window radius")
    d, T, tau, N, r = run.dim, run.T, run.tau, run.N, run.r
    run = run if run.control is not None else run_closed_loop(run)
    final = run.final
    weighted = gf.spatial_weighted_norm(final, -1, tol=tol)
    unweighted = gf.l2_norm(final)
    norm_y0 = gf.l2_norm(run.y0)
    extras = dict(unweighted_norm=unweighted, window_size=len(run.control),
                  ratio_to_y0=weighted.value / norm_y0 if norm_y0 > 0 else 0., window_constant=constant,
                  weight_ok=bool(weighted.value - weighted.certificate <= unweighted * (1 + 1e-12) + 1e-15))
    met = False
    if constant is not None:
        n_threshold = density_threshold(constant, T, tau, eps)
        r_threshold = window_threshold(constant, T, eps, d)
        met = bool(N >= n_threshold and r >= r_threshold)
        extras.update(threshold_N=n_threshold, threshold_r=r_threshold)
    extras['threshold_met'] = met
    params = dict(d=d, T=T, tau=tau, N=N, r=r, eps=eps, policy='ball')
    return make_report('windowed_closed_loop', weighted.value, weighted.certificate, eps * norm_y0, constant=1.,
                       asserted=met, parameters=params, backbone='gaussian', extras=extras)


#
# duality with the observability identity
#


def _dual_coefficients(g, N, max_index):
    """ c_n = <g, f_{N,n}> = (2 pi)^{-d/2} N^{-d} int_{Q_{pi N}} g^(xi) e^{i (n/N).xi} dxi by quadrature.
    """
    d = g.dim
    idx = np.arange(-max_index, max_index + 1)
    panels = max(base_panels(g, N), 2 * int(ceil(max_index / 4.))) if len(g) else 2

    def task(level):
        grid = sf.FrequencyGrid(d, N, panels=panels * 2 ** level, extent=1)
        weighted = gf.fourier_on_axes(g, grid.axes) * grid.weight_tensor()
        mats = [np.exp(1j * idx[:, None] * ax[None] / N) for ax in grid.axes]
        return (2 * np.pi) ** (-d / 2.) * N ** (-d) * tensor_apply(weighted, mats).real

    return refine_until(task, tol=1e-14, rtol=1e-12)


def duality_gap(y0, u0, T, tau, N, tol=1e-10):
    """ |<y(T), u0> - <y0, u(T) - sum_n u(T - tau, n/N) e^{tau Laplace} f_{N,n}>| for the full lattice feedback.

    The left side integrates the spectral closed loop state against u0^, the right side
    combines the closed form <y0, u(T)> with quadrature coefficients <e^{tau Laplace} y0, f_{N,n}>.

    Returns:
        Certified: the gap and the combined certificate of both sides
    """
    if not T > tau > 0:
        raise ValueError("Invalid times T = %s, tau = %s, expect T > tau > 0" % (str(T), str(tau)))
    if y0.dim != u0.dim:
        raise ValueError("Dimension mismatch: %i, %i" % (y0.dim, u0.dim))
    d = y0.dim
    final = final_state_field(y0, T, tau, N)

    def task(level):
        f = sf.refined(final, level)
        prod = f.coefficients * np.conj(gf.fourier_on_axes(u0, f.grid.axes))
        return float((f.grid.weight_tensor() * prod).sum().real)

    lhs = refine_until(task, tol=1e-300, rtol=1e-12)
    u0_tail = gf.tail_l2_outside_cube(u0, final.grid.coverage, domain='fourier') if len(u0) else 0.
    lhs_cert = lhs.certificate + final.tail_bound * u0_tail

    g = gf.heat_evolve(y0, tau)
    u_mid = gf.heat_evolve(u0, T - tau)
    # the coefficient vector has l2 norm at most N^{-d/2} ||g||
    c_norm = N ** (-d / 2.) * gf.l2_norm(g)
    if c_norm > 0 and len(u_mid):
        index_set, trunc = sb.adaptive_index_set(N, d, lambda m: gf.lattice_tail(u_mid, N, m) * c_norm,
                                                 tol)
        coeffs = _dual_coefficients(g, N, index_set.max_index)
        samples = gf.evaluate(u_mid, index_set.positions)
        dual_sum = float(samples @ coeffs.value.ravel())
        sum_cert = trunc + coeffs.certificate * float(np.abs(samples).sum())
    else:
        dual_sum, sum_cert = 0., 0.
    direct = gf.inner_product(y0, gf.heat_evolve(u0, T))
    rhs = direct - dual_sum
    rounding = 1e-14 * (abs(direct) + abs(dual_sum) + abs(lhs.value))
    return Certified(abs(lhs.value - rhs), lhs_cert + sum_cert + rounding)


#
# threshold calibrations
#


def _smallest_constant(check, grid):
    for constant in grid:
        if check(constant):
            return constant
    return None


def _threshold_calibration(bound_id, dim, points, check, grid, n_threads, verbose):
    def _fit(point):
        found = _smallest_constant(lambda c: check(point, c), grid)
        if found is None:
            raise CertificationError("No constant in %s reaches the target for %s at point %s"
                                     % (str(grid), bound_id, str(point)))
        return found

    if verbose:
        print("Calibrating", bound_id, "in dimension", dim, "on", len(points), "points")
    values = parallel_map(_fit, points, n_threads=n_threads, verbose=verbose)
    value = float(max(values))
    sweep = [{k: v for k, v in p.items() if k != 'y0'} for p in points]
    return ConstantCalibration(bound_id, dim, value, sweep, value, len(points),
                               fingerprint=sweep_fingerprint(bound_id, dim, sweep, list(grid)))


def calibrate_density_constant(fields, T=1., tau=0.5, eps_values=(0.1, 0.01), grid=CONSTANT_GRID,
                               n_threads=1, verbose=False):
    """ Smallest grid constant C_1 with ||y(T)|| <= eps ||y0|| at N = density_threshold(C_1) on all fields.

    Arguments:
        fields (dict): name -> GaussianMixtureField
        T (float): final time (default: 1)
        tau (float): impulse time (default: 0.5)
        eps_values (tuple): target ratios (default: (0.1, 0.01))
        grid (tuple): increasing candidate constants (default: CONSTANT_GRID)
        n_threads (int): number of threads (default: 1)
        verbose (bool): show progress (default: False)
    """
    dims = set(f.dim for f in fields.values())
    if len(dims) != 1:
        raise ValueError("Fields of mixed dimensions %s" % str(sorted(dims)))
    points = [dict(field=name, y0=field, T=T, tau=tau, eps=eps)
              for name, field in sorted(fields.items()) for eps in eps_values]

    def check(point, constant):
        N = density_threshold(constant, point['T'], point['tau'], point['eps'])
        report = closed_loop_final(ClosedLoopRun(point['y0'], point['T'], point['tau'], N), eps=point['eps'])
        return report.measured + report.certificate <= report.bound_rhs

    return _threshold_calibration('closed_loop', dims.pop(), points, check, grid, n_threads, verbose)


def calibrate_window_constant(fields, T=1., tau=0.5, eps_values=(0.1,), grid=CONSTANT_GRID,
                              n_threads=1, verbose=False):
    """ Smallest grid constant C for which the threshold pair (N, r) reaches eps ||y0|| in the weighted norm.
    """
    dims = set(f.dim for f in fields.values())
    if len(dims) != 1:
        raise ValueError("Fields of mixed dimensions %s" % str(sorted(dims)))
    d = dims.pop()
    points = [dict(field=name, y0=field, T=T, tau=tau, eps=eps)
              for name, field in sorted(fields.items()) for eps in eps_values]

    def check(point, constant):
        T, tau, eps = point['T'], point['tau'], point['eps']
        run = ClosedLoopRun(point['y0'], T, tau, density_threshold(constant, T, tau, eps),
                            r=window_threshold(constant, T, eps, d))
        report = windowed_closed_loop(run, eps=eps)
        return report.measured + report.certificate <= report.bound_rhs

    return _threshold_calibration('windowed_closed_loop', d, points, check, grid, n_threads, verbose)
