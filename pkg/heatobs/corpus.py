from functools import partial
from itertools import product

import numpy as np

from . import gaussian_field as gf
from . import hs_analysis as hs
from . import impulse_control as ic
from . import observability as obs
from . import sinc_basis as sb
from . import spectral_field as sf
from . import weak_window as ww
from .calibration import sweep_fingerprint
from .util import check_dimension

SWEEP_T = (0.25, 1., 4.)
SWEEP_N = (1., 2., 4., 8.)
SWEEP_EPS = (0.05, 0.1, 0.2)
SWEEP_R = (2., 4., 8., 16.)
# bounds calibrated by the smallest grid constant reaching the target ratio
THRESHOLD_BOUNDS = ('closed_loop', 'windowed_closed_loop')
THRESHOLD_T = 1.
THRESHOLD_TAU = 0.5
THRESHOLD_EPS = {'closed_loop': (0.1, 0.01), 'windowed_closed_loop': (0.1,)}


def standard_fields(dim):
    """ The standard corpus of initial fields in dimension dim.

    A unit, a narrow, an off-center and a wide Gaussian and a two-term mixture with
    terms of opposite sign.
    """
    d = check_dimension(dim)
    offset = np.full(d, 0.7)
    left, right = np.zeros(d), np.zeros(d)
    left[0], right[0] = -1., 1.
    pair = gf.GaussianMixtureField.from_arrays(d, [1., -0.5], [left, right], [0.5, 1.])
    return {'unit': gf.gaussian(d, 1., None, 1.),
            'narrow': gf.gaussian(d, 1., None, 0.25),
            'offset': gf.gaussian(d, 1., offset, 0.5),
            'pair': pair,
            'wide': gf.gaussian(d, 1., None, 4.)}


def get_field(name, dim):
    fields = standard_fields(dim)
    if name not in fields:
        raise ValueError("Invalid corpus field %s, expect one of %s" % (str(name), str(sorted(fields))))
    return fields[name]


def sinc_witness(N, dim):
    """ N^{d/2} f_{N,0}, the field at which the feedback law attains its norm.
    """
    d = check_dimension(dim)
    return sb.synthesize(N, sb.delta_samples(N, d, value=N ** (d / 2.))).to_spectral()


def _points(dim, **params):
    names = sorted(params)
    return [dict(d=dim, **dict(zip(names, values))) for values in product(*(params[n] for n in names))]


def standard_sweep(bound_id, dim):
    """ Parameter points of the calibration sweep of a bound over the standard corpus.

    Arguments:
        bound_id (str): name of a registered bound
        dim (int): dimension
    Returns:
        list[dict]: the points, each with the keys 'd' and 'field'
    """
    d = check_dimension(dim)
    if bound_id not in EVALUATORS:
        raise ValueError("Invalid bound %s, expect one of %s" % (str(bound_id), str(sorted(EVALUATORS))))
    fields = sorted(standard_fields(d))
    if bound_id in ('residual', 'sample_l2'):
        return _points(d, field=fields, T=SWEEP_T, N=SWEEP_N)
    elif bound_id in ('perturbed_residual', 'perturbed_sample_gap'):
        return _points(d, field=fields, T=(1.,), N=(1., 2., 4.), eps=SWEEP_EPS, rule=('alternating',))
    elif bound_id == 'windowed_residual':
        return _points(d, field=fields, T=(1.,), N=(2.,), r=SWEEP_R, k=(1,))
    elif bound_id in ('control_sobolev', 'hs_residual'):
        return _points(d, field=fields, N=(1., 2., 4.), s=(d / 2. + 0.5, d / 2. + 1.))
    elif bound_id == 'local_sup':
        return _points(d, field=fields, r=(0.5, 1., 2.), s=(float(d),))
    elif bound_id == 'heat_local':
        return _points(d, field=fields, T=SWEEP_T, r=(0.5, 1., 2.))
    raise ValueError("Bound %s has no standard sweep" % bound_id)


def threshold_sweep(bound_id, dim):
    """ Points of the threshold calibrations, without the fields themselves.
    """
    d = check_dimension(dim)
    return [dict(field=name, T=THRESHOLD_T, tau=THRESHOLD_TAU, eps=eps)
            for name in sorted(standard_fields(d)) for eps in THRESHOLD_EPS[bound_id]]


def expected_fingerprint(bound_id, dim, tol=None):
    """ Fingerprint a calibration of bound_id on the standard corpus carries.
    """
    if bound_id in THRESHOLD_BOUNDS:
        return sweep_fingerprint(bound_id, dim, threshold_sweep(bound_id, dim), list(ic.CONSTANT_GRID))
    return sweep_fingerprint(bound_id, dim, standard_sweep(bound_id, dim), tol)


def calibrate_threshold(bound_id, dim, n_threads=1, verbose=False):
    """ Threshold constant of a closed loop bound on the standard corpus.
    """
    fields = standard_fields(dim)
    kwargs = dict(T=THRESHOLD_T, tau=THRESHOLD_TAU, eps_values=THRESHOLD_EPS[bound_id],
                  n_threads=n_threads, verbose=verbose)
    if bound_id == 'closed_loop':
        return ic.calibrate_density_constant(fields, **kwargs)
    elif bound_id == 'windowed_closed_loop':
        return ic.calibrate_window_constant(fields, **kwargs)
    raise ValueError("Bound %s has no threshold calibration" % str(bound_id))


#
# evaluators: parameter point -> BoundReport
#


def _field(point):
    return get_field(point['field'], point['d'])


def _residual(point, tol=None):
    return obs.residual(_field(point), point['T'], point['N'], tol=tol)


def _sample_l2(point, tol=None):
    return obs.sample_l2_report(_field(point), point['T'], point['N'], tol=tol)


def _perturbed(fn, point, tol=None):
    return fn(_field(point), point['T'], point['N'], point['eps'], rule=point.get('rule', 'alternating'),
              seed=point.get('seed', 0), tol=tol)


def _windowed_residual(point, tol=None):
    exp = ww.WindowedExperiment(_field(point), point['T'], point['N'], point['r'], k=point.get('k', 1))
    return ww.windowed_residual(exp, tol=1e-10 if tol is None else tol)


def _control_sobolev(point, tol=None):
    v = ic.feedback_gain(_field(point), point['N'])
    return ic.control_sobolev_norm(v, point['s'], tol=1e-10 if tol is None else tol)


def _hs_residual(point, tol=None):
    d, N = point['d'], point['N']
    f = sf.from_gaussian(_field(point), sf.default_grid(d, N, extent=8))
    return hs.hs_residual(f, N, point['s'], tol=tol)


def _local_sup(point, tol=None):
    return hs.local_sup_report(_field(point), point['r'], s=point.get('s'))[1]


def _heat_local(point, tol=None):
    return hs.heat_local_bounds(_field(point), point['T'], point['r'])


EVALUATORS = {
    'residual': _residual,
    'sample_l2': _sample_l2,
    'perturbed_residual': partial(_perturbed, obs.perturbed_residual),
    'perturbed_sample_gap': partial(_perturbed, obs.perturbed_sample_gap),
    'windowed_residual': _windowed_residual,
    'control_sobolev': _control_sobolev,
    'hs_residual': _hs_residual,
    'local_sup': _local_sup,
    'heat_local': _heat_local
}


def get_evaluator(bound_id):
    """ Function (point, tol=None) -> BoundReport of a bound with an empirical constant.
    """
    if bound_id not in EVALUATORS:
        raise ValueError("Invalid bound %s, expect one of %s" % (str(bound_id), str(sorted(EVALUATORS))))
    return EVALUATORS[bound_id]
