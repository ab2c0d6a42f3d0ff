import hashlib
import json
import os
import shutil
import warnings

import numpy as np

from .__version__ import __version__
from .util import open_file

DEFAULT_TABLE = 'heatobs_calibration.h5'
ATTRIBUTES = ('value', 'fingerprint', 'version', 'max_ratio', 'n_points', 'n_skipped')


def _canonical(value):
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in sorted(value.items())}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float('%.17g' % value)
    return value


def sweep_fingerprint(bound_id, dim, points, tol):
    """ sha1 of the json encoded bound id, dimension, sorted sweep points and tolerance.
    """
    encoded = sorted(json.dumps(_canonical(p), sort_keys=True) for p in points)
    payload = json.dumps([bound_id, int(dim), encoded, _canonical(tol)], sort_keys=True)
    return hashlib.sha1(payload.encode('utf-8')).hexdigest()


def archive_path(path):
    """ First free path of the form <stem>.v<k><ext>.
    """
    stem, ext = os.path.splitext(path)
    k = 1
    while os.path.exists('%s.v%i%s' % (stem, k, ext)):
        k += 1
    return '%s.v%i%s' % (stem, k, ext)


def default_table_path():
    return os.environ.get('HEATOBS_CALIBRATION', DEFAULT_TABLE)


class CalibrationTable:
    """ Fitted constants per (dimension, bound id) with sweep fingerprints, stored in hdf5.

    Arguments:
        path (str): path of the table, loaded if it exists (default: None)
    """
    def __init__(self, path=None):
        self.path = path
        self.entries = {}
        if path is not None and os.path.exists(path):
            self.load(path)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    def load(self, path):
        with open_file(path, 'r') as f:
            for dim_key, group in f.items():
                dim = int(dim_key[1:])
                for bound_id, sub in group.items():
                    attrs = sub.attrs
                    self.entries[(dim, bound_id)] = {
                        'value': float(attrs['value']),
                        'fingerprint': str(attrs['fingerprint']),
                        'version': str(attrs['version']),
                        'max_ratio': float(attrs['max_ratio']),
                        'n_points': int(attrs['n_points']),
                        'n_skipped': int(attrs['n_skipped'])
                    }

    def set(self, calibration):
        """ Store a ConstantCalibration.
        """
        self.entries[(int(calibration.dim), calibration.bound_id)] = {
            'value': float(calibration.value),
            'fingerprint': calibration.fingerprint,
            'version': __version__,
            'max_ratio': float(calibration.max_ratio),
            'n_points': int(calibration.n_points),
            'n_skipped': int(calibration.n_skipped)
        }

    def get(self, dim, bound_id, fingerprint=None):
        """ Fitted constant, or None if missing or calibrated on a different sweep.
        """
        entry = self.entries.get((int(dim), bound_id))
        if entry is None:
            return None
        if fingerprint is not None and entry['fingerprint'] != fingerprint:
            warnings.warn("Calibration of %s in dimension %i was made on a different sweep, recalibration needed"
                          % (bound_id, dim))
            return None
        return entry['value']

    def fingerprint(self):
        """ Combined fingerprint of all entries, written to every report row.
        """
        items = sorted('%i/%s/%s/%.17g' % (dim, bid, e['fingerprint'], e['value'])
                       for (dim, bid), e in self.entries.items())
        return hashlib.sha1('\n'.join(items).encode('utf-8')).hexdigest()[:12] if items else ''

    def save(self, path=None, verbose=False):
        """ Write the table; an existing file is first archived as <stem>.v<k><ext>.
        """
        path = self.path if path is None else path
        if path is None:
            raise ValueError("No path given for the calibration table")
        if os.path.exists(path):
            archived = archive_path(path)
            shutil.move(path, archived)
            if verbose:
                print("Archived previous calibration table to", archived)
        with open_file(path, 'w') as f:
            for (dim, bound_id), entry in sorted(self.entries.items()):
                group = f.require_group('d%i' % dim)
                sub = group.require_group(bound_id)
                for name in ATTRIBUTES:
                    sub.attrs[name] = entry[name]
        self.path = path
        return path
