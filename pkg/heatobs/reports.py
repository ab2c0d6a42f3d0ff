import csv
from dataclasses import dataclass, field

import numpy as np

# parameter columns in sort order, remaining parameters follow sorted by name
PARAMETER_ORDER = ['d', 'T', 'tau', 'N', 'eps', 'r', 's', 'k', 'alpha', 'G', 'rule', 'field', 'policy']
# columns every row starts with, in this order
LEADING_COLUMNS = ['d', 'T', 'tau', 'N', 'r', 'eps', 'measured', 'bound_rhs', 'ratio', 'certificate', 'policy']
RESULT_COLUMNS = ['measured', 'bound_rhs', 'ratio', 'certificate', 'bound_form', 'constant',
                  'asserted', 'passed', 'direction', 'backbone']


@dataclass
class BoundReport:
    """ One experiment point: a measured quantity against the right hand side of a bound.

    Arguments:
        bound_id (str): name of the bound
        measured (float): measured value
        bound_rhs (float): right hand side, the constant times bound_form
        certificate (float): upper bound on the total error of measured
        parameters (dict): experiment parameters
        bound_form (float): right hand side with constant one
        constant (float): constant used, None if not calibrated
        asserted (bool): whether the inequality is checked
        direction (str): 'upper' for measured <= bound_rhs, 'lower' for measured >= bound_rhs
        backbone (str): name of the computational pipeline
        extras (dict): further named values; boolean entries ending in '_ok' are
            additional checks that must hold for an asserted report to pass
    """
    bound_id: str
    measured: float
    bound_rhs: float
    certificate: float
    parameters: dict = field(default_factory=dict)
    bound_form: float = None
    constant: float = None
    asserted: bool = False
    direction: str = 'upper'
    backbone: str = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.certificate >= 0:
            raise ValueError("Invalid certificate %s" % str(self.certificate))
        if self.direction not in ('upper', 'lower'):
            raise ValueError("Invalid direction %s, expect 'upper' or 'lower'" % str(self.direction))
        if self.bound_form is None:
            self.bound_form = self.bound_rhs

    @property
    def ratio(self):
        if self.bound_rhs is None or not self.bound_rhs > 0:
            return None
        return self.measured / self.bound_rhs

    @property
    def form_ratio(self):
        """ measured over the bound with constant one, the quantity calibrations maximize.
        """
        if self.bound_form is None or not self.bound_form > 0:
            return None
        return self.measured / self.bound_form

    @property
    def resolved(self):
        return self.measured > 10 * self.certificate

    @property
    def passed(self):
        if self.bound_rhs is None:
            ok = True
        elif self.direction == 'upper':
            ok = self.measured - self.certificate <= self.bound_rhs
        else:
            ok = self.measured + self.certificate >= self.bound_rhs
        checks = [v for k, v in self.extras.items() if k.endswith('_ok') and isinstance(v, (bool, np.bool_))]
        return bool(ok and all(checks))

    @property
    def failed(self):
        return self.asserted and not self.passed

    def row(self):
        row = dict(bound_id=self.bound_id)
        row.update(self.parameters)
        row.update(measured=self.measured, bound_rhs=self.bound_rhs, ratio=self.ratio,
                   certificate=self.certificate, bound_form=self.bound_form, constant=self.constant,
                   asserted=self.asserted, passed=self.passed, direction=self.direction,
                   backbone=self.backbone)
        row.update(self.extras)
        return row


def make_report(bound_id, measured, certificate, bound_form, constant=None, asserted=None, **kwargs):
    """ Build a report whose right hand side is constant * bound_form.

    Without a constant the form itself is reported and the inequality is not asserted.
    """
    rhs = bound_form if constant is None else constant * bound_form
    if asserted is None:
        asserted = constant is not None
    return BoundReport(bound_id, float(measured), rhs, float(certificate), bound_form=bound_form,
                       constant=constant, asserted=asserted, **kwargs)


@dataclass
class ConstantCalibration:
    """ Empirical surrogate of a nonconstructive constant.

    Arguments:
        bound_id (str): the bound the constant belongs to
        dim (int): dimension
        value (float): fitted value
        sweep (list[dict]): the parameter points used
        max_ratio (float): largest observed ratio to the bound form
        n_points (int): number of resolved points
        n_skipped (int): number of points skipped because they were not resolved
        fingerprint (str): sweep fingerprint
    """
    bound_id: str
    dim: int
    value: float
    sweep: list
    max_ratio: float
    n_points: int
    n_skipped: int = 0
    fingerprint: str = ''

    def __post_init__(self):
        if self.value < self.max_ratio:
            raise ValueError("Calibrated value %g is below the max observed ratio %g" % (self.value, self.max_ratio))


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return '%i' % value
    if isinstance(value, (float, np.floating)):
        return '%.17g' % value
    if isinstance(value, (list, tuple)):
        return ' '.join(format_value(v) for v in value)
    return str(value)


def _sort_key(row, columns):
    key = []
    for col in columns:
        value = row.get(col)
        if value is None:
            key.append((0, 0., ''))
        elif isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
            key.append((1, float(value), ''))
        else:
            key.append((2, 0., format_value(value)))
    return key


def report_columns(rows):
    present = set()
    for row in rows:
        present.update(row.keys())
    leading = [c for c in LEADING_COLUMNS if c in present or c not in PARAMETER_ORDER]
    params = [p for p in PARAMETER_ORDER if p in present and p not in LEADING_COLUMNS]
    results = [c for c in RESULT_COLUMNS if c not in LEADING_COLUMNS]
    fixed = set(['bound_id', 'fingerprint', 'status'] + LEADING_COLUMNS + PARAMETER_ORDER + RESULT_COLUMNS)
    others = sorted(present - fixed)
    return leading + ['bound_id'] + params + results + others + ['fingerprint', 'status']


def write_reports(path, reports, fingerprint='', failed_rows=()):
    """ Write reports as csv with 17 significant digits, rows sorted by their parameters.

    Arguments:
        path (str): output path
        reports (list[BoundReport]): finished reports
        fingerprint (str): calibration fingerprint written to every row (default: '')
        failed_rows (list[dict]): parameters of points that failed certification (default: ())
    """
    rows = []
    for report in reports:
        row = report.row()
        row['status'] = 'failed' if report.failed else 'ok'
        rows.append(row)
    for params in failed_rows:
        row = dict(params)
        row['status'] = 'uncertified'
        rows.append(row)
    columns = report_columns(rows)
    sort_columns = ['bound_id'] + [c for c in PARAMETER_ORDER if c in columns]
    rows.sort(key=lambda row: _sort_key(row, sort_columns))
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            row.setdefault('fingerprint', fingerprint)
            writer.writerow([format_value(row.get(col)) for col in columns])
    return path


def read_reports(path):
    """ Read a report csv back as a list of string dicts.
    """
    with open(path, newline='') as f:
        return list(csv.DictReader(f))
