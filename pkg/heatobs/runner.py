import json
import os
import dataclasses
from dataclasses import dataclass
from itertools import product

from . import corpus
from . import gaussian_field as gf
from . import hs_analysis as hs
from . import impulse_control as ic
from . import observability as obs
from . import sinc_basis as sb
from . import spectral_field as sf
from . import weak_window as ww
from .calibration import CalibrationTable, default_table_path
from .perturbation import RULES
from .reports import write_reports
from .util import CertificationError, check_dimension, parallel_map

COMMANDS = ('observe', 'window', 'counterexample', 'control', 'hs', 'shannon', 'calibrate')
LIST_KEYS = ('T', 'N', 'eps', 'r', 's', 'k', 'tau', 'G', 'bounds')
POSITIVE_KEYS = ('T', 'N', 'r', 's', 'tau')
DEFAULT_OUT = 'heatobs_report.csv'
DEFAULT_CONTROL_EPS = 0.1


def _as_list(value):
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class ExperimentConfig:
    """ Parameters of one run of a subcommand.

    Arguments:
        command (str): one of COMMANDS
        dim (int): spatial dimension (default: 1)
        T, N, eps, r, s, k, tau (list): parameter lists, swept as a cartesian product
        G (list): growth functions of the counterexample (default: ['constant'])
        field (str or list): corpus field name, path to a mixture file or a
            list of [amplitude, [center...], width] (default: 'unit')
        rule (str): perturbation rule (default: 'alternating')
        backbone (str): pipeline of the residual (default: 'gaussian')
        tol (float): tolerance, None for the defaults of each operation (default: None)
        seed (int): seed of the pseudorandom rules (default: 0)
        out (str): output csv (default: 'heatobs_report.csv')
        jobs (int): number of workers, all available cores if None (default: None)
        bounds (list): bound ids to calibrate (default: [])
        table (str): calibration table, HEATOBS_CALIBRATION or the default path if None (default: None)
        verbose (bool): show progress (default: False)
    """
    command: str
    dim: int = 1
    T: list = dataclasses.field(default_factory=lambda: [1.])
    N: list = dataclasses.field(default_factory=lambda: [1.])
    eps: list = dataclasses.field(default_factory=list)
    r: list = dataclasses.field(default_factory=list)
    s: list = dataclasses.field(default_factory=list)
    k: list = dataclasses.field(default_factory=lambda: [1])
    tau: list = dataclasses.field(default_factory=lambda: [0.5])
    G: list = dataclasses.field(default_factory=lambda: ['constant'])
    field: object = 'unit'
    rule: str = 'alternating'
    backbone: str = 'gaussian'
    tol: float = None
    seed: int = 0
    out: str = DEFAULT_OUT
    jobs: int = None
    bounds: list = dataclasses.field(default_factory=list)
    table: str = None
    verbose: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError("Invalid command %s, expect one of %s" % (str(self.command), str(COMMANDS)))
        try:
            self.dim = check_dimension(self.dim)
        except (TypeError, ValueError):
            raise ValueError("Invalid config value dim = %s, expect 1, 2 or 3" % str(self.dim))
        for key in LIST_KEYS:
            setattr(self, key, _as_list(getattr(self, key)))
        for key in POSITIVE_KEYS:
            for value in getattr(self, key):
                if not isinstance(value, (int, float)) or not value > 0:
                    raise ValueError("Invalid config value %s = %s, expect positive numbers"
                                     % (key, str(getattr(self, key))))
        for value in self.eps:
            if not isinstance(value, (int, float)) or not 0 <= value < 1:
                raise ValueError("Invalid config value eps = %s, expect numbers in [0, 1)" % str(self.eps))
        for value in self.k:
            if int(value) != value or value < 0:
                raise ValueError("Invalid config value k = %s, expect nonnegative integers" % str(self.k))
        if self.rule not in RULES:
            raise ValueError("Invalid config value rule = %s, expect one of %s" % (str(self.rule), str(RULES)))
        if self.backbone not in obs.BACKBONES:
            raise ValueError("Invalid config value backbone = %s, expect one of %s"
                             % (str(self.backbone), str(obs.BACKBONES)))
        if self.tol is not None and not self.tol > 0:
            raise ValueError("Invalid config value tol = %s" % str(self.tol))
        if self.jobs is None:
            self.jobs = os.cpu_count() or 1
        if int(self.jobs) != self.jobs or self.jobs < 1:
            raise ValueError("Invalid config value jobs = %s" % str(self.jobs))
        self.jobs = int(self.jobs)
        self.seed = int(self.seed)


CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(ExperimentConfig))


def parse_config_file(path):
    """ Read flat 'key = value' lines; values are json decoded, other words are kept as strings.
    """
    values = {}
    with open(path) as f:
        for line_id, line in enumerate(f, 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ValueError("Invalid line %i in config %s, expect 'key = value'" % (line_id, path))
            key, value = (part.strip() for part in line.split('=', 1))
            if key not in CONFIG_KEYS:
                raise ValueError("Unknown config key %s in %s" % (key, path))
            try:
                values[key] = json.loads(value)
            except ValueError:
                values[key] = value
    return values


def load_field(spec, dim):
    """ Initial field from a corpus name, a mixture file or a json list of terms.

    Returns:
        str: name written to the reports
        GaussianMixtureField: the field
    """
    if isinstance(spec, str):
        if spec in corpus.standard_fields(dim):
            return spec, corpus.get_field(spec, dim)
        if os.path.exists(spec):
            mix = gf.load_mixture(spec)
            if mix.dim != dim:
                raise ValueError("Field in %s has dimension %i, expect %i" % (spec, mix.dim, dim))
            return os.path.basename(spec), mix
        try:
            spec = json.loads(spec)
        except ValueError:
            raise ValueError("Invalid config value field = %s, expect a corpus name, a path or a json list" % spec)
    try:
        terms = [gf.GaussianTerm(a, c, w) for a, c, w in spec]
        mix = gf.GaussianMixtureField(dim, terms)
    except (TypeError, ValueError) as e:
        raise ValueError("Invalid config value field = %s: %s" % (str(spec), str(e)))
    return 'inline', mix


#
# tasks of the subcommands
#


def _constant(table, bound_id, dim, tol):
    return table.get(dim, bound_id, fingerprint=corpus.expected_fingerprint(bound_id, dim, tol))


def _task(bound_id, params, fn, *args, **kwargs):
    return dict(bound_id=bound_id, **params), lambda: fn(*args, **kwargs)


def _observe(config, u0, constant):
    tasks = []
    for T, N in product(config.T, config.N):
        tasks.append(_task('residual', dict(T=T, N=N), obs.residual, u0, T, N, tol=config.tol,
                           backbone=config.backbone, constant=constant('residual')))
        for eps in config.eps:
            tasks.append(_task('perturbed_residual', dict(T=T, N=N, eps=eps), obs.perturbed_residual,
                               u0, T, N, eps, rule=config.rule, seed=config.seed, tol=config.tol,
                               constant=constant('perturbed_residual')))
    return tasks


def _window(config, u0, constant):
    tol = 1e-10 if config.tol is None else config.tol
    tasks = []
    for T, N, r, k in product(config.T, config.N, config.r or [1.], config.k):
        exp = ww.WindowedExperiment(u0, T, N, r, k=k)
        tasks.append(_task('windowed_residual', dict(T=T, N=N, r=r, k=k), ww.windowed_residual, exp,
                           tol=tol, constant=constant('windowed_residual'), bound=r >= 1))
    return tasks


def _counterexample(config, u0, constant):
    return [_task('counterexample', dict(T=T, N=N, G=G), ww.counterexample_gap, T, N, G, dim=config.dim)
            for T, N, G in product(config.T, config.N, config.G)]


def _control(config, u0, constant):
    tasks = []
    for T, tau, N, eps in product(config.T, config.tau, config.N, config.eps or [DEFAULT_CONTROL_EPS]):
        if not config.r:
            run = ic.ClosedLoopRun(u0, T, tau, N)
            tasks.append(_task('closed_loop', dict(T=T, tau=tau, N=N, eps=eps), ic.closed_loop_final, run,
                               eps=eps, constant=constant('closed_loop'), tol=config.tol))
        for r in config.r:
            run = ic.ClosedLoopRun(u0, T, tau, N, r=r)
            tasks.append(_task('windowed_closed_loop', dict(T=T, tau=tau, N=N, r=r, eps=eps),
                               ic.windowed_closed_loop, run, eps=eps,
                               constant=constant('windowed_closed_loop'),
                               tol=1e-10 if config.tol is None else config.tol))
    for N in config.N:
        fields = {'field': u0, 'witness': corpus.sinc_witness(N, config.dim)}
        tasks.append(_task('feedback_norm', dict(N=N), ic.feedback_norm_report, fields, N, witness='witness',
                           tol=config.tol))
    return tasks


def _local_sup(u0, r, s, constant):
    return hs.local_sup_report(u0, r, s=s, constant=constant)[1]


def _hs(config, u0, constant):
    d = config.dim
    orders = config.s or [d / 2. + 0.5]
    tasks = []
    for N in config.N:
        f = sf.from_gaussian(u0, sf.default_grid(d, N, extent=8))
        for s in orders:
            tasks.append(_task('hs_residual', dict(N=N, s=s), hs.hs_residual, f, N, s, tol=config.tol,
                               constant=constant('hs_residual')))
        low = sf.band_project(f, N, 'low')
        for eps in config.eps:
            tasks.append(_task('perturbed_bandlimited_gap', dict(N=N, eps=eps), hs.perturbed_bandlimited_gap,
                               low, N, eps, rule=config.rule, seed=config.seed))
    for r, s in product(config.r, orders):
        tasks.append(_task('local_sup', dict(r=r, s=s), _local_sup, u0, r, s, constant('local_sup')))
    return tasks


def _shannon(config, u0, constant):
    tol = 1e-8 if config.tol is None else config.tol
    tasks = []
    for N in config.N:
        f = sf.band_project(sf.from_gaussian(u0, sf.default_grid(config.dim, N, extent=1)), N, 'low')
        tasks.append(_task('shannon', dict(N=N), sb.shannon_check, f, N, tol=tol))
    return tasks


TASK_BUILDERS = {
    'observe': _observe,
    'window': _window,
    'counterexample': _counterexample,
    'control': _control,
    'hs': _hs,
    'shannon': _shannon
}


def experiment_tasks(config, table):
    """ List of (parameters, callable) pairs of the experiment, one per report.
    """
    if config.command not in TASK_BUILDERS:
        raise ValueError("Command %s does not produce reports" % config.command)
    name, u0 = load_field(config.field, config.dim)

    def constant(bound_id):
        return _constant(table, bound_id, config.dim, config.tol)

    tasks = TASK_BUILDERS[config.command](config, u0, constant)
    if config.command == 'counterexample':
        return [(dict(params, d=config.dim), fn) for params, fn in tasks]
    return [(dict(params, d=config.dim, field=name), fn) for params, fn in tasks]


def run(config, table=None):
    """ Run the experiment of config and write its reports as csv.

    Points that fail certification are written as flagged rows after the finished ones,
    then the first certification error is raised again.

    Arguments:
        config (ExperimentConfig): the configuration
        table (CalibrationTable): calibrated constants, loaded from config.table if None (default: None)
    Returns:
        list[BoundReport]: the reports
    """
    if table is None:
        table = CalibrationTable(default_table_path() if config.table is None else config.table)
    tasks = experiment_tasks(config, table)

    def _run(task):
        params, fn = task
        try:
            report = fn()
        except CertificationError as e:
            return None, (params, e)
        if 'field' in params:
            report.parameters['field'] = params['field']
        return report, None

    results = parallel_map(_run, tasks, n_threads=config.jobs, verbose=config.verbose)
    reports = [report for report, _ in results if report is not None]
    failures = [failure for _, failure in results if failure is not None]
    write_reports(config.out, reports, fingerprint=table.fingerprint(),
                  failed_rows=[params for params, _ in failures])
    if config.verbose:
        print("Wrote", len(reports), "reports to", config.out)
    if failures:
        params, error = failures[0]
        raise CertificationError("%i of %i points failed certification, first at %s: %s"
                                 % (len(failures), len(tasks), str(params), str(error)),
                                 value=error.value, certificate=error.certificate)
    return reports


def calibrate(config, table=None):
    """ Calibrate the bounds in config.bounds on the standard corpus and save the table.

    All calibrations finish before the table is touched, so a failure leaves it unchanged.
    An empty bound list is a no-op.

    Returns:
        CalibrationTable
    """
    path = default_table_path() if config.table is None else config.table
    table = CalibrationTable(path) if table is None else table
    if not config.bounds:
        return table
    known = set(corpus.EVALUATORS) | set(corpus.THRESHOLD_BOUNDS)
    for bound_id in config.bounds:
        if bound_id not in known:
            raise ValueError("Invalid config value bounds: %s, expect names from %s" % (bound_id, str(sorted(known))))

    calibrations = []
    for bound_id in config.bounds:
        if bound_id in corpus.THRESHOLD_BOUNDS:
            calibrations.append(corpus.calibrate_threshold(bound_id, config.dim, n_threads=config.jobs,
                                                           verbose=config.verbose))
        else:
            sweep = corpus.standard_sweep(bound_id, config.dim)
            calibrations.append(obs.calibrate_constant(bound_id, sweep, dim=config.dim, tol=config.tol,
                                                       n_threads=config.jobs, verbose=config.verbose))
    for calibration in calibrations:
        table.set(calibration)
    table.save(path if table.path is None else table.path, verbose=config.verbose)
    return table
