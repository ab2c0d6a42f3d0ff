#! /usr/bin/python

import argparse
import json
import sys

from heatobs.runner import COMMANDS, ExperimentConfig, LIST_KEYS, calibrate, parse_config_file, run
from heatobs.util import CertificationError


def _add_common(parser):
    parser.add_argument('--dim', type=int, default=None,
                        help='spatial dimension, 1, 2 or 3')
    parser.add_argument('--tol', type=float, default=None,
                        help='tolerance, defaults to the tolerance of each operation')
    parser.add_argument('--seed', type=int, default=None,
                        help='seed of the pseudorandom perturbation rules')
    parser.add_argument('--out', type=str, default=None,
                        help='path to the output csv')
    parser.add_argument('--config', type=str, default=None,
                        help='config file with key = value lines, overridden by the command line')
    parser.add_argument('--jobs', type=int, default=None,
                        help='number of workers, defaults to the number of cores')
    parser.add_argument('--table', type=str, default=None,
                        help='path to the calibration table')
    parser.add_argument('--verbose', action='store_true', default=None,
                        help='show progress')


def _add_list(parser, name, help_):
    parser.add_argument('--%s' % name, type=str, default=None,
                        help='%s, expects json encoded list' % help_)


def _add_field(parser):
    parser.add_argument('--field', type=str, default=None,
                        help='initial field: corpus name, path to a mixture file or json list of '
                             '[amplitude, [center...], width]')


def get_parser():
    parser = argparse.ArgumentParser(description='Asymptotic observability experiments for the heat equation.')
    subparsers = parser.add_subparsers(dest='command')
    help_ = {'observe': 'residual of the sampling identity, optionally with perturbed lattices',
             'window': 'reconstruction from the samples in a finite window',
             'counterexample': 'lower bound for windows growing like G(N)',
             'control': 'closed loop with a single feedback impulse',
             'hs': 'sampling residual and local sup norms in Bessel potential spaces',
             'shannon': 'exact reconstruction of band-limited fields',
             'calibrate': 'fit the constants of the bounds on the standard corpus'}
    lists = {'observe': ['T', 'N', 'eps'],
             'window': ['T', 'N', 'r', 'k'],
             'counterexample': ['T', 'N', 'G'],
             'control': ['T', 'tau', 'N', 'eps', 'r'],
             'hs': ['N', 's', 'r', 'eps'],
             'shannon': ['N'],
             'calibrate': ['bounds']}
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=help_[command])
        _add_common(sub)
        for name in lists[command]:
            _add_list(sub, name, 'values of %s' % name)
        if command not in ('counterexample', 'calibrate'):
            _add_field(sub)
        if command in ('observe', 'hs'):
            sub.add_argument('--rule', type=str, default=None,
                             help='perturbation rule: identity, alternating, radial or seeded')
        if command == 'observe':
            sub.add_argument('--backbone', type=str, default=None,
                             help='pipeline of the residual: gaussian, samples or spectral')
    return parser


def config_from_args(args):
    """ Config file values overridden by the flags given on the command line.
    """
    values = {} if args.config is None else parse_config_file(args.config)
    values.pop('command', None)
    for key, value in vars(args).items():
        if key in ('command', 'config') or value is None:
            continue
        if key in LIST_KEYS:
            try:
                value = json.loads(value)
            except ValueError as e:
                raise ValueError("Decoding %s as json failed with %s" % (key, str(e)))
        values[key] = value
    return ExperimentConfig(command=args.command, **values)


def main(argv=None):
    parser = get_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage()
        return 2
    try:
        config = config_from_args(args)
    except ValueError as e:
        parser.error(str(e))

    try:
        if config.command == 'calibrate':
            calibrate(config)
            return 0
        reports = run(config)
    except CertificationError as e:
        print("Certification failed:", str(e), file=sys.stderr)
        return 3
    failed = [report for report in reports if report.failed]
    for report in failed:
        print("Bound %s failed at %s: measured %g, bound %g (%s)"
              % (report.bound_id, str(report.parameters), report.measured, report.bound_rhs, report.direction),
              file=sys.stderr)
    return 1 if failed else 0


if __name__ == '__main__':
    sys.exit(main())
