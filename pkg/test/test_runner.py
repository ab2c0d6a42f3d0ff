import os
import unittest
from shutil import rmtree


class TestRunner(unittest.TestCase):
    tmp_folder = './tmp'

    def setUp(self):
        os.makedirs(self.tmp_folder, exist_ok=True)
        self.table_path = os.path.join(self.tmp_folder, 'calibration.h5')

    def tearDown(self):
        try:
            rmtree(self.tmp_folder)
        except OSError:
            pass

    def test_config(self):
        from heatobs.runner import ExperimentConfig
        config = ExperimentConfig('observe', T=2., jobs=1)
        self.assertEqual(config.T, [2.])
        self.assertEqual(config.N, [1.])
        self.assertEqual(config.jobs, 1)
        self.assertGreaterEqual(ExperimentConfig('observe').jobs, 1)
        bad = [dict(command='plot'), dict(command='observe', dim=4), dict(command='observe', T=[-1.]),
               dict(command='observe', eps=[1.]), dict(command='observe', rule='sorted'),
               dict(command='observe', backbone='fft'), dict(command='window', k=[0.5]),
               dict(command='observe', jobs=0)]
        for kwargs in bad:
            with self.assertRaises(ValueError):
                ExperimentConfig(**kwargs)

    def test_config_file(self):
        from heatobs.runner import parse_config_file
        path = os.path.join(self.tmp_folder, 'config.txt')
        with open(path, 'w') as f:
            f.write("# observe two times\n")
            f.write("dim = 2  # plane\n")
            f.write("T = [1, 2]\n\n")
            f.write("rule = seeded\n")
        self.assertEqual(parse_config_file(path), dict(dim=2, T=[1, 2], rule='seeded'))
        with open(path, 'a') as f:
            f.write("colour = red\n")
        with self.assertRaises(ValueError):
            parse_config_file(path)

    def test_load_field(self):
        from heatobs.gaussian_field import gaussian, save_mixture
        from heatobs.runner import load_field
        name, mix = load_field('offset', 2)
        self.assertEqual(name, 'offset')
        self.assertEqual(mix.dim, 2)
        name, mix = load_field('[[1, [0.5], 2]]', 1)
        self.assertEqual(name, 'inline')
        self.assertEqual(mix.widths[0], 2.)
        path = os.path.join(self.tmp_folder, 'field.txt')
        save_mixture(path, gaussian(1, 2., [1.], 0.5))
        name, mix = load_field(path, 1)
        self.assertEqual(name, 'field.txt')
        self.assertEqual(mix.amplitudes[0], 2.)
        for spec, dim in (('cube', 1), (path, 2), ('[[1, [0.5], -1]]', 1)):
            with self.assertRaises(ValueError):
                load_field(spec, dim)

    def test_observe(self):
        from heatobs.reports import read_reports
        from heatobs.runner import ExperimentConfig, run
        outs = [os.path.join(self.tmp_folder, name) for name in ('a.csv', 'b.csv')]
        for out, jobs in zip(outs, (1, 2)):
            config = ExperimentConfig('observe', T=[1.], N=[1., 2.], eps=[0.1], out=out, jobs=jobs,
                                      table=self.table_path)
            reports = run(config)
            self.assertEqual(len(reports), 4)
        rows = read_reports(outs[0])
        self.assertEqual(len(rows), 4)
        self.assertEqual(sorted(row['bound_id'] for row in rows), ['perturbed_residual'] * 2 + ['residual'] * 2)
        for row in rows:
            self.assertEqual(row['field'], 'unit')
            self.assertEqual(row['status'], 'ok')
            self.assertEqual(row['asserted'], 'False')
        with open(outs[0]) as f, open(outs[1]) as g:
            self.assertEqual(f.read(), g.read())

    def test_calibrate_noop(self):
        from heatobs.runner import ExperimentConfig, calibrate
        table = calibrate(ExperimentConfig('calibrate', table=self.table_path))
        self.assertEqual(len(table), 0)
        self.assertFalse(os.path.exists(self.table_path))
        with self.assertRaises(ValueError):
            calibrate(ExperimentConfig('calibrate', bounds=['shannon'], table=self.table_path))
        self.assertFalse(os.path.exists(self.table_path))

    def test_cli(self):
        from heatobs.reports import read_reports
        from heatobs.scripts.heatobs_cli import main
        out = os.path.join(self.tmp_folder, 'counterexample.csv')
        code = main(['counterexample', '--T', '[1]', '--N', '[1, 2]', '--out', out, '--jobs', '1',
                     '--table', self.table_path])
        self.assertEqual(code, 0)
        rows = read_reports(out)
        self.assertEqual(len(rows), 2)
        for row in rows:
            self.assertEqual(row['bound_id'], 'counterexample')
            self.assertEqual(row['passed'], 'True')

        config_path = os.path.join(self.tmp_folder, 'config.txt')
        with open(config_path, 'w') as f:
            f.write("N = [4]\nout = %s\n" % os.path.join(self.tmp_folder, 'ignored.csv'))
        code = main(['counterexample', '--config', config_path, '--out', out, '--jobs', '1',
                     '--table', self.table_path])
        self.assertEqual(code, 0)
        rows = read_reports(out)
        self.assertEqual([row['N'] for row in rows], ['4'])
        self.assertFalse(os.path.exists(os.path.join(self.tmp_folder, 'ignored.csv')))

        self.assertEqual(main([]), 2)
        with self.assertRaises(SystemExit):
            main(['counterexample', '--N', '[0]', '--table', self.table_path])

    def test_cli_calibrate_failure(self):
        from unittest import mock
        from heatobs.scripts.heatobs_cli import main
        from heatobs.util import CertificationError
        error = CertificationError('No convergence', value=1., certificate=2.)
        with mock.patch('heatobs.scripts.heatobs_cli.calibrate', side_effect=error):
            code = main(['calibrate', '--bounds', '["residual"]', '--dim', '1', '--jobs', '1',
                         '--table', self.table_path])
        self.assertEqual(code, 3)
        self.assertFalse(os.path.exists(self.table_path))


if __name__ == '__main__':
    unittest.main()
