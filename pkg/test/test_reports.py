import os
import unittest
from shutil import rmtree

import numpy as np


class TestReports(unittest.TestCase):
    tmp_folder = './tmp'

    def setUp(self):
        os.makedirs(self.tmp_folder, exist_ok=True)

    def tearDown(self):
        try:
            rmtree(self.tmp_folder)
        except OSError:
            pass

    def test_make_report(self):
        from heatobs.reports import make_report
        report = make_report('residual', 1., 0.1, 2., parameters=dict(d=1, T=1., N=2.))
        self.assertFalse(report.asserted)
        self.assertEqual(report.bound_rhs, 2.)
        self.assertEqual(report.ratio, 0.5)
        self.assertEqual(report.form_ratio, 0.5)
        self.assertTrue(report.resolved)

        report = make_report('residual', 1., 0.1, 2., constant=0.25)
        self.assertTrue(report.asserted)
        self.assertEqual(report.bound_rhs, 0.5)
        self.assertTrue(report.failed)

        # the certificate counts in favour of the bound
        report = make_report('residual', 1., 0.6, 2., constant=0.25)
        self.assertTrue(report.passed)
        self.assertFalse(report.resolved)

    def test_direction_and_checks(self):
        from heatobs.reports import make_report
        report = make_report('counterexample', 1., 0.1, 1.05, constant=1., direction='lower')
        self.assertTrue(report.passed)
        report = make_report('counterexample', 0.5, 0.1, 1.05, constant=1., direction='lower')
        self.assertTrue(report.failed)
        report = make_report('heat_local', 1., 0., 2., constant=1., extras=dict(lattice_ok=False, count=3))
        self.assertFalse(report.passed)
        with self.assertRaises(ValueError):
            make_report('residual', 1., -1., 2.)
        with self.assertRaises(ValueError):
            make_report('residual', 1., 0., 2., direction='sideways')

    def test_calibration_value(self):
        from heatobs.reports import ConstantCalibration
        ConstantCalibration('residual', 1, 2., [], 2., 3)
        with self.assertRaises(ValueError):
            ConstantCalibration('residual', 1, 1., [], 2., 3)

    def test_write_reports(self):
        from heatobs.reports import make_report, read_reports, write_reports
        reports = [make_report('residual', 1. / 3, 1e-12, 1., parameters=dict(d=1, T=T, N=N))
                   for T in (2., 1.) for N in (4., 1.)]
        path = os.path.join(self.tmp_folder, 'reports.csv')
        write_reports(path, reports, fingerprint='abc', failed_rows=[dict(bound_id='residual', d=1, T=0.5, N=1.)])
        rows = read_reports(path)
        self.assertEqual(len(rows), 5)
        self.assertEqual([(row['T'], row['N']) for row in rows],
                         [('0.5', '1'), ('1', '1'), ('1', '4'), ('2', '1'), ('2', '4')])
        self.assertEqual(rows[0]['status'], 'uncertified')
        for row in rows[1:]:
            self.assertEqual(row['fingerprint'], 'abc')
            self.assertEqual(row['status'], 'ok')
            self.assertEqual(float(row['measured']), 1. / 3)
            self.assertEqual(row['measured'], '%.17g' % (1. / 3))
        with open(path) as f:
            header = f.readline().strip().split(',')
        for col in ('measured', 'bound_rhs', 'ratio', 'certificate', 'fingerprint'):
            self.assertIn(col, header)
        self.assertEqual(header[:8], ['d', 'T', 'N', 'measured', 'bound_rhs', 'ratio', 'certificate', 'bound_id'])
        self.assertEqual(header[-2:], ['fingerprint', 'status'])

        # byte identical output
        other = os.path.join(self.tmp_folder, 'other.csv')
        write_reports(other, reports[::-1], fingerprint='abc',
                      failed_rows=[dict(bound_id='residual', d=1, T=0.5, N=1.)])
        with open(path) as f, open(other) as g:
            self.assertEqual(f.read(), g.read())

    def test_format_value(self):
        from heatobs.reports import format_value
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value(True), 'True')
        self.assertEqual(format_value(np.int64(3)), '3')
        self.assertEqual(format_value(0.1), '0.10000000000000001')
        self.assertEqual(format_value((1, 2)), '1 2')


if __name__ == '__main__':
    unittest.main()
