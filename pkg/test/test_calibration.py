import os
import unittest
import warnings
from shutil import rmtree


class TestCalibration(unittest.TestCase):
    tmp_folder = './tmp'

    def setUp(self):
        os.makedirs(self.tmp_folder, exist_ok=True)

    def tearDown(self):
        try:
            rmtree(self.tmp_folder)
        except OSError:
            pass

    def _calibration(self, bound_id='residual', dim=1, value=2.5, fingerprint='abc'):
        from heatobs.reports import ConstantCalibration
        return ConstantCalibration(bound_id, dim, value, [dict(d=dim, T=1., N=2.)], 2., 4,
                                   n_skipped=1, fingerprint=fingerprint)

    def test_sweep_fingerprint(self):
        from heatobs.calibration import sweep_fingerprint
        points = [dict(d=1, T=1., N=2.), dict(d=1, T=4., N=1.)]
        fp = sweep_fingerprint('residual', 1, points, None)
        self.assertEqual(fp, sweep_fingerprint('residual', 1, points[::-1], None))
        self.assertEqual(fp, sweep_fingerprint('residual', 1, [dict(N=2., T=1., d=1), points[1]], None))
        self.assertNotEqual(fp, sweep_fingerprint('residual', 2, points, None))
        self.assertNotEqual(fp, sweep_fingerprint('residual', 1, points, 1e-6))
        self.assertNotEqual(fp, sweep_fingerprint('sample_l2', 1, points, None))
        self.assertNotEqual(fp, sweep_fingerprint('residual', 1, points[:1], None))

    def test_table(self):
        from heatobs.calibration import CalibrationTable
        path = os.path.join(self.tmp_folder, 'table.h5')
        table = CalibrationTable(path)
        self.assertEqual(len(table), 0)
        self.assertEqual(table.fingerprint(), '')
        self.assertIsNone(table.get(1, 'residual'))

        table.set(self._calibration())
        table.set(self._calibration(bound_id='sample_l2', dim=2, value=3.))
        self.assertEqual(table.get(1, 'residual', 'abc'), 2.5)
        self.assertEqual(len(table.fingerprint()), 12)
        table.save()
        self.assertTrue(os.path.exists(path))

        loaded = CalibrationTable(path)
        self.assertEqual(len(loaded), 2)
        self.assertIn((2, 'sample_l2'), loaded)
        self.assertEqual(loaded.get(1, 'residual', 'abc'), 2.5)
        self.assertEqual(loaded.get(2, 'sample_l2'), 3.)
        self.assertEqual(loaded.entries[(1, 'residual')]['n_skipped'], 1)
        self.assertEqual(loaded.fingerprint(), table.fingerprint())

    def test_fingerprint_mismatch(self):
        from heatobs.calibration import CalibrationTable
        table = CalibrationTable()
        table.set(self._calibration())
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter('always')
            self.assertIsNone(table.get(1, 'residual', 'other'))
        self.assertEqual(len(w), 1)

    def test_archive(self):
        from heatobs.calibration import CalibrationTable
        path = os.path.join(self.tmp_folder, 'table.h5')
        table = CalibrationTable(path)
        table.set(self._calibration())
        table.save()
        table.set(self._calibration(value=4.))
        table.save()
        table.save()
        self.assertTrue(os.path.exists(os.path.join(self.tmp_folder, 'table.v1.h5')))
        self.assertTrue(os.path.exists(os.path.join(self.tmp_folder, 'table.v2.h5')))
        self.assertEqual(CalibrationTable(os.path.join(self.tmp_folder, 'table.v1.h5')).get(1, 'residual'), 2.5)
        self.assertEqual(CalibrationTable(path).get(1, 'residual'), 4.)

        with self.assertRaises(ValueError):
            CalibrationTable().save()


if __name__ == '__main__':
    unittest.main()
