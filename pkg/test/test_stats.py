"""Test ensemble statistics"""

from dataclasses import replace
import math
from knotscope.betti import FeatureRecord
from knotscope.diagram import KnotType
from knotscope.geometry import GeometryRecord
from knotscope.rips import Bar, Barcode
from knotscope.stats import (ALL, ExperimentPlan, LinearFit, Observables,
                             StatsError, average_curve_maxima,
                             average_feature_by_type,
                             correlate_by_group, fits, linear_fit, pearson,
                             spearman)
import knotscope.test


def feature(knot_id, length, knot_type, value, n_bars=1):
    """Construct a feature record"""
    return FeatureRecord(knot_id, length, knot_type, value, n_bars,
                         value / 2, 0.1, False, 2)


def geometry(volume, acn=1.0):
    """Construct a geometry record"""
    return GeometryRecord(rs_radius=volume ** (1 / 3), rs_volume=volume,
                          hull_volume=volume / 10, rg=volume / 5,
                          total_curvature=7.0, total_torsion=acn * 2,
                          acn=acn)


class CorrelationTestCase(knotscope.test.TestCase):
    """Correlation coefficient tests"""

    def test_pearson(self):
        """Test Pearson correlation"""
        xs = [1.0, 2.0, 3.0, 4.0]
        self.assertAlmostEqual(pearson(xs, [2 * x + 3 for x in xs]), 1)
        self.assertAlmostEqual(pearson(xs, [-x for x in xs]), -1)
        self.assertAlmostEqual(pearson([1, 2, 3], [1, 3, 2]), 0.5)
        self.assertIsNone(pearson(xs, [5.0] * 4))
        with self.assertRaises(StatsError):
            pearson(xs, xs[:3])
        with self.assertRaises(StatsError):
            pearson([1.0], [2.0])

    def test_affine(self):
        """Test invariance under positive affine maps"""
        xs = [0.3, 1.7, 2.2, 5.1, 4.0]
        ys = [1.1, 0.4, 2.9, 3.3, 2.0]
        r = pearson(xs, ys)
        self.assertAlmostEqual(pearson([3 * x - 1 for x in xs], ys), r)
        self.assertAlmostEqual(pearson([-x for x in xs], ys), -r)
        self.assertLessEqual(abs(r), 1)

    def test_spearman(self):
        """Test rank correlation"""
        xs = [1.0, 2.0, 3.0, 4.0]
        self.assertAlmostEqual(spearman(xs, [x ** 3 for x in xs]), 1)
        self.assertAlmostEqual(spearman(xs, [4.0, 3.0, 2.0, 1.0]), -1)
        self.assertIsNone(spearman(xs, [0.0] * 4))


class GroupTestCase(knotscope.test.TestCase):
    """Grouped correlation tests"""

    def setUp(self):
        self.features = [
            feature('a', 10, '0_1', 1.0),
            feature('b', 10, '0_1', 2.0),
            feature('c', 10, '3_1', 3.0),
            feature('d', 20, '0_1', 4.0),
            feature('e', 20, '0_1', 5.0),
        ]
        self.geometry = {
            'a': geometry(3.0), 'b': geometry(2.0), 'c': geometry(1.0),
            'd': geometry(1.0), 'e': geometry(2.0),
        }

    def test_length(self):
        """Test grouping by length"""
        table = correlate_by_group(self.features, self.geometry,
                                   pairs=[('I', 'rs_volume')])
        self.assertEqual(len(table), 2)
        self.assertAlmostEqual(table.lookup('I', 'rs_volume', 10), -1)
        self.assertAlmostEqual(table.lookup('I', 'rs_volume', 20), 1)
        self.assertIsNone(table.lookup('I', 'rs_volume', 30))
        self.assertEqual([x.n for x in table], [3, 2])
        self.assertEqual({x.group for x in table}, {ALL})

    def test_knot_type(self):
        """Test grouping by knot type"""
        with self.assertLogs('knotscope.stats', 'WARNING'):
            table = correlate_by_group(self.features, self.geometry,
                                       group_by='knot_type',
                                       pairs=[('I', 'rs_volume')])
        self.assertEqual(len(table), 2)
        self.assertAlmostEqual(table.lookup('I', 'rs_volume', 10, '0_1'), -1)
        self.assertIsNone(table.lookup('I', 'rs_volume', 10, '3_1'))

    def test_undefined(self):
        """Test omission of undefined correlations"""
        table = correlate_by_group(self.features, self.geometry,
                                   pairs=[('I', 'curvature'),
                                          ('I', 'rs_volume')])
        self.assertEqual([x.y for x in table], ['rs_volume', 'rs_volume'])

    def test_default_pairs(self):
        """Test the default observable pairs"""
        table = correlate_by_group(self.features, self.geometry)
        self.assertAlmostEqual(table.lookup('I', 'rg', 10), -1)
        self.assertIsNone(table.lookup('I', 'curvature', 10))
        self.assertEqual(table.method, 'pearson')

    def test_missing_geometry(self):
        """Test features without geometry"""
        with self.assertLogs('knotscope.stats', 'WARNING'):
            table = correlate_by_group(self.features + [
                feature('z', 10, '0_1', 9.0)
            ], self.geometry, pairs=[('I', 'rs_volume')])
        self.assertEqual(len(table), 2)

    def test_invalid(self):
        """Test rejection of invalid arguments"""
        with self.assertRaises(StatsError):
            correlate_by_group(self.features, self.geometry, group_by='seed')
        with self.assertRaises(StatsError):
            correlate_by_group(self.features, self.geometry,
                               method='kendall')
        with self.assertRaises(StatsError):
            correlate_by_group(self.features, self.geometry,
                               pairs=[('I', 'writhe')])

    def test_observables(self):
        """Test observable lookup"""
        obs = Observables(self.features[0], self.geometry['a'])
        self.assertEqual(obs['I'], 1.0)
        self.assertEqual(obs['M'], 0.5)
        self.assertEqual(obs['rs_volume'], 3.0)
        self.assertEqual(obs['acn'], 1.0)
        self.assertTrue(math.isnan(obs['small_angles']))
        obs = Observables(replace(self.features[0], small_angles=4),
                          self.geometry['a'])
        self.assertEqual(obs['small_angles'], 4.0)

    def test_small_angles(self):
        """Test correlation of small angle counts with curve maxima"""
        counts = {'a': 1, 'b': 2, 'c': 3, 'd': 5}
        records = [replace(x, small_angles=counts.get(x.id),
                           curve_max=2 * counts.get(x.id, 0))
                   for x in self.features]
        table = correlate_by_group(records, self.geometry)
        self.assertAlmostEqual(table.lookup('small_angles', 'curve_max', 10),
                               1)
        self.assertIsNone(table.lookup('small_angles', 'curve_max', 20))
        row = next(x for x in table if x.x == 'small_angles')
        self.assertEqual(row.n, 3)


class AverageTestCase(knotscope.test.TestCase):
    """Average and fit tests"""

    def test_average(self):
        """Test mean and standard error"""
        rows = average_feature_by_type([
            feature('a', 10, '0_1', 1.0),
            feature('b', 10, '0_1', 3.0),
            feature('c', 10, '3_1', 2.0),
            feature('d', 20, '0_1', 4.0),
            feature('e', 20, '0_1', 4.0),
        ])
        self.assertEqual([(x.knot_type, x.length) for x in rows],
                         [('0_1', 10), ('0_1', 20), ('3_1', 10)])
        self.assertAlmostEqual(rows[0].mean, 2)
        self.assertAlmostEqual(rows[0].stderr, 1)
        self.assertEqual(rows[1].stderr, 0)
        self.assertEqual(rows[2].stderr, 0)
        self.assertEqual(rows[2].n, 1)

    def test_curve_max(self):
        """Test averaging of curve maxima"""
        rows = average_feature_by_type([feature('a', 10, '0_1', 1.0)],
                                       feature='curve_max')
        self.assertEqual(rows[0].mean, 2)
        self.assertEqual(rows[0].feature, 'curve_max')
        with self.assertRaises(StatsError):
            average_feature_by_type([], feature='rg')

    def test_average_curve(self):
        """Test maxima of average Betti curves"""
        records = [feature('a', 10, '0_1', 1.0), feature('b', 10, '0_1', 1.0),
                   feature('c', 10, '3_1', 1.0), feature('d', 20, '0_1', 1.0),
                   feature('e', 20, '0_1', 1.0)]
        barcodes = {
            'a': Barcode(dim1=(Bar(0.2, 0.6), Bar(0.3, 0.5))),
            'b': Barcode(dim1=(Bar(0.7, 0.9),)),
            'c': Barcode(dim1=(Bar(0.2, 0.4), Bar(0.2, 0.3), Bar(0.25, 0.5))),
            'd': Barcode(dim1=(Bar(0.2, 0.4),)),
        }
        rows = average_curve_maxima(records, barcodes)
        self.assertEqual([(x.knot_type, x.length) for x in rows],
                         [('0_1', 10), ('0_1', 20), ('3_1', 10)])
        self.assertEqual([x.mean for x in rows], [1.0, 1.0, 3.0])
        self.assertEqual([x.n for x in rows], [2, 1, 1])
        self.assertEqual({x.feature for x in rows}, {'curve_max'})
        self.assertTrue(all(math.isnan(x.stderr) for x in rows))

    def test_average_curve_spike(self):
        """Test maxima of average spike filtered Betti curves"""
        barcode = Barcode(dim1=(Bar(0.11, 0.12), Bar(0.11, 0.13),
                                Bar(0.5, 0.9)))
        plain = feature('a', 10, '0_1', 1.0)
        rows = average_curve_maxima([plain], {'a': barcode})
        self.assertEqual(rows[0].mean, 2)
        rows = average_curve_maxima([replace(plain, spike_filtered=True)],
                                    {'a': barcode})
        self.assertEqual(rows[0].mean, 1)

    def test_small_angle_average(self):
        """Test averaging of small angle counts"""
        records = [replace(feature('a', 10, '0_1', 1.0), small_angles=2),
                   replace(feature('b', 10, '0_1', 1.0), small_angles=4),
                   feature('c', 10, '0_1', 1.0)]
        rows = average_feature_by_type(records, 'small_angles')
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0].mean, 3)
        self.assertEqual(rows[0].n, 2)

    def test_nan(self):
        """Test exclusion of undefined values"""
        record = FeatureRecord('x', 10, '0_1', 1.0, 1, 1.0, math.nan, False,
                               1)
        self.assertEqual(average_feature_by_type([record], 'delta_eps'), [])

    def test_linear_fit(self):
        """Test least squares fits"""
        fit = linear_fit([(1, 2), (2, 4), (3, 6)])
        self.assertAlmostEqual(fit.slope, 2)
        self.assertAlmostEqual(fit.intercept, 0)
        self.assertAlmostEqual(fit.r_squared, 1)
        fit = linear_fit([(0, 1), (5, 2)])
        self.assertAlmostEqual(fit.r_squared, 1)
        fit = linear_fit([(0, 0), (1, 1), (2, 0), (3, 1)])
        self.assertLess(fit.r_squared, 1)
        self.assertEqual(linear_fit([(0, 3), (1, 3)]), LinearFit(0, 3, 1))
        with self.assertRaises(StatsError):
            linear_fit([(1, 1)])
        with self.assertRaises(StatsError):
            linear_fit([(1, 1), (1, 2)])

    def test_fits(self):
        """Test fits against length per knot type"""
        rows = average_feature_by_type([
            feature('a', 10, '0_1', 1.0),
            feature('b', 20, '0_1', 2.0),
            feature('c', 30, '0_1', 3.0),
            feature('d', 10, '3_1', 2.0),
        ])
        result = fits(rows)
        self.assertEqual(len(result), 1)
        self.assertEqual(result[0].knot_type, '0_1')
        self.assertAlmostEqual(result[0].fit.slope, 0.1)
        self.assertAlmostEqual(result[0].fit.r_squared, 1)


class PlanTestCase(knotscope.test.TestCase):
    """Experiment plan tests"""

    def test_quotas(self):
        """Test per type quotas"""
        plan = ExperimentPlan([50, 100], 10, per_type_count=5,
                              type_filter=['0_1', '3_1'])
        self.assertEqual(plan.type_filter, [KnotType.UNKNOT,
                                            KnotType.TREFOIL])
        self.assertEqual(plan.quotas, {'0_1': 5, '3_1': 5})
        self.assertIsNone(ExperimentPlan([50], 10).quotas)

    def test_invalid(self):
        """Test rejection of invalid plans"""
        with self.assertRaises(StatsError):
            ExperimentPlan([], 10)
        with self.assertRaises(StatsError):
            ExperimentPlan([100, 50], 10)
        with self.assertRaises(StatsError):
            ExperimentPlan([50], 1)
        with self.assertRaises(StatsError):
            ExperimentPlan([50], 10, per_type_count=1)
        with self.assertRaises(StatsError):
            ExperimentPlan([50], 10, seed=-3)
        with self.assertRaises(ValueError):
            ExperimentPlan([50], 10, type_filter=['7_1'])
