"""Test file formats"""

import json
import math
from pathlib import Path
import tempfile
from knotscope.betti import FeatureRecord, betti_curve
from knotscope.fileio import (BarcodeFormat, CorrelationFormat, CurveFormat,
                              DataError, FeatureFormat, GeometryFormat,
                              GeometryRow, KnotsFormat, curve_rows, detect,
                              fmt, read_barcodes, roundtrip, write_barcodes)
from knotscope.geometry import measure
from knotscope.knot import regular_polygon
from knotscope.rips import Bar, Barcode
from knotscope.stats import CorrelationRow
import knotscope.test


class FileTestCase(knotscope.test.TestCase):
    """File format test case base class"""

    def setUp(self):
        # pylint: disable=consider-using-with
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)
        self.path = Path(self.tmpdir.name)

    def write(self, name, text):
        """Write a temporary file"""
        path = self.path / name
        path.write_text(text, encoding='utf-8')
        return path


class ScalarTestCase(knotscope.test.TestCase):
    """Scalar formatting tests"""

    def test_fmt(self):
        """Test number formatting"""
        self.assertEqual(fmt(None), '')
        self.assertEqual(fmt(True), 'true')
        self.assertEqual(fmt(3), '3')
        self.assertEqual(fmt(0.0), '0')
        self.assertEqual(fmt(0.1), '0.10000000000000001')
        self.assertEqual(fmt(math.inf), 'inf')
        self.assertEqual(fmt(-math.inf), '-inf')
        self.assertEqual(fmt(math.nan), 'nan')
        self.assertEqual(float(fmt(1 / 3)), 1 / 3)


class KnotsFormatTestCase(FileTestCase):
    """Knots file tests"""

    def test_resource(self):
        """Test reading and rewriting the sample knots file"""
        text = self.resource_text('knots.jsonl')
        with self.resource_path('knots.jsonl') as path:
            knots = roundtrip(path)
        self.assertEqual([k.id for k in knots],
                         ['square', 'cube-hexagon', 'cube-octagon'])
        self.assertEqual([len(k) for k in knots], [4, 6, 8])
        self.assertIsNone(knots[0].knot_type)
        self.assertEqual(knots[1].knot_type, '0_1')
        self.assertEqual(knots[2].seed, 7)
        self.assertEqual(KnotsFormat.dumps(knots), text)

    def test_exact(self):
        """Test exact coordinate round trip"""
        knots = [regular_polygon(7, id='heptagon').typed('3_1')]
        path = self.path / 'knots.jsonl'
        self.assertEqual(KnotsFormat.write(path, knots), 1)
        self.assertEqual(KnotsFormat.read(path), knots)

    def test_invalid(self):
        """Test rejection of invalid knots"""
        text = self.resource_text('knots.jsonl')
        path = self.write('bad.jsonl', text + '{"id": "x", "vertices": '
                          '[[0,0,0],[2,0,0],[0,2,0]]}\n')
        with self.assertRaisesRegex(DataError, r'bad\.jsonl:4:'):
            KnotsFormat.read(path)
        path = self.write('garbled.jsonl', '{"id": \n')
        with self.assertRaisesRegex(DataError, r'garbled\.jsonl:1:'):
            KnotsFormat.read(path)
        path = self.write('anonymous.jsonl', '{"vertices": []}\n')
        with self.assertRaises(DataError):
            KnotsFormat.read(path)

    def test_keys(self):
        """Test field names and order of knot records"""
        text = KnotsFormat.dumps([regular_polygon(5)])
        data = json.loads(text)
        self.assertEqual(list(data),
                         ['id', 'seed', 'length', 'knot_type', 'vertices'])
        self.assertEqual(data['length'], 5)
        self.assertEqual(len(data['vertices']), 5)
        self.assertIsNone(data['knot_type'])

    def test_length_mismatch(self):
        """Test rejection of a length disagreeing with the vertices"""
        path = self.write('short.jsonl', '{"id": "s", "length": 5, '
                          '"vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0]]}\n')
        with self.assertRaisesRegex(DataError, r'short\.jsonl:1:.*length 5'):
            KnotsFormat.read(path)

    def test_missing(self):
        """Test reading a missing file"""
        with self.assertRaisesRegex(DataError, 'absent.jsonl'):
            KnotsFormat.read(self.path / 'absent.jsonl')


class TableFormatTestCase(FileTestCase):
    """CSV table tests"""

    def test_barcodes(self):
        """Test barcode files"""
        barcode = Barcode((Bar(0.0, 0.1), Bar(0.0, math.inf)),
                          (Bar(0.1, 0.25),))
        path = self.path / 'barcodes.csv'
        write_barcodes(path, [('k', barcode), ('empty', Barcode())])
        self.assertEqual(path.read_text(encoding='utf-8'),
                         'knot_id,dim,birth,death\n'
                         'k,0,0,0.10000000000000001\n'
                         'k,0,0,inf\n'
                         'k,1,0.10000000000000001,0.25\n')
        barcodes = read_barcodes(path)
        self.assertEqual(barcodes, {'k': barcode})
        self.assertTrue(barcodes['k'].dim0[1].essential)
        self.assertIs(detect(path), BarcodeFormat)

    def test_column_count(self):
        """Test rejection of rows with the wrong column count"""
        path = self.write('barcodes.csv', 'knot_id,dim,birth,death\n'
                          'k,0,0,1\n'
                          'k,1,0.5\n')
        with self.assertRaisesRegex(DataError, r'barcodes\.csv:3:'):
            read_barcodes(path)

    def test_values(self):
        """Test rejection of malformed values"""
        path = self.write('barcodes.csv', 'knot_id,dim,birth,death\n'
                          'k,2,0,1\n')
        with self.assertRaisesRegex(DataError, r'barcodes\.csv:2:'):
            read_barcodes(path)
        path = self.write('barcodes.csv', 'knot_id,dim,birth,death\n'
                          'k,1,2,1\n')
        with self.assertRaises(DataError):
            read_barcodes(path)
        path = self.write('barcodes.csv', 'knot_id,dim,birth,death\n'
                          'k,1,zero,1\n')
        with self.assertRaises(DataError):
            read_barcodes(path)

    def test_header(self):
        """Test rejection of unexpected headers"""
        path = self.write('barcodes.csv', 'id,dim,birth,death\nk,0,0,1\n')
        with self.assertRaisesRegex(DataError, r'barcodes\.csv:1:'):
            read_barcodes(path)
        with self.assertRaises(DataError):
            detect(path)
        path = self.write('empty.csv', '')
        with self.assertRaises(DataError):
            read_barcodes(path)

    def test_geometry(self):
        """Test geometry files"""
        rows = [GeometryRow('hexagon', 6, None, measure(regular_polygon(6))),
                GeometryRow('decagon', 10, '0_1',
                            measure(regular_polygon(10)))]
        path = self.path / 'geometry.csv'
        GeometryFormat.write(path, rows)
        lines = path.read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], 'id,length,knot_type,rs_volume,'
                         'hull_volume,rg,curvature,torsion,acn')
        self.assertTrue(lines[1].startswith('hexagon,6,,'))
        self.assertTrue(lines[2].startswith('decagon,10,0_1,'))
        records = roundtrip(path)
        self.assertEqual([(x.id, x.length, x.knot_type) for x in records],
                         [('hexagon', 6, None), ('decagon', 10, '0_1')])
        for record, row in zip(records, rows):
            expected = row.geometry
            actual = record.geometry
            self.assertEqual(actual.rs_volume, expected.rs_volume)
            self.assertEqual(actual.total_curvature,
                             expected.total_curvature)
            self.assertEqual(actual.acn, expected.acn)
            self.assertAlmostEqual(actual.rs_radius, expected.rs_radius,
                                   places=12)
        self.assertIs(detect(path), GeometryFormat)

    def test_features(self):
        """Test feature files"""
        rows = [FeatureRecord('a', 10, '0_1', 1.5, 2, 1.0, 0.25, True, 2, 3),
                FeatureRecord('b', None, None, 0.0, 0, 0.0, math.nan, False,
                              0)]
        path = self.path / 'features.csv'
        FeatureFormat.write(path, rows)
        lines = path.read_text(encoding='utf-8').splitlines()
        self.assertTrue(lines[0].endswith(',curve_max,small_angles'))
        self.assertTrue(lines[1].endswith(',true,2,3'))
        self.assertTrue(lines[2].startswith('b,,,0,0,0,nan,false,'))
        self.assertTrue(lines[2].endswith(','))
        records = roundtrip(path)
        self.assertEqual(records[0], rows[0])
        self.assertIsNone(records[1].length)
        self.assertIsNone(records[1].small_angles)
        self.assertTrue(math.isnan(records[1].delta_eps))

    def test_correlations(self):
        """Test correlation files"""
        rows = [CorrelationRow(50, 'all', 'I', 'rs_volume', -0.5, 30),
                CorrelationRow(None, '3_1', 'I', 'acn', 0.25, 4)]
        path = self.path / 'correlations.csv'
        CorrelationFormat.write(path, rows)
        self.assertEqual(CorrelationFormat.read(path), rows)
        self.assertIs(detect(path), CorrelationFormat)

    def test_curves(self):
        """Test Betti curve files"""
        curve = betti_curve(Barcode(dim1=(Bar(1.0, 3.0), Bar(2.0, 4.0))))
        path = self.path / 'curves.csv'
        CurveFormat.write(path, curve_rows({100: curve}))
        self.assertEqual(CurveFormat.read(path),
                         [('100', 1.0, 1.0), ('100', 2.0, 2.0),
                          ('100', 3.0, 1.0), ('100', 4.0, 0.0)])
