"""Knot, barcode, and table file formats"""

from __future__ import annotations

from abc import abstractmethod
import csv
from dataclasses import dataclass
import io
import json
import logging
import math
from pathlib import Path
from typing import (Any, ClassVar, Dict, Iterable, Iterator, List, Mapping,
                    Optional, Sequence, TextIO, Tuple, Type, Union)
from .betti import BettiCurve, FeatureRecord
from .geometry import GeometryRecord, sphere_radius
from .knot import KnotEmbedding, KnotError, check
from .rips import Bar, Barcode
from .stats import AverageRow, CorrelationRow, FitRow, LinearFit

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


##############################################################################
#
# Exceptions


class DataError(Exception):
    """Malformed or missing data file"""

    def __str__(self):
        return "Data error: %s" % self.args


##############################################################################
#
# Scalar values


def fmt(value: Optional[float]) -> str:
    """Format a number with enough digits to round-trip exactly"""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if math.isnan(value):
        return 'nan'
    return format(value, '.17g')


def _optional_int(text: str) -> Optional[int]:
    return int(text) if text else None


def _optional_str(text: str) -> Optional[str]:
    return text if text else None


def _bool(text: str) -> bool:
    if text not in ('true', 'false'):
        raise ValueError("invalid boolean '%s'" % text)
    return text == 'true'


##############################################################################
#
# File formats


class Format:
    """A record file format"""

    suffix: ClassVar[str]
    """Filename suffix"""

    @classmethod
    @abstractmethod
    def dump(cls, records: Iterable[Any], fh: TextIO) -> int:
        """Write records to an open file, returning the record count"""

    @classmethod
    @abstractmethod
    def load(cls, fh: TextIO, name: str) -> Iterator[Any]:
        """Read records from an open file"""

    @classmethod
    def write(cls, path: PathLike, records: Iterable[Any]) -> int:
        """Write records to a file"""
        with open(path, 'w', encoding='utf-8', newline='') as fh:
            count = cls.dump(records, fh)
        logger.info("wrote %d records to %s", count, path)
        return count

    @classmethod
    def read(cls, path: PathLike) -> List[Any]:
        """Read all records from a file"""
        try:
            fh = open(path, 'r', encoding='utf-8', newline='')
        except OSError as e:
            raise DataError("cannot read '%s': %s" %
                            (path, e.strerror)) from e
        with fh:
            return list(cls.load(fh, str(path)))

    @classmethod
    def dumps(cls, records: Iterable[Any]) -> str:
        """Serialize records to a string"""
        with io.StringIO(newline='') as buf:
            cls.dump(records, buf)
            return buf.getvalue()

    @classmethod
    def loads(cls, text: str, name: str = '<string>') -> List[Any]:
        """Parse records from a string"""
        with io.StringIO(text, newline='') as buf:
            return list(cls.load(buf, name))


class KnotsFormat(Format):
    """JSON Lines knot embeddings"""

    suffix = '.jsonl'

    @classmethod
    def dump(cls, records: Iterable[KnotEmbedding], fh: TextIO) -> int:
        count = 0
        for k in records:
            vertices = ','.join('[%s]' % ','.join(fmt(float(x)) for x in v)
                                for v in k.vertices)
            fh.write('{"id": %s, "seed": %d, "length": %d, "knot_type": %s, '
                     '"vertices": [%s]}\n' % (
                         json.dumps(k.id), k.seed, len(k),
                         json.dumps(k.knot_type), vertices,
                     ))
            count += 1
        return count

    @classmethod
    def load(cls, fh: TextIO, name: str) -> Iterator[KnotEmbedding]:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                k = check(KnotEmbedding(str(data['id']), data['vertices'],
                                        seed=int(data.get('seed', 0)),
                                        knot_type=data.get('knot_type')))
                length = int(data.get('length', len(k)))
                if length != len(k):
                    raise ValueError("length %d but %d vertices" %
                                     (length, len(k)))
                yield k
            except (ValueError, KeyError, TypeError, KnotError) as e:
                raise DataError("%s:%d: %s" % (name, lineno, e)) from e


class TableFormat(Format):
    """A CSV table format"""

    columns: ClassVar[Tuple[str, ...]]
    """Column names"""

    @classmethod
    @abstractmethod
    def to_row(cls, record: Any) -> Sequence[Any]:
        """Convert record to column values"""

    @classmethod
    @abstractmethod
    def from_row(cls, row: Sequence[str]) -> Any:
        """Convert column strings to record"""

    @classmethod
    def dump(cls, records: Iterable[Any], fh: TextIO) -> int:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(cls.columns)
        count = 0
        for record in records:
            writer.writerow([fmt(x) if not isinstance(x, str) else x
                             for x in cls.to_row(record)])
            count += 1
        return count

    @classmethod
    def load(cls, fh: TextIO, name: str) -> Iterator[Any]:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("%s: empty file" % name)
        if tuple(header) != cls.columns:
            raise DataError("%s:1: expected columns %s" %
                            (name, ','.join(cls.columns)))
        for row in reader:
            if len(row) != len(cls.columns):
                raise DataError("%s:%d: expected %d columns, got %d" %
                                (name, reader.line_num, len(cls.columns),
                                 len(row)))
            try:
                yield cls.from_row(row)
            except (ValueError, KeyError) as e:
                raise DataError("%s:%d: %s" % (name, reader.line_num,
                                               e)) from e


BarRow = Tuple[str, int, Bar]
"""A single barcode interval with its knot identifier and dimension"""


class BarcodeFormat(TableFormat):
    """Persistence intervals"""

    suffix = '.csv'
    columns = ('knot_id', 'dim', 'birth', 'death')

    @classmethod
    def to_row(cls, record: BarRow) -> Sequence[Any]:
        knot_id, dim, bar = record
        return (knot_id, dim, bar.birth, bar.death)

    @classmethod
    def from_row(cls, row: Sequence[str]) -> BarRow:
        dim = int(row[1])
        if dim not in (0, 1):
            raise ValueError("invalid dimension %d" % dim)
        return (row[0], dim, Bar(float(row[2]), float(row[3])))


def barcode_rows(barcodes: Iterable[Tuple[str, Barcode]]) -> Iterator[BarRow]:
    """Flatten barcodes into interval rows"""
    for knot_id, barcode in barcodes:
        for dim in (0, 1):
            for bar in barcode.bars(dim):
                yield (knot_id, dim, bar)


def collect_barcodes(rows: Iterable[BarRow]) -> Dict[str, Barcode]:
    """Group interval rows into barcodes, preserving knot order"""
    bars: Dict[str, Tuple[List[Bar], List[Bar]]] = {}
    for knot_id, dim, bar in rows:
        bars.setdefault(knot_id, ([], []))[dim].append(bar)
    return {knot_id: Barcode(tuple(dim0), tuple(dim1))
            for knot_id, (dim0, dim1) in bars.items()}


def write_barcodes(path: PathLike,
                   barcodes: Iterable[Tuple[str, Barcode]]) -> int:
    """Write barcodes as a CSV file"""
    return BarcodeFormat.write(path, barcode_rows(barcodes))


def read_barcodes(path: PathLike) -> Dict[str, Barcode]:
    """Read barcodes from a CSV file"""
    rows = BarcodeFormat.read(path)
    try:
        return collect_barcodes(rows)
    except ValueError as e:
        raise DataError("%s: %s" % (path, e)) from e


@dataclass(frozen=True)
class GeometryRow:
    """Geometric observables of an identified knot"""

    id: str
    length: int
    knot_type: Optional[str]
    geometry: GeometryRecord


class GeometryFormat(TableFormat):
    """Geometric observables"""

    suffix = '.csv'
    columns = ('id', 'length', 'knot_type', 'rs_volume', 'hull_volume', 'rg',
               'curvature', 'torsion', 'acn')

    @classmethod
    def to_row(cls, record: GeometryRow) -> Sequence[Any]:
        g = record.geometry
        return (record.id, record.length, record.knot_type or '',
                g.rs_volume, g.hull_volume, g.rg, g.total_curvature,
                g.total_torsion, g.acn)

    @classmethod
    def from_row(cls, row: Sequence[str]) -> GeometryRow:
        knot_id, length, knot_type = row[:3]
        rs_volume, hull_volume, rg, curvature, torsion, acn = (
            float(x) for x in row[3:]
        )
        return GeometryRow(knot_id, int(length), _optional_str(knot_type),
                           GeometryRecord(sphere_radius(rs_volume), rs_volume,
                                          hull_volume, rg, curvature,
                                          torsion, acn))


class FeatureFormat(TableFormat):
    """Barcode features"""

    suffix = '.csv'
    columns = tuple(FeatureRecord.__dataclass_fields__)

    @classmethod
    def to_row(cls, record: FeatureRecord) -> Sequence[Any]:
        return tuple('' if x is None else x
                     for x in record.asdict().values())

    @classmethod
    def from_row(cls, row: Sequence[str]) -> FeatureRecord:
        # pylint: disable=invalid-name
        (knot_id, length, knot_type, I, n_bars, max_bar, delta,
         filtered, curve_max, small) = row
        return FeatureRecord(knot_id, _optional_int(length),
                             _optional_str(knot_type), float(I), int(n_bars),
                             float(max_bar), float(delta), _bool(filtered),
                             float(curve_max), _optional_int(small))


class CorrelationFormat(TableFormat):
    """Grouped correlation coefficients"""

    suffix = '.csv'
    columns = ('length', 'group', 'x', 'y', 'r', 'n')

    @classmethod
    def to_row(cls, record: CorrelationRow) -> Sequence[Any]:
        return (record.length, record.group, record.x, record.y, record.r,
                record.n)

    @classmethod
    def from_row(cls, row: Sequence[str]) -> CorrelationRow:
        return CorrelationRow(_optional_int(row[0]), row[1], row[2], row[3],
                              float(row[4]), int(row[5]))


class AverageFormat(TableFormat):
    """Average features per knot type and length"""

    suffix = '.csv'
    columns = ('feature', 'knot_type', 'length', 'mean', 'stderr', 'n')

    @classmethod
    def to_row(cls, record: AverageRow) -> Sequence[Any]:
        return (record.feature, record.knot_type, record.length, record.mean,
                record.stderr, record.n)

    @classmethod
    def from_row(cls, row: Sequence[str]) -> AverageRow:
        return AverageRow(row[0], row[1], _optional_int(row[2]),
                          float(row[3]), float(row[4]), int(row[5]))


class FitFormat(TableFormat):
    """Linear fits of average features against length"""

    suffix = '.csv'
    columns = ('feature', 'knot_type', 'slope', 'intercept', 'r_squared')

    @classmethod
    def to_row(cls, record: FitRow) -> Sequence[Any]:
        return (record.feature, record.knot_type, record.fit.slope,
                record.fit.intercept, record.fit.r_squared)

    @classmethod
    def from_row(cls, row: Sequence[str]) -> FitRow:
        return FitRow(row[0], row[1], LinearFit(*(float(x)
                                                  for x in row[2:])))


CurveRow = Tuple[str, float, float]
"""A Betti curve breakpoint with its group label"""


class CurveFormat(TableFormat):
    """Betti curve breakpoints"""

    suffix = '.csv'
    columns = ('group', 't', 'value')

    @classmethod
    def to_row(cls, record: CurveRow) -> Sequence[Any]:
        return record

    @classmethod
    def from_row(cls, row: Sequence[str]) -> CurveRow:
        return (row[0], float(row[1]), float(row[2]))


def curve_rows(curves: Mapping[Any, BettiCurve]) -> Iterator[CurveRow]:
    """Flatten labelled Betti curves into breakpoint rows"""
    for group, curve in curves.items():
        for t, value in zip(curve.ts, curve.values):
            yield (str(group), t, value)


TABLES: Tuple[Type[TableFormat], ...] = (
    BarcodeFormat, GeometryFormat, FeatureFormat, CorrelationFormat,
    AverageFormat, FitFormat, CurveFormat,
)


def detect(path: PathLike) -> Type[Format]:
    """Identify the format of a file from its name and header"""
    path = Path(path)
    if path.suffix == KnotsFormat.suffix:
        return KnotsFormat
    try:
        with open(path, 'r', encoding='utf-8', newline='') as fh:
            header = tuple(next(csv.reader(fh), ()))
    except OSError as e:
        raise DataError("cannot read '%s': %s" % (path, e.strerror)) from e
    for table in TABLES:
        if header == table.columns:
            return table
    raise DataError("%s: unrecognized format" % path)


def roundtrip(path: PathLike) -> List[Any]:
    """Parse, serialize, and reparse a file

    The reparsed records must serialize identically to the parsed
    records.
    """
    cls = detect(path)
    records = cls.read(path)
    text = cls.dumps(records)
    if cls.dumps(cls.loads(text, str(path))) != text:
        raise DataError("%s: records do not survive re-serialization" % path)
    return records
