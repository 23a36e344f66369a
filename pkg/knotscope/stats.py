"""Statistics over knot ensembles"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import (Callable, ClassVar, Dict, Iterable, List, Mapping,
                    Optional, Sequence, Tuple)
import numpy as np
from scipy import stats
from .betti import FeatureRecord, cumulative_curves, filter_spike
from .diagram import KnotType
from .geometry import GeometryRecord
from .rips import Barcode

logger = logging.getLogger(__name__)

ALL = 'all'
"""Group label used when grouping by length alone"""


##############################################################################
#
# Exceptions


class StatsError(ValueError):
    """Invalid statistical computation"""

    def __str__(self):
        return "Statistics error: %s" % self.args


##############################################################################
#
# Experiment plans


@dataclass
class ExperimentPlan:
    """Dataset dimensions for a statistical experiment"""

    lengths: List[int]
    per_length_count: int
    per_type_count: Optional[int] = None
    type_filter: Optional[List[KnotType]] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.lengths:
            raise StatsError("no lengths")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise StatsError("lengths %s not strictly increasing" %
                             self.lengths)
        if self.per_length_count < 2:
            raise StatsError("need at least two knots per length")
        if self.per_type_count is not None and self.per_type_count < 2:
            raise StatsError("need at least two knots per type")
        if self.type_filter is not None:
            self.type_filter = [KnotType(x) for x in self.type_filter]
        if self.seed < 0:
            raise StatsError("seed must be unsigned")

    @property
    def quotas(self) -> Optional[Dict[str, int]]:
        """Required knot count per knot type label, if any"""
        if self.per_type_count is None or not self.type_filter:
            return None
        return {x.value: self.per_type_count for x in self.type_filter}


##############################################################################
#
# Correlation


def _prepare(xs, ys) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Validate paired samples, returning None for constant samples"""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise StatsError("mismatched samples of shape %s and %s" %
                         (xs.shape, ys.shape))
    if len(xs) < 2:
        raise StatsError("need at least two samples, got %d" % len(xs))
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        return None
    return xs, ys


def pearson(xs, ys) -> Optional[float]:
    """Sample Pearson correlation coefficient (None if undefined)"""
    prepared = _prepare(xs, ys)
    if prepared is None:
        return None
    r = float(stats.pearsonr(*prepared)[0])
    return min(1.0, max(-1.0, r))


def spearman(xs, ys) -> Optional[float]:
    """Spearman rank correlation coefficient (None if undefined)"""
    prepared = _prepare(xs, ys)
    if prepared is None:
        return None
    r = float(stats.spearmanr(*prepared)[0])
    return None if math.isnan(r) else min(1.0, max(-1.0, r))


METHODS: Mapping[str, Callable[..., Optional[float]]] = {
    'pearson': pearson,
    'spearman': spearman,
}


@dataclass(frozen=True)
class Observables:
    """Joined per-knot features and geometry"""

    feature: FeatureRecord
    geometry: GeometryRecord

    COLUMNS: ClassVar[Mapping[str, str]] = {
        'I': 'integral_I',
        'M': 'max_bar',
        'n_bars': 'n_bars',
        'curve_max': 'curve_max',
        'delta_eps': 'delta_eps',
        'small_angles': 'small_angles',
        'rs_volume': 'rs_volume',
        'rs_radius': 'rs_radius',
        'hull_volume': 'hull_volume',
        'rg': 'rg',
        'acn': 'acn',
        'curvature': 'total_curvature',
        'torsion': 'total_torsion',
    }

    def __getitem__(self, name: str) -> float:
        """Observable value, or NaN if unknown for this knot"""
        try:
            column = self.COLUMNS[name]
        except KeyError as e:
            raise StatsError("unknown observable '%s'" % name) from e
        if hasattr(self.feature, column):
            value = getattr(self.feature, column)
        else:
            value = getattr(self.geometry, column)
        return math.nan if value is None else float(value)


PAIRS: Tuple[Tuple[str, str], ...] = (
    ('I', 'rs_volume'),
    ('I', 'hull_volume'),
    ('I', 'rg'),
    ('I', 'acn'),
    ('M', 'hull_volume'),
    ('n_bars', 'hull_volume'),
    ('I', 'curvature'),
    ('I', 'torsion'),
    ('small_angles', 'curve_max'),
)
"""Observable pairs correlated by default"""


@dataclass(frozen=True)
class CorrelationRow:
    """Correlation of a pair of observables within one group"""

    length: Optional[int]
    group: str
    x: str
    y: str
    r: float
    n: int


@dataclass(frozen=True)
class CorrelationTable:
    """Correlations for each group and observable pair"""

    rows: Tuple[CorrelationRow, ...] = ()
    method: str = 'pearson'

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def lookup(self, x: str, y: str, length: Optional[int] = None,
               group: str = ALL) -> Optional[float]:
        """Find correlation coefficient for a pair within a group"""
        for row in self.rows:
            if (row.x, row.y, row.length, row.group) == (x, y, length, group):
                return row.r
        return None


GROUPINGS = ('length', 'knot_type')


def join(features: Iterable[FeatureRecord],
         geometry: Mapping[str, GeometryRecord]) -> List[Observables]:
    """Join feature and geometry records on knot identifier"""
    joined = []
    missing = 0
    for feature in features:
        if feature.id in geometry:
            joined.append(Observables(feature, geometry[feature.id]))
        else:
            missing += 1
    if missing:
        logger.warning("%d knots have no geometry record", missing)
    return joined


def correlate_by_group(features: Iterable[FeatureRecord],
                       geometry: Mapping[str, GeometryRecord],
                       group_by: str = 'length',
                       pairs: Sequence[Tuple[str, str]] = PAIRS,
                       method: str = 'pearson') -> CorrelationTable:
    """Correlate observable pairs within each group of knots"""
    if group_by not in GROUPINGS:
        raise StatsError("cannot group by '%s'" % group_by)
    if method not in METHODS:
        raise StatsError("unknown correlation method '%s'" % method)
    correlate = METHODS[method]
    groups: Dict[Tuple[int, str], List[Observables]] = {}
    for obs in join(features, geometry):
        label = (str(obs.feature.knot_type) if group_by == 'knot_type'
                 else ALL)
        groups.setdefault((obs.feature.length, label), []).append(obs)
    rows = []
    for (length, label), members in sorted(groups.items(),
                                           key=lambda x: (x[0][0] or 0,
                                                          x[0][1])):
        if len(members) < 2:
            logger.warning("omitting group %s at length %s with %d knot",
                           label, length, len(members))
            continue
        for x, y in pairs:
            values = [(obs[x], obs[y]) for obs in members]
            values = [(a, b) for a, b in values
                      if not (math.isnan(a) or math.isnan(b))]
            r = (correlate([a for a, _ in values], [b for _, b in values])
                 if len(values) >= 2 else None)
            if r is None:
                logger.info("%s/%s undefined for group %s at length %s", x,
                            y, label, length)
                continue
            rows.append(CorrelationRow(length, label, x, y, r, len(values)))
    return CorrelationTable(tuple(rows), method)


##############################################################################
#
# Averages and fits


@dataclass(frozen=True)
class AverageRow:
    """Mean of a feature within a knot type and length"""

    feature: str
    knot_type: str
    length: Optional[int]
    mean: float
    stderr: float
    n: int


def average_feature_by_type(features: Iterable[FeatureRecord],
                            feature: str = 'I') -> List[AverageRow]:
    """Mean and standard error of a feature per knot type and length"""
    column = Observables.COLUMNS.get(feature)
    if column is None or column not in FeatureRecord.__annotations__:
        raise StatsError("cannot average '%s'" % feature)
    groups: Dict[Tuple[str, Optional[int]], List[float]] = {}
    for record in features:
        value = getattr(record, column)
        if value is None:
            continue
        key = (str(record.knot_type), record.length)
        groups.setdefault(key, []).append(float(value))
    rows = []
    for (knot_type, length), values in sorted(groups.items(),
                                              key=lambda x: (x[0][0],
                                                             x[0][1] or 0)):
        values = [x for x in values if not math.isnan(x)]
        if not values:
            continue
        stderr = float(stats.sem(values)) if len(values) > 1 else 0.0
        rows.append(AverageRow(feature, knot_type, length,
                               float(np.mean(values)), stderr, len(values)))
    return rows


def average_curve_maxima(features: Iterable[FeatureRecord],
                         barcodes: Mapping[str, Barcode]
                         ) -> List[AverageRow]:
    """Maximum of the average Betti curve per knot type and length

    Knot type and length are taken from the feature records, and each
    barcode is spike filtered if its feature record was.  Knots with
    no barcode are ignored.
    """
    groups: Dict[str, Tuple[str, Optional[int]]] = {}
    selected: Dict[str, Barcode] = {}
    for record in features:
        barcode = barcodes.get(record.id)
        if barcode is None:
            continue
        groups[record.id] = (str(record.knot_type), record.length)
        selected[record.id] = (filter_spike(barcode)
                               if record.spike_filtered else barcode)
    counts: Dict[Tuple[str, Optional[int]], int] = {}
    for key in groups.values():
        counts[key] = counts.get(key, 0) + 1
    curves = cumulative_curves(selected, groups, average=True)
    return [AverageRow('curve_max', knot_type, length,
                       float(curves[(knot_type, length)].maximum), math.nan,
                       counts[(knot_type, length)])
            for knot_type, length in sorted(curves,
                                            key=lambda x: (x[0], x[1] or 0))]


@dataclass(frozen=True)
class LinearFit:
    """Least squares straight line"""

    slope: float
    intercept: float
    r_squared: float


def linear_fit(points: Sequence[Tuple[float, float]]) -> LinearFit:
    """Fit a straight line by least squares"""
    if len(points) < 2:
        raise StatsError("need at least two points, got %d" % len(points))
    xs = np.array([x for x, _ in points], dtype=np.float64)
    ys = np.array([y for _, y in points], dtype=np.float64)
    if np.ptp(xs) == 0:
        raise StatsError("all points have x = %g" % xs[0])
    if np.ptp(ys) == 0:
        return LinearFit(0.0, float(ys[0]), 1.0)
    result = stats.linregress(xs, ys)
    return LinearFit(float(result.slope), float(result.intercept),
                     float(result.rvalue) ** 2)


@dataclass(frozen=True)
class FitRow:
    """Linear fit of an average feature against length for a knot type"""

    feature: str
    knot_type: str
    fit: LinearFit


def fits(averages: Iterable[AverageRow]) -> List[FitRow]:
    """Fit average features against length for each knot type"""
    series: Dict[Tuple[str, str], List[Tuple[float, float]]] = {}
    for row in averages:
        if row.length is not None:
            series.setdefault((row.feature, row.knot_type),
                              []).append((row.length, row.mean))
    rows = []
    for (feature, knot_type), points in sorted(series.items()):
        if len({x for x, _ in points}) < 2:
            logger.debug("no fit for %s of %s with a single length", feature,
                         knot_type)
            continue
        rows.append(FitRow(feature, knot_type, linear_fit(points)))
    return rows
