"""Betti curves and barcode features"""

from __future__ import annotations

from dataclasses import dataclass, asdict, replace
import logging
import math
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Tuple
import numpy as np
from .knot import SPACING
from .rips import Barcode, DIAMETER, RADIUS

logger = logging.getLogger(__name__)

SPIKE_WINDOW = 0.02
"""Width of the birth window following the point cloud spacing"""

SPIKE_PERSISTENCE = 0.05
"""Maximum persistence of a spike bar"""

EPS_REL = 0.05
"""Default ramp cutoff as a fraction of the support end"""


##############################################################################
#
# Exceptions


class BettiError(ValueError):
    """Invalid Betti curve operation"""

    def __str__(self):
        return "Betti curve error: %s" % self.args


##############################################################################
#
# Betti curves


@dataclass(frozen=True)
class BettiCurve:
    """A right-continuous step function with bounded support

    The value ``values[k]`` holds on ``[ts[k], ts[k+1])``.  The curve
    is zero before the first breakpoint and from the last breakpoint
    onwards, so that the final value is always zero.  Adjacent
    plateaus always differ in value.
    """

    ts: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    scale: str = DIAMETER

    def __post_init__(self) -> None:
        if len(self.ts) != len(self.values):
            raise BettiError("%d breakpoints with %d values" %
                             (len(self.ts), len(self.values)))
        if any(b <= a for a, b in zip(self.ts, self.ts[1:])):
            raise BettiError("breakpoints not strictly increasing")
        if self.values and self.values[-1] != 0:
            raise BettiError("unbounded support")
        if self.scale not in (DIAMETER, RADIUS):
            raise BettiError("unknown scale '%s'" % self.scale)

    @classmethod
    def from_steps(cls, ts: Iterable[float], values: Iterable[float],
                   scale: str = DIAMETER) -> BettiCurve:
        """Construct canonical curve from possibly redundant steps"""
        steps: List[Tuple[float, float]] = []
        previous = 0.0
        for t, value in zip(ts, values):
            if value != previous:
                steps.append((float(t), value))
                previous = value
        return cls(tuple(t for t, _ in steps), tuple(v for _, v in steps),
                   scale)

    def __call__(self, t: float) -> float:
        k = int(np.searchsorted(self.ts, t, side='right')) - 1
        return self.values[k] if k >= 0 else 0

    def __add__(self, other: BettiCurve) -> BettiCurve:
        if not isinstance(other, BettiCurve):
            return NotImplemented
        return sum_curves([self, other])

    def __bool__(self) -> bool:
        return bool(self.ts)

    def scaled(self, factor: float) -> BettiCurve:
        """Multiply values by a constant"""
        return BettiCurve.from_steps(self.ts, (x * factor
                                               for x in self.values),
                                     self.scale)

    def to_radius(self) -> BettiCurve:
        """Convert pairwise distance scale to neighbourhood radius scale"""
        if self.scale == RADIUS:
            return self
        return BettiCurve(tuple(t / 2 for t in self.ts), self.values, RADIUS)

    def plateaus(self) -> Iterable[Tuple[float, float, float]]:
        """Start, end, and value of each nonzero plateau"""
        for (a, value), b in zip(zip(self.ts, self.values), self.ts[1:]):
            if value:
                yield a, b, value

    def integral(self) -> float:
        """Area under the curve"""
        return math.fsum((b - a) * value for a, b, value in self.plateaus())

    @property
    def support_end(self) -> Optional[float]:
        """Largest scale at which the curve is nonzero"""
        return self.ts[-1] if self.ts else None

    @property
    def maximum(self) -> float:
        """Largest value"""
        return max(self.values, default=0)


def betti_curve(b: Barcode, dim: int = 1) -> BettiCurve:
    """Count bars alive at each scale

    The essential dimension 0 bar is excluded so that the curve has
    bounded support.
    """
    events: Dict[float, int] = {}
    for bar in b.bars(dim):
        if bar.essential:
            continue
        events[bar.birth] = events.get(bar.birth, 0) + 1
        events[bar.death] = events.get(bar.death, 0) - 1
    ts = sorted(events)
    return BettiCurve.from_steps(ts, np.cumsum([events[t] for t in ts],
                                               dtype=np.int64).tolist(),
                                 b.scale)


def sum_curves(curves: Iterable[BettiCurve]) -> BettiCurve:
    """Pointwise sum of Betti curves"""
    curves = list(curves)
    if not curves:
        return BettiCurve()
    scales = {x.scale for x in curves}
    if len(scales) > 1:
        raise BettiError("mixed scales %s" % ", ".join(sorted(scales)))
    ts = sorted(set().union(*(x.ts for x in curves)))
    steps: Dict[float, float] = dict.fromkeys(ts, 0)
    for curve in curves:
        deltas = np.diff(curve.values, prepend=0)
        for t, delta in zip(curve.ts, deltas.tolist()):
            steps[t] += delta
    values = np.cumsum([steps[t] for t in ts]).tolist()
    if values:
        values[-1] = 0
    return BettiCurve.from_steps(ts, values, curves[0].scale)


def average_curves(curves: Iterable[BettiCurve]) -> BettiCurve:
    """Pointwise mean of Betti curves"""
    curves = list(curves)
    if not curves:
        raise BettiError("no curves to average")
    return sum_curves(curves).scaled(1.0 / len(curves))


def cumulative_curves(barcodes: Mapping[str, Barcode],
                      groups: Mapping[str, Hashable],
                      average: bool = False,
                      spike_filtered: bool = False
                      ) -> Dict[Hashable, BettiCurve]:
    """Sum (or average) dimension 1 Betti curves within each group"""
    members: Dict[Hashable, List[BettiCurve]] = {}
    for knot_id, barcode in barcodes.items():
        if spike_filtered:
            barcode = filter_spike(barcode)
        members.setdefault(groups[knot_id], []).append(betti_curve(barcode))
    combine = average_curves if average else sum_curves
    return {group: combine(curves) for group, curves in members.items()}


##############################################################################
#
# Barcode features


def integral_I(b: Barcode) -> float:
    """Total length of dimension 1 bars"""
    # pylint: disable=invalid-name
    return math.fsum(x.persistence for x in b.dim1)


def bar_stats(b: Barcode) -> Tuple[int, float]:
    """Number of dimension 1 bars and length of the longest"""
    return len(b.dim1), max((x.persistence for x in b.dim1), default=0.0)


def in_spike_window(t: float, spacing: float = SPACING,
                    window: float = SPIKE_WINDOW) -> bool:
    """Check if a scale lies just after the point cloud spacing"""
    return spacing < t <= spacing + window


def filter_spike(b: Barcode, spacing: float = SPACING,
                 window: float = SPIKE_WINDOW,
                 max_persistence: float = SPIKE_PERSISTENCE) -> Barcode:
    """Remove short-lived bars born just after the point cloud spacing

    Sharp angles between successive edges produce such bars from the
    interpolation points alone.
    """
    keep = tuple(x for x in b.dim1
                 if not (in_spike_window(x.birth, spacing, window) and
                         x.persistence < max_persistence))
    if len(keep) != len(b.dim1):
        logger.debug("filtered %d spike bars", len(b.dim1) - len(keep))
    return replace(b, dim1=keep)


def curve_maxima(c: BettiCurve, spike_filtered: bool = False,
                 spacing: float = SPACING, window: float = SPIKE_WINDOW
                 ) -> Tuple[float, float, float, float]:
    """Global maximum and second maximum of a Betti curve

    The second maximum is the largest strict local maximum other than
    the global one.  Unless the curve was built from spike filtered
    barcodes, local maxima starting within the spike window are
    ignored.  Ties are resolved in favour of the smaller scale.
    """
    if not c:
        return (0, 0.0, 0, 0.0)
    values = (0,) + c.values
    best = max(range(len(c.ts)), key=lambda k: (c.values[k], -k))
    peaks = [k for k in range(len(c.ts))
             if values[k] < c.values[k] > values[k + 2] and k != best and
             (spike_filtered or not in_spike_window(c.ts[k], spacing,
                                                    window))]
    if not peaks:
        return (c.values[best], c.ts[best], 0, 0.0)
    second = max(peaks, key=lambda k: (c.values[k], -k))
    return (c.values[best], c.ts[best], c.values[second], c.ts[second])


def delta_eps(c: BettiCurve, eps: Optional[float] = None,
              eps_rel: float = EPS_REL) -> float:
    """Weighted excess of a Betti curve over one

    The excess ``max(c - 1, 0)`` is weighted by a ramp falling
    linearly from one at zero to zero at ``S - eps``, where S is the
    end of the support, integrated exactly over each plateau, and
    normalized by S.  The curve is first converted to the radius scale.
    """
    c = c.to_radius()
    end = c.support_end
    if end is None or end <= 0:
        raise BettiError("zero curve has no support")
    if eps is None:
        eps = eps_rel * end
    if not 0 < eps < end:
        raise BettiError("cutoff %g outside (0, %g)" % (eps, end))
    cutoff = end - eps

    def ramp(t):
        return t - t * t / (2 * cutoff)

    total = []
    for a, b, value in c.plateaus():
        a = max(a, 0.0)
        b = min(b, cutoff)
        if value > 1 and b > a:
            total.append((value - 1) * (ramp(b) - ramp(a)))
    return math.fsum(total) / end


@dataclass(frozen=True)
class FeatureRecord:
    """Barcode features of a single knot"""

    # pylint: disable=invalid-name,too-many-instance-attributes

    id: str
    length: Optional[int]
    knot_type: Optional[str]
    integral_I: float
    n_bars: int
    max_bar: float
    delta_eps: float
    spike_filtered: bool
    curve_max: float
    small_angles: Optional[int] = None

    def asdict(self) -> Mapping[str, object]:
        """Field values by name"""
        return asdict(self)


def features(knot_id: str, b: Barcode, length: Optional[int] = None,
             knot_type: Optional[str] = None, spike_filtered: bool = False,
             eps_rel: float = EPS_REL,
             small_angles: Optional[int] = None) -> FeatureRecord:
    """Compute barcode features

    The number of small angles of the embedding is carried alongside
    the barcode features when known.
    """
    # pylint: disable=too-many-arguments
    if spike_filtered:
        b = filter_spike(b)
    curve = betti_curve(b)
    n_bars, max_bar = bar_stats(b)
    try:
        delta = delta_eps(curve, eps_rel=eps_rel)
    except BettiError as e:
        logger.warning("%s: %s", knot_id, e)
        delta = math.nan
    return FeatureRecord(knot_id, length, knot_type, integral_I(b), n_bars,
                         max_bar, delta, spike_filtered, curve.maximum,
                         small_angles)

