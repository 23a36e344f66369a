"""Piecewise-linear knot embeddings"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import logging
import math
from typing import List, Optional
import numpy as np

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
"""Default absolute geometric tolerance"""

SPACING = 0.1
"""Point cloud spacing for unit edges interpolated with ten points"""

MIN_VERTICES = 3
"""Minimum vertex count accepted by validation"""


##############################################################################
#
# Exceptions


class KnotError(ValueError):
    """Invalid knot embedding"""

    def __str__(self):
        return "Invalid knot: %s" % self.args


##############################################################################
#
# Knot embeddings


def _frozen(points) -> np.ndarray:
    """Construct read-only (N, 3) coordinate array"""
    array = np.array(points, dtype=np.float64)
    if array.ndim != 2 or array.shape[1] != 3:
        raise KnotError("expected (N, 3) coordinates, got shape %s" %
                        (array.shape,))
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class KnotEmbedding:
    """A closed equilateral polygon

    Vertices are stored in traversal order; the closing edge joins the
    last vertex back to the first and is not repeated.
    """

    id: str
    vertices: np.ndarray = field(repr=False)
    seed: int = 0
    knot_type: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'vertices', _frozen(self.vertices))

    def __eq__(self, other):
        if not isinstance(other, KnotEmbedding):
            return NotImplemented
        return (self.id == other.id and self.seed == other.seed and
                self.knot_type == other.knot_type and
                np.array_equal(self.vertices, other.vertices))

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> np.ndarray:
        """Edge vectors, including the closing edge"""
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def moved(self, vertices: np.ndarray) -> KnotEmbedding:
        """Construct copy with replacement vertices"""
        return replace(self, vertices=vertices)

    def typed(self, knot_type: Optional[str]) -> KnotEmbedding:
        """Construct copy with a knot type label"""
        return replace(self, knot_type=knot_type)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Dense interpolated sample of a knot embedding"""

    points: np.ndarray = field(repr=False)
    source_id: str = ''
    spacing: float = SPACING

    def __post_init__(self) -> None:
        object.__setattr__(self, 'points', _frozen(self.points))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Violation:
    """A knot embedding invariant violation"""

    kind: str
    index: int
    detail: str

    def __str__(self) -> str:
        return "%s at %d: %s" % (self.kind, self.index, self.detail)


##############################################################################
#
# Operations


def knot_length(k: KnotEmbedding) -> int:
    """Length of an embedding (which equals its number of unit edges)"""
    return len(k.vertices)


def validate(k: KnotEmbedding, tol: float = TOLERANCE) -> List[Violation]:
    """Check knot embedding invariants"""
    violations = []
    count = len(k.vertices)
    if count < MIN_VERTICES:
        violations.append(Violation('count', count,
                                    "fewer than %d vertices" % MIN_VERTICES))
        return violations
    if not np.all(np.isfinite(k.vertices)):
        bad = int(np.argmin(np.all(np.isfinite(k.vertices), axis=1)))
        violations.append(Violation('coordinate', bad, "non-finite"))
        return violations
    lengths = np.linalg.norm(k.edges, axis=1)
    for i, length in enumerate(lengths):
        if length < tol:
            violations.append(Violation(
                'coincident', i, "vertices %d and %d coincide" %
                (i, (i + 1) % count)
            ))
        elif abs(length - 1.0) > tol:
            violations.append(Violation(
                'edge-length', i, "edge %d->%d has length %.17g" %
                (i, (i + 1) % count, length)
            ))
    return violations


def check(k: KnotEmbedding) -> KnotEmbedding:
    """Raise an exception unless knot embedding invariants hold"""
    violations = validate(k)
    if violations:
        raise KnotError("%s: %s" % (k.id, "; ".join(str(x)
                                                    for x in violations)))
    return k


def interpolate(k: KnotEmbedding, points_per_edge: int = 10) -> PointCloud:
    """Construct the interpolated point cloud of an embedding

    Each edge contributes its starting vertex followed by
    ``points_per_edge - 1`` equidistant interior points, so that every
    original vertex appears exactly once.
    """
    if points_per_edge < 1:
        raise KnotError("points per edge must be positive, got %d" %
                        points_per_edge)
    check(k)
    steps = np.arange(points_per_edge) / points_per_edge
    points = (k.vertices[:, np.newaxis, :] +
              steps[np.newaxis, :, np.newaxis] * k.edges[:, np.newaxis, :])
    return PointCloud(points.reshape(-1, 3), source_id=k.id,
                      spacing=1.0 / points_per_edge)


def regular_polygon(count: int, id: str = 'regular') -> KnotEmbedding:
    """Construct a planar regular polygon with unit edges"""
    # pylint: disable=redefined-builtin
    if count < MIN_VERTICES:
        raise KnotError("cannot construct a %d-gon" % count)
    radius = 0.5 / math.sin(math.pi / count)
    angles = 2 * math.pi * np.arange(count) / count
    vertices = np.stack([radius * np.cos(angles), radius * np.sin(angles),
                         np.zeros(count)], axis=1)
    return KnotEmbedding(id, vertices)
