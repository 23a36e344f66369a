"""Geometric observables of knot embeddings"""

from __future__ import annotations

from dataclasses import dataclass, asdict
import logging
import math
from typing import List, Mapping, Tuple
import numpy as np
from scipy.spatial import ConvexHull, QhullError
from .knot import KnotEmbedding, TOLERANCE

logger = logging.getLogger(__name__)

SHARP_ANGLE = math.acos(0.75)
"""Largest interior angle counted as small"""


##############################################################################
#
# Exceptions


class GeometryError(ValueError):
    """Geometric measure undefined for this embedding"""

    def __str__(self):
        return "Geometry error: %s" % self.args


##############################################################################
#
# Segment pairs


def nonadjacent_pairs(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Index pairs (i < j) of edges of a closed polygon sharing no vertex"""
    i, j = np.triu_indices(count, 2)
    keep = ~((i == 0) & (j == count - 1))
    return i[keep], j[keep]


def segment_distances(p1, q1, p2, q2) -> np.ndarray:
    """Minimum distances between corresponding pairs of segments

    Segments are given by stacked (N, 3) endpoint arrays and must have
    nonzero length.
    """
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum('ij,ij->i', d1, d1)
    e = np.einsum('ij,ij->i', d2, d2)
    b = np.einsum('ij,ij->i', d1, d2)
    c = np.einsum('ij,ij->i', d1, r)
    f = np.einsum('ij,ij->i', d2, r)
    denom = a * e - b * b
    with np.errstate(divide='ignore', invalid='ignore'):
        s = np.where(denom > 1e-15 * a * e,
                     np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        s = np.where(t < 0, np.clip(-c / a, 0.0, 1.0),
                     np.where(t > 1, np.clip((b - c) / a, 0.0, 1.0), s))
    t = np.clip(t, 0.0, 1.0)
    closest1 = p1 + d1 * s[:, np.newaxis]
    closest2 = p2 + d2 * t[:, np.newaxis]
    return np.linalg.norm(closest1 - closest2, axis=1)


def min_segment_distance(vertices: np.ndarray) -> float:
    """Minimum distance between non-adjacent edges of a closed polygon"""
    i, j = nonadjacent_pairs(len(vertices))
    if not len(i):
        return math.inf
    ends = np.roll(vertices, -1, axis=0)
    return float(np.min(segment_distances(vertices[i], ends[i],
                                          vertices[j], ends[j])))


##############################################################################
#
# Enclosing volumes


def _circumsphere(support: List[np.ndarray]) -> Tuple[np.ndarray, float]:
    """Smallest sphere passing through all support points"""
    if not support:
        return np.zeros(3), -math.inf
    origin = support[0]
    if len(support) == 1:
        return origin, 0.0
    q = np.array(support[1:]) - origin
    lam = np.linalg.lstsq(2 * q @ q.T, np.einsum('ij,ij->i', q, q),
                          rcond=None)[0]
    centre = origin + lam @ q
    return centre, float(max(np.linalg.norm(x - centre) for x in support))


def _move_to_front(points: List[np.ndarray], end: int,
                   support: List[np.ndarray],
                   tol: float) -> Tuple[np.ndarray, float]:
    """Smallest ball of points[:end] with support on its boundary"""
    centre, radius = _circumsphere(support)
    if len(support) == 4:
        return centre, radius
    for i in range(end):
        p = points[i]
        if np.linalg.norm(p - centre) > radius + tol:
            centre, radius = _move_to_front(points, i, support + [p], tol)
            points.insert(0, points.pop(i))
    return centre, radius


def min_enclosing_sphere(points) -> Tuple[np.ndarray, float]:
    """Smallest ball containing all points

    This is a randomized incremental algorithm using the move-to-front
    heuristic; recursion is only ever over the (at most four) support
    points.  The shuffle uses a fixed seed so that results are
    reproducible.
    """
    points = np.asarray(points, dtype=np.float64)
    if not len(points):
        raise GeometryError("no points")
    order = np.random.default_rng(0).permutation(len(points))
    scale = max(1.0, float(np.max(np.abs(points))))
    shuffled = [points[x] for x in order]
    centre, radius = _move_to_front(shuffled, len(shuffled), [],
                                    1e-12 * scale)
    return np.asarray(centre), radius


def sphere_volume(radius: float) -> float:
    """Volume of a ball"""
    return 4.0 / 3.0 * math.pi * radius ** 3


def sphere_radius(volume: float) -> float:
    """Radius of a ball of given volume"""
    return float(np.cbrt(0.75 * volume / math.pi))


def convex_hull_volume(points) -> float:
    """Volume of the convex hull (zero for degenerate point sets)"""
    points = np.asarray(points, dtype=np.float64)
    if len(points) < 4:
        return 0.0
    try:
        return float(ConvexHull(points).volume)
    except (QhullError, ValueError):
        return 0.0


def radius_of_gyration(points) -> float:
    """Root mean square distance from the centroid"""
    points = np.asarray(points, dtype=np.float64)
    offsets = points - points.mean(axis=0)
    return float(math.sqrt(np.mean(np.einsum('ij,ij->i', offsets, offsets))))


##############################################################################
#
# Curvature and torsion


def _units(vectors: np.ndarray) -> np.ndarray:
    """Normalize vectors"""
    return vectors / np.linalg.norm(vectors, axis=1)[:, np.newaxis]


def total_curvature(k: KnotEmbedding) -> float:
    """Sum of exterior angles between successive edges"""
    edges = _units(k.edges)
    cosines = np.einsum('ij,ij->i', np.roll(edges, 1, axis=0), edges)
    return float(np.sum(np.arccos(np.clip(cosines, -1.0, 1.0))))


def small_angles(k: KnotEmbedding, angle: float = SHARP_ANGLE) -> int:
    """Number of vertices whose interior angle is at most a given angle

    At the default angle, each such vertex gives rise to a short-lived
    dimension 1 class in the Rips complex of the interpolated point
    cloud.
    """
    edges = _units(k.edges)
    cosines = np.einsum('ij,ij->i', np.roll(edges, 1, axis=0), edges)
    return int(np.sum(-cosines >= math.cos(angle) - TOLERANCE))


def total_torsion(k: KnotEmbedding) -> float:
    """Sum of absolute dihedral angles between consecutive osculating planes

    The osculating plane at vertex i is spanned by the edges meeting
    there; the torsion angle of edge i is the angle between the planes
    at its two ends.  Collinear triples have no osculating plane and
    contribute nothing.
    """
    edges = _units(k.edges)
    binormals = np.cross(np.roll(edges, 1, axis=0), edges)
    following = np.roll(binormals, -1, axis=0)
    sines = np.einsum('ij,ij->i', np.cross(binormals, following), edges)
    cosines = np.einsum('ij,ij->i', binormals, following)
    norms = np.linalg.norm(binormals, axis=1)
    flat = (norms < TOLERANCE) | (np.roll(norms, -1) < TOLERANCE)
    if np.any(flat):
        logger.debug("%s: %d torsion terms with collinear edges", k.id,
                     int(np.sum(flat)))
    angles = np.abs(np.arctan2(sines, cosines))
    return float(np.sum(np.where(flat, 0.0, angles)))


##############################################################################
#
# Average crossing number


def _solid_angles(p1, p2, p3, p4) -> np.ndarray:
    """Signed Gauss map areas of segment pairs (p1, p2) and (p3, p4)"""

    def normal(a, b):
        n = np.cross(a, b)
        norm = np.linalg.norm(n, axis=1)
        return n / np.where(norm > 0, norm, 1.0)[:, np.newaxis]

    def asin(a, b):
        return np.arcsin(np.clip(np.einsum('ij,ij->i', a, b), -1.0, 1.0))

    r13 = p3 - p1
    r14 = p4 - p1
    r23 = p3 - p2
    r24 = p4 - p2
    n1 = normal(r13, r14)
    n2 = normal(r14, r24)
    n3 = normal(r24, r23)
    n4 = normal(r23, r13)
    area = asin(n1, n2) + asin(n2, n3) + asin(n3, n4) + asin(n4, n1)
    sign = np.sign(np.einsum('ij,ij->i', np.cross(p4 - p3, p2 - p1), r13))
    return area * sign


def average_crossing_number(k: KnotEmbedding) -> float:
    """Average crossing number over all projection directions

    Each pair of non-adjacent edges contributes the area of its Gauss
    map image, which for straight segments has constant sign, so that
    the absolute pairwise value is exact.
    """
    i, j = nonadjacent_pairs(len(k))
    if not len(i):
        return 0.0
    starts = k.vertices
    ends = np.roll(starts, -1, axis=0)
    distances = segment_distances(starts[i], ends[i], starts[j], ends[j])
    if np.min(distances) < TOLERANCE:
        bad = int(np.argmin(distances))
        raise GeometryError("%s: edges %d and %d intersect" %
                            (k.id, i[bad], j[bad]))
    omega = _solid_angles(starts[i], ends[i], starts[j], ends[j])
    return float(np.sum(np.abs(omega)) / (2 * math.pi))


##############################################################################
#
# Geometry records


@dataclass(frozen=True)
class GeometryRecord:
    """Geometric observables of a knot embedding"""

    rs_radius: float
    rs_volume: float
    hull_volume: float
    rg: float
    total_curvature: float
    total_torsion: float
    acn: float

    def asdict(self) -> Mapping[str, float]:
        """Field values by name"""
        return asdict(self)


def measure(k: KnotEmbedding) -> GeometryRecord:
    """Compute all geometric observables of an embedding"""
    _, radius = min_enclosing_sphere(k.vertices)
    return GeometryRecord(
        rs_radius=radius,
        rs_volume=sphere_volume(radius),
        hull_volume=convex_hull_volume(k.vertices),
        rg=radius_of_gyration(k.vertices),
        total_curvature=total_curvature(k),
        total_torsion=total_torsion(k),
        acn=average_crossing_number(k),
    )
