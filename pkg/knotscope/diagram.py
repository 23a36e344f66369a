"""Knot diagrams and knot type classification"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
import enum
import logging
from typing import Dict, List, Mapping, Sequence, Tuple
import numpy as np
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix
from .geometry import nonadjacent_pairs
from .knot import KnotEmbedding, TOLERANCE
from .sampler import stream

logger = logging.getLogger(__name__)

MAX_RETRIES = 20
"""Maximum number of non-generic projections tolerated by classify"""


##############################################################################
#
# Exceptions


class NonGenericProjection(Exception):
    """Projection direction is not generic for this embedding"""

    def __str__(self):
        return "Non-generic projection: %s" % self.args


class ClassificationError(NonGenericProjection):
    """No generic projection found after repeated attempts"""

    def __str__(self):
        return "Classification failed: %s" % self.args


class DiagramError(ValueError):
    """Malformed knot diagram"""

    def __str__(self):
        return "Invalid diagram: %s" % self.args


##############################################################################
#
# Knot types


class KnotType(enum.Enum):
    """A knot type with at most six crossings"""

    UNKNOT = '0_1'
    TREFOIL = '3_1'
    FIGURE_EIGHT = '4_1'
    CINQUEFOIL = '5_1'
    THREE_TWIST = '5_2'
    STEVEDORE = '6_1'
    K6_2 = '6_2'
    K6_3 = '6_3'
    UNKNOWN = 'unknown'

    def __str__(self) -> str:
        return self.value


FINGERPRINTS: Mapping[Tuple[int, int], KnotType] = {
    (1, 1): KnotType.UNKNOT,
    (3, 7): KnotType.TREFOIL,
    (5, 1): KnotType.FIGURE_EIGHT,
    (5, 61): KnotType.CINQUEFOIL,
    (7, 11): KnotType.THREE_TWIST,
    (9, 5): KnotType.STEVEDORE,
    (11, 19): KnotType.K6_2,
    (13, 37): KnotType.K6_3,
}
"""Knot types by Alexander polynomial values at t = -1 and t = 3"""


##############################################################################
#
# Diagrams


GaussEntry = Tuple[int, int]
"""A crossing passage: crossing index and +1 (over) or -1 (under)"""


@dataclass(frozen=True)
class Crossing:
    """A diagram crossing

    The strands are identified by the positions of the over and under
    passages within the Gauss code.
    """

    over: int
    under: int
    sign: int


@dataclass(frozen=True)
class Diagram:
    """A knot diagram given by its signed Gauss code"""

    crossings: Tuple[Crossing, ...]
    gauss_code: Tuple[GaussEntry, ...]

    def __len__(self) -> int:
        return len(self.crossings)

    @classmethod
    def from_code(cls, code: Sequence[GaussEntry],
                  signs: Mapping[int, int]) -> Diagram:
        """Construct diagram from a Gauss code with arbitrary crossing labels

        Crossings are renumbered in order of first appearance.
        """
        labels: Dict[int, int] = {}
        for label, _ in code:
            labels.setdefault(label, len(labels))
        passages: Dict[Tuple[int, int], int] = {}
        renumbered = []
        for position, (label, over) in enumerate(code):
            if over not in (1, -1):
                raise DiagramError("passage %r is neither over nor under" %
                                   ((label, over),))
            key = (labels[label], over)
            if key in passages:
                raise DiagramError("crossing %r passed %s twice" %
                                   (label, 'over' if over > 0 else 'under'))
            passages[key] = position
            renumbered.append(key)
        crossings = []
        for label, index in labels.items():
            if (index, 1) not in passages or (index, -1) not in passages:
                raise DiagramError("crossing %r visited only once" % label)
            if signs[label] not in (1, -1):
                raise DiagramError("crossing %r has sign %r" %
                                   (label, signs[label]))
            crossings.append(Crossing(passages[(index, 1)],
                                      passages[(index, -1)], signs[label]))
        return cls(tuple(crossings), tuple(renumbered))

    @property
    def signs(self) -> Dict[int, int]:
        """Crossing signs by crossing index"""
        return {i: x.sign for i, x in enumerate(self.crossings)}


def braid_closure(word: Sequence[int]) -> Diagram:
    """Construct the closure diagram of a braid word

    Generators are numbered from one; a negative number denotes the
    inverse generator.  Strands run downwards and the positive
    generator passes the left strand over the right strand.
    """
    strands = max((abs(x) for x in word), default=0) + 1
    code: List[GaussEntry] = []
    signs = {m: (-1 if g > 0 else 1) for m, g in enumerate(word)}
    position = 0
    while True:
        for m, g in enumerate(word):
            left = abs(g) - 1
            if position == left:
                code.append((m, 1 if g > 0 else -1))
                position = left + 1
            elif position == left + 1:
                code.append((m, -1 if g > 0 else 1))
                position = left
        if position == 0:
            break
    if len(code) != 2 * len(word) or strands < 1:
        raise DiagramError("braid %r does not close to a knot" % (word,))
    return Diagram.from_code(code, signs)


##############################################################################
#
# Projection


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Planar cross products"""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _frame(direction) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-handed orthonormal frame (u, w, d) with d along direction"""
    d = np.asarray(direction, dtype=np.float64)
    d = d / np.linalg.norm(d)
    helper = np.eye(3)[int(np.argmin(np.abs(d)))]
    u = helper - np.dot(helper, d) * d
    u /= np.linalg.norm(u)
    return u, np.cross(d, u), d


def project(k: KnotEmbedding, direction, tol: float = TOLERANCE) -> Diagram:
    """Project an embedding onto the plane orthogonal to direction

    Passages are ordered along the knot; the over strand is the one
    lying further along the projection direction.
    """
    # pylint: disable=too-many-locals
    u, w, d = _frame(direction)
    starts = k.vertices @ np.stack([u, w]).T
    depths = k.vertices @ d
    edges = np.roll(starts, -1, axis=0) - starts
    rises = np.roll(depths, -1) - depths
    lengths = np.linalg.norm(edges, axis=1)
    if np.min(lengths) < tol:
        raise NonGenericProjection("%s: edge %d parallel to direction" %
                                   (k.id, int(np.argmin(lengths))))
    turns = _cross(edges, np.roll(edges, -1, axis=0))
    folds = np.einsum('ij,ij->i', edges, np.roll(edges, -1, axis=0))
    folded = ((np.abs(turns) < tol * lengths * np.roll(lengths, -1)) &
              (folds < 0))
    if np.any(folded):
        raise NonGenericProjection("%s: projection folds back at vertex %d" %
                                   (k.id, (int(np.argmax(folded)) + 1) %
                                    len(k)))

    i, j = nonadjacent_pairs(len(k))
    ei = edges[i]
    ej = edges[j]
    offset = starts[j] - starts[i]
    denom = _cross(ei, ej)
    scale = lengths[i] * lengths[j]
    parallel = np.abs(denom) < tol * scale
    with np.errstate(divide='ignore', invalid='ignore'):
        s = np.where(parallel, -1.0, _cross(offset, ej) / denom)
        t = np.where(parallel, -1.0, _cross(offset, ei) / denom)
    if np.any(parallel):
        gaps = (np.abs(_cross(offset[parallel], ei[parallel])) /
                lengths[i][parallel])
        along = np.einsum('ij,ij->i', offset[parallel],
                          ei[parallel]) / lengths[i][parallel] ** 2
        reach = lengths[j][parallel] / lengths[i][parallel]
        overlap = (gaps < tol) & (along < 1 + tol) & (along + reach > -tol)
        if np.any(overlap):
            raise NonGenericProjection("%s: collinear edge projections" %
                                       k.id)
    hits = (s > -tol) & (s < 1 + tol) & (t > -tol) & (t < 1 + tol)
    edge_hits = hits & ((np.minimum(s, 1 - s) < tol) |
                        (np.minimum(t, 1 - t) < tol))
    if np.any(edge_hits):
        raise NonGenericProjection("%s: crossing through a vertex" % k.id)
    i, j, s, t = i[hits], j[hits], s[hits], t[hits]
    zi = depths[i] + s * rises[i]
    zj = depths[j] + t * rises[j]
    if np.any(np.abs(zi - zj) < tol):
        raise NonGenericProjection("%s: edges %d and %d intersect" %
                                   (k.id, i[0], j[0]))
    points = starts[i] + s[:, np.newaxis] * edges[i]
    if len(points) > 1:
        separation = np.linalg.norm(points[:, np.newaxis] - points, axis=2)
        np.fill_diagonal(separation, np.inf)
        if np.min(separation) < tol:
            raise NonGenericProjection("%s: triple point" % k.id)

    passages = []
    signs = {}
    for c in range(len(i)):
        i_over = zi[c] > zj[c]
        over, under = (i[c], j[c]) if i_over else (j[c], i[c])
        signs[c] = 1 if _cross(edges[over], edges[under]) > 0 else -1
        passages.append((i[c], s[c], c, 1 if i_over else -1))
        passages.append((j[c], t[c], c, -1 if i_over else 1))
    passages.sort()
    return Diagram.from_code([(c, over) for _, _, c, over in passages],
                             signs)


##############################################################################
#
# Reidemeister simplification


def _kink(code: List[GaussEntry]) -> Tuple[int, ...]:
    """Find positions of a Reidemeister I loop"""
    count = len(code)
    for p in range(count):
        q = (p + 1) % count
        if p != q and code[p][0] == code[q][0]:
            return (p, q)
    return ()


def _bigon(code: List[GaussEntry],
           signs: Mapping[int, int]) -> Tuple[int, ...]:
    """Find positions of a Reidemeister II bigon"""
    count = len(code)
    where = {entry: p for p, entry in enumerate(code)}
    for p in range(count):
        q = (p + 1) % count
        (a, over_a), (b, over_b) = code[p], code[q]
        if a == b or over_a != over_b or signs[a] != -signs[b]:
            continue
        pa = where[(a, -over_a)]
        pb = where[(b, -over_b)]
        if (pa + 1) % count == pb or (pb + 1) % count == pa:
            return (p, q, pa, pb)
    return ()


def simplify(d: Diagram) -> Diagram:
    """Remove Reidemeister I loops and Reidemeister II bigons"""
    code = list(d.gauss_code)
    signs = d.signs
    while code:
        positions = _kink(code) or _bigon(code, signs)
        if not positions:
            break
        code = [x for p, x in enumerate(code) if p not in positions]
    return Diagram.from_code(code, signs)


##############################################################################
#
# Alexander polynomial


def _alexander_matrix(d: Diagram, t: int) -> List[List[int]]:
    """Construct the Alexander matrix evaluated at an integer"""
    count = len(d.crossings)
    over_arc = [0] * count
    incoming = [0] * count
    outgoing = [0] * count
    arc = 0
    for crossing, over in d.gauss_code:
        if over > 0:
            over_arc[crossing] = arc
        else:
            incoming[crossing] = arc
            arc = (arc + 1) % count
            outgoing[crossing] = arc
    matrix = [[0] * count for _ in range(count)]
    for c, crossing in enumerate(d.crossings):
        if crossing.sign > 0:
            entries = (1 - t, t, -1)
        else:
            entries = (t - 1, 1, -t)
        for column, value in zip((over_arc[c], incoming[c], outgoing[c]),
                                 entries):
            matrix[c][column] += value
    return matrix


def alexander_value(d: Diagram, t: int) -> int:
    """Alexander polynomial evaluated at t, up to a unit factor"""
    if not d.crossings:
        return 1
    matrix = _alexander_matrix(d, t)
    minor = [[ZZ(x) for x in row[:-1]] for row in matrix[:-1]]
    size = len(minor)
    if not size:
        return 1
    return int(DomainMatrix(minor, (size, size), ZZ).det())


def alexander_fingerprint(d: Diagram) -> Tuple[int, int]:
    """Alexander polynomial values at t = -1 and t = 3

    Values are made positive, and all factors of three are stripped
    from the value at t = 3 to remove the ambiguity of the unit factor.
    """
    det = abs(alexander_value(d, -1))
    a3 = abs(alexander_value(d, 3))
    while a3 and a3 % 3 == 0:
        a3 //= 3
    return det, a3


##############################################################################
#
# Classification


def lookup(fingerprint: Tuple[int, int]) -> KnotType:
    """Identify knot type from an Alexander fingerprint"""
    return FINGERPRINTS.get(fingerprint, KnotType.UNKNOWN)


def random_direction(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed unit vector"""
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def classify(k: KnotEmbedding, n_projections: int = 3,
             seed: int = 0) -> KnotType:
    """Classify an embedding by majority vote over random projections"""
    rng = stream(seed)
    votes: List[KnotType] = []
    failures = 0
    while len(votes) < n_projections:
        direction = random_direction(rng)
        try:
            diagram = project(k, direction)
        except NonGenericProjection as e:
            failures += 1
            logger.debug("retrying projection: %s", e)
            if failures > MAX_RETRIES:
                raise ClassificationError("%s: %d non-generic projections" %
                                          (k.id, failures)) from e
            continue
        simplified = simplify(diagram)
        fingerprint = alexander_fingerprint(simplified)
        logger.debug("%s: %d crossings (%d simplified), fingerprint %s",
                     k.id, len(diagram), len(simplified), fingerprint)
        votes.append(lookup(fingerprint))
    tally = Counter(votes)
    return max(tally, key=lambda x: (tally[x], -votes.index(x)))
