"""Vietoris-Rips persistent homology"""

from __future__ import annotations

from dataclasses import dataclass, field
import heapq
import logging
import math
from typing import Dict, List, Optional, Tuple
import numpy as np
from scipy.spatial.distance import pdist, squareform
from .knot import PointCloud, TOLERANCE

logger = logging.getLogger(__name__)

DIAMETER = 'diameter'
"""Scale tag for filtration values measured as pairwise distances"""

RADIUS = 'radius'
"""Scale tag for filtration values measured as neighbourhood radii"""


##############################################################################
#
# Exceptions


class PersistenceError(ValueError):
    """Invalid persistence input"""

    def __str__(self):
        return "Persistence error: %s" % self.args


##############################################################################
#
# Distance matrices


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric matrix of pairwise distances with zero diagonal"""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise PersistenceError("expected square matrix, got shape %s" %
                                   (entries.shape,))
        if not np.all(np.isfinite(entries)):
            raise PersistenceError("non-finite distance")
        if np.any(entries < 0):
            raise PersistenceError("negative distance")
        if not np.array_equal(entries, entries.T):
            raise PersistenceError("asymmetric distances")
        if np.any(np.diagonal(entries) != 0):
            raise PersistenceError("nonzero self-distance")
        entries.flags.writeable = False
        object.__setattr__(self, 'entries', entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        """Number of points"""
        return len(self.entries)

    @property
    def max(self) -> float:
        """Largest pairwise distance"""
        return float(np.max(self.entries)) if self.n else 0.0

    @property
    def enclosing_radius(self) -> float:
        """Smallest scale at which some point is adjacent to all others

        The Rips complex is a cone beyond this scale and so carries no
        homology in positive dimensions.
        """
        return float(np.min(np.max(self.entries, axis=1))) if self.n else 0.0

    def is_metric(self, tol: float = TOLERANCE) -> bool:
        """Check the triangle inequality"""
        d = self.entries
        return all(np.all(d <= d[:, [k]] + d[[k], :] + tol)
                   for k in range(self.n))


def distance_matrix(cloud: PointCloud) -> DistanceMatrix:
    """Pairwise Euclidean distances between the points of a cloud"""
    if len(cloud) < 2:
        raise PersistenceError("need at least two points, got %d" %
                               len(cloud))
    return DistanceMatrix(squareform(pdist(cloud.points)))


##############################################################################
#
# Barcodes


@dataclass(frozen=True, order=True)
class Bar:
    """A persistence interval"""

    birth: float
    death: float

    @property
    def persistence(self) -> float:
        """Interval length"""
        return self.death - self.birth

    @property
    def essential(self) -> bool:
        """Interval never dies"""
        return math.isinf(self.death)


@dataclass(frozen=True)
class Barcode:
    """Dimension 0 and dimension 1 persistence intervals"""

    dim0: Tuple[Bar, ...] = ()
    dim1: Tuple[Bar, ...] = ()
    scale: str = DIAMETER

    def __post_init__(self) -> None:
        for bar in self.dim0 + self.dim1:
            if not bar.birth <= bar.death:
                raise PersistenceError("bar %r dies before birth" % (bar,))
        if any(x.essential for x in self.dim1):
            raise PersistenceError("essential dimension 1 bar")

    def bars(self, dim: int) -> Tuple[Bar, ...]:
        """Intervals in a given dimension"""
        if dim == 0:
            return self.dim0
        if dim == 1:
            return self.dim1
        raise PersistenceError("no bars in dimension %r" % dim)


##############################################################################
#
# Filtration


class _Filtration:
    """Edges of the Rips filtration in total order

    Edges are sorted by (length, lower index, upper index).  A triangle
    is identified by the rank of its longest edge and its vertex
    opposite that edge, packed into a single integer key; key order is
    a valid filtration order on triangles.
    """

    # pylint: disable=too-few-public-methods

    def __init__(self, dm: DistanceMatrix, threshold: float) -> None:
        n = dm.n
        i, j = np.triu_indices(n, 1)
        d = dm.entries[i, j]
        order = np.lexsort((j, i, d))
        self.n = n
        self.i = i[order]
        self.j = j[order]
        self.d = d[order]
        self.count = int(np.searchsorted(self.d, threshold, side='right'))
        self.rank = np.full((n, n), -1, dtype=np.int64)
        ranks = np.arange(len(order), dtype=np.int64)
        self.rank[self.i, self.j] = ranks
        self.rank[self.j, self.i] = ranks

    def coboundary(self, r: int) -> np.ndarray:
        """Sorted keys of the triangles containing edge r"""
        i = self.i[r]
        j = self.j[r]
        ri = self.rank[i]
        rj = self.rank[j]
        top = np.maximum(ri, rj)
        keep = (top != r) & (np.maximum(top, r) < self.count)
        vertices = np.flatnonzero(keep)
        top = top[keep]
        longest = np.maximum(top, r)
        opposite = np.where(top > r, np.where(ri[keep] > rj[keep], j, i),
                            vertices)
        return np.sort(longest * self.n + opposite)


_EXHAUSTED = np.empty(0, dtype=np.int64)


class _Column:
    """Working coboundary column held as merged cofacet streams

    Every pushed stream is a sorted array of cofacet keys, of which only
    the smallest unconsumed key sits on the heap.  A key met an even
    number of times cancels over Z/2.
    """

    def __init__(self) -> None:
        self.heap: List[Tuple[int, int]] = []
        self.streams: List[np.ndarray] = []
        self.offsets: List[int] = []

    def push(self, keys: np.ndarray) -> None:
        """Add a sorted stream of cofacet keys"""
        if len(keys):
            heapq.heappush(self.heap, (keys.item(0), len(self.streams)))
            self.streams.append(keys)
            self.offsets.append(0)

    def pivot(self) -> Optional[int]:
        """Find the smallest surviving key, leaving it in the column"""
        heap = self.heap
        streams = self.streams
        offsets = self.offsets
        while heap:
            key = heap[0][0]
            count = 0
            while heap and heap[0][0] == key:
                index = heap[0][1]
                offset = offsets[index] + 1
                keys = streams[index]
                if offset < len(keys):
                    offsets[index] = offset
                    heapq.heapreplace(heap, (keys.item(offset), index))
                else:
                    streams[index] = _EXHAUSTED
                    heapq.heappop(heap)
                count += 1
            if count % 2:
                self.push(np.array([key], dtype=np.int64))
                return key
        return None


##############################################################################
#
# Persistence


def _find(parent: List[int], x: int) -> int:
    """Find component root with path halving"""
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def persistence(dm: DistanceMatrix, t_max: Optional[float] = None) -> Barcode:
    """Compute dimension 0 and dimension 1 barcodes of the Rips filtration

    Dimension 0 is computed by union-find over edges in filtration
    order.  Dimension 1 is computed by reduction of the coboundary
    matrix, with edges that merge components cleared.  Apparent pairs
    (an edge whose earliest cofacet has it as longest edge) and emergent
    pairs (a column whose earliest cofacet is not yet claimed) are
    recognized without reduction.  Reduced columns are kept only as the
    set of edges they sum, and coboundaries are regenerated on demand.
    Zero-length intervals are not reported, and classes still alive at
    t_max are dropped.
    """
    # pylint: disable=too-many-locals,too-many-branches
    if t_max is None:
        t_max = dm.max
    if t_max < 0 or math.isnan(t_max):
        raise PersistenceError("invalid threshold %r" % t_max)
    n = dm.n
    if not n:
        raise PersistenceError("empty distance matrix")
    f = _Filtration(dm, min(t_max, dm.enclosing_radius))

    parent = list(range(n))
    bits = [1 << x for x in range(n)]
    neighbours = [0] * n
    apparent = np.full(len(f.d), -1, dtype=np.int64)
    deaths: List[float] = []
    columns: List[int] = []
    for r, (i, j) in enumerate(zip(f.i.tolist(), f.j.tolist())):
        if r >= f.count and len(deaths) == n - 1:
            break
        if r < f.count:
            common = neighbours[i] & neighbours[j]
            neighbours[i] |= bits[j]
            neighbours[j] |= bits[i]
            if common:
                apparent[r] = (common & -common).bit_length() - 1
                continue
        root_i = _find(parent, i)
        root_j = _find(parent, j)
        if root_i != root_j:
            parent[max(root_i, root_j)] = min(root_i, root_j)
            deaths.append(float(f.d[r]))
        elif r < f.count:
            columns.append(r)
    dim0 = tuple(Bar(0.0, x) for x in deaths) + (Bar(0.0, math.inf),)
    if len(deaths) != n - 1:
        raise PersistenceError("%d components remain" % (n - len(deaths)))

    dim1 = []
    owners: Dict[int, Tuple[int, ...]] = {}
    essential = 0
    for r in reversed(columns):
        pivot = _reduce(f, r, apparent, owners)
        if pivot is None:
            essential += 1
            continue
        death = f.d[pivot // n]
        if death > f.d[r]:
            dim1.append(Bar(float(f.d[r]), float(death)))
    if essential:
        logger.debug("dropped %d classes alive at %g", essential, t_max)
    return Barcode(dim0, tuple(sorted(dim1)))


def _reduce(f: _Filtration, r: int, apparent: np.ndarray,
            owners: Dict[int, Tuple[int, ...]]) -> Optional[int]:
    """Reduce the coboundary column of edge r

    Returns the pivot cofacet key, or None if the column reduces to
    zero.  The pivot is recorded in owners together with the edges
    whose coboundaries sum to the reduced column.
    """
    keys = f.coboundary(r)
    if not len(keys):
        return None
    pivot = keys.item(0)
    edge, vertex = divmod(pivot, f.n)
    if apparent[edge] != vertex and pivot not in owners:
        owners[pivot] = (r,)
        return pivot
    column = _Column()
    column.push(keys)
    record = {r}
    while True:
        edge, vertex = divmod(pivot, f.n)
        if apparent[edge] == vertex:
            added: Tuple[int, ...] = (edge,)
        elif pivot in owners:
            added = owners[pivot]
        else:
            owners[pivot] = tuple(sorted(record))
            return pivot
        for other in added:
            column.push(f.coboundary(other))
        record.symmetric_difference_update(added)
        found = column.pivot()
        if found is None:
            return None
        pivot = found
