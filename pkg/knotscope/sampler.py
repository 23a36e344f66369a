"""Random and parametric knot generation"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import ClassVar, Iterator, Mapping, Optional, Tuple
import numpy as np
from scipy.optimize import brentq
from scipy.spatial.transform import Rotation
from .geometry import min_segment_distance
from .knot import KnotEmbedding, TOLERANCE, check, regular_polygon

logger = logging.getLogger(__name__)

MIN_LENGTH = 6
"""Minimum polygon length accepted by the sampler"""

RENORMALIZE_EVERY = 1000
"""Number of moves between edge renormalizations"""

CLEARANCE = 1e-6
"""Minimum distance between non-adjacent edges of a parametric knot"""


##############################################################################
#
# Exceptions


class SamplerError(ValueError):
    """Invalid sampler configuration or failed construction"""

    def __str__(self):
        return "Sampler error: %s" % self.args


##############################################################################
#
# Random number streams


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Construct a counter-based random number stream

    The stream depends only on the seed and the keys (such as a chain
    or knot index), so that work may be distributed across processes
    without changing results.
    """
    entropy = [int(seed), *(int(x) for x in keys)]
    bits = np.random.Philox(np.random.SeedSequence(entropy))
    return np.random.Generator(bits)


##############################################################################
#
# Equilateral polygon moves


def renormalize(vertices: np.ndarray) -> np.ndarray:
    """Restore exactly unit edges and closure after floating drift"""
    edges = np.roll(vertices, -1, axis=0) - vertices
    for _ in range(100):
        edges /= np.linalg.norm(edges, axis=1)[:, np.newaxis]
        gap = edges.sum(axis=0)
        if np.linalg.norm(gap) < 1e-14:
            break
        edges -= gap / len(edges)
    result = np.empty_like(vertices)
    result[0] = vertices[0]
    result[1:] = vertices[0] + np.cumsum(edges[:-1], axis=0)
    return result


def rotate_arc(vertices: np.ndarray, i: int, j: int,
               angle: float) -> np.ndarray:
    """Rotate the vertices strictly between i and j about the chord i-j

    The arc runs forwards (cyclically) from vertex i to vertex j.  A
    chord of zero length leaves the polygon unchanged.
    """
    count = len(vertices)
    axis = vertices[j] - vertices[i]
    norm = np.linalg.norm(axis)
    if norm < TOLERANCE or angle == 0:
        return vertices.copy()
    arc = (i + np.arange(1, (j - i) % count)) % count
    rotation = Rotation.from_rotvec(angle * axis / norm)
    result = vertices.copy()
    result[arc] = rotation.apply(vertices[arc] - vertices[i]) + vertices[i]
    return result


def _crankshaft(vertices: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Apply one random crankshaft rotation to a raw vertex array"""
    count = len(vertices)
    i = int(rng.integers(count))
    j = (i + int(rng.integers(2, count - 1))) % count
    angle = rng.uniform(0.0, 2 * math.pi)
    return rotate_arc(vertices, i, j, angle)


def crankshaft_move(k: KnotEmbedding,
                    rng: np.random.Generator) -> KnotEmbedding:
    """Rotate a random sub-arc of an embedding about its chord"""
    if len(k) < 4:
        return k
    return k.moved(_crankshaft(np.array(k.vertices), rng))


##############################################################################
#
# Random polygon sampling


@dataclass
class SamplerConfig:
    """A random polygon sampler configuration"""

    length: int
    n_samples: int
    seed: int = 0
    burn_in_moves: Optional[int] = None
    moves_between_samples: Optional[int] = None
    chains: int = 1

    def __post_init__(self) -> None:
        if self.length < MIN_LENGTH:
            raise SamplerError("length %d is below %d" %
                               (self.length, MIN_LENGTH))
        if self.n_samples < 1:
            raise SamplerError("sample count must be positive")
        if self.seed < 0:
            raise SamplerError("seed must be unsigned")
        if self.burn_in_moves is None:
            self.burn_in_moves = 100 * self.length
        if self.moves_between_samples is None:
            self.moves_between_samples = 10 * self.length
        if self.burn_in_moves < 10 * self.length:
            raise SamplerError("burn-in of %d moves is below %d" %
                               (self.burn_in_moves, 10 * self.length))
        if self.moves_between_samples < 1:
            raise SamplerError("moves between samples must be positive")
        if not 1 <= self.chains <= self.n_samples:
            raise SamplerError("chain count must lie in [1, %d]" %
                               self.n_samples)

    def chain_sizes(self) -> Tuple[int, ...]:
        """Number of samples drawn from each chain"""
        base, extra = divmod(self.n_samples, self.chains)
        return tuple(base + (1 if x < extra else 0)
                     for x in range(self.chains))

    def knot_id(self, index: int) -> str:
        """Identifier of the index'th sample"""
        return 'L%d-s%d-%06d' % (self.length, self.seed, index)


def sample_chain(cfg: SamplerConfig, chain: int,
                 start: int = 0) -> Iterator[KnotEmbedding]:
    """Run a single crankshaft chain"""
    rng = stream(cfg.seed, cfg.length, chain)
    vertices = np.array(regular_polygon(cfg.length).vertices)
    moves = 0

    def advance(count):
        nonlocal vertices, moves
        for _ in range(count):
            vertices = _crankshaft(vertices, rng)
            moves += 1
            if moves % RENORMALIZE_EVERY == 0:
                vertices = renormalize(vertices)

    advance(cfg.burn_in_moves)
    for offset in range(cfg.chain_sizes()[chain]):
        advance(cfg.moves_between_samples)
        vertices = renormalize(vertices)
        centred = vertices - vertices.mean(axis=0)
        yield check(KnotEmbedding(cfg.knot_id(start + offset), centred,
                                  seed=cfg.seed))


def sample_polygons(cfg: SamplerConfig) -> Iterator[KnotEmbedding]:
    """Generate random closed equilateral polygons"""
    start = 0
    for chain, size in enumerate(cfg.chain_sizes()):
        logger.debug("sampling %d %d-gons from chain %d", size, cfg.length,
                     chain)
        yield from sample_chain(cfg, chain, start=start)
        start += size


##############################################################################
#
# Parametric trefoils


@dataclass(frozen=True)
class TrefoilParams:
    """A torus-wound trefoil parametrization"""

    R: float
    r: float
    z_scale: float = 1.0
    n_edges: int = 120

    PRESETS: ClassVar[Mapping[str, TrefoilParams]]

    def __post_init__(self) -> None:
        # pylint: disable=invalid-name
        if not self.R > self.r > 0:
            raise SamplerError("require R > r > 0, got R=%g r=%g" %
                               (self.R, self.r))
        if not 0 <= self.z_scale <= 1:
            raise SamplerError("flattening %g outside [0, 1]" % self.z_scale)
        if self.n_edges < MIN_LENGTH:
            raise SamplerError("%d edges is below %d" %
                               (self.n_edges, MIN_LENGTH))

    def curve(self, s):
        """Evaluate the smooth curve at parameter value(s) s"""
        s = np.asarray(s, dtype=np.float64)
        radius = self.R + self.r * np.cos(3 * s)
        return np.stack([radius * np.cos(2 * s), radius * np.sin(2 * s),
                         self.z_scale * self.r * np.sin(3 * s)], axis=-1)


TrefoilParams.PRESETS = {
    'tight': TrefoilParams(2.0, 1.6, 1.0, 120),
    'torus': TrefoilParams(4.0, 1.0, 1.0, 120),
    'flat': TrefoilParams(4.0, 1.0, 0.15, 120),
}


class _ChordWalk:
    """Equal-chord inscription of a closed parametric curve"""

    # pylint: disable=too-few-public-methods

    def __init__(self, p: TrefoilParams, density: int = 64) -> None:
        self.p = p
        self.grid = np.linspace(0.0, 2 * math.pi, density * p.n_edges + 1)
        self.points = p.curve(self.grid)
        self.length = float(np.sum(np.linalg.norm(np.diff(self.points,
                                                          axis=0), axis=1)))

    def step(self, s0: float, chord: float) -> Optional[float]:
        """Find the next parameter value at Euclidean distance chord"""
        origin = self.p.curve(s0)
        start = int(np.searchsorted(self.grid, s0, side='right'))
        distances = np.linalg.norm(self.points[start:] - origin, axis=1)
        ahead = np.flatnonzero(distances >= chord)
        if not len(ahead):
            return None
        g = start + int(ahead[0])
        lo = s0 if g == start else self.grid[g - 1]
        return brentq(lambda s: np.linalg.norm(self.p.curve(s) - origin) -
                      chord, lo, self.grid[g], xtol=1e-15)

    def walk(self, chord: float) -> Optional[np.ndarray]:
        """Walk n_edges - 1 equal chords from parameter zero"""
        params = [0.0]
        for _ in range(self.p.n_edges - 1):
            s = self.step(params[-1], chord)
            if s is None:
                return None
            params.append(s)
        return np.array(params)

    def gap(self, chord: float) -> float:
        """Closing edge length minus chord length"""
        params = self.walk(chord)
        if params is None:
            return -chord
        closing = np.linalg.norm(self.p.curve(params[-1]) - self.p.curve(0.0))
        return float(closing - chord)

    def polygon(self) -> np.ndarray:
        """Inscribe a closed polygon with equal edges"""
        guess = self.length / self.p.n_edges
        chord = brentq(self.gap, 0.5 * guess, guess, xtol=1e-15)
        return self.p.curve(self.walk(chord)) / chord


def parametric_trefoil(p: TrefoilParams, id: str = None) -> KnotEmbedding:
    """Construct a unit-edge polygonal trefoil on a torus"""
    # pylint: disable=redefined-builtin
    vertices = renormalize(_ChordWalk(p).polygon())
    vertices -= vertices.mean(axis=0)
    if id is None:
        id = 'trefoil-R%g-r%g-z%g-n%d' % (p.R, p.r, p.z_scale, p.n_edges)
    k = check(KnotEmbedding(id, vertices, knot_type='3_1'))
    clearance = min_segment_distance(k.vertices)
    if clearance < CLEARANCE:
        raise SamplerError("%s self-intersects (clearance %g)" %
                           (id, clearance))
    return k


def preset_trefoil(name: str, n_edges: int = None) -> KnotEmbedding:
    """Construct one of the named trefoil presets"""
    try:
        p = TrefoilParams.PRESETS[name]
    except KeyError as e:
        raise SamplerError("unknown trefoil preset '%s'" % name) from e
    if n_edges is not None:
        p = TrefoilParams(p.R, p.r, p.z_scale, n_edges)
    return parametric_trefoil(p, id='trefoil-%s-%d' % (name, p.n_edges))
