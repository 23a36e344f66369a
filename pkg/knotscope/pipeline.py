"""Pipeline stages and plan execution"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
import hashlib
from itertools import chain
import json
import logging
import os
from pathlib import Path
from typing import (Any, Callable, Dict, FrozenSet, Iterable, List, Mapping,
                    Optional, Sequence, Tuple, TypeVar, Union)
import numpy as np
from .betti import (EPS_REL, BettiCurve, FeatureRecord, cumulative_curves,
                    curve_maxima, features)
from .config import ConfigError, PlanConfig
from .diagram import classify
from .fileio import (AverageFormat, CorrelationFormat, CurveFormat,
                     FeatureFormat, FitFormat, GeometryFormat, GeometryRow,
                     KnotsFormat, curve_rows, read_barcodes, write_barcodes)
from .geometry import measure, small_angles
from .knot import KnotEmbedding, interpolate
from .rips import Barcode, distance_matrix, persistence
from .sampler import (SamplerConfig, TrefoilParams, preset_trefoil,
                      sample_chain, sample_polygons)
from .stats import (ALL, CorrelationTable, average_curve_maxima,
                    average_feature_by_type, correlate_by_group, fits)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
T = TypeVar('T')
U = TypeVar('U')

KNOTS = 'knots.jsonl'
TREFOILS = 'trefoils.jsonl'
CLASSIFIED = 'classified.jsonl'
GEOMETRY = 'geometry.csv'
BARCODES = 'barcodes.csv'
FEATURES = 'features.csv'
CORRELATIONS = 'correlations.csv'
AVERAGES = 'averages.csv'
FITS = 'fits.csv'
CURVES = 'curves.csv'
MANIFEST = 'manifest.json'

MAX_ATTEMPT_FACTOR = 50
"""Maximum number of candidates per knot required by type quotas"""

QUOTA_BATCH = 64
"""Number of candidates classified together during quota generation"""


##############################################################################
#
# Exceptions


class StageError(Exception):
    """Pipeline stage failure"""

    def __str__(self):
        return "Stage '%s' failed: %s" % self.args

    @property
    def stage(self) -> str:
        """Failing stage name"""
        return self.args[0]


##############################################################################
#
# Worker pool


def worker_count() -> int:
    """Maximum number of worker processes"""
    value = os.environ.get('KNOTSCOPE_THREADS')
    if value is None:
        return os.cpu_count() or 1
    try:
        count = int(value)
    except ValueError as e:
        raise ConfigError("KNOTSCOPE_THREADS='%s' is not an integer" %
                          value) from e
    if count < 1:
        raise ConfigError("KNOTSCOPE_THREADS must be positive")
    return count


def parallel_map(fn: Callable[[T], U], items: Iterable[T],
                 threads: Optional[int] = None) -> List[U]:
    """Apply a function to each item, preserving order

    Work is distributed across worker processes unless only a single
    worker is allowed.
    """
    items = list(items)
    if threads is None:
        threads = worker_count()
    workers = min(threads, len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        chunksize = max(1, len(items) // (4 * workers))
        return list(executor.map(fn, items, chunksize=chunksize))


def knot_seed(seed: int, index: int) -> int:
    """Derive an independent per-knot seed"""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


##############################################################################
#
# Generation


def _sample_chain(cfg: SamplerConfig, index: int) -> List[KnotEmbedding]:
    start = sum(cfg.chain_sizes()[:index])
    return list(sample_chain(cfg, index, start=start))


def _classify(item: Tuple[int, KnotEmbedding], seed: int,
              n_projections: int) -> str:
    index, k = item
    return classify(k, n_projections=n_projections,
                    seed=knot_seed(seed, index)).value


def _generate_quota(cfg: SamplerConfig, quotas: Mapping[str, int],
                    n_projections: int,
                    threads: Optional[int]) -> List[KnotEmbedding]:
    """Draw and classify candidates until each type quota is met"""
    counts = dict.fromkeys(quotas, 0)
    kept = []
    candidates = enumerate(sample_polygons(cfg))
    while any(counts[x] < quotas[x] for x in quotas):
        batch = [x for _, x in zip(range(QUOTA_BATCH), candidates)]
        if not batch:
            break
        labels = parallel_map(partial(_classify, seed=cfg.seed,
                                      n_projections=n_projections),
                              batch, threads)
        for (_, k), label in zip(batch, labels):
            if label in counts and counts[label] < quotas[label]:
                counts[label] += 1
                kept.append(k.typed(label))
    for label, quota in quotas.items():
        if counts[label] < quota:
            logger.warning("length %d: found %d of %d %s knots", cfg.length,
                           counts[label], quota, label)
    return kept


def generate(out: PathLike, lengths: Sequence[int], count: int,
             seed: int = 0, chains: int = 1, burn_in: Optional[int] = None,
             between: Optional[int] = None,
             quotas: Optional[Mapping[str, int]] = None,
             n_projections: int = 3, threads: Optional[int] = None) -> int:
    """Generate random equilateral polygons of each length

    With type quotas, candidates are classified as they are drawn and
    kept only while their type quota remains unmet.
    """
    # pylint: disable=too-many-arguments
    knots: List[KnotEmbedding] = []
    for length in lengths:
        if quotas:
            attempts = MAX_ATTEMPT_FACTOR * sum(quotas.values())
            cfg = SamplerConfig(length, attempts, seed, burn_in, between)
            knots.extend(_generate_quota(cfg, quotas, n_projections,
                                         threads))
        else:
            cfg = SamplerConfig(length, count, seed, burn_in, between, chains)
            batches = parallel_map(partial(_sample_chain, cfg),
                                   range(cfg.chains), threads)
            knots.extend(chain.from_iterable(batches))
    return KnotsFormat.write(out, knots)


def generate_trefoils(out: PathLike, presets: Optional[Sequence[str]] = None,
                      n_edges: Optional[int] = None) -> int:
    """Generate parametric trefoil presets"""
    if presets is None:
        presets = list(TrefoilParams.PRESETS)
    return KnotsFormat.write(out, [preset_trefoil(x, n_edges=n_edges)
                                   for x in presets])


##############################################################################
#
# Per-knot computations


def classify_knots(inp: PathLike, out: PathLike, n_projections: int = 3,
                   seed: int = 0, threads: Optional[int] = None) -> int:
    """Label each knot with its knot type"""
    knots = KnotsFormat.read(inp)
    labels = parallel_map(partial(_classify, seed=seed,
                                  n_projections=n_projections),
                          enumerate(knots), threads)
    return KnotsFormat.write(out, [k.typed(label)
                                   for k, label in zip(knots, labels)])


def _measure(k: KnotEmbedding) -> GeometryRow:
    return GeometryRow(k.id, len(k), k.knot_type, measure(k))


def measure_knots(inp: PathLike, out: PathLike,
                  threads: Optional[int] = None) -> int:
    """Compute geometric observables of each knot"""
    return GeometryFormat.write(out, parallel_map(_measure,
                                                  KnotsFormat.read(inp),
                                                  threads))


def _barcode(k: KnotEmbedding, t_max: Optional[float],
             points_per_edge: int) -> Tuple[str, Barcode]:
    dm = distance_matrix(interpolate(k, points_per_edge))
    logger.debug("%s: %d points", k.id, dm.n)
    return (k.id, persistence(dm, t_max))


def barcode_knots(inp: PathLike, out: PathLike,
                  t_max: Optional[float] = None, points_per_edge: int = 10,
                  threads: Optional[int] = None) -> int:
    """Compute the persistence barcode of each knot's point cloud"""
    return write_barcodes(out, parallel_map(
        partial(_barcode, t_max=t_max, points_per_edge=points_per_edge),
        KnotsFormat.read(inp), threads,
    ))


##############################################################################
#
# Tables


def _knot_index(knots: Optional[PathLike]) -> Dict[str, KnotEmbedding]:
    return {k.id: k for k in KnotsFormat.read(knots)} if knots else {}


def feature_table(barcodes: PathLike, out: PathLike,
                  knots: Optional[PathLike] = None,
                  spike_filtered: bool = False,
                  eps_rel: float = EPS_REL) -> List[FeatureRecord]:
    """Compute barcode features of each knot"""
    index = _knot_index(knots)
    records = []
    for knot_id, barcode in read_barcodes(barcodes).items():
        k = index.get(knot_id)
        records.append(features(
            knot_id, barcode,
            length=len(k) if k is not None else None,
            knot_type=k.knot_type if k is not None else None,
            spike_filtered=spike_filtered, eps_rel=eps_rel,
            small_angles=small_angles(k) if k is not None else None,
        ))
    FeatureFormat.write(out, records)
    return records


def correlate_tables(features_path: PathLike, geometry_path: PathLike,
                     out: PathLike, averages: Optional[PathLike] = None,
                     linear: Optional[PathLike] = None,
                     group_by: str = 'length', method: str = 'pearson',
                     barcodes: Optional[PathLike] = None
                     ) -> CorrelationTable:
    """Correlate features with geometry, and average features by type

    Curve maxima are averaged as the maximum of the average Betti
    curve of each knot type and length, and so require the barcodes.
    """
    # pylint: disable=too-many-arguments
    records = FeatureFormat.read(features_path)
    geometry = {x.id: x.geometry
                for x in GeometryFormat.read(geometry_path)}
    table = correlate_by_group(records, geometry, group_by=group_by,
                               method=method)
    CorrelationFormat.write(out, table)
    if averages is not None or linear is not None:
        rows = (average_feature_by_type(records, 'I') +
                average_feature_by_type(records, 'small_angles'))
        if barcodes is not None:
            rows += average_curve_maxima(records, read_barcodes(barcodes))
        else:
            logger.info("no barcodes: curve maxima not averaged")
        if averages is not None:
            AverageFormat.write(averages, rows)
        if linear is not None:
            FitFormat.write(linear, fits(rows))
    return table


def curve_table(barcodes: PathLike, out: PathLike,
                knots: Optional[PathLike] = None, group_by: str = 'length',
                average: bool = False,
                spike_filtered: bool = False) -> Dict[Any, BettiCurve]:
    """Sum or average Betti curves within groups of knots"""
    # pylint: disable=too-many-arguments
    index = _knot_index(knots)
    barcodes_by_id = read_barcodes(barcodes)
    groups = {}
    for knot_id in barcodes_by_id:
        k = index.get(knot_id)
        if k is None or group_by == ALL:
            groups[knot_id] = ALL
        elif group_by == 'length':
            groups[knot_id] = len(k)
        elif group_by == 'knot_type':
            groups[knot_id] = str(k.knot_type)
        else:
            raise ConfigError("Cannot group curves by '%s'" % group_by)
    curves = cumulative_curves(barcodes_by_id, groups, average=average,
                               spike_filtered=spike_filtered)
    for group, curve in curves.items():
        logger.info("group %s: maximum %g at t=%g, second maximum %g at t=%g",
                    group, *curve_maxima(curve, spike_filtered))
    CurveFormat.write(out, curve_rows(curves))
    return curves


##############################################################################
#
# Plan execution


@dataclass
class Context:
    """Plan execution context"""

    plan: PlanConfig
    workdir: Path
    threads: int

    def path(self, name: str) -> Path:
        """Path to a file within the working directory"""
        return self.workdir / name

    @property
    def generated(self) -> Path:
        """Knots file produced by the generation stages"""
        if 'gen' not in self.plan.stages and 'gen-trefoil' in self.plan.stages:
            return self.path(TREFOILS)
        return self.path(KNOTS)

    @property
    def knots(self) -> Path:
        """Knots file consumed by the per-knot stages"""
        if 'classify' in self.plan.stages:
            return self.path(CLASSIFIED)
        return self.generated


def _run_gen(ctx: Context, params: Dict[str, Any]) -> None:
    experiment = ctx.plan.experiment
    if 'lengths' in params:
        lengths = list(params['lengths'])
    elif 'length' in params:
        lengths = [params['length']]
    elif experiment is not None:
        lengths = experiment.lengths
    else:
        raise ConfigError("No lengths to generate")
    count = params.get('count', experiment.per_length_count
                       if experiment is not None else None)
    if count is None:
        raise ConfigError("No knot count to generate")
    generate(ctx.path(KNOTS), lengths, count,
             seed=params.get('seed', ctx.plan.seed),
             chains=params.get('chains', 1),
             burn_in=params.get('burn_in'), between=params.get('between'),
             quotas=experiment.quotas if experiment is not None else None,
             n_projections=params.get('projections', 3),
             threads=ctx.threads)


def _run_gen_trefoil(ctx: Context, params: Dict[str, Any]) -> None:
    generate_trefoils(ctx.path(TREFOILS), presets=params.get('presets'),
                      n_edges=params.get('edges'))


def _run_classify(ctx: Context, params: Dict[str, Any]) -> None:
    classify_knots(ctx.generated, ctx.path(CLASSIFIED),
                   n_projections=params.get('projections', 3),
                   seed=params.get('seed', ctx.plan.seed),
                   threads=ctx.threads)


def _run_measure(ctx: Context, _params: Dict[str, Any]) -> None:
    measure_knots(ctx.knots, ctx.path(GEOMETRY), threads=ctx.threads)


def _run_ph(ctx: Context, params: Dict[str, Any]) -> None:
    t_max = params.get('t_max', 'auto')
    barcode_knots(ctx.knots, ctx.path(BARCODES),
                  t_max=None if t_max == 'auto' else float(t_max),
                  points_per_edge=params.get('points_per_edge', 10),
                  threads=ctx.threads)


def _run_features(ctx: Context, params: Dict[str, Any]) -> None:
    feature_table(ctx.path(BARCODES), ctx.path(FEATURES), knots=ctx.knots,
                  spike_filtered=params.get('filter_spike', False),
                  eps_rel=params.get('eps_rel', EPS_REL))


def _run_correlate(ctx: Context, params: Dict[str, Any]) -> None:
    correlate_tables(ctx.path(FEATURES), ctx.path(GEOMETRY),
                     ctx.path(CORRELATIONS), averages=ctx.path(AVERAGES),
                     linear=ctx.path(FITS),
                     group_by=params.get('group_by', 'length'),
                     method=params.get('method', 'pearson'),
                     barcodes=ctx.path(BARCODES))


def _run_curves(ctx: Context, params: Dict[str, Any]) -> None:
    curve_table(ctx.path(BARCODES), ctx.path(CURVES), knots=ctx.knots,
                group_by=params.get('group_by', 'length'),
                average=params.get('average', False),
                spike_filtered=params.get('filter_spike', False))


@dataclass(frozen=True)
class Stage:
    """A pipeline stage"""

    name: str
    outputs: Tuple[str, ...]
    run: Callable[[Context, Dict[str, Any]], None]
    accepts: FrozenSet[str] = frozenset()

    def execute(self, ctx: Context, params: Dict[str, Any]) -> None:
        """Execute stage"""
        unknown = set(params) - self.accepts
        if unknown:
            raise ConfigError("Unknown parameters %s" %
                              ", ".join(sorted(unknown)))
        self.run(ctx, params)


STAGES: Mapping[str, Stage] = {x.name: x for x in (
    Stage('gen', (KNOTS,), _run_gen,
          frozenset({'length', 'lengths', 'count', 'seed', 'chains',
                     'burn_in', 'between', 'projections'})),
    Stage('gen-trefoil', (TREFOILS,), _run_gen_trefoil,
          frozenset({'presets', 'edges'})),
    Stage('classify', (CLASSIFIED,), _run_classify,
          frozenset({'projections', 'seed'})),
    Stage('measure', (GEOMETRY,), _run_measure),
    Stage('ph', (BARCODES,), _run_ph,
          frozenset({'t_max', 'points_per_edge'})),
    Stage('features', (FEATURES,), _run_features,
          frozenset({'filter_spike', 'eps_rel'})),
    Stage('correlate', (CORRELATIONS, AVERAGES, FITS), _run_correlate,
          frozenset({'group_by', 'method'})),
    Stage('curves', (CURVES,), _run_curves,
          frozenset({'group_by', 'average', 'filter_spike'})),
)}
"""Pipeline stages by name"""


def file_hash(path: PathLike) -> str:
    """SHA-256 digest of a file's contents"""
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(partial(f.read, 1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(workdir: Path, names: Iterable[str]) -> Dict[str, str]:
    """Record content hashes of output files"""
    hashes = {name: file_hash(workdir / name) for name in names}
    with open(workdir / MANIFEST, 'w', encoding='utf-8') as f:
        json.dump({'files': hashes}, f, indent=2, sort_keys=True)
        f.write('\n')
    return hashes


def run_plan(plan: PlanConfig, workdir: Optional[PathLike] = None,
             resume: bool = False,
             threads: Optional[int] = None) -> Dict[str, str]:
    """Execute the stages of a plan, returning output file hashes"""
    path = Path(workdir if workdir is not None else plan.workdir or '.')
    path.mkdir(parents=True, exist_ok=True)
    ctx = Context(plan, path, worker_count() if threads is None else threads)
    outputs: List[str] = []
    for name in plan.stages:
        stage = STAGES[name]
        if resume and all(ctx.path(x).exists() for x in stage.outputs):
            logger.info("skipping completed stage %s", name)
        else:
            logger.info("running stage %s", name)
            try:
                stage.execute(ctx, plan.stage_params(name))
            except Exception as e:
                raise StageError(name, e) from e
            logger.info("finished stage %s", name)
        outputs.extend(stage.outputs)
    return write_manifest(path, outputs)
