"""Command line interface"""

from abc import abstractmethod
import argparse
import logging
from typing import ClassVar, List, Optional, Sequence, Type
from .betti import EPS_REL
from .config import Config, ConfigError, PlanConfig
from .fileio import DataError
from .knot import KnotError
from .pipeline import (StageError, barcode_knots, classify_knots,
                       correlate_tables, curve_table, feature_table,
                       generate, generate_trefoils, measure_knots, run_plan,
                       worker_count)
from .sampler import SamplerError, TrefoilParams
from .stats import GROUPINGS, METHODS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

DATA_ERRORS = (DataError, ConfigError, KnotError, SamplerError)
"""Exceptions caused by invalid input rather than by a defect"""


def t_max(value: str) -> Optional[float]:
    """Parse a persistence threshold"""
    if value == 'auto':
        return None
    try:
        return float(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError("invalid threshold '%s'" %
                                         value) from e


class Command:
    """An executable command"""

    name: ClassVar[str]
    """Subcommand name"""

    args: argparse.Namespace
    """Parsed arguments"""

    loglevels: ClassVar[List] = [logging.ERROR, logging.WARNING,
                                 logging.INFO, logging.DEBUG]
    """Log levels"""

    verbosity: int = loglevels.index(logging.INFO)
    """Verbosity level"""

    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self.verbosity += (self.args.verbose - self.args.quiet)
        logging.basicConfig(level=self.loglevel)

    @classmethod
    def parser(cls, parser: argparse.ArgumentParser) -> None:
        """Add command arguments"""

    @property
    def loglevel(self):
        """Log level"""
        return (self.loglevels[max(self.verbosity, 0)]
                if self.verbosity < len(self.loglevels) else logging.NOTSET)

    @property
    def threads(self) -> int:
        """Worker pool size"""
        return worker_count()

    @abstractmethod
    def execute(self) -> None:
        """Execute command"""


class InOutCommand(Command):
    """A command transforming one knots file"""

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        parser.add_argument('--in', dest='input', required=True,
                            help="Input knots file")
        parser.add_argument('--out', required=True, help="Output file")


class GenCommand(Command):
    """Generate random equilateral polygons"""

    name = 'gen'

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        parser.add_argument('--length', '-L', type=int, action='append',
                            required=True, help="Polygon length")
        parser.add_argument('--count', '-n', type=int, required=True,
                            help="Number of polygons per length")
        parser.add_argument('--seed', type=int, default=0,
                            help="Random seed")
        parser.add_argument('--chains', type=int, default=1,
                            help="Number of independent Markov chains")
        parser.add_argument('--burn-in', type=int,
                            help="Moves before the first sample")
        parser.add_argument('--between', type=int,
                            help="Moves between samples")
        parser.add_argument('--out', required=True, help="Output knots file")

    def execute(self):
        """Execute command"""
        generate(self.args.out, self.args.length, self.args.count,
                 seed=self.args.seed, chains=self.args.chains,
                 burn_in=self.args.burn_in, between=self.args.between,
                 threads=self.threads)


class GenTrefoilCommand(Command):
    """Generate parametric trefoils"""

    name = 'gen-trefoil'

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        parser.add_argument('--preset', action='append',
                            choices=sorted(TrefoilParams.PRESETS),
                            help="Trefoil preset (default: all)")
        parser.add_argument('--edges', type=int, help="Number of edges")
        parser.add_argument('--out', required=True, help="Output knots file")

    def execute(self):
        """Execute command"""
        generate_trefoils(self.args.out, presets=self.args.preset,
                          n_edges=self.args.edges)


class ClassifyCommand(InOutCommand):
    """Classify knot types"""

    name = 'classify'

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        super().parser(parser)
        parser.add_argument('--projections', type=int, default=3,
                            help="Number of projections voting")
        parser.add_argument('--seed', type=int, default=0,
                            help="Random seed")

    def execute(self):
        """Execute command"""
        classify_knots(self.args.input, self.args.out,
                       n_projections=self.args.projections,
                       seed=self.args.seed, threads=self.threads)


class MeasureCommand(InOutCommand):
    """Measure geometric observables"""

    name = 'measure'

    def execute(self):
        """Execute command"""
        measure_knots(self.args.input, self.args.out, threads=self.threads)


class PersistenceCommand(InOutCommand):
    """Compute persistence barcodes"""

    name = 'ph'

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        super().parser(parser)
        parser.add_argument('--t-max', type=t_max, default=None,
                            help="Filtration threshold (default: auto)")
        parser.add_argument('--points-per-edge', type=int, default=10,
                            help="Interpolation points per edge")

    def execute(self):
        """Execute command"""
        barcode_knots(self.args.input, self.args.out, t_max=self.args.t_max,
                      points_per_edge=self.args.points_per_edge,
                      threads=self.threads)


class SpikeCommand(Command):
    """A command reading barcodes with optional spike filtering"""

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        parser.add_argument('--barcodes', required=True,
                            help="Input barcodes file")
        parser.add_argument('--knots', help="Knots file for lengths and types")
        parser.add_argument('--out', required=True, help="Output file")
        parser.add_argument('--filter-spike', action='store_true',
                            help="Ignore short-lived bars after the spacing")


class FeaturesCommand(SpikeCommand):
    """Compute barcode features"""

    name = 'features'

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        super().parser(parser)
        parser.add_argument('--eps-rel', type=float, default=EPS_REL,
                            help="Ramp cutoff relative to the support")

    def execute(self):
        """Execute command"""
        feature_table(self.args.barcodes, self.args.out,
                      knots=self.args.knots,
                      spike_filtered=self.args.filter_spike,
                      eps_rel=self.args.eps_rel)


class CurvesCommand(SpikeCommand):
    """Sum Betti curves within groups"""

    name = 'curves'

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        super().parser(parser)
        parser.add_argument('--group-by', default='length',
                            choices=('all',) + GROUPINGS,
                            help="Grouping of knots")
        parser.add_argument('--average', action='store_true',
                            help="Average rather than sum")

    def execute(self):
        """Execute command"""
        curve_table(self.args.barcodes, self.args.out, knots=self.args.knots,
                    group_by=self.args.group_by, average=self.args.average,
                    spike_filtered=self.args.filter_spike)


class CorrelateCommand(Command):
    """Correlate barcode features with geometry"""

    name = 'correlate'

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        parser.add_argument('--features', required=True,
                            help="Input features file")
        parser.add_argument('--geometry', required=True,
                            help="Input geometry file")
        parser.add_argument('--out', required=True,
                            help="Output correlations file")
        parser.add_argument('--averages', help="Output averages file")
        parser.add_argument('--fits', help="Output linear fits file")
        parser.add_argument('--barcodes',
                            help="Input barcodes file for curve maxima")
        parser.add_argument('--group-by', default='length', choices=GROUPINGS,
                            help="Grouping of knots")
        parser.add_argument('--method', default='pearson',
                            choices=sorted(METHODS),
                            help="Correlation coefficient")

    def execute(self):
        """Execute command"""
        correlate_tables(self.args.features, self.args.geometry,
                         self.args.out, averages=self.args.averages,
                         linear=self.args.fits, group_by=self.args.group_by,
                         method=self.args.method,
                         barcodes=self.args.barcodes)


Config_ = Config


class ConfigCommand(Command):
    """An executable command utilising a configuration file"""

    Config: ClassVar[Type[Config_]]

    config: Config_
    """Loaded configuration"""

    def __init__(self, args: argparse.Namespace) -> None:
        super().__init__(args)
        self.config = self.Config.load(self.args.plan)

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        parser.add_argument('--plan', required=True, help="Plan file")


class PipelineCommand(ConfigCommand):
    """Run a pipeline plan"""

    name = 'pipeline'

    Config = PlanConfig

    @classmethod
    def parser(cls, parser):
        """Add command arguments"""
        super().parser(parser)
        parser.add_argument('--workdir', help="Output directory")
        parser.add_argument('--resume', action='store_true',
                            help="Skip stages whose outputs exist")

    def execute(self):
        """Execute command"""
        run_plan(self.config, workdir=self.args.workdir,
                 resume=self.args.resume, threads=self.threads)


COMMANDS: Sequence[Type[Command]] = (
    GenCommand, GenTrefoilCommand, ClassifyCommand, MeasureCommand,
    PersistenceCommand, FeaturesCommand, CorrelateCommand, CurvesCommand,
    PipelineCommand,
)


def parser() -> argparse.ArgumentParser:
    """Construct argument parser"""
    main_parser = argparse.ArgumentParser(
        prog='knotscope',
        description="Topological and geometric analysis of random knots",
    )
    main_parser.add_argument('--verbose', '-v', action='count', default=0)
    main_parser.add_argument('--quiet', '-q', action='count', default=0)
    subparsers = main_parser.add_subparsers(dest='command', required=True)
    for cls in COMMANDS:
        subparser = subparsers.add_parser(cls.name, help=cls.__doc__,
                                          description=cls.__doc__)
        cls.parser(subparser)
        subparser.set_defaults(cls=cls)
    return main_parser


def main(argv: Optional[List[str]] = None) -> int:
    """Execute command (as main entry point)"""
    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        args.cls(args).execute()
    except DATA_ERRORS as e:
        logger.error("%s", e)
        return EXIT_DATA
    except StageError as e:
        logger.error("%s", e)
        logger.debug("stage failure", exc_info=True)
        return EXIT_DATA if isinstance(e.__cause__, DATA_ERRORS) else \
            EXIT_INTERNAL
    except Exception as e:  # pylint: disable=broad-except
        logger.error("internal error: %s", e)
        logger.debug("internal error", exc_info=True)
        return EXIT_INTERNAL
    return EXIT_OK
