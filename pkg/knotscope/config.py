"""Pipeline plan files"""

from abc import abstractmethod
from dataclasses import dataclass, field
import logging
from typing import Any, Dict, List, Mapping, Optional
import yaml
from .stats import ExperimentPlan, StatsError

logger = logging.getLogger(__name__)

STAGES = ('gen', 'gen-trefoil', 'classify', 'measure', 'ph', 'features',
          'correlate', 'curves')
"""Pipeline stages in execution order"""


class ConfigError(Exception):
    """Configuration error"""

    def __str__(self):
        return "Configuration error: %s" % self.args


class Config:
    """A configuration subtree"""

    @classmethod
    @abstractmethod
    def parse(cls, config):
        """Parse configuration"""

    @classmethod
    def load(cls, filename):
        """Load configuration from YAML (or JSON) file"""
        try:
            with open(filename, 'r', encoding='utf-8') as f:
                config = yaml.safe_load(f)
        except OSError as e:
            raise ConfigError("Cannot read '%s': %s" %
                              (filename, e.strerror)) from e
        except yaml.YAMLError as e:
            raise ConfigError("In file '%s': %s" % (filename, e)) from e
        try:
            return cls.parse(config)
        except ConfigError as e:
            raise ConfigError("In file '%s': %s" % (filename,
                                                    *e.args)) from e


def _integer(config: Mapping, key: str, default: Optional[int] = None,
             minimum: int = 0) -> Optional[int]:
    """Parse an optional integer value"""
    value = config.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("Value '%s' is not an integer" % key)
    if value < minimum:
        raise ConfigError("Value '%s' is below %d" % (key, minimum))
    return value


@dataclass
class PlanConfig(Config):
    """A pipeline plan"""

    stages: List[str]
    seed: int = 0
    workdir: Optional[str] = None
    experiment: Optional[ExperimentPlan] = None
    params: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @classmethod
    def parse(cls, config):
        """Parse configuration"""
        if not isinstance(config, Mapping):
            raise ConfigError("Plan is not a mapping")
        if 'stages' not in config:
            raise ConfigError("Missing declaration 'stages'")
        stages = config['stages']
        if not isinstance(stages, list) or not stages:
            raise ConfigError("Declaration 'stages' is not a nonempty list")
        for stage in stages:
            if stage not in STAGES:
                raise ConfigError("Unknown stage '%s'" % stage)
        order = [STAGES.index(x) for x in stages]
        if order != sorted(set(order)):
            raise ConfigError("Stages must be distinct and ordered as %s" %
                              ", ".join(STAGES))
        seed = _integer(config, 'seed', 0)
        workdir = config.get('workdir')
        if workdir is not None and not isinstance(workdir, str):
            raise ConfigError("Declaration 'workdir' is not a path")
        params = {}
        for name, block in (config.get('params') or {}).items():
            if name not in STAGES:
                raise ConfigError("Parameters for unknown stage '%s'" % name)
            if not isinstance(block, Mapping):
                raise ConfigError("In section '%s': not a mapping" % name)
            params[name] = dict(block)
        experiment = None
        if 'lengths' in config:
            try:
                experiment = ExperimentPlan(
                    lengths=list(config['lengths']),
                    per_length_count=_integer(config, 'per_length_count', 2),
                    per_type_count=_integer(config, 'per_type_count'),
                    type_filter=config.get('type_filter'),
                    seed=seed,
                )
            except (StatsError, TypeError, ValueError) as e:
                raise ConfigError("Invalid experiment: %s" % e) from e
        return cls(list(stages), seed, workdir, experiment, params)

    def stage_params(self, stage: str) -> Dict[str, Any]:
        """Parameters for a stage"""
        return dict(self.params.get(stage, {}))
