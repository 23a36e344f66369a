"""Test pipeline plan files"""

from pathlib import Path
import tempfile
from knotscope.config import ConfigError, PlanConfig
from knotscope.diagram import KnotType
import knotscope.test


class PlanConfigTestCase(knotscope.test.TestCase):
    """Pipeline plan tests"""

    def assertInvalid(self, config):
        """Assert that a plan is rejected"""
        with self.assertRaises(ConfigError):
            PlanConfig.parse(config)

    def test_resource(self):
        """Test loading the sample plan"""
        with self.resource_path('plan.yml') as path:
            plan = PlanConfig.load(path)
        self.assertEqual(plan.stages, ['gen', 'measure'])
        self.assertEqual(plan.seed, 1)
        self.assertIsNone(plan.workdir)
        self.assertIsNone(plan.experiment)
        self.assertEqual(plan.stage_params('gen'), {'length': 10, 'count': 5})
        self.assertEqual(plan.stage_params('measure'), {})

    def test_experiment(self):
        """Test experiment declarations"""
        plan = PlanConfig.parse({
            'stages': ['gen', 'classify', 'ph'],
            'seed': 4,
            'lengths': [50, 100],
            'per_length_count': 6,
            'per_type_count': 3,
            'type_filter': ['0_1', '3_1'],
        })
        self.assertEqual(plan.experiment.lengths, [50, 100])
        self.assertEqual(plan.experiment.seed, 4)
        self.assertEqual(plan.experiment.type_filter,
                         [KnotType.UNKNOT, KnotType.TREFOIL])
        self.assertEqual(plan.experiment.quotas, {'0_1': 3, '3_1': 3})

    def test_invalid(self):
        """Test rejection of invalid plans"""
        self.assertInvalid(['gen'])
        self.assertInvalid({'seed': 1})
        self.assertInvalid({'stages': []})
        self.assertInvalid({'stages': 'gen'})
        self.assertInvalid({'stages': ['gen', 'plot']})
        self.assertInvalid({'stages': ['measure', 'gen']})
        self.assertInvalid({'stages': ['gen', 'gen']})
        self.assertInvalid({'stages': ['gen'], 'seed': 'one'})
        self.assertInvalid({'stages': ['gen'], 'seed': True})
        self.assertInvalid({'stages': ['gen'], 'seed': -1})
        self.assertInvalid({'stages': ['gen'], 'workdir': 3})
        self.assertInvalid({'stages': ['gen'], 'params': {'plot': {}}})
        self.assertInvalid({'stages': ['gen'], 'params': {'gen': [1]}})
        self.assertInvalid({'stages': ['gen'], 'lengths': [100, 50]})
        self.assertInvalid({'stages': ['gen'], 'lengths': [50],
                            'per_length_count': 1})
        self.assertInvalid({'stages': ['gen'], 'lengths': [50],
                            'type_filter': ['9_42']})

    def test_load_errors(self):
        """Test errors when loading plan files"""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir)
            with self.assertRaisesRegex(ConfigError, 'absent.yml'):
                PlanConfig.load(path / 'absent.yml')
            (path / 'broken.yml').write_text('stages: [gen\n',
                                             encoding='utf-8')
            with self.assertRaisesRegex(ConfigError, 'broken.yml'):
                PlanConfig.load(path / 'broken.yml')
            (path / 'wrong.yml').write_text('stages: [plot]\n',
                                            encoding='utf-8')
            with self.assertRaisesRegex(ConfigError,
                                        "wrong.yml.*Unknown stage 'plot'"):
                PlanConfig.load(path / 'wrong.yml')
