from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from lab import config


class TestParseLines(SimpleTestCase):
    def test_comments_and_blank_lines(self):
        values = config.parse_lines('# a run\n\ngrid_n = 64  # small\nseed=3\n')
        self.assertEqual(values, {'grid_n': '64', 'seed': '3'})

    def test_missing_equals(self):
        with self.assertRaises(config.ParseError) as context:
            config.parse_lines('grid_n=64\njust words\n')
        self.assertEqual(context.exception.lineno, 2)

    def test_duplicate_key(self):
        with self.assertRaises(config.ParseError) as context:
            config.parse_lines('seed=1\nseed=2\n')
        self.assertEqual(context.exception.lineno, 2)
        self.assertIn('duplicate', str(context.exception))

    def test_invalid_key(self):
        with self.assertRaises(config.ParseError):
            config.parse_lines('grid-n=64\n')


class TestParseConfig(SimpleTestCase):
    def test_flow_bubble(self):
        parsed = config.parse_config('grid_n=256\ninit=bubble:40,0.5,0.5,0,0,0\n')
        self.assertEqual(parsed.subcommand, 'flow')
        self.assertEqual(parsed['grid_n'], 256)
        self.assertEqual(parsed['init'], 'bubble:40,0.5,0.5,0,0,0')
        self.assertEqual(parsed['out_csv'], 'flow.csv',
                         'Unset keys should fall back to the field default')

    def test_settings_defaults(self):
        parsed = config.parse_config('', 'greens_table')
        self.assertEqual(parsed['grid_n'], 256)
        self.assertEqual(parsed['sigma'], 0.01)
        self.assertEqual(parsed['rotations'], 5)

    def test_lambda_below_two(self):
        with self.assertRaises(ValidationError) as context:
            config.parse_config('lambda=1\n', 'dist_fit')
        self.assertIn('at least 2', ' '.join(context.exception.messages))

    def test_lambda_below_two_for_flow(self):
        with self.assertRaises(ValidationError) as context:
            config.parse_config('lambda=1\n')
        self.assertIn('at least 2', ' '.join(context.exception.messages))
        with self.assertRaises(ValidationError) as context:
            config.parse_config('lambda=1\n', 'bubble_scan')
        self.assertIn('at least 2', ' '.join(context.exception.messages))

    def test_flow_lambda(self):
        parsed = config.parse_config('grid_n=128\nlambda=12\n')
        self.assertEqual(parsed['init'], 'bubble:12.0,0.5,0.5,0,0,0')
        self.assertEqual(parsed.manifest()['config']['lambda'], 12.0)
        with self.assertRaises(ValidationError):
            config.parse_config('lambda=12\ninit=bubble:20,0.5,0.5,0,0,0\n')

    def test_lambda_alias(self):
        parsed = config.parse_config('grid_n=128\nlambda=12\n', 'dist_fit')
        self.assertEqual(parsed['lambda'], 12.0)
        self.assertEqual(parsed['seed_lambda'], 12.0,
                         'seed_lambda should default to lambda')
        self.assertEqual(parsed.manifest()['config']['lambda'], 12.0)

    def test_unresolved_bubble(self):
        with self.assertRaises(ValidationError) as context:
            config.parse_config('grid_n=64\ninit=bubble:40,0.5,0.5,0,0,0\n')
        self.assertIn('lambda*h = 0.625 > 0.2', ' '.join(context.exception.messages))

    def test_unknown_key(self):
        with self.assertRaises(ValidationError) as context:
            config.parse_config('colour=red\n', 'flow')
        self.assertIn('unknown key', ' '.join(context.exception.messages))

    def test_unknown_init(self):
        with self.assertRaises(ValidationError):
            config.parse_config('init=spiral\n')

    def test_alpha_bound(self):
        with self.assertRaises(ValidationError):
            config.parse_config('alpha=0.5\n')

    def test_scan_needs_two_lambdas(self):
        with self.assertRaises(ValidationError):
            config.parse_config('lambdas=20\n', 'bubble_scan')

    def test_scan_lambdas(self):
        parsed = config.parse_config('lambdas=20, 40\n', 'bubble-scan')
        self.assertEqual(parsed.subcommand, 'bubble_scan')
        self.assertEqual(parsed['lambdas'], (20.0, 40.0))

    def test_subcommand_line(self):
        parsed = config.parse_config('subcommand=greens-table\ngrid_n=32\n')
        self.assertEqual(parsed.subcommand, 'greens_table')
        with self.assertRaises(ValidationError):
            config.parse_config('subcommand=greens_table\n', 'flow')

    def test_unknown_subcommand(self):
        with self.assertRaises(ValidationError):
            config.parse_config('', 'plot')

    def test_overrides(self):
        parsed = config.parse_config('grid_n=64\n', 'greens_table',
                                     {'grid_n': '128', 'seed': None})
        self.assertEqual(parsed['grid_n'], 128)
        self.assertEqual(parsed['seed'], 0)

    def test_manifest_hash(self):
        first = config.parse_config('grid_n=64\n', 'greens_table')
        again = config.parse_config('# same run\ngrid_n = 64\n', 'greens_table')
        other = config.parse_config('grid_n=128\n', 'greens_table')
        self.assertEqual(first.manifest_hash, again.manifest_hash,
                         'Formatting of the config text must not change the hash')
        self.assertNotEqual(first.manifest_hash, other.manifest_hash)
        self.assertEqual(len(first.manifest_hash), 64)
