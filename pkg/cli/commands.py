import json
import logging
import time
from uuid import uuid4

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

import constants
from cli.serializers import ScenarioConfigSerializer, SRConfigSerializer
from core.conf import get_setting
from core.exceptions import ShrinkregError
from core.metrics import dump_metrics

logger = logging.getLogger('cli')

# options Django adds to every command
BASE_OPTIONS = {'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks', 'stdout', 'stderr'}


def comma_floats(text):
    if text is None or text == '':
        return None
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise serializers.ValidationError(f"invalid grid {text!r}, expected comma separated numbers.")


def parse_methods(text):
    methods = tuple(part.strip().upper() for part in text.split(',') if part.strip())
    unknown = [method for method in methods if method not in dict(constants.METHODS)]
    if not methods or unknown:
        raise serializers.ValidationError({'methods': f"expected a comma separated subset of sr, sw, ols, got {text!r}."})
    return methods


def flatten_validation_error(exc):
    """
    Single-line rendering of a DRF ValidationError detail.
    """
    detail = exc.detail
    if isinstance(detail, dict):
        parts = []
        for field_name, messages in detail.items():
            if not isinstance(messages, (list, tuple)):
                messages = [messages]
            label = '' if field_name == 'non_field_errors' else f'{field_name}: '
            parts.append(label + ' '.join(str(message) for message in messages))
        return '; '.join(parts)
    if isinstance(detail, (list, tuple)):
        return ' '.join(str(message) for message in detail)
    return str(detail)


class LoggedCommand(BaseCommand):
    """
    Base class of every shrinkreg command.
    Adds the global flags, logs a start and finish event per run id and maps
    library errors onto exit codes (2 validation, 3 numerical).
    """

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=0, help='Base seed of every random stream.')
        parser.add_argument('--json', action='store_true', dest='as_json', help='Print machine readable JSON.')
        parser.add_argument('--out', default=None, help='Directory receiving report files.')
        parser.add_argument('--delta1', type=float, default=None, help='Upper tail of the first-stage cutoff.')
        parser.add_argument('--delta2', type=float, default=None, help='Upper tail of the residual cutoff.')
        parser.add_argument('--threads', type=int, default=None, help='Worker threads for replicates.')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def add_scenario_arguments(self, parser, scenario=constants.NE, delta=0.0):
        if scenario is not None:
            parser.add_argument('--scenario', default=scenario, type=str.upper, choices=dict(constants.SCENARIOS))
        parser.add_argument('--p', type=int, default=5)
        parser.add_argument('--n', type=int, default=100)
        parser.add_argument('--m', type=int, default=None, help='Replications, desk-scale default by p.')
        parser.add_argument('--delta', type=float, default=delta, help='Contamination fraction.')
        parser.add_argument('--lambdas', default=None, help='Comma separated lambda grid.')
        parser.add_argument('--ks', default=None, help='Comma separated k grid.')
        parser.add_argument('--grid', default=constants.HALF_GRID, choices=dict(constants.GRIDS))
        parser.add_argument('--mode', default=constants.BERNOULLI, choices=dict(constants.CONTAMINATION_MODES))

    def handle(self, *args, **options):
        self.run_id = str(uuid4())
        self.log_start(options)
        start_time = time.time()
        status = constants.EXIT_OK
        try:
            self.run(**options)
        except ShrinkregError as exc:
            status = exc.exit_code
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        except serializers.ValidationError as exc:
            status = constants.EXIT_VALIDATION
            raise CommandError(flatten_validation_error(exc), returncode=constants.EXIT_VALIDATION) from exc
        finally:
            duration = time.time() - start_time
            self.log_finish(status, duration)
            dump_metrics(get_setting('METRICS_DIR'))

    def run(self, **options):
        raise NotImplementedError('subclasses of LoggedCommand must provide a run() method')

    # ──────────────
    # Option helpers
    # ──────────────

    def sr_config(self, options):
        serializer = SRConfigSerializer(data={'delta1': options.get('delta1'), 'delta2': options.get('delta2')})
        serializer.is_valid(raise_exception=True)
        return serializer.to_config()

    def scenario_config(self, options, scenario=None):
        serializer = ScenarioConfigSerializer(data={
            'scenario': (scenario or options['scenario']).upper(),
            'p': options['p'],
            'n': options['n'],
            'm': options.get('m'),
            'delta': options.get('delta', 0.0),
            'lambda_grid': comma_floats(options.get('lambdas')),
            'k_grid': comma_floats(options.get('ks')),
            'grid': options.get('grid', constants.HALF_GRID),
            'seed': options['seed'],
            'mode': options.get('mode', constants.BERNOULLI),
        })
        serializer.is_valid(raise_exception=True)
        return serializer.to_config()

    def threads(self, options):
        threads = options.get('threads')
        return int(get_setting('THREADS')) if threads is None else max(1, threads)

    # ──────────────
    # Logging
    # ──────────────

    def _command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def log_start(self, options):
        data = {
            'run_id': self.run_id,
            'command': self._command_name(),
            'options': {key: value for key, value in options.items() if key not in BASE_OPTIONS},
            'event': 'start',
        }
        logger.info(f'Command Start: {json.dumps(data, default=str)}')

    def log_finish(self, status, duration):
        data = {
            'run_id': self.run_id,
            'command': self._command_name(),
            'status': status,
            'duration_ms': round(duration * 1000, 2),  # Convert to milliseconds
            'event': 'finish',
        }
        if status == constants.EXIT_OK:
            logger.info(f'Command Finish: {json.dumps(data)}')
        else:
            logger.error(f'Command Failed: {json.dumps(data)}')
