from cli.commands import LoggedCommand, parse_methods
from cli.reports import render_json
from simharness.experiments import timing_run


class Command(LoggedCommand):
    help = 'Mean wall-clock seconds per fit.'

    def add_command_arguments(self, parser):
        self.add_scenario_arguments(parser)
        parser.add_argument('--methods', default='sr,ols', help='Comma separated methods.')

    def run(self, **options):
        config = self.scenario_config(options)
        seconds = timing_run(config, parse_methods(options['methods']), self.sr_config(options))

        if options['as_json']:
            self.stdout.write(render_json({'config': config.as_dict(), 'seconds_per_fit': seconds}), ending='')
            return
        for method, value in seconds.items():
            self.stdout.write(f'{method}: {value:.6f} s per fit (p={config.p}, n={config.n}, M={config.M})')
