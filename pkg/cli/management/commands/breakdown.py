import os

import constants
from cli.commands import LoggedCommand, parse_methods
from cli.reports import provenance, render_json, write_json, write_metrics_csv
from cli.serializers import MetricsCellSerializer
from simharness.experiments import breakdown_run


class Command(LoggedCommand):
    help = 'MMMSE and MMBias of SR and OLS under heavy NEO contamination.'

    def add_command_arguments(self, parser):
        self.add_scenario_arguments(parser, scenario=None, delta=constants.BREAKDOWN_LEVELS[-1])
        parser.add_argument('--methods', default='sr,ols', help='Comma separated methods.')

    def run(self, **options):
        sr_config = self.sr_config(options)
        config = self.scenario_config(options, scenario=constants.NEO)
        methods = parse_methods(options['methods'])

        if not options['as_json']:
            self.stdout.write(f'seed {config.seed}: breakdown at delta={config.delta} ({config.mode}) p={config.p} n={config.n} M={config.M}')
        table, summary = breakdown_run(config, methods, sr_config, self.threads(options))

        payload = {
            'command': 'breakdown',
            'config': config.as_dict(),
            'provenance': provenance(config, sr_config, options['grid']),
        }
        payload.update({method.lower(): values for method, values in summary.items()})

        out = options['out'] or 'results'
        write_metrics_csv(os.path.join(out, 'metrics.csv'), MetricsCellSerializer(table.cells, many=True).data)
        write_json(os.path.join(out, 'summary.json'), payload)
        if options['as_json']:
            self.stdout.write(render_json(payload), ending='')
            return
        for method, values in summary.items():
            self.stdout.write(f"{method}: MMMSE={values['mmmse']:.6g} MMBias={values['mmbias']:.6g}")
