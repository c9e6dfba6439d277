import os

import constants
from cli.commands import LoggedCommand, parse_methods
from cli.reports import provenance, render_json, write_json, write_metrics_csv
from cli.serializers import MetricsCellSerializer
from simharness.experiments import efficiency_from_table, mse_table


class Command(LoggedCommand):
    help = 'Monte-Carlo MSE and squared bias of SR and OLS under the NE, TE or NEO scenario.'

    def add_command_arguments(self, parser):
        self.add_scenario_arguments(parser)
        parser.add_argument('--methods', default='sr,ols', help='Comma separated methods.')

    def run(self, **options):
        sr_config = self.sr_config(options)
        config = self.scenario_config(options)
        methods = parse_methods(options['methods'])

        if not options['as_json']:
            self.stdout.write(f'seed {config.seed}: {config.scenario} p={config.p} n={config.n} M={config.M} delta={config.delta}')
        table = mse_table(config, methods, sr_config, self.threads(options))

        rows = MetricsCellSerializer(table.cells, many=True).data
        grid = options['grid'] if config.scenario == constants.NEO else None
        summary = {
            'command': 'simulate',
            'config': config.as_dict(),
            'provenance': provenance(config, sr_config, grid),
            'rollups': table.rollups,
            'invalid': table.invalid,
        }
        if config.scenario == constants.NE:
            summary['efficiency'] = efficiency_from_table(table)

        out = options['out'] or 'results'
        write_metrics_csv(os.path.join(out, 'metrics.csv'), rows)
        write_json(os.path.join(out, 'summary.json'), summary)
        if options['as_json']:
            self.stdout.write(render_json(summary), ending='')
            return
        for method in methods:
            self.stdout.write(
                f"{method}: MMMSE(beta)={table.rollups[method]['mmmse_beta']:.6g} "
                f"MMMSE(alpha)={table.rollups[method]['mmmse_alpha']:.6g}"
            )
        self.stdout.write(f'results written to {out}')
