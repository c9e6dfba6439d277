import os

import constants
from cli.commands import LoggedCommand
from cli.reports import provenance, render_json, write_equivariance_csv, write_json
from cli.serializers import EquivarianceRowSerializer
from simharness.experiments import equivariance_run


class Command(LoggedCommand):
    help = 'Deviation of refits on transformed data from the regression, y- and x-equivariance laws.'

    def add_command_arguments(self, parser):
        self.add_scenario_arguments(parser)
        parser.add_argument('--transform', required=True, choices=dict(constants.TRANSFORMS))
        parser.add_argument('--method', default='sr', type=str.upper, choices=['SR', 'SW', 'OLS'])

    def run(self, **options):
        sr_config = self.sr_config(options)
        config = self.scenario_config(options)
        method, transform = options['method'].upper(), options['transform']

        if not options['as_json']:
            self.stdout.write(f'seed {config.seed}: {transform}-equivariance of {method}, {config.scenario} p={config.p} M={config.M}')
        table = equivariance_run(config, transform, method, sr_config, self.threads(options))

        rows = EquivarianceRowSerializer(
            [{'method': method, 'transform': transform, 'lam': row['lambda'], 'mmse': row['mmse']} for row in table.rows],
            many=True,
        ).data
        grid = options['grid'] if config.scenario == constants.NEO else None
        summary = {
            'command': 'equivariance',
            'config': config.as_dict(),
            'provenance': provenance(config, sr_config, grid),
            'method': method,
            'transform': transform,
            'max_mmse': table.max_mmse,
            'rows': list(rows),
            'invalid': table.invalid,
        }

        out = options['out'] or 'results'
        write_equivariance_csv(os.path.join(out, 'equivariance.csv'), rows)
        write_json(os.path.join(out, 'equivariance.json'), summary)
        if options['as_json']:
            self.stdout.write(render_json(summary), ending='')
            return
        for row in rows:
            self.stdout.write(f"lambda={row['lambda']:<6g} MMSE={row['mmse']:.6g}")
