import os

from core.datasets import builtin_dataset, load_csv
from cli.commands import LoggedCommand, parse_methods
from cli.reports import render_json, write_json
from simharness.experiments import cross_validate


class Command(LoggedCommand):
    help = 'Repeated K-fold cross validation of held-out R2 and MSE.'

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--dataset', help='Built-in dataset name (star, hbk).')
        source.add_argument('--csv', dest='csv_path', help='Path of a comma separated file.')
        parser.add_argument('--no-header', action='store_true')
        parser.add_argument('--response', default=None)
        parser.add_argument('--methods', default='sr,ols', help='Comma separated methods.')
        parser.add_argument('--folds', type=int, default=5)
        parser.add_argument('--repeats', type=int, default=10)

    def run(self, **options):
        sr_config = self.sr_config(options)
        if options.get('dataset'):
            data, source = builtin_dataset(options['dataset']), options['dataset']
        else:
            data = load_csv(options['csv_path'], header=not options['no_header'], response_column=options['response'])
            source = options['csv_path']

        results = [
            cross_validate(data, method, options['folds'], options['repeats'], options['seed'], sr_config).summary
            for method in parse_methods(options['methods'])
        ]
        payload = {
            'command': 'crossval',
            'dataset': source,
            'provenance': {
                'seed': options['seed'],
                'delta1': sr_config.delta1,
                'delta2': sr_config.delta2,
                'dataset_hash': data.fingerprint(),
            },
            'results': results,
        }

        if options['out']:
            write_json(os.path.join(options['out'], 'crossval.json'), payload)
        if options['as_json']:
            self.stdout.write(render_json(payload), ending='')
            return
        for result in results:
            self.stdout.write(
                f"{result['method']}: R2 median={result['r2_median']:.4f} MAD={result['r2_mad']:.4f}  "
                f"MSE median={result['mse_median']:.4f} MAD={result['mse_mad']:.4f}"
            )
