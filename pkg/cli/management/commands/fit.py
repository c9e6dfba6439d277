from core.cache import cached_report, fit_cache_key
from core.conf import get_setting
from core.datasets import builtin_dataset, load_csv
from core.regression import fit
from cli.commands import LoggedCommand
from cli.reports import atomic_write, build_fit_report, format_fit_table, render_json


class Command(LoggedCommand):
    help = 'Fit the SR, SW or OLS regression on a built-in dataset or a CSV file.'

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--dataset', help='Built-in dataset name (star, hbk).')
        source.add_argument('--csv', dest='csv_path', help='Path of a comma separated file.')
        parser.add_argument('--no-header', action='store_true', help='The CSV file has no header row.')
        parser.add_argument('--response', default=None, help='Response column name or index, default last.')
        parser.add_argument('--method', default='sr', type=str.upper, choices=['SR', 'SW', 'OLS'])
        parser.add_argument('--no-cache', action='store_true', help='Always refit.')

    def run(self, **options):
        sr_config = self.sr_config(options)
        if options.get('dataset'):
            data, source = builtin_dataset(options['dataset']), options['dataset']
        else:
            data = load_csv(options['csv_path'], header=not options['no_header'], response_column=options['response'])
            source = options['csv_path']

        method = options['method'].upper()
        report = cached_report(
            fit_cache_key(data.fingerprint(), method, sr_config),
            lambda: build_fit_report(data, fit(data, method, sr_config), sr_config, source),
            timeout=int(get_setting('FIT_CACHE_TIMEOUT')),
            use_cache=not options['no_cache'],
        )
        report = {**report, 'dataset': source}

        if options['as_json']:
            self.stdout.write(render_json(report), ending='')
        else:
            self.stdout.write(format_fit_table(report))
        if options['out']:
            atomic_write(f"{options['out']}/fit.json", render_json(report))
