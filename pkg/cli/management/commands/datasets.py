import os

from core.datasets import BUILTIN_DATASETS, builtin_dataset, write_csv
from cli.commands import LoggedCommand
from cli.reports import render_json


class Command(LoggedCommand):
    help = 'List the built-in datasets or export one as CSV.'

    def add_command_arguments(self, parser):
        parser.add_argument('--export', default=None, help='Name of the dataset to write to --out.')

    def run(self, **options):
        if options['export']:
            data = builtin_dataset(options['export'])
            path = write_csv(os.path.join(options['out'] or '.', f"{options['export']}.csv"), data)
            self.stdout.write(f'wrote {path}')
            return

        listing = []
        for name, entry in sorted(BUILTIN_DATASETS.items()):
            data = builtin_dataset(name)
            listing.append({
                'name': name,
                'n': data.n,
                'p': data.p,
                'columns': list(data.names),
                'description': entry.description,
                'source': entry.source,
                'dataset_hash': data.fingerprint(),
            })

        if options['as_json']:
            self.stdout.write(render_json(listing), ending='')
            return
        for item in listing:
            self.stdout.write(f"{item['name']:<6} n={item['n']:<4} p={item['p']:<3} {item['description']}")
            self.stdout.write(f"       source: {item['source']}")
