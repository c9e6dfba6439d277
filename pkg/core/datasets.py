"""
Dataset ingestion: comma separated files and the two embedded benchmark sets.
"""
import csv
import logging
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from core.exceptions import DataValidationError
from core.regression import Dataset

logger = logging.getLogger('core')

DATA_DIR = Path(__file__).resolve().parent / 'data'


@dataclass(frozen=True)
class BuiltinDataset:
    name: str
    filename: str
    description: str
    source: str


BUILTIN_DATASETS = {
    'star': BuiltinDataset(
        name='star',
        filename='star.csv',
        description='Hertzsprung-Russell diagram of 47 stars in the CYG OB1 cluster: '
                    'log effective surface temperature -> log light intensity',
        source='Rousseeuw, P.J. and Leroy, A.M. (1987) Robust Regression and Outlier Detection, Wiley',
    ),
    'hbk': BuiltinDataset(
        name='hbk',
        filename='hbk.csv',
        description='Artificial data with 75 observations and 3 carriers; '
                    'observations 1-10 are bad and 11-14 good leverage points',
        source='Hawkins, D.M., Bradu, D. and Kass, G.V. (1984) Location of several outliers '
               'in multiple regression data using elemental sets, Technometrics 26, 197-208',
    ),
}


def _parse_cell(text, row, column):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise DataValidationError(f"row {row}, column {column}: non-numeric cell {text!r}")
    if not np.isfinite(value):
        raise DataValidationError(f"row {row}, column {column}: non-finite cell {text!r}")
    return value


def load_csv(path, header=True, response_column=None):
    """
    Read a rectangular numeric CSV into a Dataset.

    Rows are numbered from 1 after the header. The response is the column named
    (or 0-based indexed) by response_column, the last column by default.
    """
    path = Path(path)
    if not path.exists():
        raise DataValidationError(f"file not found: {path}")

    with open(path, newline='', encoding='utf-8') as handle:
        rows = [row for row in csv.reader(handle) if row and any(cell.strip() for cell in row)]

    if header:
        if not rows:
            raise DataValidationError(f"{path}: missing header")
        names, rows = [name.strip() for name in rows[0]], rows[1:]
    else:
        names = None
    if not rows:
        raise DataValidationError(f"{path}: no data rows")

    width = len(names) if names is not None else len(rows[0])
    if width < 2:
        raise DataValidationError(f"{path}: need at least one carrier and a response column")
    if names is None:
        names = [f'x{j + 1}' for j in range(width - 1)] + ['y']

    table = np.empty((len(rows), width))
    for index, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataValidationError(f"row {index}: expected {width} cells, found {len(row)}")
        for column, cell in enumerate(row):
            table[index - 1, column] = _parse_cell(cell.strip(), index, names[column])

    target = _response_index(names, response_column)
    carriers = np.delete(table, target, axis=1)
    carrier_names = [name for j, name in enumerate(names) if j != target]
    data = Dataset(carriers, table[:, target], tuple(carrier_names) + (names[target],))
    data.require_fittable()
    logger.debug(f'loaded {path}: n={data.n} p={data.p}')
    return data


def _response_index(names, response_column):
    if response_column is None or response_column == '':
        return len(names) - 1
    if response_column in names:
        return names.index(response_column)
    try:
        index = int(response_column)
    except (TypeError, ValueError):
        raise DataValidationError(f"unknown response column {response_column!r}, columns are {', '.join(names)}")
    if not 0 <= index < len(names):
        raise DataValidationError(f"response column index {index} out of range")
    return index


def write_csv(path, data, header=True):
    """
    Write carriers followed by the response, shortest round-tripping float repr.
    """
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        if header:
            writer.writerow(data.names)
        for x_row, y in zip(data.carriers, data.response):
            writer.writerow([repr(float(value)) for value in x_row] + [repr(float(y))])
    return path


@lru_cache(maxsize=None)
def builtin_dataset(name):
    """
    One of the embedded datasets, parsed once per process.
    """
    if name not in BUILTIN_DATASETS:
        raise DataValidationError(f"unknown dataset {name!r}, available: {', '.join(sorted(BUILTIN_DATASETS))}")
    entry = BUILTIN_DATASETS[name]
    return load_csv(DATA_DIR / entry.filename, header=True)
