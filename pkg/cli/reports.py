import csv
import io
import logging
import os
import tempfile
from pathlib import Path

import numpy as np
from rest_framework.renderers import JSONRenderer

from cli.serializers import EQUIVARIANCE_COLUMNS, METRICS_COLUMNS, FitReportSerializer
from core.regression import classify_observations

logger = logging.getLogger('cli')


# ──────────────
# Atomic output
# ──────────────

def atomic_write(path, text):
    """
    Write text to path through a temporary sibling file and a rename, so readers
    never observe a partially written report.
    """
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        'w', encoding='utf-8', newline='', dir=path.parent, prefix=f'.{path.name}.', delete=False,
    )
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, path)
    except BaseException:
        if os.path.exists(handle.name):
            os.unlink(handle.name)
        raise
    logger.debug(f'wrote {path}')
    return path


def render_json(data):
    return JSONRenderer().render(data, renderer_context={'indent': 2}).decode('utf-8') + '\n'


def render_csv(rows, columns):
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({column: row[column] for column in columns})
    return buffer.getvalue()


def write_json(path, data):
    return atomic_write(path, render_json(data))


def write_metrics_csv(path, rows):
    return atomic_write(path, render_csv(rows, METRICS_COLUMNS))


def write_equivariance_csv(path, rows):
    return atomic_write(path, render_csv(rows, EQUIVARIANCE_COLUMNS))


# ──────────────
# Fit reports
# ──────────────

def _optional(value):
    return None if value is None else float(value)


def build_fit_report(data, fit, config, source):
    """
    FitReport payload: coefficients keyed by column name, 1-based outlier
    indices, both weight vectors and a provenance block for replay.
    """
    coefficients = {'intercept': float(fit.alpha)}
    for name, value in zip(data.names[:-1], fit.beta):
        coefficients[name] = float(value)

    report = {
        'method': fit.method,
        'dataset': source,
        'n': data.n,
        'p': data.p,
        'coefficients': coefficients,
        'sigma2': float(fit.sigma2),
        'r2': float(fit.r2),
        'adj_r2': float(fit.adj_r2),
        'outlier_indices': [index + 1 for index in fit.outliers],
        'weights': {
            'w': [int(value) for value in fit.w],
            'wr': [int(value) for value in fit.wr],
        },
        'classification': classify_observations(fit),
        'diagnostics': {
            'q1': _optional(fit.q1),
            'q2': _optional(fit.q2),
            'location_eta': _optional(fit.location_eta),
            'scatter_eta': _optional(fit.scatter_eta),
            'retained_first_stage': int(np.sum(fit.w)),
            'retained_residual_stage': int(np.sum(fit.wr)),
        },
        'provenance': {
            'delta1': config.delta1,
            'delta2': config.delta2,
            'dataset_hash': data.fingerprint(),
        },
    }
    serializer = FitReportSerializer(data=report)
    serializer.is_valid(raise_exception=True)
    return dict(FitReportSerializer(report).data)


def format_fit_table(report):
    lines = [
        f"{report['method']} fit on {report['dataset']} (n={report['n']}, p={report['p']})",
        '',
        f"{'coefficient':<16}{'estimate':>14}",
    ]
    for name, value in report['coefficients'].items():
        lines.append(f'{name:<16}{value:>14.6f}')
    lines += [
        '',
        f"{'sigma2':<16}{report['sigma2']:>14.6f}",
        f"{'R2':<16}{report['r2']:>14.6f}",
        f"{'adjusted R2':<16}{report['adj_r2']:>14.6f}",
        '',
        'outliers: ' + (' '.join(str(index) for index in report['outlier_indices']) or 'none'),
    ]
    return '\n'.join(lines)


def provenance(config, sr_config, grid=None):
    return {
        'seed': config.seed,
        'delta1': sr_config.delta1,
        'delta2': sr_config.delta2,
        'grid': grid,
        'lambda_grid': list(config.lambda_grid),
        'k_grid': list(config.k_grid),
        'mode': config.mode,
    }
