"""
Monte-Carlo experiments: efficiency, MSE / squared-bias tables with their max
rollups, equivariance deviations, breakdown sweeps, timing and repeated K-fold
cross validation.

Metrics are averages over replicates of per-coefficient squared errors against
the zero truth: mse_beta = mean ||beta_hat||^2 / p, bias2_beta = ||mean beta_hat||^2 / p.
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

import constants
from core.conf import get_setting, resolve
from core.exceptions import DataValidationError, NumericalError
from core.metrics import FitTimer, track_replicate_failure
from core.numerics import median
from core.regression import Dataset, fit
from simharness.engine import ReplicatePool, fit_methods, run_replicates
from simharness.scenarios import SPLIT_STREAM, TRANSFORM_STREAM, generate, replicate_rng

logger = logging.getLogger('simharness')

DEFAULT_METHODS = (constants.SR, constants.OLS)
CONDITIONING_GUARD = 0.05


@dataclass(frozen=True)
class MetricsCell:
    method: str
    scenario: str
    p: int
    n: int
    delta: float
    lam: float
    k: float
    mse_beta: float
    mse_alpha: float
    bias2_beta: float
    bias2_alpha: float
    replicates: int = 0
    failures: int = 0


@dataclass(frozen=True)
class MetricsTable:
    config: object
    methods: tuple
    cells: list
    rollups: dict
    invalid: dict = field(default_factory=dict)

    def cells_for(self, method):
        return [cell for cell in self.cells if cell.method == method]


def _cell(config, method, lam, k, accumulator):
    return MetricsCell(
        method=method, scenario=config.scenario, p=config.p, n=config.n, delta=config.delta,
        lam=lam, k=k,
        mse_beta=accumulator.mse_beta(), mse_alpha=accumulator.mse_alpha(),
        bias2_beta=accumulator.bias2_beta(), bias2_alpha=accumulator.bias2_alpha(),
        replicates=accumulator.count, failures=accumulator.failures,
    )


def rollup(cells):
    """
    Maxima over k for every lambda, then over lambda, of MSE and squared bias.
    """
    by_lambda = {}
    for cell in cells:
        row = by_lambda.setdefault(cell.lam, {
            'mmse_beta': cell.mse_beta, 'mmse_alpha': cell.mse_alpha,
            'mbias_beta': cell.bias2_beta, 'mbias_alpha': cell.bias2_alpha,
        })
        row['mmse_beta'] = max(row['mmse_beta'], cell.mse_beta)
        row['mmse_alpha'] = max(row['mmse_alpha'], cell.mse_alpha)
        row['mbias_beta'] = max(row['mbias_beta'], cell.bias2_beta)
        row['mbias_alpha'] = max(row['mbias_alpha'], cell.bias2_alpha)

    rows = list(by_lambda.values())
    return {
        'by_lambda': [{'lambda': lam, **row} for lam, row in by_lambda.items()],
        'mmmse_beta': max(row['mmse_beta'] for row in rows),
        'mmmse_alpha': max(row['mmse_alpha'] for row in rows),
        'mmbias_beta': max(row['mbias_beta'] for row in rows),
        'mmbias_alpha': max(row['mbias_alpha'] for row in rows),
    }


def _cell_errors(config, lam, k, methods, sr_config):
    def make_errors(index):
        data = generate(config, index, lam, k)
        return fit_methods(data, methods, sr_config)
    return make_errors


def _accumulate_cells(config, methods, sr_config, threads, experiment):
    cells, invalid = [], {method: False for method in methods}
    with ReplicatePool(threads) as pool:
        for lam, k in config.cells():
            accumulators = run_replicates(
                pool, experiment, methods, config.M, _cell_errors(config, lam, k, methods, sr_config), config.p,
            )
            for method in methods:
                invalid[method] = invalid[method] or accumulators[method].invalid()
                cells.append((method, lam, k, accumulators[method]))
    return cells, invalid


def mse_table(config, methods=DEFAULT_METHODS, sr_config=None, threads=1):
    sr_config = resolve(sr_config)
    methods = tuple(methods)
    raw, invalid = _accumulate_cells(config, methods, sr_config, threads, 'mse_table')
    cells = [_cell(config, method, lam, k, accumulator) for method, lam, k, accumulator in raw]
    rollups = {method: rollup([cell for cell in cells if cell.method == method]) for method in methods}
    for method, flagged in invalid.items():
        if flagged:
            logger.warning(f'mse_table: {method} run flagged invalid, too many failed replicates')
    return MetricsTable(config=config, methods=methods, cells=cells, rollups=rollups, invalid=invalid)


@dataclass(frozen=True)
class EfficiencyResult:
    values: dict
    mse_phi: dict
    invalid: dict


def efficiency(config, methods=(constants.SR,), sr_config=None, threads=1):
    """
    Ratio of the mean squared error of (beta, alpha) of OLS to that of each method,
    all computed on the same replicates.
    """
    if config.scenario != constants.NE:
        raise DataValidationError("efficiency is defined on the NE scenario")
    sr_config = resolve(sr_config)
    methods = tuple(dict.fromkeys((constants.OLS,) + tuple(methods)))
    raw, invalid = _accumulate_cells(config, methods, sr_config, threads, 'efficiency')
    mse_phi = {method: accumulator.mse_phi() for method, _, _, accumulator in raw}
    values = {method: mse_phi[constants.OLS] / mse_phi[method] for method in methods}
    return EfficiencyResult(values=values, mse_phi=mse_phi, invalid=invalid)


def efficiency_from_table(table):
    """
    Efficiency relative to OLS read off an NE table that already holds OLS cells.
    """
    p = table.config.p
    errors = {
        cell.method: p * cell.mse_beta + cell.mse_alpha
        for cell in table.cells
    }
    if constants.OLS not in errors:
        return {}
    return {method: errors[constants.OLS] / value for method, value in errors.items()}


# ──────────────
# Breakdown
# ──────────────

def breakdown_run(config, methods=DEFAULT_METHODS, sr_config=None, threads=1):
    """
    mse_table at a high contamination level, summarized as MMMSE / MMBias of beta.
    """
    table = mse_table(config, methods, sr_config, threads)
    summary = {
        method: {
            'mmmse': table.rollups[method]['mmmse_beta'],
            'mmbias': table.rollups[method]['mmbias_beta'],
            'mmmse_alpha': table.rollups[method]['mmmse_alpha'],
            'mmbias_alpha': table.rollups[method]['mmbias_alpha'],
            'invalid': table.invalid[method],
        }
        for method in table.methods
    }
    return table, summary


# ──────────────
# Equivariance
# ──────────────

@dataclass(frozen=True)
class ResponseTransform:
    """
    y -> c y + X g + v; an equivariant estimator maps phi to (c beta + g, c alpha + v).
    """
    c: float
    g: np.ndarray
    v: float

    @classmethod
    def identity(cls, p):
        return cls(c=1.0, g=np.zeros(p), v=0.0)

    @classmethod
    def draw(cls, rng, p):
        c = rng.standard_normal()
        while abs(c) < CONDITIONING_GUARD:
            c = rng.standard_normal()
        return cls(c=float(c), g=rng.standard_normal(p), v=float(rng.standard_normal()))

    def apply(self, data):
        response = self.c * data.response + data.carriers @ self.g + self.v
        return Dataset(data.carriers, response, data.names)

    def predict(self, phi):
        return np.append(self.c * phi[:-1] + self.g, self.c * phi[-1] + self.v)


@dataclass(frozen=True)
class CarrierTransform:
    """
    X -> X A with A = T D, T orthogonal and D diagonal; phi maps to (A^-1 beta, alpha).
    """
    matrix: np.ndarray

    @classmethod
    def identity(cls, p):
        return cls(matrix=np.eye(p))

    @classmethod
    def draw(cls, rng, p):
        q, r = np.linalg.qr(rng.standard_normal((p, p)))
        orthogonal = q * np.where(np.diag(r) < 0, -1.0, 1.0)
        scales = rng.uniform(0.0, 1.0, p)
        small = scales < CONDITIONING_GUARD
        while small.any():
            scales[small] = rng.uniform(0.0, 1.0, int(small.sum()))
            small = scales < CONDITIONING_GUARD
        return cls(matrix=orthogonal @ np.diag(scales))

    def apply(self, data):
        return Dataset(data.carriers @ self.matrix, data.response, data.names)

    def predict(self, phi):
        return np.append(np.linalg.solve(self.matrix, phi[:-1]), phi[-1])


TRANSFORM_CLASSES = {
    constants.REGRESSION_Y: ResponseTransform,
    constants.X_TRANSFORM: CarrierTransform,
}


def equivariance_deviation(data, transform, method=constants.SR, sr_config=None):
    """
    Mean squared difference, per coordinate of phi, between the refit on the
    transformed data and the prediction of the transformation law.
    """
    original = fit(data, method, sr_config).phi
    refit = fit(transform.apply(data), method, sr_config).phi
    return float(np.mean((refit - transform.predict(original)) ** 2))


@dataclass(frozen=True)
class EquivarianceTable:
    method: str
    transform: str
    rows: list
    cells: list
    invalid: bool

    @property
    def max_mmse(self):
        return max(row['mmse'] for row in self.rows)


def equivariance_run(config, transform, method=constants.SR, sr_config=None, threads=1):
    if transform not in TRANSFORM_CLASSES:
        raise DataValidationError(f"unknown transform {transform!r}")
    sr_config = resolve(sr_config)
    transform_class = TRANSFORM_CLASSES[transform]
    tolerance = get_setting('FAILURE_TOLERANCE')

    def cell_deviations(lam, k):
        def make_deviation(index):
            data = generate(config, index, lam, k)
            law = transform_class.draw(replicate_rng(config.seed, index, TRANSFORM_STREAM), config.p)
            try:
                return equivariance_deviation(data, law, method, sr_config)
            except NumericalError as exc:
                logger.debug(f'equivariance replicate {index} failed: {exc}')
                track_replicate_failure('equivariance', method)
                return None
        return make_deviation

    cells, invalid = [], False
    with ReplicatePool(threads) as pool:
        for lam, k in config.cells():
            deviations = [value for value in pool.map(cell_deviations(lam, k), range(config.M)) if value is not None]
            failures = config.M - len(deviations)
            invalid = invalid or not deviations or failures > tolerance * config.M
            mse = sum(deviations) / len(deviations) if deviations else float('nan')
            cells.append({'lambda': lam, 'k': k, 'mse': mse, 'replicates': len(deviations), 'failures': failures})

    rows = {}
    for cell in cells:
        rows[cell['lambda']] = max(rows.get(cell['lambda'], cell['mse']), cell['mse'])
    return EquivarianceTable(
        method=method, transform=transform,
        rows=[{'lambda': lam, 'mmse': value} for lam, value in rows.items()],
        cells=cells, invalid=invalid,
    )


# ──────────────
# Timing
# ──────────────

def timing_run(config, methods=DEFAULT_METHODS, sr_config=None):
    """
    Mean wall-clock seconds per fit, sequential so timings are not distorted by
    other workers. Uses the first cell of the grid.
    """
    sr_config = resolve(sr_config)
    lam, k = config.cells()[0]
    totals = {method: 0.0 for method in methods}
    counts = {method: 0 for method in methods}
    for index in range(config.M):
        data = generate(config, index, lam, k)
        for method in methods:
            try:
                with FitTimer(method) as timer:
                    fit(data, method, sr_config)
            except NumericalError:
                continue
            totals[method] += timer.duration
            counts[method] += 1
    return {method: totals[method] / counts[method] if counts[method] else float('nan') for method in methods}


# ──────────────
# Cross validation
# ──────────────

def _mad(values):
    center = median(values)
    return median(np.abs(np.asarray(values) - center))


@dataclass(frozen=True)
class CrossValidationResult:
    method: str
    folds: int
    repeats: int
    r2_scores: tuple
    mse_scores: tuple
    failures: int

    @property
    def summary(self):
        return {
            'method': self.method,
            'folds': self.folds,
            'repeats': self.repeats,
            'r2_median': median(self.r2_scores),
            'r2_mad': _mad(self.r2_scores),
            'mse_median': median(self.mse_scores),
            'mse_mad': _mad(self.mse_scores),
            'failures': self.failures,
        }


def cross_validate(data, method=constants.SR, folds=5, repeats=10, seed=0, sr_config=None):
    """
    Repeated K-fold cross validation scoring held-out R^2 and mean squared error.
    """
    if folds < 2 or folds > data.n:
        raise DataValidationError(f"folds must lie in [2, {data.n}], got {folds}")
    if repeats < 1:
        raise DataValidationError("repeats must be at least 1")
    sr_config = resolve(sr_config)

    r2_scores, mse_scores, failures = [], [], 0
    start_time = time.perf_counter()
    for repeat in range(repeats):
        order = replicate_rng(seed, repeat, SPLIT_STREAM).permutation(data.n)
        for held_out in np.array_split(order, folds):
            training = np.sort(np.setdiff1d(order, held_out))
            try:
                result = fit(data.subset(training), method, sr_config)
            except (NumericalError, DataValidationError) as exc:
                logger.debug(f'cross validation fold failed: {exc}')
                failures += 1
                continue
            y = data.response[held_out]
            errors = y - result.predict(data.carriers[held_out])
            total = float(np.sum((y - y.mean()) ** 2))
            mse_scores.append(float(np.mean(errors ** 2)))
            r2_scores.append(1.0 - float(np.sum(errors ** 2)) / total if total > 0 else 0.0)

    if not r2_scores:
        raise NumericalError("cross validation: every fold failed")
    logger.debug(f'cross validation of {method} took {time.perf_counter() - start_time:.3f}s')
    return CrossValidationResult(
        method=method, folds=folds, repeats=repeats,
        r2_scores=tuple(r2_scores), mse_scores=tuple(mse_scores), failures=failures,
    )
