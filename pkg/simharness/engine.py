"""
Replicate execution and deterministic aggregation.

Replicates run on a thread pool but results are always collected and reduced in
replicate index order, so tables do not depend on the number of threads.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from core.conf import get_setting
from core.exceptions import NumericalError
from core.metrics import track_replicate_failure
from core.regression import fit

logger = logging.getLogger('simharness')


class ReplicatePool:
    """
    Ordered map over replicate indices, sequential when threads <= 1.
    """

    def __init__(self, threads=1):
        self.threads = max(1, int(threads or 1))
        self._executor = None

    def __enter__(self):
        if self.threads > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix='replicate')
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map(self, func, indices):
        if self._executor is None:
            return [func(index) for index in indices]
        return list(self._executor.map(func, indices))


def fit_methods(data, methods, config):
    """
    phi = (beta, alpha) per method, None where the fit failed numerically.
    """
    estimates = {}
    for method in methods:
        try:
            estimates[method] = fit(data, method, config).phi
        except NumericalError as exc:
            logger.debug(f'{method} fit failed: {exc}')
            estimates[method] = None
    return estimates


@dataclass
class ErrorAccumulator:
    """
    Running sums of phi - phi_true for one method, fed in replicate order.
    """
    p: int
    count: int = 0
    failures: int = 0
    beta_sq: float = 0.0
    alpha_sq: float = 0.0
    beta_sum: np.ndarray = None
    alpha_sum: float = 0.0

    def __post_init__(self):
        if self.beta_sum is None:
            self.beta_sum = np.zeros(self.p)

    def add(self, error):
        if error is None:
            self.failures += 1
            return
        beta, alpha = error[:-1], float(error[-1])
        self.count += 1
        self.beta_sq += float(beta @ beta)
        self.alpha_sq += alpha * alpha
        self.beta_sum = self.beta_sum + beta
        self.alpha_sum += alpha

    @property
    def total(self):
        return self.count + self.failures

    def invalid(self, tolerance=None):
        tolerance = get_setting('FAILURE_TOLERANCE') if tolerance is None else tolerance
        return self.count == 0 or self.failures > tolerance * self.total

    def mse_beta(self):
        # mean per-coefficient squared error
        return self.beta_sq / (self.count * self.p) if self.count else float('nan')

    def mse_alpha(self):
        return self.alpha_sq / self.count if self.count else float('nan')

    def mse_phi(self):
        return (self.beta_sq + self.alpha_sq) / self.count if self.count else float('nan')

    def bias2_beta(self):
        if not self.count:
            return float('nan')
        mean = self.beta_sum / self.count
        return float(mean @ mean) / self.p

    def bias2_alpha(self):
        if not self.count:
            return float('nan')
        return (self.alpha_sum / self.count) ** 2


def run_replicates(pool, experiment, methods, replicate_count, make_errors, p):
    """
    Evaluate make_errors(index) -> {method: error vector or None} for every
    replicate and reduce into one accumulator per method, in index order.
    """
    outcomes = pool.map(make_errors, range(replicate_count))
    accumulators = {method: ErrorAccumulator(p=p) for method in methods}
    for outcome in outcomes:
        for method in methods:
            error = outcome.get(method)
            if error is None:
                track_replicate_failure(experiment, method)
            accumulators[method].add(error)
    for method, accumulator in accumulators.items():
        if accumulator.failures:
            logger.warning(
                f'{experiment}: {accumulator.failures}/{accumulator.total} {method} replicates skipped'
            )
    return accumulators
