import logging
import os
import time
from functools import wraps

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

logger = logging.getLogger('core')

REGISTRY = CollectorRegistry(auto_describe=True)

# Define metrics
FIT_DURATION = Histogram(
    'shrinkreg_fit_duration_seconds',
    'Histogram of single regression fit durations',
    ['method'],
    buckets=[0.0005, 0.001, 0.0025, 0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5],
    registry=REGISTRY,
)

FITS_TOTAL = Counter(
    'shrinkreg_fits_total',
    'Total count of regression fits',
    ['method', 'status'],
    registry=REGISTRY,
)

REPLICATES_FAILED = Counter(
    'shrinkreg_replicates_failed_total',
    'Total count of Monte-Carlo replicates whose fit failed',
    ['experiment', 'method'],
    registry=REGISTRY,
)

OBSERVATIONS_REJECTED = Histogram(
    'shrinkreg_observations_rejected_ratio',
    'Fraction of observations rejected per weighting stage',
    ['stage'],
    buckets=[0.0, 0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0],
    registry=REGISTRY,
)


def track_fit(method):
    """
    Decorator recording duration, outcome and rejection ratios of a fit function.
    """
    def decorator(fit_func):
        @wraps(fit_func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                fit = fit_func(*args, **kwargs)
            except Exception:
                FITS_TOTAL.labels(method=method, status='error').inc()
                raise
            duration = time.perf_counter() - start_time

            FITS_TOTAL.labels(method=method, status='ok').inc()
            FIT_DURATION.labels(method=method).observe(duration)
            if fit.d2 is not None:
                OBSERVATIONS_REJECTED.labels(stage='first').observe(1.0 - float(fit.w.mean()))
            if fit.residual_d2 is not None:
                OBSERVATIONS_REJECTED.labels(stage='residual').observe(1.0 - float(fit.wr.mean()))
            return fit
        return wrapper
    return decorator


class FitTimer:
    """
    Context manager timing a block and feeding the fit duration histogram.
    """

    def __init__(self, method):
        self.method = method
        self.duration = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = time.perf_counter() - self.start_time
        if exc_type is None:
            FIT_DURATION.labels(method=self.method).observe(self.duration)


def track_replicate_failure(experiment, method):
    REPLICATES_FAILED.labels(experiment=experiment, method=method).inc()


def dump_metrics(directory):
    """
    Write the registry in the Prometheus text format to <directory>/metrics.prom.
    """
    if not directory:
        return None
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, 'metrics.prom')
    write_to_textfile(path, REGISTRY)
    logger.debug(f'metrics written to {path}')
    return path
