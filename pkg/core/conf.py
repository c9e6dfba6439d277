from dataclasses import dataclass, replace

from django.conf import settings

DEFAULTS = {
    'DELTA1': 0.025,
    'DELTA2': 0.01,
    'ETA_FLOOR': 1e-6,
    'L1_TOLERANCE': 1e-8,
    'L1_MAX_ITER': 1000,
    'SIGMA2_FLOOR': 1e-12,
    'THREADS': 1,
    'REPLICATIONS_SMALL_P': 200,
    'REPLICATIONS_LARGE_P': 50,
    'FAILURE_TOLERANCE': 0.01,
    'FIT_CACHE_TIMEOUT': 3600,
    'METRICS_DIR': '',
}


def get_setting(name):
    """
    Read one entry of settings.SHRINKREG, falling back to the library default
    when Django is not configured or the key is absent.
    """
    if settings.configured:
        overrides = getattr(settings, 'SHRINKREG', {})
        if name in overrides:
            return overrides[name]
    return DEFAULTS[name]


@dataclass(frozen=True)
class SRConfig:
    """
    Tuning of the shrinkage-reweighted pipeline.
    delta1 / delta2 are the upper-tail probabilities of the two chi-square cutoffs.
    """
    delta1: float = DEFAULTS['DELTA1']
    delta2: float = DEFAULTS['DELTA2']
    eta_floor: float = DEFAULTS['ETA_FLOOR']
    l1_tolerance: float = DEFAULTS['L1_TOLERANCE']
    l1_max_iter: int = DEFAULTS['L1_MAX_ITER']
    sigma2_floor: float = DEFAULTS['SIGMA2_FLOOR']

    @classmethod
    def from_settings(cls, **overrides):
        config = cls(
            delta1=float(get_setting('DELTA1')),
            delta2=float(get_setting('DELTA2')),
            eta_floor=float(get_setting('ETA_FLOOR')),
            l1_tolerance=float(get_setting('L1_TOLERANCE')),
            l1_max_iter=int(get_setting('L1_MAX_ITER')),
            sigma2_floor=float(get_setting('SIGMA2_FLOOR')),
        )
        overrides = {key: value for key, value in overrides.items() if value is not None}
        return replace(config, **overrides)

    def as_dict(self):
        return {
            'delta1': self.delta1,
            'delta2': self.delta2,
            'eta_floor': self.eta_floor,
            'l1_tolerance': self.l1_tolerance,
            'l1_max_iter': self.l1_max_iter,
            'sigma2_floor': self.sigma2_floor,
        }


def resolve(config):
    return config if config is not None else SRConfig.from_settings()
