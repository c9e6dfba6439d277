from .settings import *

CACHES = {
    'default': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'shrinkreg-test',
    }
}

SHRINKREG = {
    **SHRINKREG,
    'DELTA1': 0.025,
    'DELTA2': 0.01,
    'THREADS': 1,
    'METRICS_DIR': '',
}

LOGGING['handlers']['json']['level'] = 'WARNING'
LOGGING['handlers']['console']['level'] = 'ERROR'
