import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SECRET_KEY', 'django-insecure-shrinkreg-local-only')

DEBUG = os.environ.get('DEBUG', 'True') == 'True'

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third Party Apps
    'rest_framework',

    # My Applications
    'core',
    'simharness',
    'cli',
]

# Nothing is persisted: datasets come from CSV files and results go to --out
DATABASES = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_RENDERER_CLASSES': (
        'rest_framework.renderers.JSONRenderer',
    ),
    'COERCE_DECIMAL_TO_STRING': False,
    'STRICT_JSON': False,  # NaN metrics of invalid runs stay representable
}

# Estimator and simulation defaults, see core.conf
SHRINKREG = {
    'DELTA1': float(os.environ.get('SHRINKREG_DELTA1', 0.025)),
    'DELTA2': float(os.environ.get('SHRINKREG_DELTA2', 0.01)),
    'ETA_FLOOR': 1e-6,
    'L1_TOLERANCE': 1e-8,
    'L1_MAX_ITER': 1000,
    'SIGMA2_FLOOR': 1e-12,
    'THREADS': int(os.environ.get('SHRINKREG_THREADS', 1)),
    'REPLICATIONS_SMALL_P': 200,  # p <= 10
    'REPLICATIONS_LARGE_P': 50,
    'FAILURE_TOLERANCE': 0.01,  # share of failed replicates before a run is flagged invalid
    'FIT_CACHE_TIMEOUT': int(os.environ.get('FIT_CACHE_TIMEOUT', 3600)),
    'METRICS_DIR': os.environ.get('METRICS_DIR', ''),
}

# Cache configuration
if os.environ.get('CACHE_URL'):
    CACHES = {
        'default': {
            'BACKEND': 'django_redis.cache.RedisCache',
            'LOCATION': os.environ.get('CACHE_URL'),
            'OPTIONS': {
                'CLIENT_CLASS': 'django_redis.client.DefaultClient',
                'SOCKET_CONNECT_TIMEOUT': 5,  # seconds
                'SOCKET_TIMEOUT': 5,  # seconds
                'IGNORE_EXCEPTIONS': True,  # Don't raise exceptions on Redis errors
            },
            'KEY_PREFIX': 'shrinkreg',
            'VERSION': 1,
        }
    }
else:
    CACHES = {
        'default': {
            'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
            'LOCATION': 'shrinkreg',
        }
    }

LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'json': {
            '()': 'pythonjsonlogger.jsonlogger.JsonFormatter',
            'format': '%(asctime)s %(levelname)s %(name)s %(message)s',
        },
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'json': {
            'level': LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'json',
            'stream': 'ext://sys.stderr',
        },
        'file': {
            'level': 'DEBUG',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': os.path.join(BASE_DIR, 'logs/shrinkreg.log'),
            'maxBytes': 1024 * 1024 * 10,  # 10 MB
            'backupCount': 10,
            'formatter': 'verbose',
        },
        'error_file': {
            'level': 'ERROR',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': os.path.join(BASE_DIR, 'logs/error.log'),
            'maxBytes': 1024 * 1024 * 10,  # 10 MB
            'backupCount': 10,
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'INFO',
            'propagate': True,
        },
        'core': {
            'handlers': ['console', 'file', 'error_file'],
            'level': 'DEBUG',
            'propagate': False,
        },
        'simharness': {
            'handlers': ['file', 'error_file', 'console'],
            'level': 'DEBUG',
            'propagate': False,
        },
        'cli': {
            'handlers': ['file', 'json', 'error_file'],
            'level': 'DEBUG',
            'propagate': False,
        },
    },
}

# Ensure logs directory exists
os.makedirs(os.path.join(BASE_DIR, 'logs'), exist_ok=True)
