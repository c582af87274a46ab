import os
from pathlib import Path

from dotenv import load_dotenv


BASE_DIR = Path(__file__).resolve().parent.parent


env_file = BASE_DIR / '.env'
if env_file.exists():
    load_dotenv(env_file, override=False)


SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'qhgeo-local-only-not-a-secret')


DEBUG = os.getenv('QHGEO_DEBUG', '0') == '1'


ALLOWED_HOSTS = []


INSTALLED_APPS = [
    'rest_framework',

    'geometry',
    'domains',
    'qhgrid',
    'metrics',
    'analysis',
    'cli',
]


DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'qhgeo.sqlite3',
    }
}


DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True


CACHES = {
    # the cache checks require a default alias; nothing is stored there
    'default': {
        'BACKEND': 'django.core.cache.backends.dummy.DummyCache',
    },
    'grids': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'qhgeo-grids',
        'TIMEOUT': None,
        'OPTIONS': {'MAX_ENTRIES': 64},
    },
}


REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
}


def readIntegerSetting(name, default):
    rawValue = os.getenv(name)
    if rawValue is None or not rawValue.strip():
        return default
    return int(rawValue)


def readFloatSetting(name, default):
    rawValue = os.getenv(name)
    if rawValue is None or not rawValue.strip():
        return default
    return float(rawValue)


QHGEO = {
    'SEED': readIntegerSetting('QHGEO_SEED', 42),
    'REL_TOL': readFloatSetting('QHGEO_REL_TOL', 0.02),
    'MAX_LEVEL': readIntegerSetting('QHGEO_MAX_LEVEL', 7),
    'THREADS': readIntegerSetting('QHGEO_THREADS', os.cpu_count() or 1),
    'STENCIL': 16,
    # cell size / delta at the cell center
    'GRADING': 0.25,
    # base cells along the bounding-box diagonal
    'BASE_DIVISIONS': 16,
    'SNAP_FACTOR': 1e-9,
    'QUAD_POINTS': 4,
    'TRUNCATION_MARGIN': 1.0,
    'COMB_KMAX': 8,
}


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'level': os.getenv('QHGEO_LOG_LEVEL', 'WARNING'),
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
        'file': {
            'level': 'ERROR',
            'class': 'logging.FileHandler',
            'filename': BASE_DIR / 'errors.log',
            'delay': True,
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file'],
            'level': 'ERROR',
            'propagate': True,
        },
        'geometry': {'handlers': ['console', 'file'], 'level': 'DEBUG', 'propagate': False},
        'domains': {'handlers': ['console', 'file'], 'level': 'DEBUG', 'propagate': False},
        'qhgrid': {'handlers': ['console', 'file'], 'level': 'DEBUG', 'propagate': False},
        'metrics': {'handlers': ['console', 'file'], 'level': 'DEBUG', 'propagate': False},
        'analysis': {'handlers': ['console', 'file'], 'level': 'DEBUG', 'propagate': False},
        'cli': {'handlers': ['console', 'file'], 'level': 'DEBUG', 'propagate': False},
    },
}
