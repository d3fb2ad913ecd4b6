"""
Django settings for the groupquery project.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Cargar variables desde el archivo .env en la raíz del proyecto
load_dotenv(BASE_DIR / '.env')


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY") or os.environ.get("SECRET_KEY") or "django-insecure-change-this-in-production"

DEBUG = os.environ.get('DEBUG', '').lower() in ('1', 'true', 'yes')

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'planner',
]

# Sin base de datos: el planner no persiste nada, solo lee y escribe archivos.
DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name, '').strip()
    if not raw:
        return default
    return int(raw.replace('_', ''))


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name, '').strip()
    return float(raw) if raw else default


# Valores por defecto del planner (los argumentos de la consulta siempre ganan)
PLANNER_THETA0 = _env_int('PLANNER_THETA0', 2)
PLANNER_PHI0 = _env_int('PLANNER_PHI0', 2)
PLANNER_PHI_MAX = _env_int('PLANNER_PHI_MAX', 10)
PLANNER_ENUMERATION_CAP = _env_int('PLANNER_ENUMERATION_CAP', 10_000_000)
PLANNER_FLOAT_TOLERANCE = _env_float('PLANNER_FLOAT_TOLERANCE', 1e-9)
PLANNER_BENCH_WORKERS = _env_int('PLANNER_BENCH_WORKERS', 1)
PLANNER_SOLUTION_SCHEMA = 'planner.solution/1'
PLANNER_LOG_LEVEL = os.environ.get('PLANNER_LOG_LEVEL', 'WARNING').upper()

# REST Framework settings (serializers/renderers only, no API views)
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
}

# stdout lleva los resultados; todo el log va a stderr
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s %(message)s',
        },
    },
    'handlers': {
        'stderr': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'planner': {
            'handlers': ['stderr'],
            'level': PLANNER_LOG_LEVEL,
            'propagate': False,
        },
    },
}
