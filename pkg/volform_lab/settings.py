"""
Django settings for volform_lab project.
"""

from pathlib import Path

import numpy as np
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-change-me-in-production')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',

    # Third party apps
    'rest_framework',

    # Local apps
    'volform',
]


# Aucune table n'est utilisée : la base SQLite ne sert qu'aux vérifications de Django
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = 'fr-fr'

TIME_ZONE = 'Europe/Paris'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Paramètres du solveur et des commandes volform
VOLFORM = {
    'NEWTON_TOL': config('VOLFORM_NEWTON_TOL', default=1e-12, cast=float),
    'MAX_ITER': config('VOLFORM_MAX_ITER', default=50, cast=int),
    'FD_STEP': config('VOLFORM_FD_STEP', default=float(np.cbrt(np.finfo(float).eps)), cast=float),
    'BRACKET_FALLBACK': config('VOLFORM_BRACKET_FALLBACK', default=True, cast=bool),
    'AUDIT_EVERY': config('VOLFORM_AUDIT_EVERY', default=100, cast=int),
    'BOX': config('VOLFORM_BOX', default=1.0, cast=float),
    'LOG_LEVEL': config('VOLFORM_LOG_LEVEL', default='WARNING'),
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'volform': {
            'handlers': ['console'],
            'level': VOLFORM['LOG_LEVEL'],
            'propagate': False,
        },
    },
}
