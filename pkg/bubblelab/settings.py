"""
Django settings for the bubblelab project.

Local values (secret key, database, output directory) come from
bubblelab/private_settings.py; see private_settings.dist.py for a template.
When no private settings exist the development defaults below are used.
"""
import os

try:
    from bubblelab.private_settings import *
except ImportError:
    BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    SECRET_KEY = 'bubblelab-development-only'
    DEBUG = True
    ALLOWED_HOSTS = []
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': os.path.join(BASE_DIR, 'db.sqlite3'),
        }
    }
    BUBBLELAB_OUTPUT_DIR = os.path.join(BASE_DIR, 'runs')
    TIME_ZONE = 'UTC'


# Application definition

INSTALLED_APPS = (
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'torus',
    'sphere',
    'greens',
    'bubbles',
    'flow',
    'diagnostics',
    'lab',
)

MIDDLEWARE = (
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
    'django.middleware.security.SecurityMiddleware',
)

ROOT_URLCONF = 'bubblelab.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'bubblelab.wsgi.application'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LANGUAGE_CODE = 'en-us'
USE_I18N = True
USE_TZ = True

STATIC_URL = '/static/'


# Logging
# Numerical modules log through logging.getLogger(__name__); nothing that is
# logged ever reaches a result file.

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': os.environ.get('BUBBLELAB_LOG_LEVEL', 'INFO'),
            'propagate': False,
        }
        for app in ('torus', 'sphere', 'greens', 'bubbles', 'flow',
                    'diagnostics', 'lab')
    },
}


# Lab defaults
# A run config may override every one of these keys.

BUBBLELAB = {
    'grid_n': 256,
    'seed': 0,
    'sigma': 0.01,
    'images': 1,
    'modes': 12,
    'lambdas': (20.0, 28.0, 40.0),
    'samples': 50,
    'dt_safety': 0.2,
    't_end': 0.01,
    'sample_every': 50,
    'dist_every': 0,
    'e_inf': None,
    'alpha': 0.4,
    'bounded_factor': 10.0,
    'epsilon': 0.0,
}
