import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

# dev key only; production sets KICKLAB_SECRET_KEY
SECRET_KEY = os.environ.get(
    "KICKLAB_SECRET_KEY",
    "django-insecure-kicklab-dev-0b7c1e4d9a2f6e83c5d1",
)

DEBUG = os.environ.get("KICKLAB_DEBUG", "1") == "1"

ALLOWED_HOSTS = [
    "127.0.0.1",
    "localhost",
    "testserver",
]

INSTALLED_APPS = [
    "shots",                        # IMU shot analysis
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "kicklab_site.urls"

TEMPLATES = []

WSGI_APPLICATION = "kicklab_site.wsgi.application"

# artifacts live in JSON files, nothing is stored in a database
DATABASES = {}

LANGUAGE_CODE = "en"

TIME_ZONE = "UTC"

USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# ---------- UPLOADS ----------

# one 7 s session at 7 Hz is a few KB; anything near this is not a shot log
DATA_UPLOAD_MAX_MEMORY_SIZE = 2 * 1024 * 1024
FILE_UPLOAD_MAX_MEMORY_SIZE = 2 * 1024 * 1024

# ---------- LOGGING ----------

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "shots": {
            "handlers": ["console"],
            "level": os.environ.get("KICKLAB_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}

# ---------- PIPELINE ----------

# Overrides for shots.config.PipelineConfig defaults (field name -> value).
# Leave empty to use the field protocol defaults (7 s window, ~7 Hz).
KICKLAB_PIPELINE = {}

# Trained artifacts used by the HTTP API and as `serve` defaults.
KICKLAB_TEMPLATE_PATH = os.environ.get("KICKLAB_TEMPLATE_PATH", str(BASE_DIR / "artifacts" / "template.json"))
KICKLAB_MODEL_PATH = os.environ.get("KICKLAB_MODEL_PATH", str(BASE_DIR / "artifacts" / "model.json"))

# host:port for the NDJSON stream scorer
KICKLAB_STREAM_LISTEN = os.environ.get("KICKLAB_STREAM_LISTEN", "127.0.0.1:8765")
