"""Configure Django for pytest the same way manage.py does."""
import os

import django
from django.test.utils import setup_test_environment

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "kicklab_site.settings")
django.setup()
setup_test_environment()
