"""
WSGI config for the kicklab_site project.

Serves the shot-scoring JSON API (shots.urls) behind any WSGI server.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'kicklab_site.settings')

application = get_wsgi_application()
