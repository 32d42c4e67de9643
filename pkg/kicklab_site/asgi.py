"""
ASGI config for the kicklab_site project.

The live sensor stream is a raw NDJSON socket (see ``manage.py serve``);
this entry point only carries the HTTP scoring API.
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'kicklab_site.settings')

application = get_asgi_application()
