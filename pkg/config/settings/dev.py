import os

os.environ.setdefault("DJANGO_SECRET_KEY", "dev-only-not-secret")

from .base import *  # noqa: E402,F401,F403

DEBUG = True
