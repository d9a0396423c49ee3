# experiment/apps.py
from __future__ import annotations

from django.apps import AppConfig


class ExperimentAppConfig(AppConfig):
    name = "experiment"
    verbose_name = "Experimentos"
