from django.apps import AppConfig


class GpCoreConfig(AppConfig):
    name = "gp_core"
    verbose_name = "GP trees"
