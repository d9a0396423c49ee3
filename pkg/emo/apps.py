from django.apps import AppConfig


class EmoConfig(AppConfig):
    name = "emo"
    verbose_name = "Pareto / EMO"
