from django.apps import AppConfig


class SemanticVariantsConfig(AppConfig):
    name = "semantic_variants"
