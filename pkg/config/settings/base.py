from __future__ import annotations

import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent.parent


def env(name: str, default: str | None = None) -> str | None:
    return os.getenv(name, default)

def env_required(name: str) -> str:
    v = os.getenv(name)
    if not v or not v.strip():
        raise RuntimeError(f"Missing required env var: {name}")
    return v.strip()

def env_bool(name: str, default: bool = False) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ("1", "true", "t", "yes", "y", "on")

def env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw.strip())
    except ValueError:
        raise RuntimeError(f"Env var {name} must be an integer, got {raw!r}")

def env_str_or_default(name: str, default: str) -> str:
    raw = os.getenv(name)
    if raw is None:
        return default
    raw = raw.strip()
    return raw if raw else default


try:
    from dotenv import load_dotenv
    load_dotenv(BASE_DIR / ".env")
except Exception:
    pass


SECRET_KEY = env_required("DJANGO_SECRET_KEY")
DEBUG = False

ALLOWED_HOSTS: list[str] = []

# Proyecto solo de línea de comandos: sin admin, sin sesiones, sin urls.
INSTALLED_APPS = [
    "gp_core.apps.GpCoreConfig",
    "semantics.apps.SemanticsConfig",
    "emo.apps.EmoConfig",
    "semantic_variants.apps.SemanticVariantsConfig",
    "datasets.apps.DatasetsConfig",
    "metrics.apps.MetricsConfig",
    "experiment.apps.ExperimentAppConfig",
]

MIDDLEWARE: list[str] = []

DATABASES: dict = {}

USE_I18N = False


# -----------------------
# MOGP (experimentos)
# -----------------------
MOGP_DATASETS_DIR = Path(env_str_or_default("MOGP_DATASETS_DIR", str(BASE_DIR / "var" / "datasets")))
MOGP_RESULTS_DIR = Path(env_str_or_default("MOGP_RESULTS_DIR", str(BASE_DIR / "var" / "results")))

MOGP_PARALLELISM = max(1, env_int("MOGP_PARALLELISM", 1))
MOGP_BASE_SEED = env_int("MOGP_BASE_SEED", 20240101)
MOGP_SPLIT_SEED = env_int("MOGP_SPLIT_SEED", 7)

MOGP_TRACE_SEMANTICS = env_bool("MOGP_TRACE_SEMANTICS", False)
MOGP_LOG_LEVEL = env_str_or_default("MOGP_LOG_LEVEL", "INFO").upper()


# -----------------------
# Logging
# -----------------------
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
        "trace": {"format": "%(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
        "trace": {"class": "logging.StreamHandler", "formatter": "trace"},
    },
    "loggers": {
        app: {"handlers": ["console"], "level": MOGP_LOG_LEVEL, "propagate": False}
        for app in ("gp_core", "semantics", "emo", "semantic_variants", "datasets", "metrics", "experiment")
    }
    | {
        # una línea por generación; se enciende con MOGP_TRACE_SEMANTICS o run --trace
        "semantic_variants.trace": {"handlers": ["trace"], "level": "INFO", "propagate": False},
    },
}
