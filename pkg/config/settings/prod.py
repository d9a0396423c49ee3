from .base import *  # noqa: F401,F403

DEBUG = False

# En servidores de cómputo compartidos el paralelismo SIEMPRE viene explícito.
if env("MOGP_PARALLELISM") is None:
    raise RuntimeError("MOGP_PARALLELISM no está configurada (prod).")
