# semantic_variants/tracing.py
from __future__ import annotations

import logging
from collections import Counter
from typing import Iterable

trace_logger = logging.getLogger("semantic_variants.trace")


def histogram(distances: Iterable[int]) -> str:
    counts = Counter(int(d) for d in distances)
    return ",".join(f"{value}:{counts[value]}" for value in sorted(counts))


def trace_generation(generation: int, pivot_uid: int, variant: str, distances: Iterable[int]) -> str:
    """
    Una línea por generación:
        gen=<g> pivot=<uid> variant=<v> hist=<valor:conteo,...>
    Devuelve la línea (útil en tests).
    """
    line = f"gen={generation} pivot={pivot_uid} variant={variant} hist={histogram(distances)}"
    trace_logger.info(line)
    return line
