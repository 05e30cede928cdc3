"""Run-time defaults, overridable through environment variables."""

from __future__ import annotations

import os

DEFAULT_BUDGET = 2 * 10 ** 9
DEFAULT_DENSE_CELLS = 2 * 10 ** 8

ENV_VARS = {
    "budget": "DIVLAB_BUDGET",
    "dense_cells": "DIVLAB_DENSE_CELLS",
    "threads": "DIVLAB_THREADS",
    "precision_bits": "DIVLAB_PRECISION_BITS",
    "prime_cutoff": "DIVLAB_PRIME_CUTOFF",
}


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    except ValueError as exc:
        raise ValueError(f"environment variable {name}={raw!r} is not an integer") from exc


def budget(value: int | None = None) -> int:
    return value if value is not None else _env_int(ENV_VARS["budget"], DEFAULT_BUDGET)


def dense_cells(value: int | None = None) -> int:
    return value if value is not None else _env_int(ENV_VARS["dense_cells"], DEFAULT_DENSE_CELLS)


def threads(value: int | None = None) -> int:
    return max(1, value if value is not None else _env_int(ENV_VARS["threads"], 1))


def precision_bits(value: int | None = None) -> int:
    from .intervals import DEFAULT_PRECISION
    return value if value is not None else _env_int(ENV_VARS["precision_bits"], DEFAULT_PRECISION)


def prime_cutoff(value: int | None = None) -> int:
    from .constants import DEFAULT_PRIME_CUTOFF
    return value if value is not None else _env_int(ENV_VARS["prime_cutoff"], DEFAULT_PRIME_CUTOFF)
