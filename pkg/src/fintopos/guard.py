"""Size guard for materialized constructions.

Every operation that could blow up (hom-set products, comma categories,
copowers) checks its raw size against a configurable bound before
materializing anything. The bound defaults to 10**6 elements and can be
overridden through the ``SOA_TOPOS_GUARD`` environment variable.
"""
from __future__ import annotations

import os

from .errors import SizeExceeded

DEFAULT_GUARD = 10**6

ENV_VAR = "SOA_TOPOS_GUARD"


def size_guard() -> int:
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return DEFAULT_GUARD
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_GUARD


def check_size(n: int, what: str) -> None:
    """Raise SizeExceeded if ``n`` elements of ``what`` exceed the guard."""
    bound = size_guard()
    if n > bound:
        raise SizeExceeded(f"{what}: {n} elements exceed guard {bound}")
