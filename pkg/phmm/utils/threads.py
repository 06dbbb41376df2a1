from __future__ import annotations

import os
from typing import Optional

THREADS_ENV = "PHMM_THREADS"


def worker_cap() -> Optional[int]:
    """The worker cap from $PHMM_THREADS, or None if unset or invalid"""
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return None
    try:
        cap = int(value)
    except ValueError:
        return None
    return cap if cap >= 1 else None


def resolve_workers(requested: int) -> int:
    """Clamp a requested worker count to [1, $PHMM_THREADS]"""
    requested = max(1, int(requested))
    cap = worker_cap()
    return min(requested, cap) if cap is not None else requested
