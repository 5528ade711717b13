"""Cache directory resolution and atomic writes.

Default location is ./.sievekit-cache, overridable by the SIEVEKIT_CACHE
environment variable or an explicit path argument.
"""

from __future__ import annotations

import os

ENV_VAR = "SIEVEKIT_CACHE"
DEFAULT_DIR = ".sievekit-cache"


def resolve_cache_dir(explicit: str | None = None) -> str:
    if explicit:
        return explicit
    env = os.environ.get(ENV_VAR, "").strip()
    if env:
        return env
    return DEFAULT_DIR


def step_tag(step: float) -> str:
    """Filesystem-safe exact encoding of a step size."""
    return float(step).hex().replace("0x", "").replace(".", "_")
