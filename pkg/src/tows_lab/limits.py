"""Desk-scale enumeration bounds, overridable via TOWS_SIZE_LIMIT."""

import os

from .errors import SizeBoundExceeded


def size_limit(default: int) -> int:
    raw = os.environ.get("TOWS_SIZE_LIMIT")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def guard(value: int, default: int, what: str):
    bound = size_limit(default)
    if value > bound:
        raise SizeBoundExceeded(f"{what}: size {value} exceeds bound {bound}")
