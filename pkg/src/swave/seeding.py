"""Stable derived seeds.

Python's hash() is salted per process, so task seeds are derived from a
sha256 digest instead: identical (master, descriptor) pairs give identical
64-bit seeds on any machine, and insertion order of tasks cannot matter.
"""
from __future__ import annotations

import hashlib


def derive_seed(master: int, descriptor: str) -> int:
    """64-bit seed from a master seed and a task descriptor string."""
    digest = hashlib.sha256(f"{master}|{descriptor}".encode()).digest()
    return int.from_bytes(digest[:8], "little")
