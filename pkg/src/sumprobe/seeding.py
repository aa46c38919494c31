"""Named seed derivation so every stage draws from one master seed."""

from __future__ import annotations

import hashlib
import random


def derive_seed(master: int, *parts: object) -> int:
    """Stable 64-bit seed from a master seed and a derivation path.

    Uses sha256 rather than hash() so results do not depend on
    PYTHONHASHSEED or the process.
    """
    key = ":".join([str(master)] + [str(p) for p in parts])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(master: int, *parts: object) -> random.Random:
    return random.Random(derive_seed(master, *parts))
