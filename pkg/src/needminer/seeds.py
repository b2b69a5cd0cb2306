"""Deterministic seed derivation.

All randomness in the pipeline flows from explicit integer seeds. To
give every component (split, sampling, fit, repetition, tree) its own
independent stream, seeds are derived by hashing the parent seed with
a role label. The hash is stable across processes and machines, so a
run is reproducible anywhere from its configuration alone.
"""
from __future__ import annotations

import hashlib


def derive_seed(*parts: object) -> int:
    """Stable 64-bit mix of the given parts (ints, strings, ...)."""
    data = "|".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")
