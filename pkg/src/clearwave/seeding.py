"""Deterministic seed derivation.

Every random decision in the pipeline is a pure function of explicit seeds.
Sub-seeds are derived by hashing a tuple of labels/ints so that independent
consumers (corpus synthesis, mixing, model init, batch order) never share or
collide on RNG streams.
"""

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Derive a stable 63-bit seed from a tuple of ints/strings."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(str(p).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little") & 0x7FFFFFFFFFFFFFFF


def rng_for(*parts) -> np.random.Generator:
    """NumPy generator keyed by a derived seed."""
    return np.random.default_rng(derive_seed(*parts))
