"""
Seed derivation and RNG construction shared by simulators, splits and folds.
"""
import hashlib

import numpy as np


def derive_seed(master_seed: int, *keys: object) -> int:
    """
    64-bit child seed from a master seed and any number of keys (experiment
    name, class index, replicate index...). Adding new keys elsewhere never
    changes existing streams.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master_seed)).encode())
    for key in keys:
        h.update(b"\x1f")
        h.update(str(key).encode())
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed)))
