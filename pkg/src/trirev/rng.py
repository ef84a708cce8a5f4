"""Counter-based random streams keyed by (seed, path...)."""
import hashlib

import numpy as np


def _key_int(k) -> int:
    if isinstance(k, (int, np.integer)):
        return int(k) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.blake2b(str(k).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed, *path) -> np.random.Generator:
    """Independent Philox generator for the item addressed by ``path``.

    The same (seed, path) always yields the same stream, regardless of the order
    in which items are generated.
    """
    entropy = [_key_int(seed)] + [_key_int(k) for k in path]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def random_vector(rng: np.random.Generator, dim: int, real: bool) -> np.ndarray:
    v = rng.standard_normal(dim).astype(np.complex128)
    if not real:
        v += 1j * rng.standard_normal(dim)
    return v


def tie_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63, dtype=np.int64))
