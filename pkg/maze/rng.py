"""
Seeded, splittable random streams.

Every random decision in the toolkit draws from a NumPy PCG64 generator whose
SeedSequence is keyed by the maze seed plus a fixed text label, so independent
concerns (endpoints, walls, traps, tile jitter) never shift each other.
"""
import zlib

import numpy as np

UINT64_MASK = (1 << 64) - 1


def label_key(label: str) -> int:
    """Stable 32-bit key for a stream label."""
    return zlib.crc32(label.encode("utf-8"))


def substream(seed: int, label: str, *extra: int) -> np.random.Generator:
    """
    Derive an independent generator for one concern of one seed.

    Args:
        seed: 64-bit unsigned seed
        label: Fixed stream name (e.g. "walls")
        extra: Additional non-negative integers folded into the key (row, col, ...)

    Returns:
        numpy Generator backed by PCG64
    """
    sequence = np.random.SeedSequence(
        entropy=seed & UINT64_MASK,
        spawn_key=(label_key(label), *extra),
    )
    return np.random.Generator(np.random.PCG64(sequence))


def derive_seed(master_seed: int, label: str, *extra: int) -> int:
    """64-bit child seed for a named slot under a master seed."""
    sequence = np.random.SeedSequence(
        entropy=master_seed & UINT64_MASK,
        spawn_key=(label_key(label), *extra),
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
