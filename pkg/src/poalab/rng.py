"""Counter-based random streams.

Every random quantity in the package is drawn from a stream keyed by
``(seed, *labels)``. Streams use the Philox counter-based generator, so a
chunk of draws depends only on its key and never on the order in which
workers consume chunks.
"""

from __future__ import annotations

import os
import zlib

import numpy as np

DEFAULT_SEED = 20240601
SEED_ENV = "POA_LAB_SEED"

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def resolve_seed(seed: int | None) -> int:
    """Return ``seed``, else the ``POA_LAB_SEED`` variable, else the default."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        return int(env)
    return DEFAULT_SEED


def _label_key(label) -> int:
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError("stream labels must be non-negative")
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


def stream(seed: int, *labels) -> np.random.Generator:
    """Philox generator keyed by ``seed`` and any ints or strings."""
    entropy = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF]
    entropy += [_label_key(lab) for lab in labels]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = (z + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
    return z ^ (z >> np.uint64(31))


def counter_uniform(seed: int, *counters) -> np.ndarray:
    """Stateless uniforms in [0, 1) indexed by broadcastable integer counters.

    Used for per-(draw, item) tie-breaking where a value must be
    reproducible from its coordinates alone.
    """
    with np.errstate(over="ignore"):
        h = _splitmix64(np.asarray(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)))
        for c in counters:
            c = np.asarray(c).astype(np.uint64)
            h = _splitmix64(h ^ c)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
