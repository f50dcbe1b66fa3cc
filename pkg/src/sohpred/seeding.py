"""Deterministic RNG derivation.

Every random decision in the package flows from one root seed.  Components
derive their own generators from (seed, labels); the same labels always
yield the same stream, independent of call order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_key(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(seed: int, *labels: object) -> np.random.Generator:
    """Return a Generator keyed by the root seed and a label path.

    Labels may be strings or integers; integers are used directly as
    spawn keys so per-index streams (seed, "fitness", i) stay cheap.
    """
    keys = tuple(
        lab if isinstance(lab, int) else _label_key(str(lab)) for lab in labels
    )
    seq = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=keys)
    return np.random.default_rng(seq)
