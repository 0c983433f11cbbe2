"""Derivation of per-module random substreams from a single run seed.

Every stochastic component draws from a stream derived from the top-level
run seed and a label tuple, so a run is reproducible end to end and the
streams of different components never alias:

    ("dataset",)                synthetic data generation
    ("member", i)               init of ensemble member / model i
    ("fit", k)                  the refit after stream item k; member i of that
                                refit shuffles with ("member", i) of the result
    ("decide",)                 buffer strategy coin flips and random evictions
    ("predict", c)              stochastic forward passes of prediction call c
    ("search",)                 hyperparameter candidate draws
    ("sweep", j)                run seed of sweep repeat j
"""

import hashlib

import numpy as np


def derive_seed(seed: int, *labels) -> int:
    """Map (seed, labels) to a 64-bit child seed via a keyed hash."""
    h = hashlib.blake2s(digest_size=8)
    h.update(repr((int(seed),) + labels).encode())
    return int.from_bytes(h.digest(), "little")


def spawn_rng(seed: int, *labels) -> np.random.Generator:
    """Generator for the substream named by `labels` under `seed`."""
    return np.random.default_rng(derive_seed(seed, *labels))
