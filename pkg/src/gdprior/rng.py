"""Deterministic RNG stream derivation.

Every sampler takes a single integer seed and derives independent
substreams from it by fixed channel offsets, so that e.g. swapping the
base measure in a paired experiment cannot perturb the stick-fraction
draws.  Experiment drivers derive child seeds from stable string labels,
so adding an experiment to a config never shifts the randomness of the
others.
"""

import hashlib

import numpy as np

WEIGHTS_CHANNEL = 0
ATOMS_CHANNEL = 1
MATCH_CHANNEL = 2


def stream(seed, channel=WEIGHTS_CHANNEL):
    """Generator for the given channel of a root seed."""
    seq = np.random.SeedSequence(entropy=(int(seed), int(channel)))
    return np.random.default_rng(seq)


def weight_and_atom_streams(seed):
    return stream(seed, WEIGHTS_CHANNEL), stream(seed, ATOMS_CHANNEL)


def child_seed(seed, label):
    """Stable 63-bit child seed for a named sub-experiment."""
    digest = hashlib.sha256(f"{int(seed)}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1
