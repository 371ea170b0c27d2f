"""Seed derivation for reproducible sessions.

A run is keyed by one 64-bit seed. Verifier and prover streams are derived
with fixed spawn keys so that an in-process prover and an external prover
process launched with the same seed consume identical random streams.
"""
from __future__ import annotations

import numpy as np

VERIFIER_KEY = 0
PROVER_KEY = 1


def generator(seed: int, *spawn_key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=tuple(spawn_key))
    return np.random.default_rng(ss)


def verifier_rng(seed: int) -> np.random.Generator:
    return generator(seed, VERIFIER_KEY)


def prover_rng(seed: int) -> np.random.Generator:
    return generator(seed, PROVER_KEY)
