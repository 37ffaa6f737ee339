"""Hash-based quenched Bernoulli field.

Every reaction coin is a pure function of (seed, reaction identity).  The
identity of a word enters through a chained 64-bit hash that consumes atoms
from the last position to the first, so that the hash state of a suffix of
length k+1 is one chain step away from the state of the suffix of length k.
The level-by-level builders exploit this to evaluate all suffix coins of a
child word in O(level) work.

Scalar (python int) and vectorized (numpy uint64) implementations share the
same constants and must produce bit-identical values; a dedicated test pins
this down.
"""

import numpy as np

MASK64 = (1 << 64) - 1
PHI64 = 0x9E3779B97F4A7C15
CHAIN_INIT = 0x8C2F9D4B1E6A3571
TAG_ANABOLIC = 0xA5A5A5A5_11111111
TAG_CATABOLIC = 0xC3C3C3C3_22222222

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """Finalizing 64-bit mixer (splitmix64 finalizer)."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    return x ^ (x >> 31)


def chain_step(state: int, atom: int) -> int:
    return mix64(state ^ (((atom + 1) * PHI64) & MASK64))


def word_state(atoms) -> int:
    """Chain hash of a word, consuming atoms back to front."""
    state = CHAIN_INIT
    for a in reversed(atoms):
        state = chain_step(state, a)
    return state


def uniform_from(key: int) -> float:
    """Map a 64-bit key to a uniform in [0, 1) using the top 53 bits."""
    return (key >> 11) * (2.0 ** -53)


def seed_mix(seed: int, tag: int) -> int:
    return mix64((seed & MASK64) ^ tag)


def coin_key(state: int, partner: int, seedmix: int) -> int:
    """Combine a word-chain state with a partner hash and the seed hash."""
    return mix64(state ^ ((partner * _M2) & MASK64) ^ seedmix)


# --- vectorized counterparts (numpy uint64 arrays, silent wraparound) ---

_NP_M1 = np.uint64(_M1)
_NP_M2 = np.uint64(_M2)
_NP_PHI = np.uint64(PHI64)


def np_mix64(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= _NP_M1
    x ^= x >> np.uint64(27)
    x *= _NP_M2
    x ^= x >> np.uint64(31)
    return x


def np_chain_step(state: np.ndarray, atoms) -> np.ndarray:
    inc = (np.asarray(atoms, dtype=np.uint64) + np.uint64(1)) * _NP_PHI
    return np_mix64(state ^ inc)


def np_coin_key(state: np.ndarray, partner: int, seedmix: int) -> np.ndarray:
    part = np.uint64((partner * _M2) & MASK64)
    return np_mix64(state ^ part ^ np.uint64(seedmix))


def np_uniform(key: np.ndarray) -> np.ndarray:
    return (key >> np.uint64(11)) * (2.0 ** -53)
