"""Counter-based random streams for the annealing engine.

Every random decision in the engine is drawn from a stateless splitmix64
stream keyed by (seed, step, replica, purpose). Streams never share state,
so the result of a run cannot depend on how replicas are partitioned
across workers. The numba kernels re-implement the same arithmetic in
uint64; ``tests/test_rng.py`` pins the two implementations against each
other bit for bit.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

# purpose tags for stream keying
INIT = 0
SWEEP = 1
KICK = 2
RESAMPLE = 3

# pseudo replica index for population-level draws (resampling offset)
POPULATION = (1 << 24) - 1


def finalize(z: int) -> int:
    """splitmix64 finalizer (Stafford mix13)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, step: int, replica: int, purpose: int) -> int:
    """Derive the 64-bit key of the (seed, step, replica, purpose) stream."""
    x = seed & MASK64
    x = finalize(x + GAMMA * (step + 1))
    x = finalize(x + GAMMA * (replica + 1))
    x = finalize(x + GAMMA * (purpose + 1))
    return x


def u64_at(key: int, index: int) -> int:
    """index-th raw 64-bit draw of the stream with the given key."""
    return finalize(key + GAMMA * (index + 1))


def uniform_at(key: int, index: int) -> float:
    """index-th uniform double in [0, 1), 53-bit resolution."""
    return (u64_at(key, index) >> 11) * 2.0**-53
