"""Hot loops: Metropolis sweeps, greedy descent, kicks, energy recomputes.

All kernels operate on a block of replicas at once (spins as a B x n int8
matrix, energies as int64) against the graph's CSR arrays. Randomness
inside kernels comes from the same splitmix64 streams as ``pamcut.rng``,
keyed per (seed, step, replica, purpose), so results are independent of
how replicas are split into blocks or threads. Kernels are nogil and may
run concurrently on disjoint blocks.

Acceptance thresholds are read from a precomputed ``exp(-beta * d)`` table
indexed by the (integer) energy increase d; this keeps the accept decision
a pure integer-indexed comparison, identical on every code path.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4B5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_INV53 = 2.0**-53

# purpose tags, mirrored from pamcut.rng
_INIT = _U64(0)
_SWEEP = _U64(1)
_KICK = _U64(2)


@njit(cache=True, inline="always")
def _finalize(z):
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


@njit(cache=True, inline="always")
def _stream_key(seed, step, replica, purpose):
    x = _finalize(seed + _GAMMA * (step + _U64(1)))
    x = _finalize(x + _GAMMA * (replica + _U64(1)))
    x = _finalize(x + _GAMMA * (purpose + _U64(1)))
    return x


@njit(cache=True, inline="always")
def _u64_at(key, index):
    return _finalize(key + _GAMMA * (index + _U64(1)))


@njit(cache=True, inline="always")
def _uniform_at(key, index):
    return (_u64_at(key, index) >> _U64(11)) * _INV53


@njit(cache=True, nogil=True)
def sweep_block(indptr, nbr, w, spins, energies, table, uniforms, accepts):
    """One Metropolis sweep with caller-supplied uniforms (one per proposal).

    Nodes are visited in index order; proposal i of replica b consumes
    uniforms[b, i] (positionally, whether or not the threshold is needed).
    """
    B, n = spins.shape
    for b in range(B):
        acc = 0
        for i in range(n):
            local = np.int64(0)
            for k in range(indptr[i], indptr[i + 1]):
                local += w[k] * spins[b, nbr[k]]
            dh = -2 * spins[b, i] * local
            if dh <= 0 or uniforms[b, i] < table[dh]:
                spins[b, i] = -spins[b, i]
                energies[b] += dh
                acc += 1
        accepts[b] = acc


@njit(cache=True, nogil=True)
def sweep_block_keyed(indptr, nbr, w, spins, energies, table, seed, step, replica_ids, n_sweeps, accepts):
    """n_sweeps Metropolis sweeps drawing from per-replica keyed streams.

    The uniform for sweep t, node i sits at stream position t*n + i, so the
    outcome depends only on (seed, step, replica id), never on block shape.
    accepts[b] returns the total accepted count over all sweeps.
    """
    B, n = spins.shape
    for b in range(B):
        key = _stream_key(seed, step, _U64(replica_ids[b]), _SWEEP)
        acc = 0
        for t in range(n_sweeps):
            base = _U64(t * n)
            for i in range(n):
                local = np.int64(0)
                for k in range(indptr[i], indptr[i + 1]):
                    local += w[k] * spins[b, nbr[k]]
                dh = -2 * spins[b, i] * local
                if dh <= 0 or _uniform_at(key, base + _U64(i)) < table[dh]:
                    spins[b, i] = -spins[b, i]
                    energies[b] += dh
                    acc += 1
        accepts[b] = acc


@njit(cache=True, nogil=True)
def descend_block(indptr, nbr, w, spins, energies):
    """Greedy descent: sweep in index order flipping any dh < 0 spin,
    repeat until a full pass changes nothing. 1-flip-optimal on exit."""
    B, n = spins.shape
    for b in range(B):
        changed = True
        while changed:
            changed = False
            for i in range(n):
                local = np.int64(0)
                for k in range(indptr[i], indptr[i + 1]):
                    local += w[k] * spins[b, nbr[k]]
                dh = -2 * spins[b, i] * local
                if dh < 0:
                    spins[b, i] = -spins[b, i]
                    energies[b] += dh
                    changed = True


@njit(cache=True, nogil=True)
def energies_block(edge_u, edge_v, edge_w, spins, out):
    """Exact from-scratch Ising energies, one per replica row."""
    B = spins.shape[0]
    m = edge_u.shape[0]
    for b in range(B):
        e = np.int64(0)
        for j in range(m):
            e += edge_w[j] * spins[b, edge_u[j]] * spins[b, edge_v[j]]
        out[b] = e


@njit(cache=True, nogil=True)
def init_spins_block_keyed(seed, replica_ids, spins):
    """Fill each replica row with fair coin spins from its init stream."""
    B, n = spins.shape
    for b in range(B):
        key = _stream_key(seed, _U64(0), _U64(replica_ids[b]), _INIT)
        for i in range(n):
            bit = _u64_at(key, _U64(i)) & _U64(1)
            spins[b, i] = np.int8(2 * np.int8(bit) - 1)


@njit(cache=True, nogil=True)
def kick_flip_block_keyed(edge_u, edge_v, edge_w, spins, energies, seed, step, replica_ids, n_flips):
    """Flip n_flips distinct uniformly chosen spins per replica.

    Subset selection is a partial Fisher-Yates shuffle driven by the
    replica's kick stream; energies are recomputed from scratch afterwards
    (subset flips interact, incremental deltas would need ordering care).
    """
    B, n = spins.shape
    m = edge_u.shape[0]
    for b in range(B):
        if n_flips > 0:
            key = _stream_key(seed, step, _U64(replica_ids[b]), _KICK)
            pool = np.arange(n, dtype=np.int32)
            for j in range(n_flips):
                span = _U64(n - j)
                r = j + np.int64(_u64_at(key, _U64(j)) % span)
                tmp = pool[j]
                pool[j] = pool[r]
                pool[r] = tmp
                spins[b, pool[j]] = -spins[b, pool[j]]
        e = np.int64(0)
        for j in range(m):
            e += edge_w[j] * spins[b, edge_u[j]] * spins[b, edge_v[j]]
        energies[b] = e
