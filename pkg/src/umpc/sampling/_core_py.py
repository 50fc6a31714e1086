"""Pure-Python balanced sampler core.

Mirror of the compiled extension in ``_core.pyx``. Both cores consume
randomness exclusively as sequential doubles from the generator's bit
stream (one 64-bit PCG64 output per draw), so for a given seed they
produce bit-identical edge sequences. Any change to the draw pattern
here must be replicated in the .pyx file.
"""

from __future__ import annotations

import numpy as np

from umpc.errors import SamplingError


def balanced_sample_core(n, k, m, cap, dup_budget, max_restarts, rng):
    """Draw m capacity-balanced k-edges; returns (edges, restarts, dup_attempts).

    Every vertex starts with ``cap`` capacity units. Edge vertices are
    drawn proportionally to remaining capacity via a slot array (one slot
    per capacity unit); a draw landing on a vertex already in the edge is
    redrawn, which realizes weighted sampling without replacement within
    the edge. Accepted edges decrement their vertices' capacities.
    Duplicate edges are rejected; ``dup_budget`` rejections trigger a full
    restart, as does the live-vertex count dropping below k. More than
    ``max_restarts`` restarts raise :class:`SamplingError`.
    """
    next_double = rng.random
    restarts = 0
    total_dup = 0
    while True:
        caps = [cap] * n
        slots = []
        for v in range(n):
            slots.extend([v] * cap)
        n_slots = n * cap
        nonzero = n
        edges = []
        seen = set()
        dup_attempts = 0
        failed = False
        while len(edges) < m:
            if nonzero < k:
                failed = True
                break
            chosen = []
            chosen_slots = []
            while len(chosen) < k:
                idx = int(next_double() * n_slots)
                if idx >= n_slots:
                    idx = n_slots - 1
                v = slots[idx]
                if v in chosen:
                    continue
                chosen.append(v)
                chosen_slots.append(idx)
            key = tuple(sorted(chosen))
            if key in seen:
                dup_attempts += 1
                if dup_attempts > dup_budget:
                    failed = True
                    break
                continue
            seen.add(key)
            edges.append(key)
            for idx in sorted(chosen_slots, reverse=True):
                n_slots -= 1
                slots[idx] = slots[n_slots]
            for v in chosen:
                caps[v] -= 1
                if caps[v] == 0:
                    nonzero -= 1
        total_dup += dup_attempts
        if not failed:
            arr = np.array(edges, dtype=np.int64).reshape(m, k)
            return arr, restarts, total_dup
        restarts += 1
        if restarts > max_restarts:
            raise SamplingError(
                f"balanced sampling exhausted {max_restarts} restarts "
                f"(n={n}, k={k}, m={m}); retry with another seed"
            )
