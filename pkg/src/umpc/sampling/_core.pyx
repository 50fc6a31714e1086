# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled balanced sampler core.

RNG-lockstep mirror of ``_core_py.py``: both cores consume one PCG64
double per vertex draw and nothing else, so edge output is bit-identical
across backends for the same generator state. Keep the draw pattern in
sync with the Python reference when editing.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.stdint cimport int32_t, int64_t, uint64_t
from libcpp.unordered_set cimport unordered_set

import numpy as np

from numpy.random cimport bitgen_t

from umpc.errors import SamplingError


def balanced_sample_core(Py_ssize_t n, Py_ssize_t k, Py_ssize_t m,
                         Py_ssize_t cap, int64_t dup_budget,
                         int max_restarts, rng):
    """See ``_core_py.balanced_sample_core`` for the algorithm contract."""
    cdef const char* capsule_name = "BitGenerator"
    bit_generator = rng.bit_generator
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, capsule_name):
        raise ValueError("invalid BitGenerator capsule")
    cdef bitgen_t* bitgen = <bitgen_t*> PyCapsule_GetPointer(capsule, capsule_name)

    cdef int32_t[::1] slots = np.empty(n * cap, dtype=np.int32)
    cdef int64_t[::1] caps = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] chosen = np.empty(k, dtype=np.int64)
    cdef int64_t[::1] chosen_slots = np.empty(k, dtype=np.int64)
    edges_arr = np.empty((m, k), dtype=np.int64)
    cdef int64_t[:, ::1] edges = edges_arr

    cdef int64_t[::1] sorted_v = np.empty(k, dtype=np.int64)
    cdef Py_ssize_t n_slots, nonzero, edge_count, i, j, t, u, idx
    cdef int64_t v, key_v, tmp, dup_attempts, total_dup = 0
    cdef int restarts = 0
    cdef bint failed, repeat
    cdef bint use_packed = (k <= 4) and (n <= 0xFFFF)
    cdef unordered_set[uint64_t] key_set
    cdef uint64_t key
    cdef double d
    py_keys = None

    with bit_generator.lock:
        while True:
            for i in range(n):
                caps[i] = cap
                for j in range(cap):
                    slots[i * cap + j] = <int32_t> i
            n_slots = n * cap
            nonzero = n
            edge_count = 0
            dup_attempts = 0
            failed = False
            if use_packed:
                key_set.clear()
            else:
                py_keys = set()
            while edge_count < m:
                if nonzero < k:
                    failed = True
                    break
                j = 0
                while j < k:
                    d = bitgen.next_double(bitgen.state)
                    idx = <Py_ssize_t>(d * n_slots)
                    if idx >= n_slots:
                        idx = n_slots - 1
                    v = slots[idx]
                    repeat = False
                    for t in range(j):
                        if chosen[t] == v:
                            repeat = True
                            break
                    if repeat:
                        continue
                    chosen[j] = v
                    chosen_slots[j] = idx
                    j += 1
                for t in range(k):
                    sorted_v[t] = chosen[t]
                for t in range(1, k):
                    key_v = sorted_v[t]
                    u = t - 1
                    while u >= 0 and sorted_v[u] > key_v:
                        sorted_v[u + 1] = sorted_v[u]
                        u -= 1
                    sorted_v[u + 1] = key_v
                if use_packed:
                    key = 0
                    for t in range(k):
                        key = (key << 16) | (<uint64_t> sorted_v[t])
                    if key_set.count(key):
                        dup_attempts += 1
                        if dup_attempts > dup_budget:
                            failed = True
                            break
                        continue
                    key_set.insert(key)
                else:
                    tkey = tuple(sorted_v[t] for t in range(k))
                    if tkey in py_keys:
                        dup_attempts += 1
                        if dup_attempts > dup_budget:
                            failed = True
                            break
                        continue
                    py_keys.add(tkey)
                for t in range(k):
                    edges[edge_count, t] = sorted_v[t]
                edge_count += 1
                for t in range(1, k):
                    tmp = chosen_slots[t]
                    u = t - 1
                    while u >= 0 and chosen_slots[u] < tmp:
                        chosen_slots[u + 1] = chosen_slots[u]
                        u -= 1
                    chosen_slots[u + 1] = tmp
                for t in range(k):
                    idx = chosen_slots[t]
                    n_slots -= 1
                    slots[idx] = slots[n_slots]
                for t in range(k):
                    v = chosen[t]
                    caps[v] -= 1
                    if caps[v] == 0:
                        nonzero -= 1
            total_dup += dup_attempts
            if not failed:
                return edges_arr, restarts, total_dup
            restarts += 1
            if restarts > max_restarts:
                raise SamplingError(
                    f"balanced sampling exhausted {max_restarts} restarts "
                    f"(n={n}, k={k}, m={m}); retry with another seed"
                )
