"""Hypergraph edge-set samplers for incomplete U-statistics.

Three strategies over the k-subsets of [n]:

* :func:`balanced_samp` draws edges proportionally to remaining per-vertex
  capacity ceil(k*m/n), which caps the maximum degree.
* :func:`uniform_without_replacement` draws a uniform size-m subset.
* :func:`bernoulli_samp` includes each k-subset independently with
  probability q (realized as a Binomial count followed by a uniform
  size-conditioned subset, which is the same process).

The balanced sampler's inner loop runs in a compiled extension when
available; set ``UMPC_PURE_PYTHON=1`` to force the Python mirror. Both
give bit-identical edge sets for the same seed.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from umpc.errors import ScaleError, UsageError

if os.environ.get("UMPC_PURE_PYTHON", "") not in ("", "0"):
    from umpc.sampling import _core_py as _backend

    _BACKEND_NAME = "python"
else:
    try:
        from umpc.sampling import _core as _backend  # type: ignore[no-redef]

        _BACKEND_NAME = "compiled"
    except ImportError:
        from umpc.sampling import _core_py as _backend  # type: ignore[no-redef]

        _BACKEND_NAME = "python"

__all__ = [
    "Hypergraph",
    "DegreeProfile",
    "degree_profile",
    "balanced_samp",
    "uniform_without_replacement",
    "bernoulli_samp",
    "backend_name",
]

_MAX_SLOTS = 50_000_000
_MAX_ENUM = 5_000_000


def backend_name() -> str:
    """Which balanced-sampler core is active: 'compiled' or 'python'."""
    return _BACKEND_NAME


@dataclass(frozen=True)
class Hypergraph:
    """A set of m distinct k-edges over vertices 0..n-1.

    ``edges`` is an (m, k) int64 array; each row is strictly increasing.
    """

    n: int
    k: int
    edges: np.ndarray

    def __post_init__(self) -> None:
        if self.k < 2 or self.n < self.k:
            raise UsageError(f"need 2 <= k <= n, got k={self.k}, n={self.n}")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, self.k)
        object.__setattr__(self, "edges", e)
        if e.shape[0]:
            if e.min() < 0 or e.max() >= self.n:
                raise UsageError("edge vertex outside [0, n)")
            if np.any(np.diff(e, axis=1) <= 0):
                raise UsageError("edge rows must be strictly increasing")
            if np.unique(e, axis=0).shape[0] != e.shape[0]:
                raise UsageError("duplicate edges")

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def as_tuples(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.edges]


@dataclass(frozen=True)
class DegreeProfile:
    degrees: np.ndarray  # per-vertex edge counts
    max_degree: int


def degree_profile(g: Hypergraph) -> DegreeProfile:
    """Per-vertex incidence counts and their maximum (0 for an empty E)."""
    deg = np.bincount(g.edges.ravel(), minlength=g.n)
    return DegreeProfile(degrees=deg, max_degree=int(deg.max()) if g.n else 0)


def _check_common(k: int, n: int) -> int:
    if k < 2 or n < k:
        raise UsageError(f"need 2 <= k <= n, got k={k}, n={n}")
    return math.comb(n, k)


def balanced_samp(m: int, k: int, n: int, rng: np.random.Generator) -> Hypergraph:
    """Draw m distinct k-edges with max degree at most ceil(k*m/n).

    Vertices are drawn without replacement inside an edge, proportionally
    to remaining capacity; exhausted vertices are never selected again.
    Raises :class:`SamplingError` after 64 failed restarts (retryable).
    """
    total = _check_common(k, n)
    if m < 1:
        raise UsageError(f"need m >= 1, got m={m}")
    if m > total:
        raise UsageError(f"m={m} exceeds C({n},{k})={total}")
    cap = -(-(k * m) // n)
    if n * cap > _MAX_SLOTS:
        raise ScaleError(f"capacity table n*ceil(km/n)={n * cap} exceeds the {_MAX_SLOTS} guard")
    edges, _restarts, _dups = _backend.balanced_sample_core(n, k, m, cap, 100 * m, 64, rng)
    return Hypergraph(n=n, k=k, edges=edges)


def _codes_full(n: int, k: int) -> np.ndarray:
    if k == 2:
        i, j = np.triu_indices(n, 1)
        return np.stack([i, j], axis=1).astype(np.int64)
    from itertools import combinations

    return np.array(list(combinations(range(n), k)), dtype=np.int64).reshape(-1, k)


def _pack_rows(rows: np.ndarray, n: int) -> np.ndarray:
    key = rows[:, 0].astype(np.uint64)
    for j in range(1, rows.shape[1]):
        key = key * np.uint64(n) + rows[:, j].astype(np.uint64)
    return key


def uniform_without_replacement(m: int, k: int, n: int, rng: np.random.Generator) -> Hypergraph:
    """Uniform size-m subset of all C(n,k) edges."""
    total = _check_common(k, n)
    if m < 0 or m > total:
        raise UsageError(f"need 0 <= m <= C({n},{k})={total}, got m={m}")
    if m == 0:
        return Hypergraph(n=n, k=k, edges=np.empty((0, k), dtype=np.int64))
    if 5 * m >= 2 * total:
        # dense regime: enumerate and subsample (rejection would stall near m = total)
        if total > _MAX_ENUM:
            raise ScaleError(f"C({n},{k})={total} exceeds the {_MAX_ENUM} enumeration guard")
        all_edges = _codes_full(n, k)
        pick = rng.choice(total, size=m, replace=False)
        chosen = all_edges[np.sort(pick)]
        return Hypergraph(n=n, k=k, edges=chosen)
    # sparse regime: batched rejection of iid k-draws, keeping first occurrences
    if n ** k >= 2 ** 63:
        raise ScaleError(f"n^k too large to pack edge keys (n={n}, k={k})")
    kept_keys = np.empty(0, dtype=np.uint64)
    kept_rows: list[np.ndarray] = []
    count = 0
    while count < m:
        batch = max(64, int((m - count) * 1.4))
        draw = rng.integers(0, n, size=(batch, k), dtype=np.int64)
        draw.sort(axis=1)
        draw = draw[np.all(np.diff(draw, axis=1) > 0, axis=1)]
        if draw.shape[0] == 0:
            continue
        keys = _pack_rows(draw, n)
        merged = np.concatenate([kept_keys, keys])
        _, first_idx = np.unique(merged, return_index=True)
        new_idx = np.sort(first_idx[first_idx >= kept_keys.shape[0]]) - kept_keys.shape[0]
        new_idx = new_idx[: m - count]
        if new_idx.shape[0]:
            kept_rows.append(draw[new_idx])
            kept_keys = np.concatenate([kept_keys, keys[new_idx]])
            count += int(new_idx.shape[0])
    return Hypergraph(n=n, k=k, edges=np.concatenate(kept_rows, axis=0))


def bernoulli_samp(q: float, k: int, n: int, rng: np.random.Generator) -> Hypergraph:
    """Include each k-subset independently with probability q."""
    total = _check_common(k, n)
    if not 0.0 <= q <= 1.0:
        raise UsageError(f"need 0 <= q <= 1, got q={q}")
    count = int(rng.binomial(total, q))
    return uniform_without_replacement(count, k, n, rng)
