"""Symmetric degree-k kernels and their fixed-point evaluation.

Built-ins (all degree 2): the Kendall concordance sign product, the Gini
absolute difference, the duplicate indicator, the AUC ranking indicator,
and the clustering-agreement indicator. Each kernel carries its
sensitivity bound delta_f, output range, and the per-evaluation
communication constants charged by the protocol's cost ledger (the
secure realization itself is out of scope, so the constants are
configurable defaults).

Inputs are per-party tuples of one or two scalars; multi-component
kernels receive rows of shape ``(components,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from umpc.errors import DomainError, UsageError
from umpc.fixedpoint import FpConfig, FpValue, encode

__all__ = [
    "KernelSpec",
    "get_kernel",
    "make_kernel",
    "kernel_names",
    "kendall_pair",
    "gini_pair",
    "dup_pair",
    "auc_pair",
    "rand_pair",
    "auc_rescale_factor",
    "eval_fp",
]


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric kernel plus protocol-facing metadata.

    Attributes:
      name: registry name.
      arity: k, the number of party inputs per evaluation.
      components: scalars per party input (1 or 2 for the built-ins).
      delta_f: sensitivity bound sup |f(a, ...) - f(a', ...)|.
      out_lo, out_hi: output range.
      lipschitz: Lipschitz constant used by analytic MSE models.
      comm_bits_per_eval: bits charged per secure evaluation.
      rounds_per_eval: rounds charged once across parallel evaluations.
      ops_per_eval: per-party work charged per evaluation.
      fn: scalar kernel on decoded inputs (one argument per party; each
        argument is a float for 1-component kernels, a tuple otherwise).
      pair_values: vectorized form, (data, edges) -> float64 array; data
        is (n,) or (n, components), edges is (m, arity) int.
      extension: True for variants beyond the core estimator set.
    """

    name: str
    arity: int
    components: int
    delta_f: float
    out_lo: float
    out_hi: float
    lipschitz: float
    comm_bits_per_eval: int
    rounds_per_eval: int
    ops_per_eval: int
    fn: Callable
    pair_values: Callable
    extension: bool = False

    def check_domain(self, data: np.ndarray) -> None:
        """Raise DomainError unless every row is a valid kernel input."""
        arr = np.asarray(data, dtype=np.float64)
        if self.components == 1:
            arr = arr.reshape(-1)
        else:
            if arr.ndim != 2 or arr.shape[1] != self.components:
                raise DomainError(f"{self.name} expects {self.components} components per row")
        _DOMAIN_CHECKS[self.name](arr)


def kendall_pair(a, b) -> float:
    """Sign product of componentwise differences; in {-1, 0, 1}."""
    return float(np.sign(a[0] - b[0]) * np.sign(a[1] - b[1]))


def gini_pair(x: float, y: float) -> float:
    """Absolute difference |x - y|."""
    return abs(x - y)


def dup_pair(x, y) -> float:
    """1 if the two categories are equal, else 0."""
    return 1.0 if x == y else 0.0


def auc_pair(a, b) -> float:
    """1 iff the positive-labeled element has the strictly larger score.

    Inputs are (score, label) with labels in {-1, +1}. Same-label pairs
    and score ties against the ordering give 0. Symmetric.
    """
    if a[1] == b[1]:
        return 0.0
    pos, neg = (a, b) if a[1] > b[1] else (b, a)
    return 1.0 if pos[0] > neg[0] else 0.0


def rand_pair(a, b) -> float:
    """Cross-clustering agreement indicator, symmetrized to {0, 1}.

    Inputs are (first clustering label, second clustering label); returns
    1 iff the first clustering's label of each point equals the second
    clustering's label of the other point, in both directions.
    """
    return 1.0 if a[0] == b[1] and b[0] == a[1] else 0.0


def auc_rescale_factor(labels: np.ndarray) -> float:
    """Factor converting the C(n,2)-normalized AUC kernel mean to true AUC.

    True AUC averages over the n+ * n- positive/negative pairs only; the
    protocol averages over all C(n,2) pairs. Multiply its output by this
    factor (reported as metadata, never applied inside the protocol).
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    n_pos = int(np.sum(labels > 0))
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UsageError("AUC rescaling needs both positive and negative labels")
    return math.comb(n, 2) / (n_pos * n_neg)


def _pv_kendall(data: np.ndarray, edges: np.ndarray) -> np.ndarray:
    a, b = data[edges[:, 0]], data[edges[:, 1]]
    return np.sign(a[:, 0] - b[:, 0]) * np.sign(a[:, 1] - b[:, 1])


def _pv_gini(data: np.ndarray, edges: np.ndarray) -> np.ndarray:
    vals = data if data.ndim == 1 else data[:, 0]
    return np.abs(vals[edges[:, 0]] - vals[edges[:, 1]])


def _pv_dup(data: np.ndarray, edges: np.ndarray) -> np.ndarray:
    vals = data if data.ndim == 1 else data[:, 0]
    return (vals[edges[:, 0]] == vals[edges[:, 1]]).astype(np.float64)


def _pv_auc(data: np.ndarray, edges: np.ndarray) -> np.ndarray:
    a, b = data[edges[:, 0]], data[edges[:, 1]]
    differ = a[:, 1] != b[:, 1]
    pos_is_a = a[:, 1] > b[:, 1]
    pos_score = np.where(pos_is_a, a[:, 0], b[:, 0])
    neg_score = np.where(pos_is_a, b[:, 0], a[:, 0])
    return (differ & (pos_score > neg_score)).astype(np.float64)


def _pv_rand(data: np.ndarray, edges: np.ndarray) -> np.ndarray:
    a, b = data[edges[:, 0]], data[edges[:, 1]]
    return ((a[:, 0] == b[:, 1]) & (b[:, 0] == a[:, 1])).astype(np.float64)


def _check_unit(arr: np.ndarray, what: str) -> None:
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError(f"{what} must lie in [0, 1]")


def _check_categories(arr: np.ndarray, what: str) -> None:
    if arr.size == 0:
        return
    if np.any(arr != np.floor(arr)) or arr.min() < 0:
        raise DomainError(f"{what} must be non-negative integers")


def _check_auc(arr: np.ndarray) -> None:
    _check_unit(arr[:, 0], "auc scores")
    if arr.size and not np.all(np.isin(arr[:, 1], (-1.0, 1.0))):
        raise DomainError("auc labels must be -1 or +1")


_DOMAIN_CHECKS: dict[str, Callable[[np.ndarray], None]] = {
    "gini": lambda a: _check_unit(a, "gini inputs"),
    "kendall": lambda a: _check_unit(a, "kendall components"),
    "dup": lambda a: _check_categories(a, "dup categories"),
    "auc": _check_auc,
    "rand": lambda a: _check_categories(a, "clustering labels"),
}

# (components, delta_f, out_lo, out_hi, lipschitz, secure ops, rounds, fn, pair_values)
_BUILTINS = {
    "kendall": (2, 2.0, -1.0, 1.0, 1.0, 3, 2, kendall_pair, _pv_kendall),
    "gini": (1, 1.0, 0.0, 1.0, 1.0, 2, 2, gini_pair, _pv_gini),
    "dup": (1, 1.0, 0.0, 1.0, 1.0, 1, 1, dup_pair, _pv_dup),
    "auc": (2, 1.0, 0.0, 1.0, 1.0, 4, 2, auc_pair, _pv_auc),
    "rand": (2, 1.0, 0.0, 1.0, 1.0, 2, 1, rand_pair, _pv_rand),
}


def kernel_names() -> tuple[str, ...]:
    return tuple(_BUILTINS)


def get_kernel(name: str, ell: int = 40, **overrides) -> KernelSpec:
    """Look up a built-in kernel, with cost constants sized for ring width ell.

    Each secure comparison/product is charged 2*ell communicated bits and
    ell per-party operations by default; pass ``comm_bits_per_eval``,
    ``rounds_per_eval``, or ``ops_per_eval`` to override.
    """
    try:
        components, delta_f, lo, hi, lip, ops, rounds, fn, pv = _BUILTINS[name]
    except KeyError:
        raise UsageError(f"unknown kernel {name!r}; choose from {sorted(_BUILTINS)}") from None
    spec = KernelSpec(
        name=name,
        arity=2,
        components=components,
        delta_f=delta_f,
        out_lo=lo,
        out_hi=hi,
        lipschitz=lip,
        comm_bits_per_eval=ops * 2 * ell,
        rounds_per_eval=rounds,
        ops_per_eval=ops * ell,
        fn=fn,
        pair_values=pv,
    )
    if overrides:
        spec = replace(spec, **overrides)
    return spec


def make_kernel(
    name: str,
    arity: int,
    fn: Callable,
    tuple_values: Callable | None = None,
    *,
    components: int = 1,
    delta_f: float = 1.0,
    out_lo: float = 0.0,
    out_hi: float = 1.0,
    lipschitz: float = 1.0,
    comm_bits_per_eval: int = 80,
    rounds_per_eval: int = 1,
    ops_per_eval: int = 40,
    domain_check: Callable[[np.ndarray], None] | None = None,
) -> KernelSpec:
    """Register-free hook for user kernels (any arity >= 2).

    ``tuple_values`` may supply a vectorized (data, edges) form; without
    one, a row-by-row wrapper around ``fn`` is used.
    """
    if arity < 2:
        raise UsageError("kernel arity must be at least 2")
    if tuple_values is None:
        def tuple_values(data: np.ndarray, edges: np.ndarray) -> np.ndarray:
            rows = data.reshape(data.shape[0], -1)
            out = np.empty(edges.shape[0])
            for i, edge in enumerate(edges):
                args = [
                    float(rows[v, 0]) if components == 1 else tuple(rows[v])
                    for v in edge
                ]
                out[i] = fn(*args)
            return out

    _DOMAIN_CHECKS.setdefault(name, domain_check or (lambda a: None))
    return KernelSpec(
        name=name,
        arity=arity,
        components=components,
        delta_f=delta_f,
        out_lo=out_lo,
        out_hi=out_hi,
        lipschitz=lipschitz,
        comm_bits_per_eval=comm_bits_per_eval,
        rounds_per_eval=rounds_per_eval,
        ops_per_eval=ops_per_eval,
        fn=fn,
        pair_values=tuple_values,
        extension=True,
    )


def eval_fp(spec: KernelSpec, inputs, cfg: FpConfig | None = None) -> FpValue:
    """Evaluate the kernel on encoded inputs and re-encode the result.

    Args:
      spec: kernel to apply.
      inputs: one entry per party; each entry is an FpValue (1-component
        kernels) or a tuple of FpValues.
      cfg: ring configuration (defaults to the first input's).

    The decoded inputs are checked against the kernel's domain. The
    result differs from the real-valued kernel by at most h/2.
    """
    if len(inputs) != spec.arity:
        raise UsageError(f"{spec.name} takes {spec.arity} inputs, got {len(inputs)}")
    decoded = []
    rows = []
    for entry in inputs:
        if isinstance(entry, FpValue):
            entry = (entry,)
        if len(entry) != spec.components:
            raise UsageError(f"{spec.name} expects {spec.components} components per input")
        if cfg is None:
            cfg = entry[0].cfg
        vals = tuple(v.value() for v in entry)
        rows.append(vals)
        decoded.append(vals[0] if spec.components == 1 else vals)
    spec.check_domain(np.asarray(rows, dtype=np.float64).reshape(len(decoded), spec.components))
    y = spec.fn(*decoded)
    return encode(y, cfg)
