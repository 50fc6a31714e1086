"""Executable local-DP baseline and analytic cost models.

The executable baseline discretizes [0,1] inputs into t bins, pushes each
party's bin through a randomized-response mechanism, and debiases the
kernel matrix A on the server: f_hat(i,j) = (1-beta)^-2 (e_i - b)^T A
(e_j - b) with b the constant beta/t vector. Averaging f_hat over all
pairs is an unbiased estimator of the discretized U-statistic.

The cost models evaluate closed-form bit/operation/MSE expressions for
five protocols at given parameters. The expressions are asymptotic rows
treated as exact with unit constants; logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from umpc.errors import UsageError
from umpc.kernels import KernelSpec

__all__ = [
    "BellConfig",
    "CostParams",
    "CostModel",
    "CostReport",
    "COST_MODEL_NAMES",
    "discretize",
    "representative",
    "beta_min",
    "bell_randomizer",
    "bell_fhat",
    "bell_kernel_matrix",
    "bell_estimate",
    "bell_mse_bound",
    "builtin_cost_models",
    "cost_eval",
]


@dataclass(frozen=True)
class BellConfig:
    """Discretization bins t, flip probability beta, and the target epsilon."""

    t: int
    beta: float
    epsilon: float

    def __post_init__(self) -> None:
        if self.t < 1:
            raise UsageError("need at least one bin")
        if not 0.0 <= self.beta < 1.0:
            raise UsageError("beta must lie in [0, 1)")
        if self.beta < beta_min(self.epsilon, self.t) - 1e-12:
            raise UsageError("beta below the epsilon-LDP minimum for this t")


def beta_min(epsilon: float, t: int) -> float:
    """Smallest flip probability giving epsilon-LDP over t bins."""
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    return 1.0 / ((math.exp(epsilon) - 1.0) / t + 1.0)


def discretize(x, t: int):
    """Bin index pi(x) = clamp(ceil(x*t + 1/2), 1, t) for x in [0, 1]."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise UsageError("discretize expects inputs in [0, 1]")
    bins = np.clip(np.ceil(arr * t + 0.5), 1, t).astype(np.int64)
    return bins if bins.shape else int(bins)


def representative(i, t: int):
    """Bin midpoint gamma(i) = (i - 1/2)/t on the unit interval."""
    arr = np.asarray(i, dtype=np.float64)
    rep = (arr - 0.5) / t
    return rep if rep.shape else float(rep)


def bell_randomizer(bins, t: int, beta: float, rng: np.random.Generator):
    """Randomized response: keep with probability 1-beta, else uniform.

    P[R(x) = y] = beta/t + (1 - beta) * [x = y].
    """
    arr = np.asarray(bins, dtype=np.int64)
    if arr.size and (arr.min() < 1 or arr.max() > t):
        raise UsageError("bins must lie in [1, t]")
    flip = rng.random(arr.shape) < beta
    uniform = rng.integers(1, t + 1, size=arr.shape, dtype=np.int64)
    out = np.where(flip, uniform, arr)
    return out if out.shape else int(out)


def bell_fhat(i: int, j: int, a: np.ndarray, beta: float) -> float:
    """Debiased kernel estimate from two randomized bins (1-based)."""
    t = a.shape[0]
    b = np.full(t, beta / t)
    ab = a @ b
    ba = b @ a
    bab = float(b @ a @ b)
    return (a[i - 1, j - 1] - ab[i - 1] - ba[j - 1] + bab) / (1.0 - beta) ** 2


def bell_kernel_matrix(kernel: KernelSpec, t: int) -> tuple[np.ndarray, int]:
    """Kernel matrix over bin representatives; returns (A, bins used).

    Scalar kernels (gini, dup) use t bins directly. Kendall uses the
    product-binned extension: both components are discretized with t bins
    each and the randomizer acts on the t^2 joint bins.
    """
    if kernel.name in ("gini", "dup"):
        reps = representative(np.arange(1, t + 1), t)
        x, y = np.meshgrid(reps, reps, indexing="ij")
        if kernel.name == "gini":
            return np.abs(x - y), t
        return (x == y).astype(np.float64), t
    if kernel.name == "kendall":
        reps = representative(np.arange(1, t + 1), t)
        yv = np.repeat(reps, t)
        zv = np.tile(reps, t)
        a = np.sign(yv[:, None] - yv[None, :]) * np.sign(zv[:, None] - zv[None, :])
        return a, t * t
    raise UsageError(f"kernel {kernel.name!r} has no matrix form over discretized bins")


def _joint_bins(data: np.ndarray, t: int) -> np.ndarray:
    by = discretize(data[:, 0], t)
    bz = discretize(data[:, 1], t)
    return (by - 1) * t + bz


def bell_estimate(
    data: np.ndarray,
    kernel: KernelSpec,
    t: int,
    epsilon: float,
    rng: np.random.Generator,
    beta: float | None = None,
) -> float:
    """Run the full baseline once and return its U-statistic estimate.

    Each party randomizes its bin exactly once; the server averages the
    debiased kernel over all C(n,2) pairs via bin counts.
    """
    arr = np.asarray(data, dtype=np.float64)
    a, total_bins = bell_kernel_matrix(kernel, t)
    if kernel.name == "kendall":
        bins = _joint_bins(arr.reshape(-1, 2), t)
    elif kernel.name == "dup":
        # categories are bins already; no discretization step
        bins = arr.reshape(-1).astype(np.int64) + 1
        if bins.size and (bins.min() < 1 or bins.max() > t):
            raise UsageError(f"dup needs t >= the number of categories, got t={t}")
    else:
        bins = discretize(arr.reshape(-1), t)
    n = bins.shape[0]
    if n < 2:
        raise UsageError("need at least two parties")
    if beta is None:
        beta = beta_min(epsilon, total_bins)
    randomized = bell_randomizer(bins, total_bins, beta, rng)

    cnt = np.bincount(randomized - 1, minlength=total_bins).astype(np.float64)
    b = np.full(total_bins, beta / total_bins)
    ab = a @ b
    ba = b @ a
    bab = float(b @ ab)
    u_vec = cnt - n * b  # sum over parties of (e_y - b)
    cross = float(u_vec @ a @ u_vec)
    diag = float(cnt @ (np.diag(a) - ab - ba)) + n * bab
    pair_sum = 0.5 * (cross - diag)
    return pair_sum / ((1.0 - beta) ** 2 * math.comb(n, 2))


def bell_mse_bound(n: int, beta: float) -> float:
    """Upper bound on the baseline's MSE against the discretized U-statistic."""
    return 1.0 / (n * (1.0 - beta) ** 2) + (1.0 + beta) ** 2 / (
        2.0 * n * (n - 1) * (1.0 - beta) ** 4
    )


@dataclass(frozen=True)
class CostParams:
    """Inputs to the closed-form cost rows."""

    n: int
    t: int
    epsilon: float
    ell: int = 40
    m_edges: int = 0
    k: int = 2
    delta_f: float = 1.0
    l_f: float = 1.0
    cc_f: int = 0  # kernel comm bits per secure evaluation
    ct_f: int = 0  # kernel per-party ops per evaluation
    c_eta: float = 1.0  # noise-cost coefficient
    kappa: float = 0.0  # extra security-parameter addend in shuffle-model rows
    unit: float = 1.0  # shared constant of proportionality


@dataclass(frozen=True)
class CostModel:
    name: str
    comm_bits: Callable[[CostParams], float]
    party_ops: Callable[[CostParams], float]
    server_ops: Callable[[CostParams], float]
    mse: Callable[[CostParams], float]


@dataclass(frozen=True)
class CostReport:
    name: str
    comm_bits: float
    party_ops: float
    server_ops: float
    mse: float


def _log2(x: float) -> float:
    return math.log2(x) if x > 1 else 1.0


COST_MODEL_NAMES = ("Bell", "Ghazi", "GhaziSM", "Umpc_Dis", "Umpc_HF")


def builtin_cost_models() -> dict[str, CostModel]:
    return {
        "Bell": CostModel(
            "Bell",
            comm_bits=lambda p: p.n * p.ell * p.t,
            party_ops=lambda p: float(p.t),
            server_ops=lambda p: float(p.n * p.n) * p.t * p.t,
            mse=lambda p: 1.0 / p.t ** 2 + p.t ** 2 / (p.n * p.epsilon ** 2),
        ),
        "Ghazi": CostModel(
            "Ghazi",
            comm_bits=lambda p: p.n ** 2 * p.epsilon ** 2 * _log2(p.t) * p.ell,
            party_ops=lambda p: p.epsilon ** 2 * p.n * p.t * _log2(p.t),
            server_ops=lambda p: p.epsilon ** 2 * p.n ** 2 * _log2(p.t),
            mse=lambda p: 1.0 / p.t ** 2
            + (p.l_f ** 2) * p.t ** 2 * _log2(p.t) / (p.epsilon ** 2 * p.n),
        ),
        "GhaziSM": CostModel(
            "GhaziSM",
            comm_bits=lambda p: (_log2(p.n) + p.kappa)
            * p.n ** 2
            * p.epsilon ** 2
            * _log2(p.t)
            * p.ell,
            party_ops=lambda p: p.epsilon ** 2 * p.n * p.t * _log2(p.t)
            + p.t * (_log2(p.n) + p.kappa),
            server_ops=lambda p: (_log2(p.n) + p.kappa) * p.epsilon ** 2 * p.n ** 2 * _log2(p.t),
            mse=lambda p: 1.0 / p.t ** 2
            + (p.l_f ** 2) * p.t ** 2 * _log2(p.t) / (p.epsilon ** 2 * p.n ** 2),
        ),
        "Umpc_Dis": CostModel(
            "Umpc_Dis",
            comm_bits=lambda p: p.m_edges * (p.ell + p.cc_f) + p.c_eta * p.n ** 2 * p.ell,
            party_ops=lambda p: (p.m_edges / p.n) * p.ct_f + p.n,
            server_ops=lambda p: float(p.n),
            mse=lambda p: 1.0 / p.m_edges
            + 2.0 * (p.k * p.delta_f) ** 2 / (p.n ** 2 * p.epsilon ** 2),
        ),
        "Umpc_HF": CostModel(
            "Umpc_HF",
            comm_bits=lambda p: p.m_edges * (p.ell + p.cc_f) + p.c_eta * p.n * p.ell,
            party_ops=lambda p: (p.m_edges / p.n) * p.ct_f + p.n,
            server_ops=lambda p: float(p.n),
            mse=lambda p: 1.0 / p.m_edges
            + 2.0 * (p.k * p.delta_f) ** 2 / (p.n ** 2 * p.epsilon ** 2),
        ),
    }


def cost_eval(model: CostModel | str, params: CostParams) -> CostReport:
    """Evaluate one cost model's rows at the given parameters."""
    if isinstance(model, str):
        try:
            model = builtin_cost_models()[model]
        except KeyError:
            raise UsageError(f"unknown cost model {model!r}; choose from {COST_MODEL_NAMES}") from None
    if model.name.startswith("Umpc") and params.m_edges <= 0:
        raise UsageError("Umpc cost rows need m_edges > 0")
    return CostReport(
        name=model.name,
        comm_bits=params.unit * model.comm_bits(params),
        party_ops=params.unit * model.party_ops(params),
        server_ops=params.unit * model.server_ops(params),
        mse=params.unit * model.mse(params),
    )
