"""Accuracy evaluation: reference statistics, error bounds, and MC harnesses.

The mean squared error of a released estimate splits into a sampling part
(incomplete vs. complete U-statistic) and a privacy part (added noise).
This module computes the complete-sample reference, the two theoretical
bounds, and runs repeated-draw experiments that estimate both parts
empirically. Named experiment presets back the `reproduce` CLI command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations, islice

import numpy as np

from umpc.errors import SamplingError, ScaleError, UsageError
from umpc.fixedpoint import FpConfig, encode_array, raw_to_signed
from umpc.kernels import KernelSpec, get_kernel
from umpc.noise import NOISE_MODES, NoiseSpec, dlap_alpha, dlap_oracle, generate_noise
from umpc.sampling import (
    Hypergraph,
    balanced_samp,
    bernoulli_samp,
    degree_profile,
    uniform_without_replacement,
)

__all__ = [
    "SAMPLERS",
    "MseConfig",
    "MseReport",
    "complete_ustat",
    "incomplete_ustat",
    "einc_bound",
    "edp_theory",
    "hoeffding_variance",
    "fast_released",
    "draw_edges",
    "mse_experiment",
    "PRESETS",
    "run_preset",
]

SAMPLERS = ("balanced", "uniform", "bernoulli")

_MAX_COMPLETE = 100_000_000
_BATCH = 200_000


def complete_ustat(data: np.ndarray, kernel: KernelSpec) -> float:
    """Average the kernel over every size-k subset (the complete U-statistic)."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    n = arr.shape[0]
    k = kernel.arity
    if n < k:
        raise UsageError(f"need at least {k} rows, got {n}")
    total = math.comb(n, k)
    if total > _MAX_COMPLETE:
        raise ScaleError(f"{total} subsets exceed the enumeration limit")
    if k == 2 and total <= 2_000_000:
        i, j = np.triu_indices(n, k=1)
        edges = np.stack([i, j], axis=1).astype(np.int64)
        return float(kernel.pair_values(arr, edges).mean())
    acc = 0.0
    it = combinations(range(n), k)
    while True:
        block = list(islice(it, _BATCH))
        if not block:
            break
        acc += float(kernel.pair_values(arr, np.asarray(block, dtype=np.int64)).sum())
    return acc / total


def incomplete_ustat(data: np.ndarray, g: Hypergraph, kernel: KernelSpec) -> float:
    """Average the kernel over the sampled edge set only (exact arithmetic)."""
    if g.m == 0:
        raise UsageError("edge set is empty")
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return float(kernel.pair_values(arr, g.edges).mean())


def einc_bound(total_edges: int, m: int) -> float:
    """Sampling-error bound (N - m) / (4 m (N - 1)) for bounded kernels."""
    if total_edges < 1:
        raise UsageError("need at least one candidate edge")
    if not 1 <= m <= total_edges:
        raise UsageError(f"m must lie in [1, {total_edges}], got {m}")
    if total_edges == 1:
        return 0.0
    return (total_edges - m) / (4.0 * m * (total_edges - 1))


def edp_theory(delta_g_max: int, delta_f: float, epsilon: float, m: int) -> float:
    """Privacy-error term 2 * (delta_g_max * delta_f / (epsilon * m))^2."""
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    if m < 1:
        raise UsageError("need at least one edge")
    return 2.0 * (delta_g_max * delta_f / (epsilon * m)) ** 2


def hoeffding_variance(sigma1: float, sigma2: float, n: int) -> float:
    """Variance of the complete degree-2 U-statistic from its components."""
    if n < 2:
        raise UsageError("need at least two rows")
    return 2.0 * (2.0 * (n - 2) * sigma1 + sigma2) / (n * (n - 1))


def fast_released(
    data: np.ndarray,
    g: Hypergraph,
    kernel: KernelSpec,
    cfg: FpConfig,
    eta_grid: int = 0,
) -> float:
    """Released value without simulating parties.

    Additive shares cancel when reconstructed, so summing the encoded
    per-edge kernel values in the ring and adding the noise grid value
    reproduces the protocol's released output bit for bit.
    """
    if g.m == 0:
        raise UsageError("edge set is empty")
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    raws = encode_array(kernel.pair_values(arr, g.edges), cfg)
    total = (int(raws.sum(dtype=np.uint64)) + eta_grid) & cfg.mask
    return raw_to_signed(total, cfg) * cfg.scale / g.m


def draw_edges(strategy: str, m: int, k: int, n: int, rng: np.random.Generator) -> Hypergraph:
    """Draw an edge set of target size m with the named strategy.

    Bernoulli draws each edge independently with q = m / C(n, k), so its
    size only matches in expectation; empty draws are rejected and redrawn.
    """
    if strategy == "balanced":
        return balanced_samp(m, k, n, rng)
    if strategy == "uniform":
        return uniform_without_replacement(m, k, n, rng)
    if strategy == "bernoulli":
        q = m / math.comb(n, k)
        for _ in range(1000):
            g = bernoulli_samp(q, k, n, rng)
            if g.m > 0:
                return g
        raise SamplingError(f"bernoulli draws at q={q} stayed empty")
    raise UsageError(f"unknown sampler {strategy!r}; choose from {SAMPLERS}")


@dataclass(frozen=True)
class MseConfig:
    """One repeated-draw experiment: data, kernel, sampler, and noise."""

    data: np.ndarray
    kernel: KernelSpec
    sampler: str
    m: int
    repetitions: int
    seed: int = 0
    epsilon: float | None = None
    delta: float = 0.0
    noise_mode: str = "oracle"
    honest_fraction: float = 1.0
    failure_prob: float = 1e-9
    fp: FpConfig = field(default_factory=FpConfig)
    reference: float | None = None


@dataclass(frozen=True)
class MseReport:
    """Empirical error decomposition with matching theory values."""

    mse: float
    se_mse: float
    e_inc: float
    se_inc: float
    e_dp: float
    se_dp: float
    einc_bound: float
    edp_theory: float
    reference: float
    repetitions: int
    mean_edges: float
    mean_delta_g: float
    sampler: str
    noise_mode: str
    epsilon: float | None


def _draw_eta(
    config: MseConfig, delta_g: int, n: int, rng: np.random.Generator
) -> int:
    if config.epsilon is None:
        return 0
    sens = delta_g * config.kernel.delta_f
    if config.noise_mode == "oracle":
        alpha = dlap_alpha(config.epsilon, sens, config.fp)
        return int(dlap_oracle(alpha, rng))
    spec = NoiseSpec(
        epsilon=config.epsilon,
        delta=config.delta,
        sensitivity=sens,
        mode=config.noise_mode,
        honest_fraction=config.honest_fraction,
        failure_prob=config.failure_prob,
    )
    return generate_noise(n, spec, config.fp, rng).plaintext_eta_grid


def mse_experiment(config: MseConfig) -> MseReport:
    """Estimate MSE and its decomposition over repeated edge-set draws.

    Each repetition resamples the edge set and the noise; the data stay
    fixed. The released value is computed through the ring fast path, so
    results agree bit for bit with full protocol runs. With noise_mode
    "oracle" the discrete-Laplace protocol total is drawn directly from
    its distribution instead of simulating n parties; the other modes run
    the corresponding noise generation protocol per repetition.
    """
    if config.repetitions < 1:
        raise UsageError("need at least one repetition")
    if config.sampler not in SAMPLERS:
        raise UsageError(f"unknown sampler {config.sampler!r}; choose from {SAMPLERS}")
    if config.noise_mode != "oracle" and config.noise_mode not in NOISE_MODES:
        raise UsageError(
            f"unknown noise mode {config.noise_mode!r}; choose from"
            f" {('oracle',) + NOISE_MODES}"
        )
    arr = np.asarray(config.data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    config.kernel.check_domain(arr)
    n = arr.shape[0]
    k = config.kernel.arity
    total = math.comb(n, k)
    cfg = config.fp
    ref = config.reference
    if ref is None:
        ref = complete_ustat(arr, config.kernel)

    rng = np.random.default_rng(config.seed)
    sq = np.empty(config.repetitions)
    sq_inc = np.empty(config.repetitions)
    sq_dp = np.empty(config.repetitions)
    edp_terms = np.zeros(config.repetitions)
    edges_seen = np.empty(config.repetitions)
    delta_seen = np.empty(config.repetitions)
    for rep in range(config.repetitions):
        g = draw_edges(config.sampler, config.m, k, n, rng)
        delta_g = degree_profile(g).max_degree
        raws = encode_array(config.kernel.pair_values(arr, g.edges), cfg)
        bare = int(raws.sum(dtype=np.uint64)) & cfg.mask
        eta = _draw_eta(config, delta_g, n, rng)
        noisy = (bare + eta) & cfg.mask
        noiseless = raw_to_signed(bare, cfg) * cfg.scale / g.m
        released = raw_to_signed(noisy, cfg) * cfg.scale / g.m
        sq[rep] = (released - ref) ** 2
        sq_inc[rep] = (noiseless - ref) ** 2
        sq_dp[rep] = (released - noiseless) ** 2
        if config.epsilon is not None:
            edp_terms[rep] = edp_theory(
                delta_g, config.kernel.delta_f, config.epsilon, g.m
            )
        edges_seen[rep] = g.m
        delta_seen[rep] = delta_g

    def _se(a: np.ndarray) -> float:
        if a.size < 2:
            return float("nan")
        return float(a.std(ddof=1) / math.sqrt(a.size))

    return MseReport(
        mse=float(sq.mean()),
        se_mse=_se(sq),
        e_inc=float(sq_inc.mean()),
        se_inc=_se(sq_inc),
        e_dp=float(sq_dp.mean()),
        se_dp=_se(sq_dp),
        einc_bound=einc_bound(total, config.m),
        edp_theory=float(edp_terms.mean()),
        reference=ref,
        repetitions=config.repetitions,
        mean_edges=float(edges_seen.mean()),
        mean_delta_g=float(delta_seen.mean()),
        sampler=config.sampler,
        noise_mode=config.noise_mode,
        epsilon=config.epsilon,
    )


# ---------------------------------------------------------------------------
# Named experiment presets behind the `reproduce` CLI command.


def _preset_gini_scaling(seed: int, n: int, reps: int):
    """Sampling/noise error trade-off for gini as the edge budget grows."""
    from umpc.datasets import gen_synthetic

    rng = np.random.default_rng(seed)
    data = gen_synthetic(n, "uniform01", rng).values
    kernel = get_kernel("gini")
    columns = [
        "n", "m", "epsilon", "mse", "se_mse", "e_inc", "e_dp",
        "einc_bound", "edp_theory", "mse_model",
    ]
    rows = []
    for mult in (0.5, 1, 2, 4, 8):
        m = int(round(mult * n))
        rep = mse_experiment(
            MseConfig(
                data=data, kernel=kernel, sampler="balanced", m=m,
                repetitions=reps, seed=seed + m, epsilon=1.0,
            )
        )
        rows.append([
            n, m, 1.0, rep.mse, rep.se_mse, rep.e_inc, rep.e_dp,
            rep.einc_bound, rep.edp_theory, rep.einc_bound + rep.edp_theory,
        ])
    return columns, rows


def _preset_kendall_tradeoff(seed: int, n: int, reps: int):
    """Kendall accuracy and communication: this protocol vs. the LDP baseline."""
    from umpc.baselines import CostParams, bell_estimate, cost_eval
    from umpc.datasets import gen_synthetic

    rng = np.random.default_rng(seed)
    data = gen_synthetic(n, "uniform01_pairs", rng).values
    kernel = get_kernel("kendall")
    ref = complete_ustat(data, kernel)
    m = 2 * n
    columns = ["protocol", "epsilon", "t", "mse", "se_mse", "comm_bits_model"]
    rows = []
    for epsilon in (0.1, 1.0):
        rep = mse_experiment(
            MseConfig(
                data=data, kernel=kernel, sampler="balanced", m=m,
                repetitions=reps, seed=seed + 1, epsilon=epsilon,
                reference=ref,
            )
        )
        cost = cost_eval(
            "Umpc_Dis",
            CostParams(
                n=n, t=0, epsilon=epsilon, m_edges=m,
                delta_f=kernel.delta_f, cc_f=kernel.comm_bits_per_eval,
            ),
        )
        rows.append(["umpc", epsilon, 0, rep.mse, rep.se_mse, cost.comm_bits])
        for t in (2, 4, 8, 16, 32):
            bell_rng = np.random.default_rng(seed + 1000 * t)
            errs = np.array([
                (bell_estimate(data, kernel, t, epsilon, bell_rng) - ref) ** 2
                for _ in range(reps)
            ])
            cost = cost_eval("Bell", CostParams(n=n, t=t * t, epsilon=epsilon))
            rows.append([
                "bell", epsilon, t, float(errs.mean()),
                float(errs.std(ddof=1) / math.sqrt(reps)), cost.comm_bits,
            ])
    return columns, rows


def _preset_dupl_sampling(seed: int, n: int, reps: int):
    """Duplicate-detection MSE under the three edge-sampling strategies."""
    from umpc.datasets import gen_synthetic

    rng = np.random.default_rng(seed)
    data = gen_synthetic(n, "categorical(12)", rng).values
    kernel = get_kernel("dup")
    ref = complete_ustat(data, kernel)
    m = int(round(0.5 * math.comb(n, 2)))
    columns = [
        "strategy", "n", "m", "epsilon", "repetitions", "mse", "se_mse",
        "e_inc", "e_dp", "einc_bound", "edp_theory",
    ]
    rows = []
    for strategy in SAMPLERS:
        rep = mse_experiment(
            MseConfig(
                data=data, kernel=kernel, sampler=strategy, m=m,
                repetitions=reps, seed=seed + 7, epsilon=1.0, reference=ref,
            )
        )
        rows.append([
            strategy, n, m, 1.0, reps, rep.mse, rep.se_mse,
            rep.e_inc, rep.e_dp, rep.einc_bound, rep.edp_theory,
        ])
    return columns, rows


# name -> (builder, default n, default repetitions)
PRESETS = {
    "gini-scaling": (_preset_gini_scaling, 200, 300),
    "kendall-tradeoff": (_preset_kendall_tradeoff, 200, 120),
    "dupl-sampling": (_preset_dupl_sampling, 400, 400),
}


def run_preset(name: str, seed: int, n: int | None = None, reps: int | None = None):
    """Run a named preset; returns (columns, rows) for tabular output."""
    try:
        builder, default_n, default_reps = PRESETS[name]
    except KeyError:
        raise UsageError(
            f"unknown preset {name!r}; choose from {tuple(PRESETS)}"
        ) from None
    return builder(seed, n if n is not None else default_n, reps if reps is not None else default_reps)
