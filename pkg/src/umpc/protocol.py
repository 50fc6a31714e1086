"""Multi-party protocol simulation for incomplete U-statistics.

One run simulates n parties over four phases:

1. sharing: for every edge e and member j, a fresh (k,k) additive
   sharing of x_{e_j} is distributed to the parties of e (k-1 messages
   of ell bits per scalar component).
2. computing: an ideal functionality reconstructs each edge's inputs,
   evaluates the kernel in fixed point, and freshly reshares the result
   to the edge's parties (communication charged from the kernel's
   constants; rounds charged once across parallel edges).
3. noise: the configured noise mode produces shares of eta calibrated to
   sensitivity max_degree * delta_f (the pre-division form).
4. aggregation: party i sends z_i = [eta]_i + sum of its incident
   f-shares to the aggregator (party 0), which reconstructs and divides
   by |E| in the clear.

The ledger counts every phase bit-for-bit; noise and computing rounds
overlap by default (max instead of sum).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from umpc.errors import RangeError, UsageError
from umpc.fixedpoint import FpConfig, FpValue, encode_array, raw_to_signed
from umpc.kernels import KernelSpec, eval_fp
from umpc.noise import NoiseOutcome, NoiseSpec, generate_noise
from umpc.sampling import Hypergraph, degree_profile
from umpc.secretsharing import Sharing, reconstruct, share_many

__all__ = [
    "PartyState",
    "CostLedger",
    "EstimateResult",
    "run_umpc",
    "sharing_phase",
    "f_f_ideal",
    "aggregation_phase",
    "sensitivity_bound",
]


@dataclass
class PartyState:
    """One simulated party: private input and everything it received.

    ``edge_shares[e]`` is a (k, components) uint64 view holding, for each
    member of edge e, this party's share of that member's input.
    Invariant: keys of ``edge_shares``/``f_shares`` only ever name edges
    incident to this party.
    """

    index: int
    input_raw: np.ndarray
    edge_shares: dict[int, np.ndarray] = field(default_factory=dict)
    f_shares: dict[int, int] = field(default_factory=dict)
    noise_share: int = 0
    z: int = 0


@dataclass
class CostLedger:
    """Bit- and round-exact communication accounting per phase."""

    bits_sharing: int = 0
    bits_computing: int = 0
    bits_noise: int = 0
    bits_aggregation: int = 0
    rounds_sharing: int = 0
    rounds_computing: int = 0
    rounds_noise: int = 0
    rounds_aggregation: int = 0
    parallel: bool = True

    @property
    def total_bits(self) -> int:
        return self.bits_sharing + self.bits_computing + self.bits_noise + self.bits_aggregation

    @property
    def total_rounds(self) -> int:
        inner = (
            max(self.rounds_computing, self.rounds_noise)
            if self.parallel
            else self.rounds_computing + self.rounds_noise
        )
        return self.rounds_sharing + inner + self.rounds_aggregation


@dataclass(frozen=True)
class EstimateResult:
    """Protocol output: the released value plus debug channels."""

    released: float
    noiseless: float
    eta_grid: int
    ledger: CostLedger
    edge_count: int
    delta_g_max: int
    seeds: tuple[int, ...] | None = None
    party_states: list[PartyState] | None = None


def sensitivity_bound(g: Hypergraph, delta_f: float) -> float:
    """Swap sensitivity of the released statistic: max_degree*delta_f/|E|."""
    if g.m == 0:
        raise UsageError("sensitivity of an empty edge set is undefined")
    return degree_profile(g).max_degree * delta_f / g.m


def sharing_phase(
    parties: list[PartyState],
    g: Hypergraph,
    components: int,
    cfg: FpConfig,
    rng: np.random.Generator,
) -> tuple[dict[int, np.ndarray], int]:
    """Distribute per-edge input sharings; returns (share tables, bits).

    ``tables[e][j, comp, t]`` is holder t's share of member j's component
    comp on edge e. Party views are slices of the same tables.
    """
    k = g.k
    tables: dict[int, np.ndarray] = {}
    for ei, edge in enumerate(g.edges):
        tab = np.empty((k, components, k), dtype=np.uint64)
        for j in range(k):
            tab[j] = share_many(parties[edge[j]].input_raw, k, cfg, rng)
        tables[ei] = tab
        for t in range(k):
            parties[edge[t]].edge_shares[ei] = tab[:, :, t]
    bits = g.m * k * (k - 1) * cfg.ell * components
    return tables, bits


def f_f_ideal(
    e: int,
    edge: np.ndarray,
    share_tables: dict[int, np.ndarray],
    kernel: KernelSpec,
    cfg: FpConfig,
    rng: np.random.Generator,
) -> Sharing:
    """Ideal kernel evaluation for edge ``e``.

    Reconstructs the members' inputs from their sharings, evaluates the
    kernel in fixed point, and returns a fresh (k,k) sharing of the
    result over the edge's parties.
    """
    tab = share_tables[e]
    k, components, _ = tab.shape
    mask = np.uint64(cfg.mask)
    inputs = []
    for j in range(k):
        raws = tab[j].sum(axis=1) & mask
        inputs.append(tuple(FpValue(int(r), cfg) for r in raws))
    y = eval_fp(kernel, inputs, cfg)
    mat = share_many(np.array([y.raw], dtype=np.uint64), k, cfg, rng)
    return Sharing(tuple(int(v) for v in edge), mat[0].copy(), cfg)


def aggregation_phase(parties: list[PartyState], m: int, cfg: FpConfig) -> tuple[float, int]:
    """Collect z_i at the aggregator and release the reconstructed mean."""
    total = 0
    for p in parties:
        total = (total + p.z) & cfg.mask
    released = raw_to_signed(total, cfg) * cfg.scale / m
    return released, len(parties) * cfg.ell


def run_umpc(
    data: np.ndarray,
    g: Hypergraph,
    kernel: KernelSpec,
    noise: NoiseSpec | None,
    cfg: FpConfig,
    rng: np.random.Generator,
    *,
    parallel: bool = True,
    debug: bool = False,
    seeds: tuple[int, ...] | None = None,
) -> EstimateResult:
    """Execute the four-phase protocol on one dataset and edge set.

    Args:
      data: (n,) or (n, components) real inputs, one row per party.
      g: edge set over the same n parties; one kernel evaluation per edge.
      kernel: symmetric kernel with arity g.k.
      noise: noise configuration, or None to disable the noise phase (the
        epsilon = infinity debug setting). Its sensitivity is replaced by
        max_degree * delta_f as the protocol prescribes.
      cfg: ring configuration.
      rng: randomness for sharing, kernel resharing, and noise.
      parallel: overlap noise and computing rounds (default) or add them.
      debug: enable overflow detection on the released sum.
      seeds: optional caller-provided seed trail, recorded verbatim.
    """
    if g.m == 0:
        raise UsageError("edge set is empty")
    if kernel.arity != g.k:
        raise UsageError(f"kernel arity {kernel.arity} does not match edge size {g.k}")
    arr = np.asarray(data, dtype=np.float64)
    if kernel.components == 1:
        arr = arr.reshape(-1, 1) if arr.ndim == 1 else arr
    if arr.ndim != 2 or arr.shape != (g.n, kernel.components):
        raise UsageError(f"data must have shape ({g.n}, {kernel.components})")
    kernel.check_domain(arr)

    raws = encode_array(arr, cfg)
    parties = [PartyState(index=i, input_raw=raws[i]) for i in range(g.n)]
    ledger = CostLedger(parallel=parallel)
    profile = degree_profile(g)

    tables, bits = sharing_phase(parties, g, kernel.components, cfg, rng)
    ledger.bits_sharing = bits
    ledger.rounds_sharing = 1

    f_total = 0
    for ei, edge in enumerate(g.edges):
        sharing = f_f_ideal(ei, edge, tables, kernel, cfg, rng)
        f_total = (f_total + reconstruct(sharing)) & cfg.mask
        for t, holder in enumerate(sharing.parties):
            parties[holder].f_shares[ei] = int(sharing.shares[t])
    ledger.bits_computing = g.m * kernel.comm_bits_per_eval
    ledger.rounds_computing = kernel.rounds_per_eval

    eta_grid = 0
    outcome: NoiseOutcome | None = None
    if noise is not None:
        calibrated = replace(noise, sensitivity=profile.max_degree * kernel.delta_f)
        outcome = generate_noise(g.n, calibrated, cfg, rng)
        eta_grid = outcome.plaintext_eta_grid
        for i, p in enumerate(parties):
            p.noise_share = int(outcome.shares.shares[i])
        ledger.bits_noise = outcome.bits
        ledger.rounds_noise = outcome.rounds

    for p in parties:
        z = p.noise_share
        for s in p.f_shares.values():
            z = (z + s) & cfg.mask
        p.z = z
    released, agg_bits = aggregation_phase(parties, g.m, cfg)
    ledger.bits_aggregation = agg_bits
    ledger.rounds_aggregation = 1

    noiseless = raw_to_signed(f_total, cfg) * cfg.scale / g.m
    if debug:
        expected = noiseless + eta_grid * cfg.scale / g.m
        if abs(released - expected) > cfg.scale / 2:
            raise RangeError("released sum wrapped around the ring; increase ell")
    return EstimateResult(
        released=released,
        noiseless=noiseless,
        eta_grid=eta_grid,
        ledger=ledger,
        edge_count=g.m,
        delta_g_max=profile.max_degree,
        seeds=seeds,
        party_states=parties,
    )
