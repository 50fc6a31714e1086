"""Distributed noise generation over the secret-shared ring.

The discrete Laplace modes build on the fact that a sum over n parties of
independent Polya(1/n, alpha) differences is exactly DLap(alpha) with
pmf (1-alpha)/(1+alpha) * alpha^|z|. Calibration targets epsilon-DP for a
statistic with sensitivity s on the grid: alpha = exp(-epsilon*h/s).

Modes:

* ``dlap_full``: every party draws a Polya pair and (n,n)-shares both
  values; 2n(n-1) ring elements, one round.
* ``dlap_local``: each party keeps its own difference as its share; no
  communication (covers the all-honest setting).
* ``dlap_subgroup``: a subgroup of z parties (sized so that it contains
  at least one honest member except with probability failure_prob) runs
  the full exchange internally, then shares its result to everyone.
* ``dgn``: shared standard Gaussians from the polar Box-Muller transform
  over grid magnitudes and shared sign bits, scaled to the (epsilon,
  delta) Gaussian mechanism.
* ``ideal``: a trusted sampler of the real-valued mechanism, rounded to
  the grid (communication charged per configuration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from umpc.errors import RangeError, UsageError
from umpc.fixedpoint import FpConfig, raw_to_signed
from umpc.secretsharing import Sharing, reconstruct, share_many

__all__ = [
    "NoiseSpec",
    "NoiseOutcome",
    "DgnResult",
    "NOISE_MODES",
    "sample_polya",
    "dlap_oracle",
    "dlap_alpha",
    "dlap_variance",
    "protocol_dlap",
    "local_dlap",
    "subgroup_dlap",
    "subgroup_size",
    "f_noise_ideal",
    "f_mod_ideal",
    "dgn_polar",
    "generate_noise",
]

NOISE_MODES = ("ideal", "dlap_full", "dlap_local", "dlap_subgroup", "dgn")


@dataclass(frozen=True)
class NoiseSpec:
    """What to sample and how to charge it.

    ``sensitivity`` is the real-valued sensitivity handed to the
    mechanism (the protocol passes max-degree times delta_f, before the
    division by |E|). ``honest_fraction``/``failure_prob`` configure the
    subgroup mode; the ``ideal_*`` and ``mod_*`` fields configure the
    communication charged to the ideal functionalities.
    """

    epsilon: float
    delta: float = 0.0
    sensitivity: float = 1.0
    mode: str = "dlap_full"
    honest_fraction: float | None = None
    failure_prob: float | None = None
    ideal_comm_bits: int = 0
    ideal_rounds: int = 0
    mod_comm_bits: int = 0
    mod_rounds: int = 0

    def __post_init__(self) -> None:
        if self.mode not in NOISE_MODES:
            raise UsageError(f"unknown noise mode {self.mode!r}; choose from {NOISE_MODES}")
        if self.epsilon <= 0:
            raise UsageError("epsilon must be positive")
        if not 0.0 <= self.delta < 1.0:
            raise UsageError("delta must lie in [0, 1)")
        if self.sensitivity <= 0:
            raise UsageError("sensitivity must be positive")


@dataclass(frozen=True)
class NoiseOutcome:
    """Shares of one noise draw plus its cost and debug plaintext."""

    shares: Sharing
    plaintext_eta_grid: int
    bits: int
    rounds: int
    mode: str
    alpha: float | None = None
    sigma: float | None = None
    attempts: int = 1


@dataclass(frozen=True)
class DgnResult:
    """Two shared standard Gaussians from one polar Box-Muller run."""

    z1: Sharing
    z2: Sharing
    attempts: int
    u: float
    bits: int
    rounds: int


def sample_polya(r: float, beta: float, rng: np.random.Generator, size=None):
    """Negative binomial NB(r, beta) draws via the Gamma-Poisson mixture.

    P(X = x) = C(x + r - 1, x) (1 - beta)^r beta^x for x = 0, 1, ...
    """
    if r <= 0:
        raise UsageError("r must be positive")
    if not 0.0 <= beta < 1.0:
        raise UsageError("beta must lie in [0, 1)")
    if beta == 0.0:
        return np.zeros(size, dtype=np.int64) if size is not None else 0
    lam = rng.standard_gamma(r, size=size) * (beta / (1.0 - beta))
    draw = rng.poisson(lam)
    if size is None:
        return int(draw)
    return draw.astype(np.int64)


def dlap_oracle(alpha: float, rng: np.random.Generator, size=None):
    """Direct DLap(alpha) sampler: difference of two geometric counts.

    Reference implementation used to validate the distributed protocol;
    pmf (1-alpha)/(1+alpha) * alpha^|z| on the integers.
    """
    if not 0.0 < alpha < 1.0:
        raise UsageError("alpha must lie in (0, 1)")
    # rng.geometric counts trials (support {1, 2, ...}); shift to failures
    x = rng.geometric(1.0 - alpha, size=size) - 1
    y = rng.geometric(1.0 - alpha, size=size) - 1
    if size is None:
        return int(x - y)
    return (x - y).astype(np.int64)


def dlap_alpha(epsilon: float, sensitivity: float, cfg: FpConfig) -> float:
    """Grid calibration alpha = exp(-epsilon * h / s)."""
    return math.exp(-epsilon * cfg.scale / sensitivity)


def dlap_variance(alpha: float) -> float:
    """Var of DLap(alpha), in squared grid units: 2 alpha / (1 - alpha)^2."""
    return 2.0 * alpha / (1.0 - alpha) ** 2


def _dlap_pair(n_draws: int, r: float, alpha: float, rng: np.random.Generator):
    a = sample_polya(r, alpha, rng, size=n_draws)
    b = sample_polya(r, alpha, rng, size=n_draws)
    return a, b


def protocol_dlap(
    n: int, spec: NoiseSpec, cfg: FpConfig, rng: np.random.Generator, *, debug: bool = False
) -> NoiseOutcome:
    """Full exchange: each party (n,n)-shares a Polya(1/n, alpha) pair.

    Party j's share is sum_i([a_i]_j - [b_i]_j); the reconstruction is
    sum(a_i - b_i) ~ DLap(alpha). Cost: 2n(n-1) ring elements, 1 round.
    """
    if n < 1:
        raise UsageError("need at least one party")
    alpha = dlap_alpha(spec.epsilon, spec.sensitivity, cfg)
    a, b = _dlap_pair(n, 1.0 / n, alpha, rng)
    shares_a = share_many(a.astype(np.uint64), n, cfg, rng)
    shares_b = share_many(b.astype(np.uint64), n, cfg, rng)
    mask = np.uint64(cfg.mask)
    c = (shares_a.sum(axis=0) - shares_b.sum(axis=0)) & mask
    eta = int(a.sum() - b.sum())
    if debug and abs(eta) >= cfg.modulus // 4:
        raise RangeError(f"noise magnitude {eta} risks ring wraparound (>= 2^{cfg.ell - 2})")
    return NoiseOutcome(
        shares=Sharing(tuple(range(n)), c, cfg),
        plaintext_eta_grid=eta,
        bits=2 * n * (n - 1) * cfg.ell,
        rounds=1,
        mode="dlap_full",
        alpha=alpha,
    )


def local_dlap(n: int, spec: NoiseSpec, cfg: FpConfig, rng: np.random.Generator) -> NoiseOutcome:
    """No-communication variant: each party's own difference is its share.

    Same reconstruction distribution as the full exchange; secure only
    when no party's view is compromised, hence the zero cost.
    """
    if n < 1:
        raise UsageError("need at least one party")
    alpha = dlap_alpha(spec.epsilon, spec.sensitivity, cfg)
    a, b = _dlap_pair(n, 1.0 / n, alpha, rng)
    mask = np.uint64(cfg.mask)
    c = (a.astype(np.uint64) - b.astype(np.uint64)) & mask
    return NoiseOutcome(
        shares=Sharing(tuple(range(n)), c, cfg),
        plaintext_eta_grid=int(a.sum() - b.sum()),
        bits=0,
        rounds=0,
        mode="dlap_local",
        alpha=alpha,
    )


def subgroup_size(honest_fraction: float, failure_prob: float) -> int:
    """Smallest z with (1 - honest_fraction)^z <= failure_prob."""
    if not 0.0 < honest_fraction <= 1.0:
        raise UsageError("honest_fraction must lie in (0, 1]")
    if not 0.0 < failure_prob < 1.0:
        raise UsageError("failure_prob must lie in (0, 1)")
    if honest_fraction == 1.0:
        return 1
    return max(1, math.ceil(math.log(failure_prob) / math.log(1.0 - honest_fraction)))


def subgroup_dlap(n: int, spec: NoiseSpec, cfg: FpConfig, rng: np.random.Generator) -> NoiseOutcome:
    """A z-party subgroup runs the full exchange, then shares to everyone.

    z is sized from (honest_fraction, failure_prob) so the subgroup
    contains an honest party except with probability failure_prob.
    Cost: 2z(z-1) + z*n ring elements over two rounds.
    """
    if spec.honest_fraction is None or spec.failure_prob is None:
        raise UsageError("subgroup mode needs honest_fraction and failure_prob")
    z = subgroup_size(spec.honest_fraction, spec.failure_prob)
    if z > n:
        raise UsageError(f"subgroup size {z} exceeds party count {n}")
    alpha = dlap_alpha(spec.epsilon, spec.sensitivity, cfg)
    a, b = _dlap_pair(z, 1.0 / z, alpha, rng)
    mask = np.uint64(cfg.mask)
    shares_a = share_many(a.astype(np.uint64), z, cfg, rng)
    shares_b = share_many(b.astype(np.uint64), z, cfg, rng)
    c_sub = (shares_a.sum(axis=0) - shares_b.sum(axis=0)) & mask
    outward = share_many(c_sub, n, cfg, rng)  # (z, n)
    c = outward.sum(axis=0) & mask
    return NoiseOutcome(
        shares=Sharing(tuple(range(n)), c, cfg),
        plaintext_eta_grid=int(a.sum() - b.sum()),
        bits=2 * z * (z - 1) * cfg.ell + z * n * cfg.ell,
        rounds=2,
        mode="dlap_subgroup",
        alpha=alpha,
    )


def _round_half_away_float(x: float) -> int:
    r = math.floor(abs(x) + 0.5)
    return -r if x < 0 else r


def gaussian_sigma(epsilon: float, delta: float, sensitivity: float) -> float:
    """Analytic Gaussian-mechanism scale sqrt(2 ln(1.25/delta)) * s / eps."""
    if delta <= 0:
        raise UsageError("the Gaussian mechanism needs delta > 0")
    return math.sqrt(2.0 * math.log(1.25 / delta)) * sensitivity / epsilon


def f_noise_ideal(n: int, spec: NoiseSpec, cfg: FpConfig, rng: np.random.Generator) -> NoiseOutcome:
    """Trusted sampler: real Laplace (delta = 0) or Gaussian, grid-rounded.

    Communication is whatever the configuration charges for the ideal
    call (``ideal_comm_bits``/``ideal_rounds``, zero by default).
    """
    if n < 1:
        raise UsageError("need at least one party")
    if spec.delta == 0.0:
        eta_real = rng.laplace(0.0, spec.sensitivity / spec.epsilon)
        sigma = None
    else:
        sigma = gaussian_sigma(spec.epsilon, spec.delta, spec.sensitivity)
        eta_real = rng.normal(0.0, sigma)
    eta = _round_half_away_float(eta_real / cfg.scale)
    mat = share_many(np.array([eta % cfg.modulus], dtype=np.uint64), n, cfg, rng)
    return NoiseOutcome(
        shares=Sharing(tuple(range(n)), mat[0].copy(), cfg),
        plaintext_eta_grid=eta,
        bits=spec.ideal_comm_bits,
        rounds=spec.ideal_rounds,
        mode="ideal",
        sigma=sigma,
    )


def f_mod_ideal(s: Sharing, modulus: int, rng: np.random.Generator) -> Sharing:
    """Ideal modulus switch: reduce the signed reading mod ``modulus``.

    Reconstructs internally, maps the signed integer reading into
    {0, ..., modulus-1}, and returns a fresh sharing of the result over
    the same parties and ring.
    """
    if modulus < 2 or modulus > s.cfg.modulus:
        raise UsageError("modulus must lie in [2, 2^ell]")
    val = raw_to_signed(reconstruct(s), s.cfg) % modulus
    mat = share_many(np.array([val], dtype=np.uint64), len(s.parties), s.cfg, rng)
    return Sharing(s.parties, mat[0].copy(), s.cfg)


def dgn_polar(
    n: int,
    cfg: FpConfig,
    rng: np.random.Generator,
    *,
    max_attempts: int = 64,
    mod_comm_bits: int = 0,
    mod_rounds: int = 0,
) -> DgnResult:
    """Two shared standard Gaussians via the polar Box-Muller transform.

    Per attempt, each party contributes uniform grid values and sign
    bits; the modulus-switch functionality turns the sums into shared
    magnitudes q1, q2 on the 2^-c grid and shared sign bits. The squared
    norm U = q1^2 + q2^2 is revealed and the attempt is accepted when
    0 < U < 1 (probability pi/4). Accepted magnitudes are multiplied by
    the public constant round(sqrt(-2 ln U / U) * 2^c), signed inside the
    ideal step, and freshly reshared; outputs carry scale 2^-2c.

    Raises after ``max_attempts`` rejections (retryable with a new rng).
    """
    if n < 1:
        raise UsageError("need at least one party")
    if 2 * cfg.c >= cfg.ell:
        raise UsageError(f"polar outputs need 2c < ell, got c={cfg.c}, ell={cfg.ell}")
    H = 1 << cfg.c
    parties = tuple(range(n))
    attempt_bits = 4 * n * (n - 1) * cfg.ell + 4 * mod_comm_bits + 3 * n * n * cfg.ell
    attempt_rounds = 3 + mod_rounds
    bits = 0
    rounds = 0
    for attempt in range(1, max_attempts + 1):
        bits += attempt_bits
        rounds += attempt_rounds
        mags = []
        signs = []
        for _ in range(2):
            contrib = rng.integers(0, H, size=n, dtype=np.uint64)
            mags.append(f_mod_ideal(Sharing(parties, contrib, cfg), H, rng))
            sign_contrib = rng.integers(0, 2, size=n, dtype=np.uint64)
            signs.append(f_mod_ideal(Sharing(parties, sign_contrib, cfg), 2, rng))
        qbar = [reconstruct(s) for s in mags]
        u = (qbar[0] * qbar[0] + qbar[1] * qbar[1]) * cfg.scale ** 2
        if not 0.0 < u < 1.0:
            continue
        t_const = math.sqrt(-2.0 * math.log(u) / u)
        c_grid = _round_half_away_float(t_const * H)
        out_cfg = FpConfig(cfg.ell, 2 * cfg.c)
        outs = []
        for mag, sign in zip(mags, signs):
            sign_factor = 2 * reconstruct(sign) - 1
            signed_out = sign_factor * reconstruct(mag) * c_grid
            mat = share_many(np.array([signed_out % cfg.modulus], dtype=np.uint64), n, out_cfg, rng)
            outs.append(Sharing(parties, mat[0].copy(), out_cfg))
        return DgnResult(z1=outs[0], z2=outs[1], attempts=attempt, u=u, bits=bits, rounds=rounds)
    raise UsageError(f"polar sampling rejected {max_attempts} attempts in a row")


def _dgn_noise(n: int, spec: NoiseSpec, cfg: FpConfig, rng: np.random.Generator) -> NoiseOutcome:
    result = dgn_polar(n, cfg, rng, mod_comm_bits=spec.mod_comm_bits, mod_rounds=spec.mod_rounds)
    sigma = gaussian_sigma(spec.epsilon, spec.delta, spec.sensitivity)
    out_scale = 2.0 ** -(2 * cfg.c)
    z_value = raw_to_signed(reconstruct(result.z1), result.z1.cfg) * out_scale
    eta = _round_half_away_float(z_value * sigma / cfg.scale)
    mat = share_many(np.array([eta % cfg.modulus], dtype=np.uint64), n, cfg, rng)
    return NoiseOutcome(
        shares=Sharing(tuple(range(n)), mat[0].copy(), cfg),
        plaintext_eta_grid=eta,
        bits=result.bits,
        rounds=result.rounds,
        mode="dgn",
        sigma=sigma,
        attempts=result.attempts,
    )


def generate_noise(n: int, spec: NoiseSpec, cfg: FpConfig, rng: np.random.Generator) -> NoiseOutcome:
    """Dispatch to the configured noise mode."""
    if spec.mode == "ideal":
        return f_noise_ideal(n, spec, cfg, rng)
    if spec.mode == "dlap_full":
        return protocol_dlap(n, spec, cfg, rng)
    if spec.mode == "dlap_local":
        return local_dlap(n, spec, cfg, rng)
    if spec.mode == "dlap_subgroup":
        return subgroup_dlap(n, spec, cfg, rng)
    if spec.mode == "dgn":
        if spec.delta <= 0:
            raise UsageError("dgn mode needs delta > 0")
        return _dgn_noise(n, spec, cfg, rng)
    raise UsageError(f"unknown noise mode {spec.mode!r}")
