"""Additive (p,p) secret sharing over Z_{2^ell}.

A secret residue is split into p shares that sum to it modulo 2^ell:
the first p-1 shares are uniform residues and the last balances the sum.
Reconstruction needs all p shares; any strict subset is jointly uniform.

All share arithmetic uses uint64 with wrapping semantics; since 2^ell
divides 2^64, wrapping followed by masking reduces exactly mod 2^ell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from umpc.errors import UsageError
from umpc.fixedpoint import FpConfig, FpValue

__all__ = [
    "Sharing",
    "share",
    "share_many",
    "reconstruct",
    "reconstruct_value",
    "add_local",
    "scale_local",
]


@dataclass(frozen=True)
class Sharing:
    """Shares of one secret, aligned with a tuple of party indices."""

    parties: tuple[int, ...]
    shares: np.ndarray  # uint64, shape (len(parties),)
    cfg: FpConfig

    def __post_init__(self) -> None:
        if len(self.parties) != len(self.shares):
            raise UsageError("one share per party required")
        if len(self.parties) != len(set(self.parties)):
            raise UsageError("party indices must be distinct")


def share_many(raws: np.ndarray, p: int, cfg: FpConfig, rng: np.random.Generator) -> np.ndarray:
    """Share a batch of residues; returns a (len(raws), p) uint64 matrix.

    Column j holds party j's shares. Columns 0..p-2 are uniform draws,
    the last column balances each row.
    """
    if p < 1:
        raise UsageError("need at least one party")
    raws = np.asarray(raws, dtype=np.uint64).reshape(-1)
    out = np.empty((raws.shape[0], p), dtype=np.uint64)
    if p > 1:
        out[:, : p - 1] = rng.integers(0, cfg.modulus, size=(raws.shape[0], p - 1), dtype=np.uint64)
        total = out[:, : p - 1].sum(axis=1)  # wraps mod 2^64; masked below
        out[:, p - 1] = (raws - total) & np.uint64(cfg.mask)
    else:
        out[:, 0] = raws & np.uint64(cfg.mask)
    return out


def share(secret, parties, cfg: FpConfig | None = None, *, rng: np.random.Generator) -> Sharing:
    """Split a secret into one additive share per party.

    Args:
      secret: an FpValue, or a plain residue int (then cfg is required).
      parties: iterable of distinct party indices.
      cfg: ring configuration; defaults to the FpValue's.
      rng: randomness source for the uniform shares.
    """
    if isinstance(secret, FpValue):
        raw = secret.raw
        cfg = secret.cfg if cfg is None else cfg
    else:
        raw = int(secret)
        if cfg is None:
            raise UsageError("cfg required when sharing a raw residue")
        raw %= cfg.modulus
    parties = tuple(int(i) for i in parties)
    mat = share_many(np.array([raw], dtype=np.uint64), len(parties), cfg, rng)
    return Sharing(parties=parties, shares=mat[0].copy(), cfg=cfg)


def reconstruct(s: Sharing) -> int:
    """Sum of all shares modulo 2^ell, as a plain residue int."""
    total = int(s.shares.sum())  # uint64 wrap is harmless: 2^ell | 2^64
    return total & s.cfg.mask


def reconstruct_value(s: Sharing) -> FpValue:
    return FpValue(reconstruct(s), s.cfg)


def _check_compat(a: Sharing, b: Sharing) -> None:
    if a.parties != b.parties:
        raise UsageError("sharings belong to different party sets")
    if a.cfg != b.cfg:
        raise UsageError("sharings use different ring configurations")


def add_local(a: Sharing, b: Sharing) -> Sharing:
    """Each party adds its shares; reconstructs to the ring sum."""
    _check_compat(a, b)
    mask = np.uint64(a.cfg.mask)
    return Sharing(a.parties, (a.shares + b.shares) & mask, a.cfg)


def scale_local(a: Sharing, k: int) -> Sharing:
    """Each party multiplies by a public integer constant."""
    kr = np.uint64(int(k) % a.cfg.modulus)
    mask = np.uint64(a.cfg.mask)
    return Sharing(a.parties, (a.shares * kr) & mask, a.cfg)
