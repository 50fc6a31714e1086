"""Fixed-precision arithmetic in the ring Z_{2^ell}.

Real quantities are stored as unsigned residues ``raw`` in ``[0, 2^ell)``
carrying an implicit scale ``h = 2^-c``: residues in ``[0, 2^(ell-1))``
represent ``raw * h`` and residues in ``[2^(ell-1), 2^ell)`` represent
``(raw - 2^ell) * h`` (two's-complement signed reading).  Encoding rounds
half away from zero, so a decoded value is always within ``h/2`` of the
real input.

The ring width is capped at 63 bits so residues, sums and products stay
exactly representable in unsigned 64-bit arithmetic (``2^ell`` divides
``2^64``, hence wrapping uint64 ops reduce correctly modulo ``2^ell``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from umpc.errors import RangeError, UsageError

MAX_RING_BITS = 63


@dataclass(frozen=True)
class FpConfig:
    """Ring width ``ell`` and fractional bit count ``c``.

    Defaults give a 40-bit ring with grid step ``2^-14``.
    """

    ell: int = 40
    c: int = 14

    def __post_init__(self) -> None:
        if not isinstance(self.ell, int) or not isinstance(self.c, int):
            raise UsageError("ell and c must be integers")
        if not 1 <= self.ell <= MAX_RING_BITS:
            raise UsageError(f"ell must be in [1, {MAX_RING_BITS}], got {self.ell}")
        if not 0 <= self.c < self.ell:
            raise UsageError(f"c must satisfy 0 <= c < ell, got c={self.c}, ell={self.ell}")

    @property
    def modulus(self) -> int:
        return 1 << self.ell

    @property
    def half(self) -> int:
        """First residue with a negative signed reading."""
        return 1 << (self.ell - 1)

    @property
    def mask(self) -> int:
        return self.modulus - 1

    @property
    def scale(self) -> float:
        """Grid step h = 2^-c (exact as a float)."""
        return 2.0 ** -self.c

    @property
    def magnitude_bound(self) -> int:
        """Encodable values must satisfy |q| < 2^(ell - c - 1)."""
        return 1 << (self.ell - self.c - 1)


@dataclass(frozen=True)
class FpValue:
    """An unsigned residue together with its ring configuration."""

    raw: int
    cfg: FpConfig

    def __post_init__(self) -> None:
        if not 0 <= self.raw < self.cfg.modulus:
            raise UsageError(f"raw residue {self.raw} outside [0, 2^{self.cfg.ell})")

    @property
    def signed(self) -> int:
        """Two's-complement signed integer reading of the residue."""
        if self.raw >= self.cfg.half:
            return self.raw - self.cfg.modulus
        return self.raw

    def decode(self) -> Fraction:
        """Exact rational value: signed reading times 2^-c."""
        return Fraction(self.signed, 1 << self.cfg.c)

    def value(self) -> float:
        """Float value (exact whenever |signed| <= 2^53, e.g. at default width)."""
        return float(self.signed) * self.cfg.scale

    def __add__(self, other: "FpValue") -> "FpValue":
        return ring_add(self, other)

    def __neg__(self) -> "FpValue":
        return ring_neg(self)

    def __sub__(self, other: "FpValue") -> "FpValue":
        return ring_add(self, ring_neg(other))


def _round_half_away(x: Fraction) -> int:
    n, d = abs(x).numerator, abs(x).denominator
    r = (2 * n + d) // (2 * d)
    return -r if x < 0 else r


def encode(q, cfg: FpConfig = FpConfig()) -> FpValue:
    """Encode a real number onto the grid, rounding half away from zero.

    Args:
      q: int, float, or Fraction with |q| < 2^(ell - c - 1).
      cfg: ring configuration.

    Raises:
      RangeError: if the magnitude precondition fails (the message names
        the bound), including the corner case where rounding would land
        exactly on the sign boundary 2^(ell-1).
    """
    x = Fraction(q)
    bound = cfg.magnitude_bound
    if abs(x) >= bound:
        raise RangeError(f"|{float(x)}| >= 2^{cfg.ell - cfg.c - 1} = {bound}, not encodable")
    r = _round_half_away(x * (1 << cfg.c))
    if r >= cfg.half:
        raise RangeError(f"value rounds onto the sign boundary; |q| must stay below {bound}")
    return FpValue(r % cfg.modulus, cfg)


def decode(v: FpValue) -> Fraction:
    """Exact inverse of the signed mapping (see :meth:`FpValue.decode`)."""
    return v.decode()


def ring_add(a: FpValue, b: FpValue) -> FpValue:
    if a.cfg != b.cfg:
        raise UsageError("ring_add requires matching configurations")
    return FpValue((a.raw + b.raw) % a.cfg.modulus, a.cfg)


def ring_neg(a: FpValue) -> FpValue:
    return FpValue((-a.raw) % a.cfg.modulus, a.cfg)


def encode_array(values: np.ndarray, cfg: FpConfig = FpConfig()) -> np.ndarray:
    """Vectorized encode of float64 values to uint64 residues.

    Multiplying a float64 by 2^c is exact (power-of-two scaling), so this
    agrees bit-for-bit with :func:`encode` on every float input.
    """
    x = np.asarray(values, dtype=np.float64)
    bound = float(cfg.magnitude_bound)
    if not np.all(np.isfinite(x)):
        raise RangeError("non-finite value is not encodable")
    if np.any(np.abs(x) >= bound):
        raise RangeError(f"magnitude >= 2^{cfg.ell - cfg.c - 1} = {cfg.magnitude_bound}, not encodable")
    scaled = x * float(1 << cfg.c)
    r = np.floor(np.abs(scaled) + 0.5)
    if np.any(r >= float(cfg.half)):
        raise RangeError("value rounds onto the sign boundary")
    signed = np.where(scaled < 0, -r, r).astype(np.int64)
    return (signed % np.int64(cfg.modulus)).astype(np.uint64)


def decode_signed_array(raw: np.ndarray, cfg: FpConfig = FpConfig()) -> np.ndarray:
    """Vectorized signed reading of uint64 residues (int64 output)."""
    r = np.asarray(raw, dtype=np.uint64).astype(np.int64)
    return np.where(r >= np.int64(cfg.half), r - np.int64(cfg.modulus), r)


def signed_to_raw(signed: int, cfg: FpConfig = FpConfig()) -> int:
    """Map a signed integer (grid units) to its residue."""
    return signed % cfg.modulus


def raw_to_signed(raw: int, cfg: FpConfig = FpConfig()) -> int:
    """Signed reading of a plain residue integer."""
    raw %= cfg.modulus
    return raw - cfg.modulus if raw >= cfg.half else raw
