"""Multiplier-free leakage: a shift-and-add network with a bypass path.

A decay factor k/256 (k in 0..255) is realized by summing right-shifted
copies of the input magnitude. The control word is 9 bits wide: bit 8 is the
bypass (no decay, used to turn an LIF datapath into an IF one), and bits 7..0
enable the individual shifts — bit 7 selects ``x >> 1`` down to bit 0 which
selects ``x >> 8``, so bits 7..0 read as an integer are exactly k.

Shifting happens in the magnitude domain with the sign reapplied afterwards;
an arithmetic shift of a two's-complement negative would round toward
negative infinity and break sign symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .fxp import QWord

BYPASS_BIT = 1 << 8
K_MASK = 0xFF


@dataclass(frozen=True)
class DecayRate:
    """9-bit decay control word (bypass bit + shift-enable mask)."""

    raw: int

    def __post_init__(self):
        if not 0 <= self.raw <= 0x1FF:
            raise ConfigError(f"decay control word must be 9 bits, got {self.raw}")

    @classmethod
    def from_k(cls, k: int) -> "DecayRate":
        if not 0 <= k <= 255:
            raise ConfigError(f"decay numerator must be 0..255, got {k}")
        return cls(k)

    @classmethod
    def bypassed(cls) -> "DecayRate":
        return cls(BYPASS_BIT)

    @property
    def bypass(self) -> bool:
        return bool(self.raw & BYPASS_BIT)

    @property
    def k(self) -> int:
        return self.raw & K_MASK

    def factor(self) -> float:
        """The encoded retention factor."""
        return 1.0 if self.bypass else self.k / 256.0

    def shifts(self) -> tuple[int, ...]:
        """Enabled shift distances, in increasing order (empty under bypass)."""
        if self.bypass:
            return ()
        return tuple(s for s in range(1, 9) if (self.k >> (8 - s)) & 1)


@dataclass(frozen=True)
class SelectionUnits:
    """Design-time mask of the four shift-pair blocks.

    Unit i covers the shift pair (2i+1, 2i+2); a control word is realizable
    only if every shift it requests belongs to an enabled unit.
    """

    mask: int = 0xF

    def __post_init__(self):
        if not 0 <= self.mask <= 0xF:
            raise ConfigError(f"selection mask must be 4 bits, got {self.mask}")

    def allows(self, rate: DecayRate) -> bool:
        if rate.bypass:
            return True
        for s in rate.shifts():
            unit = (s - 1) // 2
            if not (self.mask >> unit) & 1:
                return False
        return True


ALL_UNITS = SelectionUnits(0xF)


def encode_decay(factor: float, leak_bits: int) -> DecayRate:
    """Encode a retention factor in [0, 1] as a decay control word.

    ``leak_bits`` (1..8) restricts the control word to its top bits: the low
    ``8 - leak_bits`` shift enables are forced to zero. A factor so close to
    one that it rounds past k=255 encodes as the bypass path, which keeps the
    worst-case encoding error at full precision within 1/512.
    """
    if not 0.0 <= factor <= 1.0:
        raise ConfigError(f"decay factor must lie in [0, 1], got {factor}")
    if not 1 <= leak_bits <= 8:
        raise ConfigError(f"leak precision must be 1..8 bits, got {leak_bits}")
    k = int(factor * 256.0 + 0.5)  # round half up
    if k >= 256:
        return DecayRate.bypassed()
    k &= ~((1 << (8 - leak_bits)) - 1) & K_MASK
    return DecayRate.from_k(k)


def apply_decay_int(value: int, raw: int) -> int:
    """Scalar shift-and-add decay of a plain integer.

    This is the reference-semantics routine; the array kernels must match it
    bit for bit.
    """
    if raw & BYPASS_BIT:
        return value
    k = raw & K_MASK
    mag = -value if value < 0 else value
    acc = 0
    for s in range(1, 9):
        if (k >> (8 - s)) & 1:
            acc += mag >> s
    return -acc if value < 0 else acc


def apply_decay(x: QWord, rate: DecayRate, units: SelectionUnits = ALL_UNITS) -> QWord:
    """Decay a fixed-point word through the shift network.

    Raises if the control word requests a shift pair that the design-time
    selection mask excludes.
    """
    if not units.allows(rate):
        raise ConfigError(
            f"decay word {rate.raw:#05x} uses shift pairs disabled by "
            f"selection mask {units.mask:#03x}")
    return QWord(apply_decay_int(x.value, rate.raw), x.format)
