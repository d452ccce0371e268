"""Signed fixed-point formats, quantization, and saturating arithmetic.

Everything downstream (neuron updates, decay, the dense oracle) is defined in
terms of the scalar operations here, so the conventions are pinned once:

* two's-complement signed integers, ``bits`` total width (2..32);
* rounding is round-half-away-from-zero, which keeps quantization
  sign-symmetric;
* additions saturate at the format bounds instead of wrapping.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError

MIN_BITS = 2
MAX_BITS = 32


def round_half_away(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    if x >= 0:
        return math.floor(x + 0.5)
    return math.ceil(x - 0.5)


@dataclass(frozen=True)
class QFormat:
    """Width descriptor for a signed fixed-point field."""

    bits: int

    def __post_init__(self):
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ConfigError(f"format width must be {MIN_BITS}..{MAX_BITS}, got {self.bits}")

    @property
    def min_value(self) -> int:
        return -(1 << (self.bits - 1))

    @property
    def max_value(self) -> int:
        return (1 << (self.bits - 1)) - 1

    def contains(self, value: int) -> bool:
        return self.min_value <= value <= self.max_value

    def clamp(self, value: int) -> int:
        if value > self.max_value:
            return self.max_value
        if value < self.min_value:
            return self.min_value
        return value


@dataclass(frozen=True)
class QWord:
    """A signed fixed-point value together with its format."""

    value: int
    format: QFormat

    def __post_init__(self):
        if not self.format.contains(self.value):
            raise ConfigError(
                f"value {self.value} outside {self.format.bits}-bit range "
                f"[{self.format.min_value}, {self.format.max_value}]")


class ResetPolicy(enum.Enum):
    RESET_TO_ZERO = "zero"
    RESET_BY_SUBTRACT = "subtract"


@dataclass(frozen=True)
class LayerQuantization:
    """Per-layer quantization record: float units per weight LSB plus the
    threshold and reset rule expressed in the membrane-potential format."""

    weight_scale: float
    threshold_q: QWord
    reset_policy: ResetPolicy

    def __post_init__(self):
        if not self.weight_scale > 0:
            raise ConfigError(f"weight_scale must be positive, got {self.weight_scale}")


def sat_add_int(a: int, b: int, lo: int, hi: int) -> int:
    """Saturating integer addition onto explicit bounds."""
    s = a + b
    if s > hi:
        return hi
    if s < lo:
        return lo
    return s


def sat_add(a: QWord, b: QWord) -> QWord:
    """Add two words of the same format, clamping to the format range."""
    if a.format != b.format:
        raise ConfigError(f"format mismatch: {a.format.bits} vs {b.format.bits} bits")
    fmt = a.format
    return QWord(sat_add_int(a.value, b.value, fmt.min_value, fmt.max_value), fmt)


def quantize_values(weights, fmt: QFormat, lsb: float | None = None):
    """Quantize a float vector to integers of ``fmt``.

    With ``lsb`` omitted, symmetric per-tensor scaling is used: the largest
    magnitude maps to the top positive code. An explicit ``lsb`` (float units
    per integer step) supports sharing one scale across several tensors.
    Returns ``(ints, lsb)``; an all-zero input yields zeros with lsb 1.0.
    """
    if not weights:
        raise ConfigError("cannot quantize an empty weight vector")
    for w in weights:
        if not math.isfinite(w):
            raise ConfigError(f"non-finite weight {w!r} cannot be quantized")
    qmax = fmt.max_value
    if lsb is None:
        peak = max(abs(w) for w in weights)
        if peak == 0.0:
            return [0] * len(weights), 1.0
        lsb = peak / qmax
    q = [fmt.clamp(round_half_away(w / lsb)) for w in weights]
    return q, lsb


def quantize_weights(weights, fmt: QFormat):
    """Symmetric max-abs quantization of one weight tensor.

    Returns the quantized words and the weight scale (float units per LSB).
    """
    ints, scale = quantize_values(list(weights), fmt)
    return [QWord(v, fmt) for v in ints], scale


def quantize_threshold(threshold: float, weight_scale: float, potential_fmt: QFormat) -> QWord:
    """Rescale a float threshold into membrane-potential LSBs.

    One weight LSB equals one potential LSB, so the threshold divides by the
    layer's weight scale.
    """
    if not math.isfinite(threshold):
        raise ConfigError(f"non-finite threshold {threshold!r}")
    return QWord(potential_fmt.clamp(round_half_away(threshold / weight_scale)), potential_fmt)
