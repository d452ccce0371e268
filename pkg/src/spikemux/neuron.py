"""Neuron models, per-neuron state, and on-chip memory geometry.

The scalar update rules here are the canonical semantics of one neuron:

* integration adds the incoming weight to the membrane (or, for the synaptic
  model, to the synaptic current) with saturation and no threshold check;
* the leak/fire step compares against the threshold (>=), applies the reset
  rule on a spike, and applies decay otherwise (the synaptic model folds the
  current into the membrane before the comparison and decays the current
  every step).

The IF model is the LIF datapath with the membrane decay bypassed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .decay import ALL_UNITS, DecayRate, SelectionUnits, apply_decay
from .errors import CapacityError, ConfigError
from .fxp import QWord, ResetPolicy, sat_add

MAX_NEURONS_PER_CORE = 256


class NeuronModel(enum.Enum):
    IF = "IF"
    LIF = "LIF"
    SYNAPTIC = "Synaptic"


def next_pow2(n: int) -> int:
    if n < 1:
        raise ConfigError(f"cannot size a memory for {n} entries")
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class SynapticMemoryGeometry:
    """Block/row organization of a synaptic weight memory.

    One block per (power-of-two padded) source neuron; each row holds eight
    weights for consecutive destination neurons.
    """

    blocks: int
    rows_per_block: int
    row_bits: int
    block_addr_bits: int
    row_addr_bits: int

    @property
    def row_bytes(self) -> int:
        return self.row_bits // 8

    @property
    def total_rows(self) -> int:
        return self.blocks * self.rows_per_block

    @property
    def total_bits(self) -> int:
        return self.total_rows * self.row_bits


@dataclass(frozen=True)
class StateMemoryGeometry:
    """Row layout of the neuron-state RAM (one row per neuron)."""

    row_bits: int
    rows: int

    @property
    def row_bytes(self) -> int:
        return self.row_bits // 8

    @property
    def total_bits(self) -> int:
        return self.rows * self.row_bits


def _check_count(name: str, n: int) -> None:
    if n < 1:
        raise ConfigError(f"{name} must be at least 1, got {n}")
    if n > MAX_NEURONS_PER_CORE:
        raise CapacityError(
            f"{name} {n} exceeds the per-core limit of {MAX_NEURONS_PER_CORE} neurons")


def size_synaptic_memory(source_neurons: int, dest_neurons: int,
                         weight_bits: int) -> SynapticMemoryGeometry:
    """Derive the weight-memory geometry for a source/destination layer pair.

    Block count and rows-per-block round up to powers of two for fixed-width
    addressing; a row always packs eight weights.
    """
    _check_count("source neuron count", source_neurons)
    _check_count("destination neuron count", dest_neurons)
    if weight_bits < 1:
        raise ConfigError(f"weight width must be positive, got {weight_bits}")
    blocks = next_pow2(source_neurons)
    rows_per_block = next_pow2(math.ceil(dest_neurons / 8))
    return SynapticMemoryGeometry(
        blocks=blocks,
        rows_per_block=rows_per_block,
        row_bits=8 * weight_bits,
        block_addr_bits=blocks.bit_length() - 1,
        row_addr_bits=rows_per_block.bit_length() - 1,
    )


def size_state_memory(neuron_count: int, potential_bits: int,
                      current_bits: int | None = None) -> StateMemoryGeometry:
    """Derive the state-RAM geometry: fields packed per row, byte-aligned."""
    _check_count("neuron count", neuron_count)
    if potential_bits < 1:
        raise ConfigError(f"potential width must be positive, got {potential_bits}")
    if current_bits is not None and current_bits < 1:
        raise ConfigError(f"current width must be positive, got {current_bits}")
    field_bits = potential_bits + (current_bits or 0)
    return StateMemoryGeometry(
        row_bits=math.ceil(field_bits / 8) * 8,
        rows=next_pow2(neuron_count),
    )


@dataclass(frozen=True)
class NeuronState:
    """Dynamic state of one neuron. ``syn_current`` exists only for the
    synaptic model; ``fired`` latches the spike for the next step."""

    membrane: QWord
    syn_current: QWord | None = None
    fired: bool = False


@dataclass(frozen=True)
class LeakFireConfig:
    """Per-layer parameters consumed by the leak/spike phase."""

    threshold: QWord
    beta: DecayRate
    alpha: DecayRate | None = None
    reset: ResetPolicy = ResetPolicy.RESET_TO_ZERO
    units: SelectionUnits = ALL_UNITS


def integrate(state: NeuronState, weight: QWord) -> NeuronState:
    """Accumulate one incoming weight; no threshold evaluation happens here."""
    w = QWord(weight.value, state.membrane.format)
    if state.syn_current is not None:
        wc = QWord(weight.value, state.syn_current.format)
        return NeuronState(state.membrane, sat_add(state.syn_current, wc), state.fired)
    return NeuronState(sat_add(state.membrane, w), None, state.fired)


def _reset(membrane: QWord, threshold: QWord, policy: ResetPolicy) -> QWord:
    if policy is ResetPolicy.RESET_TO_ZERO:
        return QWord(0, membrane.format)
    fmt = membrane.format
    return QWord(fmt.clamp(membrane.value - threshold.value), fmt)


def leak_and_fire(state: NeuronState, cfg: LeakFireConfig) -> tuple[NeuronState, bool]:
    """End-of-step evaluation of one neuron.

    Returns the post-step state and whether the neuron fired.
    """
    if state.syn_current is not None:
        if cfg.alpha is None:
            raise ConfigError("synaptic model requires a current decay rate")
        decayed = apply_decay(state.membrane, cfg.beta, cfg.units)
        mem = sat_add(decayed, QWord(state.syn_current.value, decayed.format))
        fired = mem.value >= cfg.threshold.value
        if fired:
            mem = _reset(mem, cfg.threshold, cfg.reset)
        syn = apply_decay(state.syn_current, cfg.alpha, cfg.units)
        return NeuronState(mem, syn, fired), fired
    fired = state.membrane.value >= cfg.threshold.value
    if fired:
        mem = _reset(state.membrane, cfg.threshold, cfg.reset)
    else:
        mem = apply_decay(state.membrane, cfg.beta, cfg.units)
    return NeuronState(mem, None, fired), fired


def lazy_reset(state: NeuronState) -> NeuronState:
    """End-of-input reset: zeros written in place of the computed update."""
    zero_mem = QWord(0, state.membrane.format)
    zero_syn = None
    if state.syn_current is not None:
        zero_syn = QWord(0, state.syn_current.format)
    return NeuronState(zero_mem, zero_syn, False)


# --- byte layouts -----------------------------------------------------------
#
# Rows serialize little-endian. A state row packs the potential field in the
# low bits followed by the current field; a weight row packs eight lanes of
# weight_bits each, lane j holding destination neuron 8*row + j. These layouts
# are what the byte-addressed SPI access reads and writes.

def _to_field(value: int, bits: int) -> int:
    return value & ((1 << bits) - 1)


def sign_extend(value: int, bits: int) -> int:
    value &= (1 << bits) - 1
    if value & (1 << (bits - 1)):
        value -= 1 << bits
    return value


def pack_state_row(potential: int, current: int | None, potential_bits: int,
                   current_bits: int | None, row_bytes: int) -> bytes:
    word = _to_field(potential, potential_bits)
    if current_bits:
        word |= _to_field(current or 0, current_bits) << potential_bits
    return word.to_bytes(row_bytes, "little")


def unpack_state_row(data: bytes, potential_bits: int,
                     current_bits: int | None) -> tuple[int, int | None]:
    word = int.from_bytes(data, "little")
    potential = sign_extend(word, potential_bits)
    current = None
    if current_bits:
        current = sign_extend(word >> potential_bits, current_bits)
    return potential, current


def pack_weight_row(lanes, weight_bits: int) -> bytes:
    """Pack up to eight weights into one row image (missing lanes are zero)."""
    word = 0
    for j, w in enumerate(lanes):
        word |= _to_field(w, weight_bits) << (j * weight_bits)
    return word.to_bytes(weight_bits, "little")


def pack_weight_memory(matrix, geometry: SynapticMemoryGeometry,
                       weight_bits: int) -> bytes:
    """Full byte image of a synaptic memory from a [source][dest] matrix.

    Padding blocks/rows beyond the real neuron counts stay zero.
    """
    source_count = len(matrix)
    image = bytearray(geometry.total_rows * geometry.row_bytes)
    for src in range(source_count):
        weights = matrix[src]
        for row in range((len(weights) + 7) // 8):
            lanes = weights[8 * row: 8 * row + 8]
            offset = (src * geometry.rows_per_block + row) * geometry.row_bytes
            image[offset: offset + geometry.row_bytes] = pack_weight_row(lanes, weight_bits)
    return bytes(image)


def pack_self_weight_rows(weights, weight_bits: int) -> bytes:
    """Byte image of the per-neuron self-weight store (8 lanes per row)."""
    image = bytearray()
    for row in range((len(weights) + 7) // 8):
        image += pack_weight_row(weights[8 * row: 8 * row + 8], weight_bits)
    return bytes(image)


def unpack_weight_memory(image: bytes, geometry: SynapticMemoryGeometry,
                         weight_bits: int, source_count: int,
                         dest_count: int) -> list:
    """Inverse of `pack_weight_memory`: [source][dest] integer matrix."""
    matrix = []
    for src in range(source_count):
        weights = []
        for row in range((dest_count + 7) // 8):
            base = (src * geometry.rows_per_block + row) * geometry.row_bytes
            word = int.from_bytes(image[base:base + geometry.row_bytes], "little")
            for lane in range(min(8, dest_count - 8 * row)):
                weights.append(sign_extend(word >> (lane * weight_bits), weight_bits))
        matrix.append(weights)
    return matrix


def unpack_self_weight_rows(image: bytes, weight_bits: int, count: int) -> list:
    """Inverse of `pack_self_weight_rows`."""
    weights = []
    for row in range((count + 7) // 8):
        word = int.from_bytes(image[row * weight_bits:(row + 1) * weight_bits], "little")
        for lane in range(min(8, count - 8 * row)):
            weights.append(sign_extend(word >> (lane * weight_bits), weight_bits))
    return weights
