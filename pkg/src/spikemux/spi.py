"""SPI frame codec, the write-only register file, and model loading.

Every transaction is one fixed-length frame, modeled atomically: a 23-bit
address word followed by a data word. Address word layout:

* bit 22 — mode: 1 = memory access, 0 = configuration write
* bit 21 — read/write flag for memory access (1 = write)
* bits 20:19 — memory target: 00 neuron state, 01 feedforward synaptic,
  10 recurrent synaptic (11 is invalid)
* bits 18:0 — payload. Neuron-state access splits it as [7:0] row and
  [18:8] byte offset; synaptic access as [12:0] row and [18:13] byte offset.
  A configuration write packs [18:15] register index and [14:0] value
  (register values are 15-bit words; signed ones use two's complement).

Memory writes commit the low 8 bits of the data word; reads return the
addressed byte on MISO and leave state untouched. A core executes commands
only while the broadcast core-select register matches its design-time ID —
except core-select writes themselves, which every core accepts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ConfigError, ProtocolError
from .fxp import ResetPolicy
from .model import Topology
from .neuron import NeuronModel, pack_self_weight_rows, pack_weight_memory

MODE_BIT = 1 << 22
RW_BIT = 1 << 21
TARGET_SHIFT = 19
PAYLOAD_MASK = (1 << 19) - 1
WORD_MASK = (1 << 23) - 1

REG_VALUE_BITS = 15
REG_VALUE_MASK = (1 << REG_VALUE_BITS) - 1

# Register map (an implementation convention; the hardware leaves it open).
REG_CORE_SELECT = 0
REG_NEURON_MODEL = 1
REG_ACTIVE_NEURON_COUNT = 2
REG_THRESHOLD = 3
REG_DECAY_BETA = 4
REG_DECAY_ALPHA = 5
REG_RESET_POLICY = 6
REG_TIMESTEP_COUNT = 7
REG_RECURRENT_MODE = 8
REG_SPI_STATE = 9
REG_CTRL_COORD_A = 10
REG_CTRL_COORD_B = 11
REGISTER_COUNT = 12


# Codes stored in the model/reset/topology registers.
MODEL_CODES = {NeuronModel.IF: 0, NeuronModel.LIF: 1, NeuronModel.SYNAPTIC: 2}
RESET_CODES = {ResetPolicy.RESET_TO_ZERO: 0, ResetPolicy.RESET_BY_SUBTRACT: 1}
TOPOLOGY_CODES = {Topology.FF: 0, Topology.ATA_F: 1, Topology.ATA_T: 2}

MODEL_FROM_CODE = {v: k for k, v in MODEL_CODES.items()}
RESET_FROM_CODE = {v: k for k, v in RESET_CODES.items()}
TOPOLOGY_FROM_CODE = {v: k for k, v in TOPOLOGY_CODES.items()}


class SpiMode(enum.Enum):
    CONFIG_WRITE = 0
    MEMORY = 1


class SpiRw(enum.Enum):
    READ = 0
    WRITE = 1


class MemTarget(enum.Enum):
    NEURON_STATE = 0
    FEEDFORWARD = 1
    RECURRENT = 2


@dataclass(frozen=True)
class SpiCommand:
    mode: SpiMode
    rw: SpiRw = SpiRw.READ
    target: MemTarget = MemTarget.NEURON_STATE
    payload: int = 0

    def __post_init__(self):
        if not 0 <= self.payload <= PAYLOAD_MASK:
            raise ProtocolError(f"payload must fit 19 bits, got {self.payload:#x}")

    @classmethod
    def config_write(cls, register: int, value: int) -> "SpiCommand":
        if not 0 <= register < REGISTER_COUNT:
            raise ProtocolError(f"register index must be 0..{REGISTER_COUNT - 1}, got {register}")
        if not 0 <= value <= REG_VALUE_MASK:
            raise ProtocolError(f"register value must fit {REG_VALUE_BITS} bits, got {value:#x}")
        return cls(SpiMode.CONFIG_WRITE, SpiRw.WRITE, MemTarget.NEURON_STATE,
                   (register << REG_VALUE_BITS) | value)

    @classmethod
    def neuron_state(cls, rw: SpiRw, row: int, byte_offset: int) -> "SpiCommand":
        if not 0 <= row <= 0xFF:
            raise ProtocolError(f"state row must fit 8 bits, got {row}")
        if not 0 <= byte_offset <= 0x7FF:
            raise ProtocolError(f"state byte offset must fit 11 bits, got {byte_offset}")
        return cls(SpiMode.MEMORY, rw, MemTarget.NEURON_STATE, (byte_offset << 8) | row)

    @classmethod
    def synaptic(cls, rw: SpiRw, target: MemTarget, row: int, byte_offset: int) -> "SpiCommand":
        if target is MemTarget.NEURON_STATE:
            raise ProtocolError("synaptic command requires a synaptic target")
        if not 0 <= row <= 0x1FFF:
            raise ProtocolError(f"synaptic row must fit 13 bits, got {row}")
        if not 0 <= byte_offset <= 0x3F:
            raise ProtocolError(f"synaptic byte offset must fit 6 bits, got {byte_offset}")
        return cls(SpiMode.MEMORY, rw, target, (byte_offset << 13) | row)

    @property
    def register_index(self) -> int:
        return self.payload >> REG_VALUE_BITS

    @property
    def register_value(self) -> int:
        return self.payload & REG_VALUE_MASK


def encode_address_word(cmd: SpiCommand) -> int:
    """Pack a command into the 23-bit address word."""
    if cmd.mode is SpiMode.CONFIG_WRITE:
        return cmd.payload
    word = MODE_BIT | cmd.payload
    if cmd.rw is SpiRw.WRITE:
        word |= RW_BIT
    word |= cmd.target.value << TARGET_SHIFT
    return word


def decode_address_word(word: int) -> SpiCommand:
    """Inverse of `encode_address_word`."""
    if not 0 <= word <= WORD_MASK:
        raise ProtocolError(f"address word must fit 23 bits, got {word:#x}")
    payload = word & PAYLOAD_MASK
    if not word & MODE_BIT:
        return SpiCommand(SpiMode.CONFIG_WRITE, SpiRw.WRITE, MemTarget.NEURON_STATE, payload)
    target_code = (word >> TARGET_SHIFT) & 0b11
    if target_code == 0b11:
        raise ProtocolError("invalid memory target 0b11")
    rw = SpiRw.WRITE if word & RW_BIT else SpiRw.READ
    return SpiCommand(SpiMode.MEMORY, rw, MemTarget(target_code), payload)


class SpiSlave:
    """Per-core SPI endpoint: 12 write-only registers plus byte access to the
    neuron-state, feedforward, and recurrent memories."""

    def __init__(self, core_id: int, state_rows: int, state_row_bytes: int,
                 ff_rows: int, ff_row_bytes: int,
                 rec_rows: int = 0, rec_row_bytes: int = 0):
        self.core_id = core_id
        self.registers = [0] * REGISTER_COUNT
        self._dims = {
            MemTarget.NEURON_STATE: (state_rows, state_row_bytes),
            MemTarget.FEEDFORWARD: (ff_rows, ff_row_bytes),
            MemTarget.RECURRENT: (rec_rows, rec_row_bytes),
        }
        self.state_mem = bytearray(state_rows * state_row_bytes)
        self.ff_mem = bytearray(ff_rows * ff_row_bytes)
        self.rec_mem = bytearray(rec_rows * rec_row_bytes) if rec_rows else None

    @property
    def selected(self) -> bool:
        return self.registers[REG_CORE_SELECT] == self.core_id

    def _memory(self, target: MemTarget) -> bytearray | None:
        if target is MemTarget.NEURON_STATE:
            return self.state_mem
        if target is MemTarget.FEEDFORWARD:
            return self.ff_mem
        return self.rec_mem

    def handle_frame(self, addr_word: int, data_word: int | None = None) -> int | None:
        """Process one atomic frame; returns the MISO byte for selected reads."""
        cmd = decode_address_word(addr_word)
        if cmd.mode is SpiMode.CONFIG_WRITE:
            if cmd.register_index >= REGISTER_COUNT:
                raise ProtocolError(f"register index {cmd.register_index} out of range")
            if cmd.register_index == REG_CORE_SELECT or self.selected:
                self.registers[cmd.register_index] = cmd.register_value
            return None
        if not self.selected:
            return None
        rows, row_bytes = self._dims[cmd.target]
        memory = self._memory(cmd.target)
        if memory is None or rows == 0:
            raise ProtocolError(f"core {self.core_id} has no {cmd.target.name} memory")
        if cmd.target is MemTarget.NEURON_STATE:
            row, offset = cmd.payload & 0xFF, cmd.payload >> 8
        else:
            row, offset = cmd.payload & 0x1FFF, cmd.payload >> 13
        if row >= rows or offset >= row_bytes:
            raise ProtocolError(
                f"address (row {row}, byte {offset}) outside {cmd.target.name} "
                f"memory of {rows}x{row_bytes} bytes")
        index = row * row_bytes + offset
        if cmd.rw is SpiRw.WRITE:
            if data_word is None:
                raise ProtocolError("memory write frame without a data word")
            memory[index] = data_word & 0xFF
            return None
        return memory[index]


def run_frame(master_word: int, data_word: int | None, slave: SpiSlave) -> int | None:
    """One 46-cycle transaction against one slave, modeled atomically."""
    return slave.handle_frame(master_word, data_word)


def _write_memory(slave: SpiSlave, target: MemTarget, row_bytes: int, image: bytes) -> None:
    for index, byte in enumerate(image):
        row, offset = divmod(index, row_bytes)
        word = encode_address_word(SpiCommand.synaptic(SpiRw.WRITE, target, row, offset))
        run_frame(word, byte, slave)


def threshold_register_value(threshold: int) -> int:
    """Two's-complement encoding of a threshold into the 15-bit register."""
    limit = 1 << (REG_VALUE_BITS - 1)
    if not -limit <= threshold < limit:
        raise ConfigError(
            f"threshold {threshold} does not fit the {REG_VALUE_BITS}-bit "
            "configuration register")
    return threshold & REG_VALUE_MASK


def load_model_over_spi(qmodel, cores) -> None:
    """Program every core of a network through SPI frames only.

    Writes the per-layer registers, feedforward weights, and recurrent
    weights. Geometry mismatches are rejected before the first frame.
    """
    layers = qmodel.layers
    if len(layers) != len(cores):
        raise ConfigError(f"model has {len(layers)} layers but network has {len(cores)} cores")
    for layer, core in zip(layers, cores):
        cfg = core.config
        if (layer.neuron_count != cfg.neuron_count
                or layer.source_count != cfg.source_count
                or layer.topology != cfg.topology
                or layer.model != cfg.model
                or layer.weight_bits != cfg.ff_weight_bits):
            raise ConfigError(
                f"layer/core geometry mismatch on core {cfg.core_id}: "
                f"{layer.source_count}->{layer.neuron_count} {layer.topology.value} "
                f"{layer.model.value} vs core "
                f"{cfg.source_count}->{cfg.neuron_count} {cfg.topology.value} {cfg.model.value}")
        threshold_register_value(layer.threshold_q)  # fail before any write

    for index, (layer, core) in enumerate(zip(layers, cores)):
        cfg = core.config
        select = encode_address_word(SpiCommand.config_write(REG_CORE_SELECT, index))
        for c in cores:  # broadcast: every slave latches the select value
            run_frame(select, None, c.slave)

        values = {
            REG_NEURON_MODEL: MODEL_CODES[layer.model],
            REG_ACTIVE_NEURON_COUNT: layer.neuron_count,
            REG_THRESHOLD: threshold_register_value(layer.threshold_q),
            REG_DECAY_BETA: layer.beta.raw,
            REG_DECAY_ALPHA: layer.alpha.raw if layer.alpha is not None else 0,
            REG_RESET_POLICY: RESET_CODES[layer.reset],
            REG_TIMESTEP_COUNT: qmodel.timesteps,
            REG_RECURRENT_MODE: TOPOLOGY_CODES[layer.topology],
            REG_SPI_STATE: 0,
            REG_CTRL_COORD_A: 0,
            REG_CTRL_COORD_B: 0,
        }
        for register, value in values.items():
            word = encode_address_word(SpiCommand.config_write(register, value))
            run_frame(word, None, core.slave)

        ff_geom = core.ff_geometry
        ff_image = pack_weight_memory(layer.ff_q, ff_geom, layer.weight_bits)
        _write_memory(core.slave, MemTarget.FEEDFORWARD, ff_geom.row_bytes, ff_image)

        if layer.rec_q is not None:
            rec_geom = core.rec_geometry
            rec_image = pack_weight_memory(layer.rec_q, rec_geom, layer.rec_weight_bits)
            _write_memory(core.slave, MemTarget.RECURRENT, rec_geom.row_bytes, rec_image)
        elif layer.self_q is not None:
            rec_image = pack_self_weight_rows(layer.self_q, layer.rec_weight_bits)
            _write_memory(core.slave, MemTarget.RECURRENT, layer.rec_weight_bits, rec_image)
