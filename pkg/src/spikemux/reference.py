"""Dense reference simulator: the equivalence oracle for the event pipeline.

A second, deliberately plain implementation — nested loops over steps, layers,
and neurons on scalar integers, no queues, no packets, no array kernels. It
follows the same canonical ordering as the event-driven path (feedforward
integration in arrival order, recurrent integration of the previous step's
spikes at the terminator, index-order leak/spike sweep, same-step consumption
by the next layer) and must match it bit for bit on every state and spike.
"""

from __future__ import annotations

from . import spi
from .decay import apply_decay_int
from .errors import ConfigError, ProtocolError
from .fxp import sat_add_int
from .model import Topology
from .neuron import NeuronModel, sign_extend
from .system import (EventSample, InferenceResult, Network, StepRecord,
                     _driver_emissions, assemble_trace)
from .aer import PacketKind


class _DenseLayer:
    def __init__(self, core):
        cfg = core.config
        regs = core.slave.registers
        self.model = spi.MODEL_FROM_CODE.get(regs[spi.REG_NEURON_MODEL])
        self.topology = spi.TOPOLOGY_FROM_CODE.get(regs[spi.REG_RECURRENT_MODE])
        if self.model is not cfg.model or self.topology is not cfg.topology:
            raise ConfigError(f"core {cfg.core_id}: register/design mismatch")
        self.active = regs[spi.REG_ACTIVE_NEURON_COUNT]
        self.threshold = sign_extend(regs[spi.REG_THRESHOLD], spi.REG_VALUE_BITS)
        self.beta_raw = regs[spi.REG_DECAY_BETA] & 0x1FF
        self.alpha_raw = regs[spi.REG_DECAY_ALPHA] & 0x1FF
        self.subtract_reset = bool(regs[spi.REG_RESET_POLICY] & 1)
        self.source_count = cfg.source_count
        self.lo = -(1 << (cfg.potential_bits - 1))
        self.hi = (1 << (cfg.potential_bits - 1)) - 1
        self.synaptic = self.model is NeuronModel.SYNAPTIC
        # spikes integrate into the current for the synaptic model, which
        # saturates at its own field width
        if self.synaptic:
            self.tgt_lo = -(1 << (cfg.current_bits - 1))
            self.tgt_hi = (1 << (cfg.current_bits - 1)) - 1
        else:
            self.tgt_lo, self.tgt_hi = self.lo, self.hi

        ff_geom = core.ff_geometry
        self.ff_w = self._decode_matrix(core.slave.ff_mem, ff_geom.rows_per_block,
                                        ff_geom.row_bytes, cfg.ff_weight_bits,
                                        cfg.source_count)
        self.rec_w = None
        self.self_w = None
        if self.topology is Topology.ATA_T:
            rec_geom = core.rec_geometry
            self.rec_w = self._decode_matrix(core.slave.rec_mem,
                                             rec_geom.rows_per_block,
                                             rec_geom.row_bytes,
                                             cfg.rec_weight_bits, cfg.neuron_count)
        elif self.topology is Topology.ATA_F:
            wb = cfg.rec_weight_bits
            flat = []
            rows = (self.active + 7) // 8
            for r in range(rows):
                word = int.from_bytes(core.slave.rec_mem[r * wb:(r + 1) * wb], "little")
                for lane in range(8):
                    flat.append(sign_extend(word >> (lane * wb), wb))
            self.self_w = flat[:self.active]

        self.membrane = [0] * self.active
        self.syn = [0] * self.active if self.synaptic else None
        self.prev_fired: list[int] = []
        self.emissions: list[tuple[int, PacketKind, int]] = []
        self.records: list[StepRecord] = []

    def _decode_matrix(self, image, rows_per_block, row_bytes, weight_bits, sources):
        matrix = []
        for src in range(sources):
            weights = []
            for row in range((self.active + 7) // 8):
                base = (src * rows_per_block + row) * row_bytes
                word = int.from_bytes(image[base:base + row_bytes], "little")
                for lane in range(8):
                    weights.append(sign_extend(word >> (lane * weight_bits),
                                               weight_bits))
            matrix.append(weights[:self.active])
        return matrix

    def _accumulate(self, target, weights) -> None:
        for d in range(self.active):
            target[d] = sat_add_int(target[d], weights[d], self.tgt_lo, self.tgt_hi)

    def step(self, incoming: list[int], step_index: int, last: bool) -> list[int]:
        target = self.syn if self.synaptic else self.membrane
        for address in incoming:
            if address >= self.source_count:
                raise ProtocolError(f"spike address {address} out of range")
            self._accumulate(target, self.ff_w[address])
        if self.topology is Topology.ATA_T:
            for src in self.prev_fired:
                self._accumulate(target, self.rec_w[src])
        elif self.topology is Topology.ATA_F:
            for src in self.prev_fired:
                target[src] = sat_add_int(target[src], self.self_w[src],
                                          self.tgt_lo, self.tgt_hi)

        fired = []
        for d in range(self.active):
            if self.synaptic:
                m = apply_decay_int(self.membrane[d], self.beta_raw)
                m = sat_add_int(m, self.syn[d], self.lo, self.hi)
                if m >= self.threshold:
                    fired.append(d)
                    m = sat_add_int(m, -self.threshold, self.lo, self.hi) \
                        if self.subtract_reset else 0
                self.membrane[d] = m
                self.syn[d] = apply_decay_int(self.syn[d], self.alpha_raw)
            else:
                m = self.membrane[d]
                if m >= self.threshold:
                    fired.append(d)
                    m = sat_add_int(m, -self.threshold, self.lo, self.hi) \
                        if self.subtract_reset else 0
                else:
                    m = apply_decay_int(m, self.beta_raw)
                self.membrane[d] = m

        self.records.append(StepRecord(
            fired=tuple(fired),
            membrane=tuple(self.membrane),
            syn_current=tuple(self.syn) if self.syn is not None else None,
        ))
        for i in fired:
            self.emissions.append((step_index, PacketKind.ASPL, i))
        if last:
            self.membrane = [0] * self.active
            if self.syn is not None:
                self.syn = [0] * self.active
            self.prev_fired = []
            self.emissions.append((step_index, PacketKind.EOIN, 1))
        else:
            if self.topology.recurrent:
                self.prev_fired = list(fired)
                for i in fired:
                    self.emissions.append((step_index, PacketKind.ASCL, i))
            else:
                self.prev_fired = []
            self.emissions.append((step_index, PacketKind.EOTS, 0))
        return fired


def dense_reference(network: Network, sample: EventSample, *,
                    record_trace: bool = False,
                    record_state: bool = False) -> InferenceResult:
    """Simulate a sample with straight nested loops; same outputs as
    `run_inference`, computed without any of its machinery."""
    if not network.loaded:
        raise ConfigError("network must be programmed over SPI before inference")
    sample.validate(network.config.input_channels, network.config.timesteps)
    layers = [_DenseLayer(core) for core in network.cores]
    counts = [0] * network.output_count
    last_index = len(sample.steps) - 1
    for t, addresses in enumerate(sample.steps):
        incoming = list(addresses)
        for layer in layers:
            incoming = layer.step(incoming, t, t == last_index)
        for address in incoming:
            counts[address] += 1

    trace = None
    if record_trace:
        per_source = {-1: _driver_emissions(sample)}
        for i, layer in enumerate(layers):
            per_source[i] = layer.emissions
        trace = assemble_trace(per_source)
    layer_records = [layer.records for layer in layers] if record_state else None
    return InferenceResult(predicted=counts.index(max(counts)), counts=counts,
                           trace=trace, layer_records=layer_records)
