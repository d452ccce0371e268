"""Multi-core pipeline: core configuration, the controller phase machine, and
the host driver.

One core implements one layer. Per time step a core (1) integrates inbound
spike packets in arrival order, (2) on the step terminator integrates the
recurrent spikes buffered from the previous step, (3) sweeps neurons in index
order through the leak/spike phase, emitting a spike packet downstream (and a
recurrent one locally) for every firing neuron, and (4) forwards the
terminator — after zeroing all neuron state when the terminator ends the
input sequence.

Spikes emitted by a layer at step t are consumed by the next layer within the
same global step; the pipeline is driven either by a deterministic polled
scheduler or by one thread per core over handshake channels. Both modes
produce identical results.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels, spi
from .aer import EOIN, EOTS, AerPacket, BoundedQueue, Channel, PacketKind
from .errors import CapacityError, ConfigError, DeadlockError, ProtocolError
from .model import QuantizedModel, Topology
from .neuron import (MAX_NEURONS_PER_CORE, NeuronModel, pack_state_row,
                     sign_extend, size_state_memory, size_synaptic_memory,
                     unpack_state_row)

_POLL_GUARD_ROUNDS = 10_000


@dataclass
class CoreConfig:
    """Design-time parameters of one core."""

    core_id: int
    topology: Topology
    model: NeuronModel
    neuron_count: int
    source_count: int
    ff_weight_bits: int
    rec_weight_bits: int | None
    potential_bits: int
    current_bits: int | None
    queue_capacity: int = 16

    def __post_init__(self):
        for name, count in (("neuron count", self.neuron_count),
                            ("source count", self.source_count)):
            if count < 1:
                raise ConfigError(f"{name} must be at least 1, got {count}")
            if count > MAX_NEURONS_PER_CORE:
                raise CapacityError(
                    f"{name} {count} exceeds the per-core limit of "
                    f"{MAX_NEURONS_PER_CORE}")
        widths = {"feedforward weight": self.ff_weight_bits,
                  "potential": self.potential_bits}
        if self.rec_weight_bits is not None:
            widths["recurrent weight"] = self.rec_weight_bits
        if self.current_bits is not None:
            widths["current"] = self.current_bits
        for name, bits in widths.items():
            if not 2 <= bits <= 32:
                raise ConfigError(f"{name} width must be 2..32 bits, got {bits}")
        if self.topology.recurrent:
            if self.rec_weight_bits is None:
                raise ConfigError("recurrent topology requires a recurrent weight width")
        elif self.rec_weight_bits is not None:
            raise ConfigError("feedforward core cannot have recurrent weights")
        if self.model is NeuronModel.SYNAPTIC:
            if self.current_bits is None:
                raise ConfigError("synaptic model requires a current bit-width")
        elif self.current_bits is not None:
            raise ConfigError(f"{self.model.value} core has no synaptic-current field")

    @property
    def ff_geometry(self):
        return size_synaptic_memory(self.source_count, self.neuron_count,
                                    self.ff_weight_bits)

    @property
    def rec_geometry(self):
        if self.topology is not Topology.ATA_T:
            return None
        return size_synaptic_memory(self.neuron_count, self.neuron_count,
                                    self.rec_weight_bits)

    @property
    def state_geometry(self):
        return size_state_memory(self.neuron_count, self.potential_bits,
                                 self.current_bits)


@dataclass
class NetworkConfig:
    """Ordered per-layer core configs plus the driver-facing parameters."""

    cores: list[CoreConfig]
    input_channels: int
    timesteps: int

    def __post_init__(self):
        if not self.cores:
            raise ConfigError("network needs at least one core")
        if not 1 <= self.input_channels <= MAX_NEURONS_PER_CORE:
            raise CapacityError(
                f"input channel count must be 1..{MAX_NEURONS_PER_CORE}, "
                f"got {self.input_channels}")
        if self.timesteps < 1:
            raise ConfigError("timesteps must be at least 1")
        expected = self.input_channels
        for cfg in self.cores:
            if cfg.source_count != expected:
                raise ConfigError(
                    f"core {cfg.core_id} expects {cfg.source_count} sources, "
                    f"previous stage provides {expected}")
            expected = cfg.neuron_count


@dataclass
class EventSample:
    """One event-encoded input: per-step spike address lists plus a label."""

    steps: list[list[int]]
    label: int | None = None

    def __post_init__(self):
        if not self.steps:
            raise ConfigError("a sample needs at least one time step")

    def validate(self, input_channels: int, max_steps: int) -> None:
        if len(self.steps) > max_steps:
            raise ConfigError(
                f"sample has {len(self.steps)} steps, network allows {max_steps}")
        for addrs in self.steps:
            for a in addrs:
                if not 0 <= a < input_channels:
                    raise ProtocolError(
                        f"input address {a} outside {input_channels} channels")


class Core:
    """One instantiated core: design-time config plus its SPI endpoint.

    Recurrent storage is present only on recurrent topologies: a full weight
    memory for dense intra-layer recurrence, a compact per-neuron self-weight
    store for self-loops only, nothing on feedforward cores.
    """

    def __init__(self, config: CoreConfig):
        self.config = config
        self.ff_geometry = config.ff_geometry
        self.rec_geometry = config.rec_geometry
        self.state_geometry = config.state_geometry
        if config.topology is Topology.ATA_T:
            rec_rows = self.rec_geometry.total_rows
            rec_row_bytes = self.rec_geometry.row_bytes
        elif config.topology is Topology.ATA_F:
            rec_rows = (config.neuron_count + 7) // 8
            rec_row_bytes = config.rec_weight_bits
        else:
            rec_rows = rec_row_bytes = 0
        self.slave = spi.SpiSlave(
            config.core_id,
            state_rows=self.state_geometry.rows,
            state_row_bytes=self.state_geometry.row_bytes,
            ff_rows=self.ff_geometry.total_rows,
            ff_row_bytes=self.ff_geometry.row_bytes,
            rec_rows=rec_rows,
            rec_row_bytes=rec_row_bytes,
        )


class Network:
    """A chain of cores plus the input/timing parameters of the driver."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        self.cores = [Core(cfg) for cfg in config.cores]
        self.loaded = False

    def load(self, qmodel: QuantizedModel) -> None:
        spi.load_model_over_spi(qmodel, self.cores)
        self.loaded = True

    @property
    def output_count(self) -> int:
        return self.config.cores[-1].neuron_count


def network_config_from_quantized(qmodel: QuantizedModel,
                                  queue_capacity: int = 16) -> NetworkConfig:
    cores = []
    for i, layer in enumerate(qmodel.layers):
        cores.append(CoreConfig(
            core_id=i,
            topology=layer.topology,
            model=layer.model,
            neuron_count=layer.neuron_count,
            source_count=layer.source_count,
            ff_weight_bits=layer.weight_bits,
            rec_weight_bits=layer.rec_weight_bits,
            potential_bits=qmodel.potential_bits,
            current_bits=(qmodel.current_bits
                          if layer.model is NeuronModel.SYNAPTIC else None),
            queue_capacity=queue_capacity,
        ))
    return NetworkConfig(cores=cores, input_channels=qmodel.input_channels,
                         timesteps=qmodel.timesteps)


def build_network(qmodel: QuantizedModel, queue_capacity: int = 16) -> Network:
    """Construct the cores for a quantized model and program them over SPI."""
    network = Network(network_config_from_quantized(qmodel, queue_capacity))
    network.load(qmodel)
    return network


@dataclass(frozen=True)
class TraceRecord:
    step: int
    source: int           # -1 for the driver, else the core index
    kind: PacketKind
    address: int


@dataclass(frozen=True)
class StepRecord:
    """Post-leak snapshot of one layer at one step (before any end-of-input
    reset), used for bit-exact cross-implementation comparison."""

    fired: tuple
    membrane: tuple
    syn_current: tuple | None


@dataclass
class InferenceResult:
    predicted: int
    counts: list[int]
    trace: list[TraceRecord] | None = None
    layer_records: list[list[StepRecord]] | None = None


def _unpack_weight_matrix(image: bytes, rows_per_block: int, row_bytes: int,
                          weight_bits: int, source_count: int,
                          dest_count: int) -> np.ndarray:
    """Decode a synaptic memory image into an int64 [source][dest] matrix."""
    out = np.zeros((source_count, dest_count), dtype=np.int64)
    for src in range(source_count):
        for row in range((dest_count + 7) // 8):
            base = (src * rows_per_block + row) * row_bytes
            word = int.from_bytes(image[base:base + row_bytes], "little")
            for lane in range(min(8, dest_count - 8 * row)):
                out[src, 8 * row + lane] = sign_extend(
                    word >> (lane * weight_bits), weight_bits)
    return out


class _CoreRuntime:
    """Per-sample execution state of one core.

    Built from the SPI-visible memories and registers, so whatever was
    programmed (or tampered with) over SPI is exactly what runs.
    """

    def __init__(self, core: Core, record_state: bool = False):
        self.core = core
        cfg = core.config
        regs = core.slave.registers
        model = spi.MODEL_FROM_CODE.get(regs[spi.REG_NEURON_MODEL])
        if model is not cfg.model:
            raise ConfigError(
                f"core {cfg.core_id}: neuron-model register ({model}) does not "
                f"match the synthesized model ({cfg.model})")
        topology = spi.TOPOLOGY_FROM_CODE.get(regs[spi.REG_RECURRENT_MODE])
        if topology is not cfg.topology:
            raise ConfigError(
                f"core {cfg.core_id}: recurrent-mode register ({topology}) does "
                f"not match the synthesized topology ({cfg.topology})")
        self.active = regs[spi.REG_ACTIVE_NEURON_COUNT]
        if not 1 <= self.active <= cfg.neuron_count:
            raise ConfigError(
                f"core {cfg.core_id}: active neuron count {self.active} outside "
                f"1..{cfg.neuron_count}")
        self.model = model
        self.topology = topology
        self.threshold = sign_extend(regs[spi.REG_THRESHOLD], spi.REG_VALUE_BITS)
        self.beta_raw = regs[spi.REG_DECAY_BETA] & 0x1FF
        self.alpha_raw = regs[spi.REG_DECAY_ALPHA] & 0x1FF
        self.reset_code = regs[spi.REG_RESET_POLICY] & 1
        self.source_count = cfg.source_count

        self.mem_lo = -(1 << (cfg.potential_bits - 1))
        self.mem_hi = (1 << (cfg.potential_bits - 1)) - 1
        self.synaptic = model is NeuronModel.SYNAPTIC
        if self.synaptic:
            self.tgt_lo = -(1 << (cfg.current_bits - 1))
            self.tgt_hi = (1 << (cfg.current_bits - 1)) - 1
        else:
            self.tgt_lo, self.tgt_hi = self.mem_lo, self.mem_hi

        ff_geom = core.ff_geometry
        self.ff_w = _unpack_weight_matrix(
            core.slave.ff_mem, ff_geom.rows_per_block, ff_geom.row_bytes,
            cfg.ff_weight_bits, cfg.source_count, cfg.neuron_count)[:, :self.active]
        self.ff_w = np.ascontiguousarray(self.ff_w)

        self.rec_w = None
        self.self_w = None
        if topology is Topology.ATA_T:
            rec_geom = core.rec_geometry
            self.rec_w = np.ascontiguousarray(_unpack_weight_matrix(
                core.slave.rec_mem, rec_geom.rows_per_block, rec_geom.row_bytes,
                cfg.rec_weight_bits, cfg.neuron_count, cfg.neuron_count)[:, :self.active])
        elif topology is Topology.ATA_F:
            wb = cfg.rec_weight_bits
            self.self_w = np.zeros(self.active, dtype=np.int64)
            for row in range((self.active + 7) // 8):
                word = int.from_bytes(
                    core.slave.rec_mem[row * wb:(row + 1) * wb], "little")
                for lane in range(min(8, self.active - 8 * row)):
                    self.self_w[8 * row + lane] = sign_extend(word >> (lane * wb), wb)

        self.membrane = np.zeros(self.active, dtype=np.int64)
        self.syn = np.zeros(self.active, dtype=np.int64) if self.synaptic else None
        row_bytes = core.state_geometry.row_bytes
        for i in range(self.active):
            row = core.slave.state_mem[i * row_bytes:(i + 1) * row_bytes]
            potential, current = unpack_state_row(row, cfg.potential_bits,
                                                  cfg.current_bits)
            self.membrane[i] = potential
            if self.syn is not None:
                self.syn[i] = current

        self.pending_ascl: list[int] = []
        self.step = 0
        self.outbox: deque = deque()
        self.emissions: list[tuple[int, PacketKind, int]] = []
        self.records: list[StepRecord] | None = [] if record_state else None

    def _integration_target(self) -> np.ndarray:
        return self.syn if self.synaptic else self.membrane

    def feed(self, packet: AerPacket) -> list[AerPacket]:
        """Consume one inbound packet; returns the packets to send downstream."""
        if packet.kind is PacketKind.ASPL:
            if packet.address >= self.source_count:
                raise ProtocolError(
                    f"core {self.core.config.core_id}: spike address "
                    f"{packet.address} >= {self.source_count} sources")
            kernels.add_column(self._integration_target(), self.ff_w[packet.address],
                               self.tgt_lo, self.tgt_hi)
            return []
        if packet.kind is PacketKind.ASCL:
            raise ProtocolError("recurrent packet arrived on the inter-core link")
        return self._terminate_step(packet)

    def _terminate_step(self, packet: AerPacket) -> list[AerPacket]:
        target = self._integration_target()
        if self.topology is Topology.ATA_T:
            for src in self.pending_ascl:
                kernels.add_column(target, self.rec_w[src], self.tgt_lo, self.tgt_hi)
        elif self.topology is Topology.ATA_F:
            for src in self.pending_ascl:
                kernels.add_at(target, src, int(self.self_w[src]),
                               self.tgt_lo, self.tgt_hi)
        self.pending_ascl = []

        if self.synaptic:
            fired = kernels.leak_fire_syn(self.membrane, self.syn, self.threshold,
                                          self.beta_raw, self.alpha_raw,
                                          self.reset_code, self.mem_lo, self.mem_hi)
        else:
            fired = kernels.leak_fire_lif(self.membrane, self.threshold,
                                          self.beta_raw, self.reset_code,
                                          self.mem_lo, self.mem_hi)

        if self.records is not None:
            self.records.append(StepRecord(
                fired=tuple(fired),
                membrane=tuple(int(v) for v in self.membrane),
                syn_current=(tuple(int(v) for v in self.syn)
                             if self.syn is not None else None),
            ))

        outs = [AerPacket(PacketKind.ASPL, i) for i in fired]
        for i in fired:
            self.emissions.append((self.step, PacketKind.ASPL, i))
        if packet.kind is PacketKind.EOTS:
            if self.topology.recurrent:
                self.pending_ascl = list(fired)
                for i in fired:
                    self.emissions.append((self.step, PacketKind.ASCL, i))
        else:  # end of input: lazy reset, nothing carries into the next sample
            self.membrane[:] = 0
            if self.syn is not None:
                self.syn[:] = 0
            self.pending_ascl = []
        outs.append(packet)
        self.emissions.append((self.step, packet.kind, packet.address))
        self.step += 1
        return outs

    def finalize(self) -> None:
        """Write the runtime state back into the SPI-visible state memory."""
        cfg = self.core.config
        row_bytes = self.core.state_geometry.row_bytes
        for i in range(self.active):
            row = pack_state_row(int(self.membrane[i]),
                                 int(self.syn[i]) if self.syn is not None else None,
                                 cfg.potential_bits, cfg.current_bits, row_bytes)
            self.core.slave.state_mem[i * row_bytes:(i + 1) * row_bytes] = row


def _driver_packets(sample: EventSample) -> list[AerPacket]:
    packets = []
    last = len(sample.steps) - 1
    for t, addresses in enumerate(sample.steps):
        for a in addresses:
            packets.append(AerPacket(PacketKind.ASPL, a))
        packets.append(EOIN if t == last else EOTS)
    return packets


def _driver_emissions(sample: EventSample) -> list[tuple[int, PacketKind, int]]:
    emissions = []
    last = len(sample.steps) - 1
    for t, addresses in enumerate(sample.steps):
        for a in addresses:
            emissions.append((t, PacketKind.ASPL, a))
        terminator = EOIN if t == last else EOTS
        emissions.append((t, terminator.kind, terminator.address))
    return emissions


def assemble_trace(per_source: dict[int, list[tuple[int, PacketKind, int]]]
                   ) -> list[TraceRecord]:
    """Merge per-source emission logs into the canonical trace order:
    by step, then source (driver first), then emission order."""
    entries = []
    for source, emissions in per_source.items():
        for seq, (step, kind, address) in enumerate(emissions):
            entries.append((step, source, seq, kind, address))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    return [TraceRecord(step=s, source=src, kind=kind, address=addr)
            for s, src, _, kind, addr in entries]


class _Collector:
    """Counts output spikes of the last core and watches for end of input."""

    def __init__(self, output_count: int):
        self.counts = [0] * output_count
        self.done = False

    def consume(self, packet: AerPacket) -> None:
        if packet.kind is PacketKind.ASPL:
            self.counts[packet.address] += 1
        elif packet.kind is PacketKind.EOIN:
            self.done = True


def _run_polled(runtimes: list[_CoreRuntime], driver: deque,
                collector: _Collector) -> None:
    inboxes = [BoundedQueue(rt.core.config.queue_capacity) for rt in runtimes]
    idle_rounds = 0
    while not collector.done:
        progress = False
        while driver and inboxes[0].try_push(driver[0]):
            driver.popleft()
            progress = True
        for i, rt in enumerate(runtimes):
            downstream = inboxes[i + 1] if i + 1 < len(runtimes) else None
            while rt.outbox:
                if downstream is None:
                    collector.consume(rt.outbox.popleft())
                    progress = True
                elif downstream.try_push(rt.outbox[0]):
                    rt.outbox.popleft()
                    progress = True
                else:
                    break
            while not rt.outbox and len(inboxes[i]):
                rt.outbox.extend(rt.feed(inboxes[i].pop()))
                progress = True
        if progress:
            idle_rounds = 0
        else:
            idle_rounds += 1
            if idle_rounds > _POLL_GUARD_ROUNDS:
                raise DeadlockError(
                    "polled pipeline stopped making progress "
                    "(backpressure wiring bug)")


def _run_threaded(runtimes: list[_CoreRuntime], driver_packets: list[AerPacket],
                  collector: _Collector, watchdog: float) -> None:
    channels = [Channel(rt.core.config.queue_capacity) for rt in runtimes]
    channels.append(Channel(runtimes[-1].core.config.queue_capacity))
    failures: list[BaseException] = []

    def close_all():
        for ch in channels:
            ch.close()

    def core_worker(index: int, rt: _CoreRuntime):
        try:
            while True:
                packet = channels[index].recv(watchdog)
                for out in rt.feed(packet):
                    channels[index + 1].send(out, watchdog)
                if packet.kind is PacketKind.EOIN:
                    return
        except BaseException as exc:
            failures.append(exc)
            close_all()

    def driver_worker():
        try:
            for packet in driver_packets:
                channels[0].send(packet, watchdog)
        except BaseException as exc:
            failures.append(exc)
            close_all()

    threads = [threading.Thread(target=core_worker, args=(i, rt), daemon=True)
               for i, rt in enumerate(runtimes)]
    threads.append(threading.Thread(target=driver_worker, daemon=True))
    for t in threads:
        t.start()
    try:
        while not collector.done:
            collector.consume(channels[-1].recv(watchdog))
    except BaseException as exc:
        failures.append(exc)
        close_all()
    for t in threads:
        t.join(watchdog)
    if failures:
        raise failures[0]


def run_inference(network: Network, sample: EventSample, *, threads: int = 1,
                  record_trace: bool = False, record_state: bool = False,
                  watchdog: float = 30.0) -> InferenceResult:
    """Run one event-encoded sample through the pipeline.

    The prediction is the argmax of output spike counts over all steps, ties
    broken toward the lowest neuron index. ``threads > 1`` runs one thread per
    core over handshake channels; otherwise a deterministic polled scheduler
    is used. Results are identical in both modes.
    """
    if not network.loaded:
        raise ConfigError("network must be programmed over SPI before inference")
    sample.validate(network.config.input_channels, network.config.timesteps)
    runtimes = [_CoreRuntime(core, record_state) for core in network.cores]
    collector = _Collector(network.output_count)
    if threads > 1:
        _run_threaded(runtimes, _driver_packets(sample), collector, watchdog)
    else:
        _run_polled(runtimes, deque(_driver_packets(sample)), collector)
    for rt in runtimes:
        rt.finalize()

    trace = None
    if record_trace:
        per_source = {-1: _driver_emissions(sample)}
        for i, rt in enumerate(runtimes):
            per_source[i] = rt.emissions
        trace = assemble_trace(per_source)
    layer_records = [rt.records for rt in runtimes] if record_state else None
    predicted = collector.counts.index(max(collector.counts))
    return InferenceResult(predicted=predicted, counts=collector.counts,
                           trace=trace, layer_records=layer_records)
