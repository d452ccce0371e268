"""Trained-model containers and their fixed-point quantization.

A trained model is the output of external training: per-layer float weights,
leak factors, thresholds, and reset rules. Quantization turns it into the
integer form the cores consume. Within a layer the feedforward and recurrent
tensors share one LSB (the coarser of their standalone max-abs scales), since
both accumulate into the same membrane; the threshold rescales by that LSB.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .decay import DecayRate, encode_decay
from .errors import ConfigError
from .fxp import (LayerQuantization, QFormat, ResetPolicy, quantize_threshold,
                  quantize_values)
from .neuron import MAX_NEURONS_PER_CORE, NeuronModel


class Topology(enum.Enum):
    FF = "FF"
    ATA_F = "ATA-F"
    ATA_T = "ATA-T"

    @property
    def recurrent(self) -> bool:
        return self is not Topology.FF


@dataclass
class TrainedLayer:
    """Float parameters of one layer as extracted after training.

    ``ff_weights`` is indexed [source][destination]. ATA-T layers carry a full
    ``rec_weights`` matrix, ATA-F layers a per-neuron ``self_weights`` vector.
    """

    topology: Topology
    model: NeuronModel
    source_count: int
    neuron_count: int
    ff_weights: list
    rec_weights: list | None = None
    self_weights: list | None = None
    beta: float = 1.0
    alpha: float | None = None
    threshold: float = 1.0
    reset: ResetPolicy = ResetPolicy.RESET_TO_ZERO

    def __post_init__(self):
        if len(self.ff_weights) != self.source_count:
            raise ConfigError(
                f"feedforward matrix has {len(self.ff_weights)} rows, "
                f"expected {self.source_count}")
        for row in self.ff_weights:
            if len(row) != self.neuron_count:
                raise ConfigError("feedforward matrix row length mismatch")
        if self.topology is Topology.ATA_T:
            if self.rec_weights is None or len(self.rec_weights) != self.neuron_count:
                raise ConfigError("ATA-T layer requires an NxN recurrent matrix")
        elif self.topology is Topology.ATA_F:
            if self.self_weights is None or len(self.self_weights) != self.neuron_count:
                raise ConfigError("ATA-F layer requires one self-weight per neuron")
        elif self.rec_weights is not None or self.self_weights is not None:
            raise ConfigError("feedforward layer cannot carry recurrent weights")
        if self.model is NeuronModel.SYNAPTIC and self.alpha is None:
            raise ConfigError("synaptic layer requires a current leak factor")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"membrane leak factor must lie in [0, 1], got {self.beta}")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"current leak factor must lie in [0, 1], got {self.alpha}")


@dataclass
class TrainedModel:
    layers: list[TrainedLayer] = field(default_factory=list)
    input_channels: int = 0
    timesteps: int = 1

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("model needs at least one layer")
        if not 1 <= self.input_channels <= MAX_NEURONS_PER_CORE:
            raise ConfigError(
                f"input channel count must be 1..{MAX_NEURONS_PER_CORE}, "
                f"got {self.input_channels}")
        if self.timesteps < 1:
            raise ConfigError("timesteps must be at least 1")
        expected = self.input_channels
        for i, layer in enumerate(self.layers):
            if layer.source_count != expected:
                raise ConfigError(
                    f"layer {i} expects {layer.source_count} sources but the "
                    f"previous stage provides {expected}")
            expected = layer.neuron_count

    @property
    def has_recurrent(self) -> bool:
        return any(layer.topology.recurrent for layer in self.layers)


@dataclass
class QuantizedLayer:
    topology: Topology
    model: NeuronModel
    source_count: int
    neuron_count: int
    weight_bits: int
    rec_weight_bits: int | None
    ff_q: list                      # [source][dest] integers
    rec_q: list | None              # ATA-T [N][N]
    self_q: list | None             # ATA-F [N]
    weight_scale: float
    threshold_q: int
    beta: DecayRate
    alpha: DecayRate | None
    reset: ResetPolicy


@dataclass
class QuantizedModel:
    layers: list[QuantizedLayer]
    input_channels: int
    timesteps: int
    ff_bits: int
    rec_bits: int | None
    leak_bits: int
    potential_bits: int
    current_bits: int | None


def _flat_lsb(values, fmt: QFormat) -> float | None:
    """Standalone max-abs LSB of one tensor; None when it is all zero."""
    peak = 0.0
    for v in values:
        if not math.isfinite(v):
            raise ConfigError(f"non-finite weight {v!r} cannot be quantized")
        peak = max(peak, abs(v))
    if peak == 0.0:
        return None
    return peak / fmt.max_value


def quantize_layer(layer: TrainedLayer, ff_bits: int, rec_bits: int | None,
                   leak_bits: int, potential_bits: int,
                   current_bits: int | None) -> QuantizedLayer:
    ff_fmt = QFormat(ff_bits)
    potential_fmt = QFormat(potential_bits)
    rec_fmt = None
    rec_flat = None
    if layer.topology.recurrent:
        if rec_bits is None:
            raise ConfigError("recurrent layer requires a recurrent weight width")
        rec_fmt = QFormat(rec_bits)
        rec_flat = ([w for row in layer.rec_weights for w in row]
                    if layer.topology is Topology.ATA_T else list(layer.self_weights))

    ff_flat = [w for row in layer.ff_weights for w in row]
    lsbs = [v for v in (_flat_lsb(ff_flat, ff_fmt),
                        _flat_lsb(rec_flat, rec_fmt) if rec_flat is not None else None)
            if v is not None]
    lsb = max(lsbs) if lsbs else 1.0

    ff_ints, _ = quantize_values(ff_flat, ff_fmt, lsb)
    n = layer.neuron_count
    ff_q = [ff_ints[i * n:(i + 1) * n] for i in range(layer.source_count)]

    rec_q = self_q = None
    if layer.topology is Topology.ATA_T:
        rec_ints, _ = quantize_values(rec_flat, rec_fmt, lsb)
        rec_q = [rec_ints[i * n:(i + 1) * n] for i in range(n)]
    elif layer.topology is Topology.ATA_F:
        self_q, _ = quantize_values(rec_flat, rec_fmt, lsb)

    beta = (DecayRate.bypassed() if layer.model is NeuronModel.IF
            else encode_decay(layer.beta, leak_bits))
    alpha = (encode_decay(layer.alpha, leak_bits)
             if layer.model is NeuronModel.SYNAPTIC else None)
    quant = LayerQuantization(
        weight_scale=lsb,
        threshold_q=quantize_threshold(layer.threshold, lsb, potential_fmt),
        reset_policy=layer.reset,
    )

    return QuantizedLayer(
        topology=layer.topology,
        model=layer.model,
        source_count=layer.source_count,
        neuron_count=layer.neuron_count,
        weight_bits=ff_bits,
        rec_weight_bits=rec_bits if layer.topology.recurrent else None,
        ff_q=ff_q,
        rec_q=rec_q,
        self_q=self_q,
        weight_scale=quant.weight_scale,
        threshold_q=quant.threshold_q.value,
        beta=beta,
        alpha=alpha,
        reset=quant.reset_policy,
    )


def quantize_model(model: TrainedModel, ff_bits: int, rec_bits: int | None,
                   leak_bits: int, potential_bits: int,
                   current_bits: int | None = None) -> QuantizedModel:
    """Quantize every layer of a trained model at the given precisions."""
    if any(layer.model is NeuronModel.SYNAPTIC for layer in model.layers):
        if current_bits is None:
            raise ConfigError("synaptic layers require a current bit-width")
    layers = [quantize_layer(layer, ff_bits, rec_bits, leak_bits,
                             potential_bits, current_bits)
              for layer in model.layers]
    return QuantizedModel(
        layers=layers,
        input_channels=model.input_channels,
        timesteps=model.timesteps,
        ff_bits=ff_bits,
        rec_bits=rec_bits if model.has_recurrent else None,
        leak_bits=leak_bits,
        potential_bits=potential_bits,
        current_bits=current_bits,
    )
