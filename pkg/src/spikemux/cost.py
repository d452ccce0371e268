"""Hardware-cost estimation and the scalarized cost objective.

Logic usage (LUTs, flip-flops) comes from per-core linear regressions on the
feedforward and recurrent weight widths, fitted offline against synthesis
runs and summed over cores. BRAM usage is parametric: memory bits follow
directly from the geometries, divided into fixed-size primitives. The total
objective is a weighted sum of normalized hardware terms and an accuracy
term; both weight groups must each sum to one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import CalibrationError, ConfigError
from .model import Topology
from .neuron import NeuronModel
from .system import NetworkConfig

BRAM_PRIMITIVE_BITS = 36_864  # one 36 Kb primitive


@dataclass(frozen=True)
class ResourceEstimate:
    luts: float
    flipflops: float
    brams: float

    def __post_init__(self):
        if self.luts < 0 or self.flipflops < 0 or self.brams < 0:
            raise ConfigError("resource estimates cannot be negative")


@dataclass(frozen=True)
class LinearCoefficients:
    """intercept + per_ff_bit * ff + per_rec_bit * rec"""

    intercept: float
    per_ff_bit: float
    per_rec_bit: float

    def __post_init__(self):
        for v in (self.intercept, self.per_ff_bit, self.per_rec_bit):
            if not math.isfinite(v):
                raise CalibrationError(f"non-finite calibration coefficient {v!r}")

    def evaluate(self, ff_bits: int, rec_bits: int) -> float:
        return self.intercept + self.per_ff_bit * ff_bits + self.per_rec_bit * rec_bits


class CalibrationTable:
    """Per (topology, neuron model) linear models for LUTs and flip-flops.

    The IF model shares the LIF datapath, so IF entries resolve to LIF.
    """

    def __init__(self, entries: dict, placeholder: bool = False):
        self.entries = dict(entries)
        self.placeholder = placeholder

    @staticmethod
    def _key(topology: Topology, model: NeuronModel):
        if model is NeuronModel.IF:
            model = NeuronModel.LIF
        return (topology, model)

    def lookup(self, topology: Topology, model: NeuronModel):
        try:
            return self.entries[self._key(topology, model)]
        except KeyError:
            raise CalibrationError(
                f"no calibration entry for ({topology.value}, {model.value})"
            ) from None

    def to_dict(self) -> dict:
        return {
            "placeholder": self.placeholder,
            "entries": [
                {
                    "topology": topo.value,
                    "model": model.value,
                    "luts": [c.intercept, c.per_ff_bit, c.per_rec_bit],
                    "flipflops": [f.intercept, f.per_ff_bit, f.per_rec_bit],
                }
                for (topo, model), (c, f) in sorted(
                    self.entries.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CalibrationTable":
        entries = {}
        for row in data.get("entries", []):
            key = (Topology(row["topology"]), NeuronModel(row["model"]))
            entries[key] = (LinearCoefficients(*row["luts"]),
                            LinearCoefficients(*row["flipflops"]))
        if not entries:
            raise CalibrationError("calibration table has no entries")
        return cls(entries, placeholder=bool(data.get("placeholder", False)))


def default_calibration() -> CalibrationTable:
    """Placeholder coefficients so estimation runs out of the box.

    These are NOT fitted to any synthesis results; supply a real table for
    meaningful numbers.
    """
    entries = {}
    for topology, base in ((Topology.FF, 400.0), (Topology.ATA_F, 480.0),
                           (Topology.ATA_T, 560.0)):
        for model, extra in ((NeuronModel.LIF, 0.0), (NeuronModel.SYNAPTIC, 140.0)):
            entries[(topology, model)] = (
                LinearCoefficients(base + extra, 22.0, 9.0),
                LinearCoefficients(0.6 * (base + extra), 14.0, 6.0),
            )
    return CalibrationTable(entries, placeholder=True)


@dataclass(frozen=True)
class CostWeights:
    """User trade-off weights: hw/accuracy split plus the resource split."""

    c_h: float
    c_a: float
    c_lut: float
    c_ff: float
    c_bram: float

    def __post_init__(self):
        for name, v in (("c_h", self.c_h), ("c_a", self.c_a), ("c_lut", self.c_lut),
                        ("c_ff", self.c_ff), ("c_bram", self.c_bram)):
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if abs(self.c_h + self.c_a - 1.0) > 1e-9:
            raise ConfigError(
                f"hardware and accuracy weights must sum to 1, got {self.c_h + self.c_a}")
        if abs(self.c_lut + self.c_ff + self.c_bram - 1.0) > 1e-9:
            raise ConfigError(
                "LUT, flip-flop, and BRAM weights must sum to 1, got "
                f"{self.c_lut + self.c_ff + self.c_bram}")


@dataclass(frozen=True)
class ResourceNorms:
    """Normalization denominators (candidate-set maxima or device capacity)."""

    luts: float
    flipflops: float
    brams: float

    def __post_init__(self):
        if self.luts <= 0 or self.flipflops <= 0 or self.brams <= 0:
            raise ConfigError("normalization denominators must be positive")


def bram_for_core(cfg, primitive_bits: int = BRAM_PRIMITIVE_BITS) -> int:
    """BRAM primitives for one core: feedforward + state memory, plus the
    recurrent memory when the layer is densely recurrent. Self-loop weights
    live in registers and cost no BRAM."""
    total = math.ceil(cfg.ff_geometry.total_bits / primitive_bits)
    total += math.ceil(cfg.state_geometry.total_bits / primitive_bits)
    if cfg.topology is Topology.ATA_T:
        total += math.ceil(cfg.rec_geometry.total_bits / primitive_bits)
    return total


def estimate_bram(net: NetworkConfig, primitive_bits: int = BRAM_PRIMITIVE_BITS) -> float:
    return float(sum(bram_for_core(cfg, primitive_bits) for cfg in net.cores))


def logic_for_core(topology: Topology, model: NeuronModel, ff_bits: int,
                   rec_bits: int, table: CalibrationTable) -> tuple[float, float]:
    if ff_bits <= 0:
        warnings.warn(f"feedforward width {ff_bits} is outside the fitted "
                      "domain; the estimate degenerates to the intercept",
                      stacklevel=2)
    lut_coeffs, ff_coeffs = table.lookup(topology, model)
    return (lut_coeffs.evaluate(ff_bits, rec_bits),
            ff_coeffs.evaluate(ff_bits, rec_bits))


def estimate_logic(net: NetworkConfig, table: CalibrationTable) -> tuple[float, float]:
    """(LUTs, flip-flops) summed over all cores."""
    luts = flipflops = 0.0
    for cfg in net.cores:
        lut, ff = logic_for_core(cfg.topology, cfg.model, cfg.ff_weight_bits,
                                 cfg.rec_weight_bits or 0, table)
        luts += lut
        flipflops += ff
    return luts, flipflops


def estimate_resources(net: NetworkConfig, table: CalibrationTable,
                       primitive_bits: int = BRAM_PRIMITIVE_BITS) -> ResourceEstimate:
    luts, flipflops = estimate_logic(net, table)
    return ResourceEstimate(luts=luts, flipflops=flipflops,
                            brams=estimate_bram(net, primitive_bits))


def norms_from_candidates(estimates) -> ResourceNorms:
    """Candidate-set maxima, so every normalized term lies in (0, 1]."""
    estimates = list(estimates)
    if not estimates:
        raise ConfigError("cannot normalize over an empty candidate set")
    return ResourceNorms(
        luts=max(e.luts for e in estimates),
        flipflops=max(e.flipflops for e in estimates),
        brams=max(e.brams for e in estimates),
    )


def hw_cost(hw: ResourceEstimate, weights: CostWeights, norms: ResourceNorms) -> float:
    return weights.c_h * (weights.c_lut * hw.luts / norms.luts
                          + weights.c_ff * hw.flipflops / norms.flipflops
                          + weights.c_bram * hw.brams / norms.brams)


def total_cost(hw: ResourceEstimate, accuracy: float, weights: CostWeights,
               norms: ResourceNorms) -> float:
    """Weighted hardware cost plus weighted accuracy shortfall."""
    if not 0.0 <= accuracy <= 1.0:
        raise ConfigError(f"accuracy must lie in [0, 1], got {accuracy}")
    return hw_cost(hw, weights, norms) + weights.c_a * (1.0 - accuracy)
