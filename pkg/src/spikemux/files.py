"""On-disk formats: model, event dataset, quantized weights, manifest,
calibration table, and project configuration.

Binary files carry an 8-byte magic and a version; JSON documents carry a
``schema_version``. All writers are deterministic (sorted keys, fixed float
repr), so write -> read -> write round-trips byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cost import (CalibrationTable, CostWeights, ResourceNorms,
                   default_calibration, norms_from_candidates)
from .decay import DecayRate
from .dse import CandidateConfig, CandidateSpace, DesignParams, SearchParams
from .errors import ConfigError, ParseError
from .fxp import ResetPolicy
from .model import (QuantizedLayer, QuantizedModel, Topology, TrainedLayer,
                    TrainedModel)
from .neuron import (NeuronModel, pack_self_weight_rows, pack_weight_memory,
                     size_state_memory, size_synaptic_memory,
                     unpack_self_weight_rows, unpack_weight_memory)
from .system import CoreConfig, EventSample, NetworkConfig

MODEL_MAGIC = b"SMXMODL1"
EVENTS_MAGIC = b"SMXEVTS1"
WEIGHTS_MAGIC = b"SMXQWTS1"
FORMAT_VERSION = 1
MANIFEST_FORMAT = "spikemux-manifest"
_NO_LABEL = 0xFFFF

_RESET_NAMES = {ResetPolicy.RESET_TO_ZERO: "zero", ResetPolicy.RESET_BY_SUBTRACT: "subtract"}
_RESET_FROM_NAME = {v: k for k, v in _RESET_NAMES.items()}


def dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ParseError(f"truncated file while reading {what}")
    return data


def _check_magic(fh, magic: bytes, path) -> None:
    found = fh.read(len(magic))
    if found != magic:
        raise ParseError(f"{path}: bad magic {found!r}, expected {magic!r}")
    (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported format version {version}")


def _parse_json(text: str, what: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {what}: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{what} must be a JSON object")
    return data


# --- trained model -----------------------------------------------------------

def write_model(path, model: TrainedModel) -> None:
    header = {
        "input_channels": model.input_channels,
        "timesteps": model.timesteps,
        "layers": [
            {
                "topology": layer.topology.value,
                "model": layer.model.value,
                "source_count": layer.source_count,
                "neuron_count": layer.neuron_count,
                "beta": layer.beta,
                "alpha": layer.alpha,
                "threshold": layer.threshold,
                "reset": _RESET_NAMES[layer.reset],
            }
            for layer in model.layers
        ],
    }
    blobs = []
    for layer in model.layers:
        flat = [w for row in layer.ff_weights for w in row]
        blobs.append(np.asarray(flat, dtype="<f8").tobytes())
        if layer.topology is Topology.ATA_T:
            flat = [w for row in layer.rec_weights for w in row]
            blobs.append(np.asarray(flat, dtype="<f8").tobytes())
        elif layer.topology is Topology.ATA_F:
            blobs.append(np.asarray(layer.self_weights, dtype="<f8").tobytes())
    header_bytes = dump_json(header).encode()
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for blob in blobs:
            fh.write(blob)


def read_model(path) -> TrainedModel:
    with open(path, "rb") as fh:
        _check_magic(fh, MODEL_MAGIC, path)
        (header_len,) = struct.unpack("<I", _read_exact(fh, 4, "header length"))
        header = _parse_json(_read_exact(fh, header_len, "header").decode(), f"{path} header")
        payload = fh.read()

    def take(count: int) -> list:
        nonlocal offset
        nbytes = count * 8
        if offset + nbytes > len(payload):
            raise ParseError(f"{path}: weight payload shorter than the header describes")
        values = np.frombuffer(payload, dtype="<f8", count=count, offset=offset).tolist()
        offset += nbytes
        return values

    offset = 0
    layers = []
    try:
        for entry in header["layers"]:
            topology = Topology(entry["topology"])
            n = int(entry["neuron_count"])
            s = int(entry["source_count"])
            flat = take(s * n)
            ff = [flat[i * n:(i + 1) * n] for i in range(s)]
            rec = self_w = None
            if topology is Topology.ATA_T:
                flat = take(n * n)
                rec = [flat[i * n:(i + 1) * n] for i in range(n)]
            elif topology is Topology.ATA_F:
                self_w = take(n)
            layers.append(TrainedLayer(
                topology=topology,
                model=NeuronModel(entry["model"]),
                source_count=s,
                neuron_count=n,
                ff_weights=ff,
                rec_weights=rec,
                self_weights=self_w,
                beta=float(entry["beta"]),
                alpha=None if entry["alpha"] is None else float(entry["alpha"]),
                threshold=float(entry["threshold"]),
                reset=_RESET_FROM_NAME[entry["reset"]],
            ))
        model = TrainedModel(layers=layers,
                             input_channels=int(header["input_channels"]),
                             timesteps=int(header["timesteps"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"{path}: malformed model header ({exc})") from None
    if offset != len(payload):
        raise ParseError(f"{path}: {len(payload) - offset} trailing bytes after weights")
    return model


# --- event dataset -----------------------------------------------------------

def write_dataset(path, samples, channels: int) -> None:
    for sample in samples:
        for addresses in sample.steps:
            for a in addresses:
                if not 0 <= a < channels:
                    raise ConfigError(f"address {a} outside {channels} channels")
    with open(path, "wb") as fh:
        fh.write(EVENTS_MAGIC)
        fh.write(struct.pack("<IIHH", FORMAT_VERSION, len(samples), channels, 0))
        for sample in samples:
            label = _NO_LABEL if sample.label is None else sample.label
            fh.write(struct.pack("<HH", label, len(sample.steps)))
            for addresses in sample.steps:
                fh.write(struct.pack("<H", len(addresses)))
                fh.write(struct.pack(f"<{len(addresses)}H", *addresses))


def read_dataset(path) -> tuple[list[EventSample], int]:
    with open(path, "rb") as fh:
        _check_magic(fh, EVENTS_MAGIC, path)
        count, channels, _ = struct.unpack("<IHH", _read_exact(fh, 8, "dataset header"))
        samples = []
        for _ in range(count):
            label, step_count = struct.unpack("<HH", _read_exact(fh, 4, "sample header"))
            steps = []
            for _ in range(step_count):
                (n,) = struct.unpack("<H", _read_exact(fh, 2, "step header"))
                addresses = list(struct.unpack(f"<{n}H", _read_exact(fh, 2 * n, "addresses")))
                steps.append(addresses)
            samples.append(EventSample(steps, None if label == _NO_LABEL else label))
        if fh.read(1):
            raise ParseError(f"{path}: trailing bytes after the last sample")
    return samples, channels


# --- quantized weights + manifest ---------------------------------------------

def _layer_images(layer: QuantizedLayer) -> tuple[bytes, bytes | None]:
    ff_geom = size_synaptic_memory(layer.source_count, layer.neuron_count,
                                   layer.weight_bits)
    ff_image = pack_weight_memory(layer.ff_q, ff_geom, layer.weight_bits)
    rec_image = None
    if layer.topology is Topology.ATA_T:
        rec_geom = size_synaptic_memory(layer.neuron_count, layer.neuron_count,
                                        layer.rec_weight_bits)
        rec_image = pack_weight_memory(layer.rec_q, rec_geom, layer.rec_weight_bits)
    elif layer.topology is Topology.ATA_F:
        rec_image = pack_self_weight_rows(layer.self_q, layer.rec_weight_bits)
    return ff_image, rec_image


def write_weight_images(path, qmodel: QuantizedModel) -> None:
    images = [_layer_images(layer) for layer in qmodel.layers]
    header = {
        "ff_bits": qmodel.ff_bits,
        "rec_bits": qmodel.rec_bits,
        "leak_bits": qmodel.leak_bits,
        "potential_bits": qmodel.potential_bits,
        "current_bits": qmodel.current_bits,
        "layers": [
            {
                "ff_bytes": len(ff),
                "rec_bytes": 0 if rec is None else len(rec),
                "source_count": layer.source_count,
                "neuron_count": layer.neuron_count,
                "weight_scale": layer.weight_scale,
            }
            for (ff, rec), layer in zip(images, qmodel.layers)
        ],
    }
    header_bytes = dump_json(header).encode()
    with open(path, "wb") as fh:
        fh.write(WEIGHTS_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for ff, rec in images:
            fh.write(ff)
            if rec is not None:
                fh.write(rec)


def read_weight_images(path) -> tuple[dict, list[tuple[bytes, bytes | None]]]:
    with open(path, "rb") as fh:
        _check_magic(fh, WEIGHTS_MAGIC, path)
        (header_len,) = struct.unpack("<I", _read_exact(fh, 4, "header length"))
        header = _parse_json(_read_exact(fh, header_len, "header").decode(), f"{path} header")
        images = []
        for entry in header.get("layers", []):
            ff = _read_exact(fh, int(entry["ff_bytes"]), "feedforward image")
            rec_bytes = int(entry["rec_bytes"])
            rec = _read_exact(fh, rec_bytes, "recurrent image") if rec_bytes else None
            images.append((ff, rec))
        if fh.read(1):
            raise ParseError(f"{path}: trailing bytes after the weight images")
    return header, images


def _geometry_dicts(layer: QuantizedLayer) -> dict:
    ff = size_synaptic_memory(layer.source_count, layer.neuron_count, layer.weight_bits)
    out = {
        "ff": {"blocks": ff.blocks, "rows_per_block": ff.rows_per_block,
               "row_bits": ff.row_bits},
    }
    if layer.topology is Topology.ATA_T:
        rec = size_synaptic_memory(layer.neuron_count, layer.neuron_count,
                                   layer.rec_weight_bits)
        out["rec"] = {"blocks": rec.blocks, "rows_per_block": rec.rows_per_block,
                      "row_bits": rec.row_bits}
    elif layer.topology is Topology.ATA_F:
        out["rec"] = {"self_rows": (layer.neuron_count + 7) // 8,
                      "row_bits": 8 * layer.rec_weight_bits}
    return out


def build_manifest(qmodel: QuantizedModel, weights_name: str, weights_sha: str,
                   queue_capacity: int = 16, accuracy: float | None = None,
                   eval_samples: int | None = None,
                   dataset_sha256: str | None = None) -> dict:
    state_geoms = []
    for layer in qmodel.layers:
        current = qmodel.current_bits if layer.model is NeuronModel.SYNAPTIC else None
        geom = size_state_memory(layer.neuron_count, qmodel.potential_bits, current)
        state_geoms.append({"rows": geom.rows, "row_bits": geom.row_bits})
    return {
        "format": MANIFEST_FORMAT,
        "schema_version": FORMAT_VERSION,
        "chosen": {"ff_bits": qmodel.ff_bits, "rec_bits": qmodel.rec_bits,
                   "leak_bits": qmodel.leak_bits},
        "design": {"potential_bits": qmodel.potential_bits,
                   "current_bits": qmodel.current_bits,
                   "queue_capacity": queue_capacity},
        "network": {"input_channels": qmodel.input_channels,
                    "timesteps": qmodel.timesteps},
        "layers": [
            {
                "topology": layer.topology.value,
                "model": layer.model.value,
                "source_count": layer.source_count,
                "neuron_count": layer.neuron_count,
                "ff_weight_bits": layer.weight_bits,
                "rec_weight_bits": layer.rec_weight_bits,
                "weight_scale": layer.weight_scale,
                "threshold_q": layer.threshold_q,
                "beta_raw": layer.beta.raw,
                "alpha_raw": None if layer.alpha is None else layer.alpha.raw,
                "reset": _RESET_NAMES[layer.reset],
                "geometry": _geometry_dicts(layer),
                "state_geometry": state_geoms[i],
            }
            for i, layer in enumerate(qmodel.layers)
        ],
        "weights_file": weights_name,
        "weights_sha256": weights_sha,
        "eval": {"accuracy": accuracy, "samples": eval_samples,
                 "dataset_sha256": dataset_sha256},
    }


def write_manifest(manifest_path, weights_path, qmodel: QuantizedModel, *,
                   queue_capacity: int = 16, accuracy: float | None = None,
                   eval_samples: int | None = None,
                   dataset_sha256: str | None = None) -> dict:
    """Write the weight images plus the manifest that reconstructs them."""
    write_weight_images(weights_path, qmodel)
    manifest = build_manifest(qmodel, Path(weights_path).name,
                              sha256_file(weights_path), queue_capacity,
                              accuracy, eval_samples, dataset_sha256)
    Path(manifest_path).write_text(dump_json(manifest))
    return manifest


def read_manifest(manifest_path) -> tuple[QuantizedModel, dict]:
    """Load and validate a manifest; returns the reconstructed quantized model.

    Geometry is recomputed from the recorded counts and widths and must match
    what the manifest stores; the weight file must match its recorded hash.
    """
    path = Path(manifest_path)
    manifest = _parse_json(path.read_text(), str(path))
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ParseError(f"{path}: not a manifest file")
    if manifest.get("schema_version") != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported manifest version")

    weights_path = path.parent / manifest["weights_file"]
    if not weights_path.exists():
        raise ConfigError(f"manifest references missing weight file {weights_path}")
    actual_sha = sha256_file(weights_path)
    if actual_sha != manifest["weights_sha256"]:
        raise ConfigError(
            f"weight file {weights_path} does not match the manifest hash")
    header, images = read_weight_images(weights_path)

    chosen = manifest["chosen"]
    design = manifest["design"]
    for key in ("ff_bits", "rec_bits", "leak_bits"):
        if header.get(key) != chosen.get(key):
            raise ConfigError(f"manifest and weight file disagree on {key}")
    if len(images) != len(manifest["layers"]):
        raise ConfigError("manifest and weight file disagree on the layer count")

    layers = []
    try:
        for entry, (ff_image, rec_image) in zip(manifest["layers"], images):
            topology = Topology(entry["topology"])
            model = NeuronModel(entry["model"])
            s, n = int(entry["source_count"]), int(entry["neuron_count"])
            ff_bits = int(entry["ff_weight_bits"])
            rec_bits = entry["rec_weight_bits"]
            ff_geom = size_synaptic_memory(s, n, ff_bits)
            expected = {"blocks": ff_geom.blocks,
                        "rows_per_block": ff_geom.rows_per_block,
                        "row_bits": ff_geom.row_bits}
            if entry["geometry"]["ff"] != expected:
                raise ConfigError(
                    f"manifest feedforward geometry {entry['geometry']['ff']} does "
                    f"not match the recomputed {expected}")
            if len(ff_image) != ff_geom.total_rows * ff_geom.row_bytes:
                raise ConfigError("feedforward image size mismatch")
            current = design["current_bits"] if model is NeuronModel.SYNAPTIC else None
            state_geom = size_state_memory(n, design["potential_bits"], current)
            if entry["state_geometry"] != {"rows": state_geom.rows,
                                          "row_bits": state_geom.row_bits}:
                raise ConfigError("manifest state geometry mismatch")

            rec_q = self_q = None
            if topology is Topology.ATA_T:
                rec_geom = size_synaptic_memory(n, n, int(rec_bits))
                expected_rec = {"blocks": rec_geom.blocks,
                                "rows_per_block": rec_geom.rows_per_block,
                                "row_bits": rec_geom.row_bits}
                if entry["geometry"].get("rec") != expected_rec:
                    raise ConfigError("manifest recurrent geometry mismatch")
                if len(rec_image or b"") != rec_geom.total_rows * rec_geom.row_bytes:
                    raise ConfigError("recurrent image size mismatch")
                rec_q = unpack_weight_memory(rec_image, rec_geom, int(rec_bits), n, n)
            elif topology is Topology.ATA_F:
                expected_rec = {"self_rows": (n + 7) // 8,
                                "row_bits": 8 * int(rec_bits)}
                if entry["geometry"].get("rec") != expected_rec:
                    raise ConfigError("manifest self-weight geometry mismatch")
                if len(rec_image or b"") != ((n + 7) // 8) * int(rec_bits):
                    raise ConfigError("self-weight image size mismatch")
                self_q = unpack_self_weight_rows(rec_image, int(rec_bits), n)
            layers.append(QuantizedLayer(
                topology=topology,
                model=model,
                source_count=s,
                neuron_count=n,
                weight_bits=ff_bits,
                rec_weight_bits=None if rec_bits is None else int(rec_bits),
                ff_q=unpack_weight_memory(ff_image, ff_geom, ff_bits, s, n),
                rec_q=rec_q,
                self_q=self_q,
                weight_scale=float(entry["weight_scale"]),
                threshold_q=int(entry["threshold_q"]),
                beta=DecayRate(int(entry["beta_raw"])),
                alpha=(None if entry["alpha_raw"] is None
                       else DecayRate(int(entry["alpha_raw"]))),
                reset=_RESET_FROM_NAME[entry["reset"]],
            ))
        qmodel = QuantizedModel(
            layers=layers,
            input_channels=int(manifest["network"]["input_channels"]),
            timesteps=int(manifest["network"]["timesteps"]),
            ff_bits=int(chosen["ff_bits"]),
            rec_bits=None if chosen["rec_bits"] is None else int(chosen["rec_bits"]),
            leak_bits=int(chosen["leak_bits"]),
            potential_bits=int(design["potential_bits"]),
            current_bits=(None if design["current_bits"] is None
                          else int(design["current_bits"])),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"{path}: malformed manifest ({exc})") from None
    return qmodel, manifest


# --- calibration ---------------------------------------------------------------

def write_calibration(path, table: CalibrationTable) -> None:
    data = table.to_dict()
    data["schema_version"] = FORMAT_VERSION
    Path(path).write_text(dump_json(data))


def read_calibration(path) -> CalibrationTable:
    data = _parse_json(Path(path).read_text(), str(path))
    try:
        return CalibrationTable.from_dict(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"{path}: malformed calibration table ({exc})") from None


# --- project configuration ------------------------------------------------------

@dataclass
class LayerSpec:
    topology: Topology
    model: NeuronModel
    neurons: int


class ProjectConfig:
    """Parsed, validated view of a project JSON document.

    Keeps the raw dict so the document round-trips byte-identically.
    """

    def __init__(self, data: dict, base_dir: Path):
        self.raw = data
        self.base_dir = base_dir
        try:
            if data.get("schema_version") != FORMAT_VERSION:
                raise ParseError("unsupported or missing schema_version")
            self.seed = int(data.get("seed", 0))
            net = data["network"]
            self.input_channels = int(net["input_channels"])
            self.timesteps = int(net["timesteps"])
            self.potential_bits = int(net["potential_bits"])
            self.current_bits = (None if net.get("current_bits") is None
                                 else int(net["current_bits"]))
            self.queue_capacity = int(net.get("queue_capacity", 16))
            self.layers = [LayerSpec(Topology(entry["topology"]),
                                     NeuronModel(entry["model"]),
                                     int(entry["neurons"]))
                           for entry in net["layers"]]
            knobs = data["knobs"]
            self.ff_range = [int(v) for v in knobs["ff_bits"]]
            self.rec_range = [int(v) for v in knobs.get("rec_bits", [])]
            self.leak_range = [int(v) for v in knobs["leak_bits"]]
            w = data["cost_weights"]
            self.cost_weights = CostWeights(c_h=float(w["hw"]), c_a=float(w["acc"]),
                                            c_lut=float(w["lut"]), c_ff=float(w["ff"]),
                                            c_bram=float(w["bram"]))
            s = data.get("search", {})
            self.search = {
                "t_start": float(s.get("t_start", 1.0)),
                "t_min": float(s.get("t_min", 1e-3)),
                "alpha": float(s.get("alpha", 0.95)),
                "k_divisor": int(s.get("k_divisor", 1)),
            }
            self.normalization = data.get("normalization", "candidate-max")
            self.bram_primitive_bits = int(data.get("bram_primitive_bits", 36864))
            self.calibration_ref = data.get("calibration")
            sim = data.get("simulate", {})
            self.simulate_knobs = CandidateConfig(
                ff_bits=int(sim.get("ff_bits", max(self.ff_range))),
                rec_bits=(int(sim["rec_bits"]) if self.has_recurrent
                          and sim.get("rec_bits") is not None
                          else (max(self.rec_range) if self.has_recurrent else None)),
                leak_bits=int(sim.get("leak_bits", max(self.leak_range))),
            )
        except ParseError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"malformed project config ({exc})") from None
        SearchParams(seed=self.seed, **self.search)  # validate early
        if not self.layers:
            raise ConfigError("project network needs at least one layer")
        if self.has_recurrent and not self.rec_range:
            raise ConfigError("recurrent network requires a rec_bits knob range")

    @property
    def has_recurrent(self) -> bool:
        return any(layer.topology.recurrent for layer in self.layers)

    def candidate_space(self) -> CandidateSpace:
        return CandidateSpace.from_ranges(self.ff_range, self.rec_range or [0],
                                          self.leak_range,
                                          recurrent=self.has_recurrent)

    def design_params(self) -> DesignParams:
        return DesignParams(potential_bits=self.potential_bits,
                            current_bits=(self.current_bits
                                          if self.current_bits is not None else 16),
                            queue_capacity=self.queue_capacity)

    def search_params(self, seed: int | None = None) -> SearchParams:
        return SearchParams(seed=self.seed if seed is None else seed, **self.search)

    def network_config(self, cfg: CandidateConfig) -> NetworkConfig:
        cores = []
        source = self.input_channels
        for i, layer in enumerate(self.layers):
            synaptic = layer.model is NeuronModel.SYNAPTIC
            cores.append(CoreConfig(
                core_id=i,
                topology=layer.topology,
                model=layer.model,
                neuron_count=layer.neurons,
                source_count=source,
                ff_weight_bits=cfg.ff_bits,
                rec_weight_bits=cfg.rec_bits if layer.topology.recurrent else None,
                potential_bits=self.potential_bits,
                current_bits=self.current_bits if synaptic else None,
                queue_capacity=self.queue_capacity,
            ))
            source = layer.neurons
        return NetworkConfig(cores=cores, input_channels=self.input_channels,
                             timesteps=self.timesteps)

    def check_model(self, model: TrainedModel) -> None:
        """The model file must describe the same network as the project."""
        if model.input_channels != self.input_channels:
            raise ConfigError(
                f"model has {model.input_channels} input channels, project "
                f"declares {self.input_channels}")
        if len(model.layers) != len(self.layers):
            raise ConfigError(
                f"model has {len(model.layers)} layers, project declares "
                f"{len(self.layers)}")
        for i, (got, want) in enumerate(zip(model.layers, self.layers)):
            if (got.topology is not want.topology or got.model is not want.model
                    or got.neuron_count != want.neurons):
                raise ConfigError(
                    f"layer {i} mismatch: model says {got.topology.value}/"
                    f"{got.model.value}/{got.neuron_count}, project says "
                    f"{want.topology.value}/{want.model.value}/{want.neurons}")

    def calibration_table(self) -> CalibrationTable:
        if self.calibration_ref is None:
            return default_calibration()
        if isinstance(self.calibration_ref, str):
            return read_calibration(self.base_dir / self.calibration_ref)
        return CalibrationTable.from_dict(self.calibration_ref)

    def norms(self, estimates) -> ResourceNorms:
        if self.normalization == "candidate-max":
            return norms_from_candidates(estimates)
        if isinstance(self.normalization, dict):
            return ResourceNorms(luts=float(self.normalization["luts"]),
                                 flipflops=float(self.normalization["flipflops"]),
                                 brams=float(self.normalization["brams"]))
        raise ConfigError(f"unknown normalization mode {self.normalization!r}")


def read_project(path) -> ProjectConfig:
    path = Path(path)
    return ProjectConfig(_parse_json(path.read_text(), str(path)), path.parent)


def write_project(path, data: dict) -> None:
    Path(path).write_text(dump_json(data))
