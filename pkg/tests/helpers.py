"""Shared test fixtures: constructed tasks, random network generators, and
canonical result digests."""

import hashlib
import random

from spikemux.fxp import ResetPolicy
from spikemux.model import (Topology, TrainedLayer, TrainedModel,
                            quantize_model)
from spikemux.neuron import NeuronModel
from spikemux.system import EventSample, build_network

WEIGHT_BITS_CHOICES = (4, 6, 8)


def separable_task():
    """Three-class task that is perfectly separable at 8-bit weights and
    collapses to the tie-break class at 2-bit weights.

    12 input channels, 4 per class. Hidden pair (2c, 2c+1) responds to class
    c with weight 0.9; cross-class weights of 0.45 quantize to the same code
    as 0.9 once only one magnitude bit is left, which makes every hidden (and
    then every output) fire identically.
    """
    hidden = [[0.0] * 6 for _ in range(12)]
    for channel in range(12):
        cls = channel // 4
        for h in range(6):
            hidden[channel][h] = 0.9 if h // 2 == cls else 0.45
    output = [[0.0] * 3 for _ in range(6)]
    for h in range(6):
        for c in range(3):
            output[h][c] = 0.9 if h // 2 == c else 0.45
    layers = [
        TrainedLayer(Topology.FF, NeuronModel.LIF, 12, 6, hidden,
                     beta=0.25, threshold=2.8,
                     reset=ResetPolicy.RESET_BY_SUBTRACT),
        TrainedLayer(Topology.FF, NeuronModel.LIF, 6, 3, output,
                     beta=0.25, threshold=1.4,
                     reset=ResetPolicy.RESET_BY_SUBTRACT),
    ]
    model = TrainedModel(layers, input_channels=12, timesteps=8)

    samples = []
    for cls in range(3):
        for _ in range(3):
            step = [4 * cls + i for i in range(4)]
            samples.append(EventSample([list(step) for _ in range(8)], label=cls))
    return model, samples


def separable_features():
    """The same task as per-channel intensities (for the rate encoder)."""
    features, labels = [], []
    for cls in range(3):
        for _ in range(3):
            row = [0.0] * 12
            for i in range(4):
                row[4 * cls + i] = 1.0
            features.append(row)
            labels.append(cls)
    return features, labels


def random_trained_model(rng: random.Random) -> TrainedModel:
    depth = rng.randint(1, 3)
    input_channels = rng.randint(2, 16)
    layers = []
    source = input_channels
    for _ in range(depth):
        n = rng.randint(1, 16)
        topology = rng.choice(list(Topology))
        model = rng.choice(list(NeuronModel))

        def tensor(rows, cols):
            if rng.random() < 0.08:
                return [[0.0] * cols for _ in range(rows)]
            return [[rng.uniform(-1.0, 1.0) for _ in range(cols)] for _ in range(rows)]

        rec = tensor(n, n) if topology is Topology.ATA_T else None
        self_w = None
        if topology is Topology.ATA_F:
            self_w = [rng.uniform(-1.0, 1.0) for _ in range(n)]
        beta = rng.choice([0.0, 1.0, rng.random(), rng.random()])
        alpha = rng.choice([0.0, 1.0, rng.random()]) if model is NeuronModel.SYNAPTIC else None
        layers.append(TrainedLayer(
            topology=topology, model=model, source_count=source, neuron_count=n,
            ff_weights=tensor(source, n), rec_weights=rec, self_weights=self_w,
            beta=beta, alpha=alpha,
            threshold=rng.uniform(0.05, 2.0),
            reset=rng.choice(list(ResetPolicy)),
        ))
        source = n
    return TrainedModel(layers, input_channels=input_channels,
                        timesteps=rng.randint(3, 8))


def random_sample(rng: random.Random, model: TrainedModel) -> EventSample:
    steps = []
    for _ in range(rng.randint(3, min(6, model.timesteps))):
        k = rng.randint(0, model.input_channels)
        steps.append([rng.randrange(model.input_channels) for _ in range(k)])
    return EventSample(steps, label=rng.randrange(model.layers[-1].neuron_count))


def random_quantized_network(rng: random.Random, model: TrainedModel):
    qmodel = quantize_model(
        model,
        ff_bits=rng.choice(WEIGHT_BITS_CHOICES),
        rec_bits=rng.choice(WEIGHT_BITS_CHOICES),
        leak_bits=rng.randint(1, 8),
        potential_bits=rng.choice((8, 10, 12)),
        current_bits=rng.choice((8, 10, 12)),
    )
    return build_network(qmodel, queue_capacity=rng.choice((2, 4, 16)))


def result_digest(result) -> str:
    """Canonical byte digest of everything an inference produced."""
    blob = repr((result.predicted, result.counts, result.layer_records,
                 result.trace)).encode()
    return hashlib.sha256(blob).hexdigest()


def separable_recurrent_task():
    """ATA-F variant of the separable task (zero self-weights), for
    exercising the full three-knob search space."""
    model, samples = separable_task()
    layers = [
        TrainedLayer(Topology.ATA_F, layer.model, layer.source_count,
                     layer.neuron_count, layer.ff_weights,
                     self_weights=[0.0] * layer.neuron_count,
                     beta=layer.beta, threshold=layer.threshold,
                     reset=layer.reset)
        for layer in model.layers
    ]
    return TrainedModel(layers, model.input_channels, model.timesteps), samples


def separable_project_dict() -> dict:
    """Project document matching `separable_task` (knobs pick 2 vs 8 bits)."""
    return {
        "schema_version": 1,
        "seed": 3,
        "network": {
            "input_channels": 12,
            "timesteps": 8,
            "potential_bits": 12,
            "current_bits": None,
            "queue_capacity": 16,
            "layers": [
                {"topology": "FF", "model": "LIF", "neurons": 6},
                {"topology": "FF", "model": "LIF", "neurons": 3},
            ],
        },
        "knobs": {"ff_bits": [2, 8], "leak_bits": [8]},
        "cost_weights": {"hw": 0.3, "acc": 0.7, "lut": 0.33, "ff": 0.33,
                         "bram": 0.34},
        "search": {"t_start": 1.0, "t_min": 0.001, "alpha": 0.9, "k_divisor": 1},
        "normalization": "candidate-max",
        "bram_primitive_bits": 36864,
        "calibration": None,
        "simulate": {"ff_bits": 8, "leak_bits": 8},
    }
