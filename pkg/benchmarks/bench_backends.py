#!/usr/bin/env python3
"""Compare the compiled sweep kernels against the pure-Python fallback.

Runs the same workload under both backends: raw kernel micro-benchmarks plus
whole-sample inference on an MNIST-shaped 256-128-10 network, and checks the
results are bit-identical while timing them. The dense reference simulator is
timed alongside for context.

Usage: python benchmarks/bench_backends.py [--samples N] [--steps T]
"""

import argparse
import random
import time

import numpy as np

from spikemux import kernels
from spikemux.encode import rate_encode
from spikemux.fxp import ResetPolicy
from spikemux.model import Topology, TrainedLayer, TrainedModel, quantize_model
from spikemux.neuron import NeuronModel
from spikemux.reference import dense_reference
from spikemux.system import EventSample, build_network, run_inference


def kernel_rates(backend, repeats=20_000):
    impl = kernels.get_backend(backend)
    rng = random.Random(1)
    mem = np.array([rng.randint(-2000, 2000) for _ in range(128)], dtype=np.int64)
    w = np.array([rng.randint(-127, 127) for _ in range(128)], dtype=np.int64)
    lo, hi = -(1 << 15), (1 << 15) - 1

    t0 = time.perf_counter()
    for _ in range(repeats):
        impl.add_column(mem, w, lo, hi)
    t_add = time.perf_counter() - t0

    t0 = time.perf_counter()
    for _ in range(repeats):
        impl.leak_fire_lif(mem, 12_000, 153, 1, lo, hi)
    t_leak = time.perf_counter() - t0
    return repeats / t_add, repeats / t_leak


def mnist_shaped_workload(samples, steps, seed=7):
    rng = random.Random(seed)
    layers = []
    source = 256
    for neurons in (128, 10):
        weights = [[rng.uniform(-1, 1) for _ in range(neurons)] for _ in range(source)]
        layers.append(TrainedLayer(Topology.FF, NeuronModel.LIF, source, neurons,
                                   weights, beta=0.59765625, threshold=6.0,
                                   reset=ResetPolicy.RESET_BY_SUBTRACT))
        source = neurons
    model = TrainedModel(layers, input_channels=256, timesteps=steps)
    dataset = []
    for _ in range(samples):
        intensities = [rng.random() * 0.3 for _ in range(256)]
        dataset.append(EventSample(rate_encode(intensities, steps), label=0))
    return model, dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=10)
    parser.add_argument("--steps", type=int, default=50)
    args = parser.parse_args()

    model, dataset = mnist_shaped_workload(args.samples, args.steps)
    qmodel = quantize_model(model, ff_bits=6, rec_bits=None, leak_bits=8,
                            potential_bits=16, current_bits=None)
    network = build_network(qmodel)

    available = kernels.available_backends()
    print(f"backends: {', '.join(available)} (active: {kernels.backend_name()})")
    print(f"workload: 256-128-10 LIF feedforward, {args.samples} samples x "
          f"{args.steps} steps\n")

    results = {}
    timings = {}
    previous = kernels.backend_name()
    try:
        for backend in available:
            kernels.use(backend)
            add_rate, leak_rate = kernel_rates(backend)
            t0 = time.perf_counter()
            outcome = [run_inference(network, s).counts for s in dataset]
            per_sample = (time.perf_counter() - t0) / len(dataset) * 1000
            results[backend] = outcome
            timings[backend] = (add_rate, leak_rate, per_sample)
    finally:
        kernels.use(previous)

    print(f"{'backend':>8} {'add_column/s':>14} {'leak_fire/s':>13} "
          f"{'ms/sample':>11} {'vs py':>7}")
    py_ms = timings["py"][2]
    for backend, (add_rate, leak_rate, per_sample) in timings.items():
        print(f"{backend:>8} {add_rate:>14.0f} {leak_rate:>13.0f} "
              f"{per_sample:>11.3f} {py_ms / per_sample:>6.2f}x")

    first = next(iter(results.values()))
    if all(outcome == first for outcome in results.values()):
        print("\nbackends agree bit-exactly on all samples")
    else:
        raise SystemExit("BACKEND MISMATCH: results differ between backends")

    t0 = time.perf_counter()
    for sample in dataset[:3]:
        dense_reference(network, sample)
    dense_ms = (time.perf_counter() - t0) / 3 * 1000
    print(f"dense reference (scalar oracle): {dense_ms:.1f} ms/sample")


if __name__ == "__main__":
    main()
