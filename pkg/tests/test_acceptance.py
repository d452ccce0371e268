"""Acceptance suite: one test per criterion, each printing a pass line with
its runtime (run with `pytest tests/test_acceptance.py -v -s` to see them).

Every tolerance and budget is pinned here; nothing is deferred to later
calibration. The equivalence criteria are zero-tolerance bit-exact checks.
"""

import json
import random
import threading
import time

import numpy as np
import pytest

from helpers import (random_quantized_network, random_sample,
                     random_trained_model, result_digest, separable_features,
                     separable_project_dict, separable_task)
from spikemux import kernels, spi
from spikemux.aer import Channel
from spikemux.cli import main as cli_main
from spikemux.cost import (CostWeights, ResourceEstimate, ResourceNorms,
                           default_calibration, estimate_resources,
                           norms_from_candidates, total_cost)
from spikemux.decay import apply_decay, apply_decay_int, encode_decay, DecayRate
from spikemux.dse import CandidateSpace, SearchParams, simulated_annealing
from spikemux.errors import ConfigError
from spikemux.files import write_model, write_project
from spikemux.fxp import QFormat, QWord
from spikemux.model import Topology, quantize_model
from spikemux.neuron import NeuronModel, size_state_memory, size_synaptic_memory
from spikemux.reference import dense_reference
from spikemux.spi import (MemTarget, SpiCommand, SpiRw, decode_address_word,
                          encode_address_word, run_frame)
from spikemux.system import CoreConfig, NetworkConfig, run_inference


def report(number: int, summary: str, elapsed: float) -> None:
    print(f"[acceptance] criterion {number}: PASS - {summary} ({elapsed:.2f}s)")


# --- criterion 1: decay-unit exactness and bounds ---------------------------

def test_criterion_1_decay_exactness():
    start = time.monotonic()
    xs = np.arange(-32768, 32769, 7, dtype=np.int64)
    for k in range(256):
        res = xs.copy()
        kernels.decay_array(res, k)
        neg = (-xs).copy()
        kernels.decay_array(neg, k)
        assert np.array_equal(neg, -res), f"sign symmetry broken at k={k}"
        err = np.abs(xs) * k - np.abs(res) * 256
        assert err.min() >= 0 and err.max() < 8 * 256, f"shift bound broken at k={k}"

    # scalar word-level path agrees with the array kernels on a subsample
    fmt = QFormat(17)
    for k in range(0, 256, 15):
        rate = DecayRate.from_k(k)
        for x in xs[::131].tolist():
            array_one = np.array([x], dtype=np.int64)
            kernels.decay_array(array_one, k)
            assert apply_decay(QWord(x, fmt), rate).value == int(array_one[0])

    rng = random.Random(20240601)
    worst = 0.0
    for _ in range(10_000):
        f = rng.random()
        worst = max(worst, abs(f - encode_decay(f, 8).factor()))
    assert worst <= 1 / 512

    assert apply_decay_int(256, 153) == 153
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report(1, f"256 k x {len(xs)} x sweep exact, encode error <= 1/512 "
              f"(worst {worst:.6f}), k=153 reproduces 153", elapsed)


# --- criterion 2: memory-sizing ground truth ---------------------------------

def test_criterion_2_memory_sizing():
    start = time.monotonic()
    geom = size_synaptic_memory(110, 90, 6)
    assert geom.blocks == 128 and geom.block_addr_bits == 7
    assert geom.rows_per_block == 16 and geom.row_addr_bits == 4
    assert size_state_memory(128, 9, 8).row_bits == 24
    report(2, "110->128 blocks/7 bits, 90->16 rows/4 bits, 9+8->24 bits",
           time.monotonic() - start)


# --- criterion 3: SPI codec and memory access --------------------------------

def test_criterion_3_spi_codec():
    start = time.monotonic()
    rng = random.Random(777)
    for _ in range(100_000):
        if rng.random() < 0.25:
            cmd = SpiCommand.config_write(rng.randrange(12), rng.randrange(1 << 15))
        else:
            target = rng.choice([MemTarget.NEURON_STATE, MemTarget.FEEDFORWARD,
                                 MemTarget.RECURRENT])
            rw = rng.choice([SpiRw.READ, SpiRw.WRITE])
            if target is MemTarget.NEURON_STATE:
                cmd = SpiCommand.neuron_state(rw, rng.randrange(256),
                                              rng.randrange(2048))
            else:
                cmd = SpiCommand.synaptic(rw, target, rng.randrange(8192),
                                          rng.randrange(64))
        assert decode_address_word(encode_address_word(cmd)) == cmd

    # full write/read-back over both cores of an MNIST-shaped network
    cores = [CoreConfig(0, Topology.FF, NeuronModel.LIF, 128, 256, 6, None, 9, None),
             CoreConfig(1, Topology.FF, NeuronModel.LIF, 10, 128, 6, None, 9, None)]
    from spikemux.system import Network
    network = Network(NetworkConfig(cores, 256, 100))
    patterns = {}
    for index, core in enumerate(network.cores):
        select = encode_address_word(SpiCommand.config_write(spi.REG_CORE_SELECT, index))
        for c in network.cores:
            run_frame(select, None, c.slave)
        for target, rows, row_bytes in (
                (MemTarget.FEEDFORWARD, core.ff_geometry.total_rows,
                 core.ff_geometry.row_bytes),
                (MemTarget.NEURON_STATE, core.state_geometry.rows,
                 core.state_geometry.row_bytes)):
            for row in range(rows):
                for offset in range(row_bytes):
                    value = (index * 131 + row * 7 + offset * 3) & 0xFF
                    patterns[(index, target, row, offset)] = value
                    if target is MemTarget.NEURON_STATE:
                        cmd = SpiCommand.neuron_state(SpiRw.WRITE, row, offset)
                    else:
                        cmd = SpiCommand.synaptic(SpiRw.WRITE, target, row, offset)
                    run_frame(encode_address_word(cmd), value, core.slave)
    for index, core in enumerate(network.cores):
        select = encode_address_word(SpiCommand.config_write(spi.REG_CORE_SELECT, index))
        for c in network.cores:
            run_frame(select, None, c.slave)
        for (idx, target, row, offset), value in patterns.items():
            if idx != index:
                continue
            if target is MemTarget.NEURON_STATE:
                cmd = SpiCommand.neuron_state(SpiRw.READ, row, offset)
            else:
                cmd = SpiCommand.synaptic(SpiRw.READ, target, row, offset)
            assert run_frame(encode_address_word(cmd), None, core.slave) == value

    # a non-selected core ignores every write
    select_other = encode_address_word(SpiCommand.config_write(spi.REG_CORE_SELECT, 9))
    for c in network.cores:
        run_frame(select_other, None, c.slave)
    victim = network.cores[0]
    before_regs = list(victim.slave.registers)
    before_mem = bytes(victim.slave.ff_mem)
    run_frame(encode_address_word(SpiCommand.config_write(spi.REG_THRESHOLD, 123)),
              None, victim.slave)
    run_frame(encode_address_word(
        SpiCommand.synaptic(SpiRw.WRITE, MemTarget.FEEDFORWARD, 0, 0)),
        0xEE, victim.slave)
    before_regs[spi.REG_CORE_SELECT] = 9
    assert list(victim.slave.registers) == before_regs
    assert bytes(victim.slave.ff_mem) == before_mem

    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    report(3, "100k codec roundtrips, full 2-core memory readback, "
              "unselected cores inert", elapsed)


# --- criteria 4 + 7: event/dense equivalence and concurrency determinism -----

@pytest.fixture(scope="module")
def equivalence_suite():
    """1000 random small networks compared bit-exactly against the dense
    oracle (criterion 4); returns everything criterion 7 needs to re-run."""
    start = time.monotonic()
    rng = random.Random(0xF1E5)
    cases = []
    for _ in range(1000):
        model = random_trained_model(rng)
        network = random_quantized_network(rng, model)
        sample = random_sample(rng, model)
        event = run_inference(network, sample, record_trace=True, record_state=True)
        dense = dense_reference(network, sample, record_trace=True, record_state=True)
        assert event.layer_records == dense.layer_records, "membrane traces diverged"
        assert event.trace == dense.trace, "packet traces diverged"
        assert event.counts == dense.counts
        assert event.predicted == dense.predicted
        cases.append((network, sample, result_digest(event)))
    return cases, time.monotonic() - start


def test_criterion_4_event_dense_equivalence(equivalence_suite):
    cases, elapsed = equivalence_suite
    assert len(cases) == 1000
    assert elapsed < 300.0
    report(4, "1000 random networks bit-identical between the event pipeline "
              "and the dense oracle", elapsed)


def test_criterion_7_concurrency_determinism(equivalence_suite):
    cases, _ = equivalence_suite
    start = time.monotonic()
    for network, sample, digest in cases:
        threaded = run_inference(network, sample, threads=4,
                                 record_trace=True, record_state=True)
        assert result_digest(threaded) == digest
    report(7, "criterion-4 suite reproduces identical bytes under one thread "
              "per core", time.monotonic() - start)


# --- criterion 5: IF is LIF with the decay bypassed --------------------------

def test_criterion_5_if_lif_bypass_equivalence():
    start = time.monotonic()
    rng = random.Random(51)
    for _ in range(100):
        model = random_trained_model(rng)
        for layer in model.layers:
            layer.model = NeuronModel.IF
            layer.alpha = None
        sample = random_sample(rng, model)
        bits = rng.choice((4, 6, 8))
        net_if = __build(model, bits)
        for layer in model.layers:
            layer.model = NeuronModel.LIF
            layer.beta = 1.0
        net_lif = __build(model, bits)
        a = run_inference(net_if, sample, record_trace=True, record_state=True)
        b = run_inference(net_lif, sample, record_trace=True, record_state=True)
        assert a.layer_records == b.layer_records
        assert a.trace == b.trace and a.counts == b.counts
    report(5, "100 random networks: IF outputs identical to bypass-LIF",
           time.monotonic() - start)


def __build(model, bits):
    from spikemux.system import build_network
    return build_network(quantize_model(model, bits, bits, 8, 12, 12))


# --- criterion 6: lossless AER transport under stalls -------------------------

def test_criterion_6_aer_losslessness():
    start = time.monotonic()
    rng = random.Random(66)
    payload = []
    terminators = 0
    for i in range(10_000):
        if i % 97 == 96:
            payload.append(("EOTS", 0))
            terminators += 1
        else:
            payload.append(("ASPL", rng.randrange(256)))
    payload.append(("EOIN", 1))

    channel = Channel(4)
    received = []
    stall = random.Random(67)

    def consumer():
        while True:
            item = channel.recv(10.0)
            received.append(item)
            if item[0] == "EOIN":
                return
            if stall.random() < 0.01:
                time.sleep(0.0002)

    thread = threading.Thread(target=consumer, daemon=True)
    thread.start()
    for item in payload:
        channel.send(item, 10.0)
        if rng.random() < 0.005:
            time.sleep(0.0001)
    thread.join(10.0)

    assert received == payload, "loss or reordering detected"
    assert sum(1 for k, _ in received if k == "EOTS") == terminators
    assert sum(1 for k, _ in received if k == "EOIN") == 1
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report(6, f"{len(payload)} packets through a capacity-4 queue with random "
              "stalls: zero loss, order preserved", elapsed)


# --- criterion 8: annealing optimality on the 32-candidate space --------------

def fig11_shaped_costs():
    """Hardware costs from the real estimator on a [256, 200, 11] self-loop
    network, plus a frozen synthetic accuracy table."""
    space = CandidateSpace.from_ranges([4, 8, 12, 16], [4, 8, 12, 16], [3, 8])
    table = default_calibration()
    weights = CostWeights(0.5, 0.5, 0.330, 0.330, 0.340)
    estimates = {}
    for cfg in space.candidates:
        cores = [CoreConfig(0, Topology.ATA_F, NeuronModel.LIF, 200, 256,
                            cfg.ff_bits, cfg.rec_bits, 12, None),
                 CoreConfig(1, Topology.ATA_F, NeuronModel.LIF, 11, 200,
                            cfg.ff_bits, cfg.rec_bits, 12, None)]
        net = NetworkConfig(cores, 256, 60)
        estimates[cfg] = estimate_resources(net, table)
    norms = norms_from_candidates(estimates.values())
    rng = random.Random(888)
    costs = {}
    for cfg in space.candidates:
        accuracy = max(0.0, min(1.0, 0.45 + 0.03 * cfg.ff_bits
                                - 0.04 * max(0, cfg.rec_bits - cfg.ff_bits) / 4
                                + 0.01 * (cfg.leak_bits / 8)
                                + rng.uniform(-0.03, 0.03)))
        costs[cfg] = total_cost(estimates[cfg], accuracy, weights, norms)
    return space, costs


def test_criterion_8_annealing_optimality():
    start = time.monotonic()
    space, costs = fig11_shaped_costs()
    assert len(space.candidates) == 32
    optimum = min(costs.values())
    hits = 0
    for seed in range(100):
        params = SearchParams(t_start=1.0, t_min=1e-3, alpha=0.95,
                              k_divisor=1, seed=seed)
        result = simulated_annealing(space, costs.__getitem__, params)
        bests = [rec.best_cost for rec in result.history]
        assert all(a >= b for a, b in zip(bests, bests[1:])), \
            "best-cost history not monotone"
        hits += result.best_cost == optimum
    elapsed = time.monotonic() - start
    assert hits >= 95, f"only {hits}/100 seeded runs found the optimum"
    assert elapsed < 120.0
    report(8, f"{hits}/100 seeded runs returned the brute-forced optimum; "
              "history monotone in all runs", elapsed)


# --- criterion 9: cost-function arithmetic ------------------------------------

def test_criterion_9_cost_arithmetic():
    start = time.monotonic()
    weights = CostWeights(0.5, 0.5, 0.33, 0.33, 0.34)
    est = ResourceEstimate(50.0, 5.0, 2.0)
    norms = ResourceNorms(100.0, 10.0, 4.0)
    assert abs(total_cost(est, 0.9, weights, norms) - 0.30) < 1e-12
    with pytest.raises(ConfigError):
        CostWeights(0.6, 0.5, 0.33, 0.33, 0.34)
    with pytest.raises(ConfigError):
        CostWeights(0.5, 0.5, 0.5, 0.5, 0.5)
    with pytest.raises(ConfigError):
        total_cost(est, 1.5, weights, norms)
    with pytest.raises(ConfigError):
        ResourceNorms(0.0, 1.0, 1.0)
    report(9, "worked example exact to 1e-12; constraint violations rejected",
           time.monotonic() - start)


# --- criterion 10: end-to-end CLI flow ----------------------------------------

def test_criterion_10_end_to_end(tmp_path):
    start = time.monotonic()
    features, labels = separable_features()
    raw = tmp_path / "raw.npz"
    np.savez(raw, features=np.array(features), labels=np.array(labels))
    model, _ = separable_task()
    model_path = tmp_path / "task.smdl"
    write_model(model_path, model)
    project_path = tmp_path / "project.json"
    write_project(project_path, separable_project_dict())

    outputs = []
    for run_name in ("first", "second"):
        outdir = tmp_path / run_name
        outdir.mkdir()
        data = outdir / "data.sevt"
        assert cli_main(["encode", "--input", str(raw), "--out", str(data),
                         "--steps", "8"]) == 0
        prefix = outdir / "search"
        assert cli_main(["explore", "--config", str(project_path),
                         "--model", str(model_path), "--dataset", str(data),
                         "--out", str(prefix), "--threads", "1"]) == 0
        manifest_path = outdir / "search.manifest.json"
        assert cli_main(["manifest-check", "--manifest", str(manifest_path),
                         "--dataset", str(data), "--threads", "1"]) == 0
        report_path = outdir / "report.json"
        assert cli_main(["simulate", "--manifest", str(manifest_path),
                         "--dataset", str(data), "--threads", "1",
                         "--out", str(report_path)]) == 0
        body = json.loads(report_path.read_text())
        manifest = json.loads(manifest_path.read_text())
        assert manifest["chosen"]["ff_bits"] == 8
        assert manifest["eval"]["accuracy"] == 1.0
        assert body["accuracy"] == 1.0
        outputs.append({
            "data": data.read_bytes(),
            "report": (outdir / "search.report.txt").read_bytes(),
            "manifest": manifest_path.read_bytes(),
            "weights": (outdir / "search.weights.bin").read_bytes(),
            "result": report_path.read_bytes(),
        })
    assert outputs[0] == outputs[1], "reruns are not byte-identical"
    elapsed = time.monotonic() - start
    assert elapsed < 180.0
    report(10, "encode -> explore -> manifest-check -> simulate reaches "
               "accuracy 1.0 at ff=8, byte-identical across runs", elapsed)
