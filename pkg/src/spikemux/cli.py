"""Command-line front end.

Commands: encode, simulate, explore, estimate, manifest-check. Every command
is deterministic given its inputs and seed; errors exit nonzero with a
machine-readable category on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import cost, dse, files
from .encode import downscale_images, encode_dataset
from .errors import ConfigError, ParseError, SpikemuxError
from .model import quantize_model
from .system import build_network, network_config_from_quantized, run_inference

EXIT_CODES = {
    "config-error": 2,
    "capacity-error": 3,
    "protocol-error": 4,
    "parse-error": 5,
    "calibration-error": 6,
    "deadlock-error": 7,
    "io-error": 8,
    "internal-error": 1,
}


def _fail(category: str, message: str) -> int:
    sys.stderr.write(files.dump_json({"error": {"category": category,
                                                "message": message}}))
    return EXIT_CODES.get(category, 1)


def _write_trace(path, traces) -> None:
    lines = []
    for index, trace in enumerate(traces):
        lines.append(f"sample {index}")
        for rec in trace:
            lines.append(f"{rec.step} {rec.source} {rec.kind.value} {rec.address}")
    Path(path).write_text("\n".join(lines) + "\n")


def _load_inputs(args):
    """Resolve (qmodel, queue_capacity, sim-knobs description) from either a
    manifest or a project+model pair."""
    if args.manifest:
        qmodel, manifest = files.read_manifest(args.manifest)
        return qmodel, manifest["design"]["queue_capacity"]
    if not args.config or not args.model:
        raise ConfigError("either --manifest or both --config and --model are required")
    project = files.read_project(args.config)
    model = files.read_model(args.model)
    project.check_model(model)
    knobs = project.simulate_knobs
    qmodel = quantize_model(model, knobs.ff_bits, knobs.rec_bits, knobs.leak_bits,
                            project.potential_bits, project.current_bits)
    return qmodel, project.queue_capacity


def cmd_encode(args) -> int:
    data = np.load(args.input)
    labels = data["labels"] if "labels" in data else None
    if "features" in data:
        features = [list(map(float, row)) for row in data["features"]]
    elif "images" in data:
        images = [[list(map(float, row)) for row in img] for img in data["images"]]
        if args.downscale:
            features = downscale_images(images, args.downscale)
        else:
            features = [[v for row in img for v in row] for img in images]
    else:
        raise ParseError(f"{args.input}: expected a 'features' or 'images' array")
    samples = encode_dataset(features, labels, args.steps, args.mode, args.seed)
    channels = len(features[0]) if features else 0
    files.write_dataset(args.out, samples, channels)
    print(f"encoded {len(samples)} samples x {channels} channels "
          f"x {args.steps} steps -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    qmodel, queue_capacity = _load_inputs(args)
    samples, channels = files.read_dataset(args.dataset)
    if channels != qmodel.input_channels:
        raise ConfigError(f"dataset has {channels} channels, model expects "
                          f"{qmodel.input_channels}")
    network = build_network(qmodel, queue_capacity)
    threads = args.threads
    predictions, labels, traces = [], [], []
    correct = labeled = 0
    for sample in samples:
        result = run_inference(network, sample, threads=threads,
                               record_trace=args.trace is not None)
        predictions.append(result.predicted)
        labels.append(sample.label)
        if args.trace is not None:
            traces.append(result.trace)
        if sample.label is not None:
            labeled += 1
            correct += int(result.predicted == sample.label)
    accuracy = correct / labeled if labeled else None
    if args.trace is not None:
        _write_trace(args.trace, traces)
    report = {
        "schema_version": files.FORMAT_VERSION,
        "samples": len(samples),
        "labeled": labeled,
        "correct": correct if labeled else None,
        "accuracy": accuracy,
        "predictions": predictions,
        "labels": labels,
        "precisions": {"ff_bits": qmodel.ff_bits, "rec_bits": qmodel.rec_bits,
                       "leak_bits": qmodel.leak_bits},
    }
    if args.out:
        Path(args.out).write_text(files.dump_json(report))
    if accuracy is None:
        print(f"simulated {len(samples)} samples (unlabeled)")
    else:
        print(f"accuracy {accuracy:.6f} ({correct}/{labeled})")
    return 0


def cmd_explore(args) -> int:
    project = files.read_project(args.config)
    model = files.read_model(args.model)
    project.check_model(model)
    samples, channels = files.read_dataset(args.dataset)
    if channels != project.input_channels:
        raise ConfigError(f"dataset has {channels} channels, project expects "
                          f"{project.input_channels}")
    if any(s.label is None for s in samples):
        raise ConfigError("exploration requires a labeled dataset")

    space = project.candidate_space()
    candidates = space.candidates
    table = project.calibration_table()
    design = project.design_params()
    estimates = {cfg: cost.estimate_resources(project.network_config(cfg), table,
                                              project.bram_primitive_bits)
                 for cfg in candidates}
    norms = project.norms(estimates.values())
    weights = project.cost_weights

    cache = dse.AccuracyCache()
    if args.threads > 1:
        dse.prefetch_accuracies(candidates, model, samples, cache, design,
                                threads=args.threads)

    def cost_fn(cfg):
        accuracy = dse.evaluate_accuracy(cfg, model, samples, cache, design)
        return cost.total_cost(estimates[cfg], accuracy, weights, norms)

    params = project.search_params(args.seed)
    result = dse.simulated_annealing(space, cost_fn, params)
    best_accuracy = cache.values[result.best]

    out = Path(args.out)
    report_path = Path(f"{out}.report.txt")
    manifest_path = Path(f"{out}.manifest.json")
    weights_path = Path(f"{out}.weights.bin")
    lines = [f"candidates {len(candidates)}", f"seed {params.seed}"]
    lines += dse.report_lines(result)
    lines.append(f"best_accuracy {best_accuracy:.9g}")
    report_path.write_text("\n".join(lines) + "\n")

    best_q = quantize_model(model, result.best.ff_bits, result.best.rec_bits,
                            result.best.leak_bits, project.potential_bits,
                            project.current_bits)
    files.write_manifest(manifest_path, weights_path, best_q,
                         queue_capacity=project.queue_capacity,
                         accuracy=best_accuracy, eval_samples=len(samples),
                         dataset_sha256=files.sha256_file(args.dataset))
    rec = "-" if result.best.rec_bits is None else result.best.rec_bits
    print(f"best ff={result.best.ff_bits} rec={rec} leak={result.best.leak_bits} "
          f"cost={result.best_cost:.9g} accuracy={best_accuracy:.6f}")
    print(f"wrote {report_path}, {manifest_path}, {weights_path}")
    return 0


def cmd_estimate(args) -> int:
    rows = []
    if args.manifest:
        qmodel, manifest = files.read_manifest(args.manifest)
        net = network_config_from_quantized(qmodel,
                                            manifest["design"]["queue_capacity"])
        table = (files.read_project(args.config).calibration_table()
                 if args.config else cost.default_calibration())
        est = cost.estimate_resources(net, table)
        rows.append((qmodel.ff_bits, qmodel.rec_bits, qmodel.leak_bits, est))
    else:
        if not args.config:
            raise ConfigError("estimate requires --config or --manifest")
        project = files.read_project(args.config)
        table = project.calibration_table()
        for cfg in project.candidate_space().candidates:
            est = cost.estimate_resources(project.network_config(cfg), table,
                                          project.bram_primitive_bits)
            rows.append((cfg.ff_bits, cfg.rec_bits, cfg.leak_bits, est))
        if table.placeholder:
            print("note: using placeholder calibration coefficients "
                  "(not fitted to synthesis results)")
    print(f"{'ff':>4} {'rec':>4} {'leak':>5} {'luts':>10} {'flipflops':>10} {'brams':>6}")
    for ff, rec, leak, est in rows:
        rec_s = "-" if rec is None else str(rec)
        print(f"{ff:>4} {rec_s:>4} {leak:>5} {est.luts:>10.1f} "
              f"{est.flipflops:>10.1f} {est.brams:>6.0f}")
    if args.out:
        payload = {
            "schema_version": files.FORMAT_VERSION,
            "estimates": [
                {"ff_bits": ff, "rec_bits": rec, "leak_bits": leak,
                 "luts": est.luts, "flipflops": est.flipflops, "brams": est.brams}
                for ff, rec, leak, est in rows
            ],
        }
        Path(args.out).write_text(files.dump_json(payload))
    return 0


def cmd_manifest_check(args) -> int:
    qmodel, manifest = files.read_manifest(args.manifest)
    network = build_network(qmodel, manifest["design"]["queue_capacity"])
    print(f"manifest ok: {len(qmodel.layers)} layers, "
          f"ff={qmodel.ff_bits} rec={qmodel.rec_bits} leak={qmodel.leak_bits}")
    if args.dataset:
        samples, channels = files.read_dataset(args.dataset)
        if channels != qmodel.input_channels:
            raise ConfigError(f"dataset has {channels} channels, manifest expects "
                              f"{qmodel.input_channels}")
        labeled = [s for s in samples if s.label is not None]
        if not labeled:
            raise ConfigError("manifest check needs a labeled dataset")
        correct = sum(run_inference(network, s, threads=args.threads).predicted
                      == s.label for s in labeled)
        accuracy = correct / len(labeled)
        recorded = manifest["eval"]["accuracy"]
        print(f"recomputed accuracy {accuracy:.6f} "
              f"(recorded {'-' if recorded is None else f'{recorded:.6f}'})")
        if recorded is not None and accuracy != recorded:
            raise ConfigError(
                f"accuracy mismatch: manifest records {recorded}, "
                f"recomputed {accuracy}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikemux",
        description="Bit-exact event-driven SNN core simulator and "
                    "precision explorer")
    sub = parser.add_subparsers(dest="command", required=True)
    default_threads = os.cpu_count() or 1

    p = sub.add_parser("encode", help="encode intensities into an event dataset")
    p.add_argument("--input", required=True, help="npz with features/images (+labels)")
    p.add_argument("--out", required=True, help="output event dataset")
    p.add_argument("--steps", type=int, required=True, help="encoding window length")
    p.add_argument("--mode", choices=("rate", "bernoulli"), default="rate")
    p.add_argument("--seed", type=int, default=None,
                   help="seed (required for bernoulli mode)")
    p.add_argument("--downscale", type=int, default=None,
                   help="pool images onto this many pixels per side")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("simulate", help="run a dataset through the pipeline")
    p.add_argument("--config", help="project JSON")
    p.add_argument("--model", help="trained model file")
    p.add_argument("--manifest", help="manifest (instead of --config/--model)")
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=default_threads)
    p.add_argument("--trace", help="write a packet trace to this path")
    p.add_argument("--out", help="write the report JSON to this path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("explore", help="search precisions by simulated annealing")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--seed", type=int, default=None,
                   help="overrides the project seed")
    p.add_argument("--threads", type=int, default=default_threads)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("estimate", help="hardware-resource estimates")
    p.add_argument("--config", help="project JSON (estimates the whole knob grid)")
    p.add_argument("--manifest", help="manifest (estimates the chosen point)")
    p.add_argument("--out", help="write estimates JSON to this path")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("manifest-check", help="validate a manifest and its weights")
    p.add_argument("--manifest", required=True)
    p.add_argument("--dataset", help="recompute accuracy on this dataset")
    p.add_argument("--threads", type=int, default=default_threads)
    p.set_defaults(func=cmd_manifest_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpikemuxError as exc:
        return _fail(exc.category, str(exc))
    except FileNotFoundError as exc:
        return _fail("io-error", str(exc))
    except OSError as exc:
        return _fail("io-error", str(exc))


if __name__ == "__main__":
    sys.exit(main())
