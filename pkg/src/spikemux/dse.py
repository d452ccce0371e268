"""Precision design-space exploration by simulated annealing.

The knobs are the feedforward weight width, the recurrent weight width (when
any layer is recurrent), and the leak precision of the decay unit. Hardware
costs are precomputed for every candidate; accuracies are bit-exact
simulations, computed once per candidate and cached. Neighbors change exactly
one knob by one position in its sorted range. Cooling happens once per
temperature level, after the inner proposal batch.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import ConfigError, SpikemuxError
from .model import TrainedModel, quantize_model
from .system import build_network, run_inference


@dataclass(frozen=True)
class CandidateConfig:
    """One point of the search space. ``rec_bits`` is None when the network
    has no recurrent layer (the knob collapses)."""

    ff_bits: int
    rec_bits: int | None
    leak_bits: int


@dataclass(frozen=True)
class CandidateSpace:
    ff_values: tuple
    rec_values: tuple | None
    leak_values: tuple

    @classmethod
    def from_ranges(cls, ff_range, rec_range, leak_range,
                    recurrent: bool = True) -> "CandidateSpace":
        def canon(name, values):
            values = sorted(set(values))
            if not values:
                raise ConfigError(f"{name} range must not be empty")
            return tuple(values)

        return cls(
            ff_values=canon("feedforward width", ff_range),
            rec_values=canon("recurrent width", rec_range) if recurrent else None,
            leak_values=canon("leak precision", leak_range),
        )

    def knobs(self):
        knobs = [("ff_bits", self.ff_values)]
        if self.rec_values is not None:
            knobs.append(("rec_bits", self.rec_values))
        knobs.append(("leak_bits", self.leak_values))
        return knobs

    @property
    def candidates(self) -> list[CandidateConfig]:
        out = []
        for ff in self.ff_values:
            for rec in self.rec_values or (None,):
                for leak in self.leak_values:
                    out.append(CandidateConfig(ff, rec, leak))
        return out

    def __len__(self) -> int:
        n = len(self.ff_values) * len(self.leak_values)
        if self.rec_values is not None:
            n *= len(self.rec_values)
        return n


def enumerate_candidates(ff_range, rec_range, leak_range,
                         recurrent: bool = True) -> list[CandidateConfig]:
    """All knob combinations in deterministic lexicographic order."""
    return CandidateSpace.from_ranges(ff_range, rec_range, leak_range,
                                      recurrent).candidates


def neighbor(cfg: CandidateConfig, space: CandidateSpace,
             rng: random.Random) -> CandidateConfig:
    """Move one uniformly chosen variable knob to an adjacent value.

    At a range end only the inward move exists; the result always differs
    from ``cfg`` in exactly one knob.
    """
    variable = [(name, values) for name, values in space.knobs() if len(values) >= 2]
    if not variable:
        raise ConfigError("neighbor proposal needs a space with at least 2 candidates")
    name, values = variable[rng.randrange(len(variable))]
    index = values.index(getattr(cfg, name))
    if index == 0:
        index = 1
    elif index == len(values) - 1:
        index -= 1
    else:
        index += 1 if rng.random() < 0.5 else -1
    return replace(cfg, **{name: values[index]})


@dataclass(frozen=True)
class DesignParams:
    """Fixed (non-explored) design parameters used when evaluating candidates."""

    potential_bits: int = 16
    current_bits: int = 16
    queue_capacity: int = 16


DEFAULT_DESIGN = DesignParams()


@dataclass
class AccuracyCache:
    """Memoized candidate accuracies, with hit/miss counters for the tests
    and a diagnostic message for infeasible candidates."""

    values: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    hits: int = 0
    misses: int = 0

    def __contains__(self, cfg) -> bool:
        return cfg in self.values


def evaluate_accuracy(cfg: CandidateConfig, model: TrainedModel, eval_set,
                      cache: AccuracyCache | None = None,
                      design: DesignParams = DEFAULT_DESIGN) -> float:
    """Fraction of eval samples classified correctly at this candidate.

    Quantizes the model at the candidate's precisions and runs the bit-exact
    pipeline on every sample. A candidate that cannot be built scores 0.0
    (with a diagnostic) so the search stays total.
    """
    if not eval_set:
        raise ConfigError("evaluation set must not be empty")
    if cache is not None and cfg in cache:
        cache.hits += 1
        return cache.values[cfg]
    try:
        qmodel = quantize_model(model, cfg.ff_bits, cfg.rec_bits, cfg.leak_bits,
                                design.potential_bits, design.current_bits)
        network = build_network(qmodel, design.queue_capacity)
        correct = 0
        for sample in eval_set:
            if run_inference(network, sample).predicted == sample.label:
                correct += 1
        accuracy = correct / len(eval_set)
    except SpikemuxError as exc:
        accuracy = 0.0
        if cache is not None:
            cache.diagnostics[cfg] = f"{type(exc).__name__}: {exc}"
    if cache is not None:
        cache.values[cfg] = accuracy
        cache.misses += 1
    return accuracy


def prefetch_accuracies(candidates, model: TrainedModel, eval_set,
                        cache: AccuracyCache, design: DesignParams = DEFAULT_DESIGN,
                        threads: int = 1) -> None:
    """Fill the cache for many candidates, optionally in parallel.

    Evaluations are independent and deterministic, so prefetching never
    changes a subsequent search result.
    """
    todo = [cfg for cfg in candidates if cfg not in cache]
    if threads <= 1 or len(todo) <= 1:
        for cfg in todo:
            evaluate_accuracy(cfg, model, eval_set, cache, design)
        return
    local = {}

    def worker(cfg):
        local[cfg] = evaluate_accuracy(cfg, model, eval_set, None, design)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(worker, todo))
    for cfg in todo:
        cache.values[cfg] = local[cfg]
        cache.misses += 1


@dataclass(frozen=True)
class SearchParams:
    t_start: float = 1.0
    t_min: float = 1e-3
    alpha: float = 0.95
    k_divisor: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"cooling factor must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.t_min < self.t_start:
            raise ConfigError("temperatures must satisfy 0 < t_min < t_start")
        if self.k_divisor < 1:
            raise ConfigError(f"evaluation divisor must be >= 1, got {self.k_divisor}")


@dataclass(frozen=True)
class SaRecord:
    """One proposal in the annealing walk, sufficient to audit the
    acceptance rule offline."""

    temperature: float
    proposal: CandidateConfig
    delta: float
    accepted: bool
    metropolis_draw: float | None   # None when the move was not uphill
    best_cost: float


@dataclass
class SearchResult:
    best: CandidateConfig
    best_cost: float
    start: CandidateConfig
    history: list[SaRecord]


def simulated_annealing(space: CandidateSpace, cost_fn,
                        params: SearchParams) -> SearchResult:
    """Metropolis walk over the candidate space.

    ``cost_fn`` maps a candidate to its total cost (hardware costs are
    expected to be precomputed; accuracy lookups should be cached). Per
    temperature level, ``max(1, |space| / k_divisor)`` neighbors are probed;
    improving or equal-cost moves are always taken, uphill moves with
    probability exp(-delta / T). The walk is fully reproducible from the seed.
    """
    candidates = space.candidates
    rng = random.Random(params.seed)
    current = candidates[rng.randrange(len(candidates))]
    current_cost = cost_fn(current)
    start = current
    best, best_cost = current, current_cost
    history: list[SaRecord] = []
    if len(candidates) == 1:   # nothing to walk
        return SearchResult(best=best, best_cost=best_cost, start=start,
                            history=history)
    proposals_per_level = max(1, len(candidates) // params.k_divisor)

    temperature = params.t_start
    while temperature > params.t_min:
        for _ in range(proposals_per_level):
            proposal = neighbor(current, space, rng)
            proposal_cost = cost_fn(proposal)
            delta = proposal_cost - current_cost
            draw = None
            if delta <= 0:
                accepted = True
            else:
                draw = rng.random()
                accepted = draw < math.exp(-delta / temperature)
            if accepted:
                current, current_cost = proposal, proposal_cost
                if current_cost < best_cost:
                    best, best_cost = current, current_cost
            history.append(SaRecord(temperature, proposal, delta, accepted,
                                    draw, best_cost))
        temperature *= params.alpha
    return SearchResult(best=best, best_cost=best_cost, start=start, history=history)


def report_lines(result: SearchResult) -> list[str]:
    """Line-oriented search report: one record per proposal."""

    def fmt_cfg(cfg: CandidateConfig) -> str:
        rec = "-" if cfg.rec_bits is None else str(cfg.rec_bits)
        return f"ff={cfg.ff_bits} rec={rec} leak={cfg.leak_bits}"

    lines = [f"start {fmt_cfg(result.start)}"]
    for i, rec in enumerate(result.history):
        lines.append(
            f"iter={i} temp={rec.temperature:.9g} propose {fmt_cfg(rec.proposal)} "
            f"delta={rec.delta:.9g} accepted={int(rec.accepted)} "
            f"best={rec.best_cost:.9g}")
    lines.append(f"best {fmt_cfg(result.best)} cost={result.best_cost:.9g}")
    return lines
