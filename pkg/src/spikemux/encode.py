"""Dataset encoding: intensities to spike trains.

The default encoder is deterministic rate coding: a channel with normalized
intensity p emits a spike at step t iff floor((t+1)*p) > floor(t*p), which
spreads round(T*p) spikes evenly over the window. A seeded Bernoulli mode
(spike with probability p per step) is available behind a flag.
"""

from __future__ import annotations

import math
import random

from .errors import CapacityError, ConfigError
from .neuron import MAX_NEURONS_PER_CORE
from .system import EventSample


def rate_encode(intensities, timesteps: int) -> list[list[int]]:
    """Evenly spread spike trains for one sample; returns per-step addresses."""
    if timesteps < 1:
        raise ConfigError("encoding window must be at least one step")
    steps = []
    for t in range(timesteps):
        addresses = []
        for channel, p in enumerate(intensities):
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"intensity {p} outside [0, 1] on channel {channel}")
            if math.floor((t + 1) * p) > math.floor(t * p):
                addresses.append(channel)
        steps.append(addresses)
    return steps


def bernoulli_encode(intensities, timesteps: int, rng: random.Random) -> list[list[int]]:
    """Stochastic rate coding; reproducible from the caller's seeded rng."""
    if timesteps < 1:
        raise ConfigError("encoding window must be at least one step")
    steps = []
    for _ in range(timesteps):
        addresses = []
        for channel, p in enumerate(intensities):
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"intensity {p} outside [0, 1] on channel {channel}")
            if rng.random() < p:
                addresses.append(channel)
        steps.append(addresses)
    return steps


def check_channel_count(channels: int) -> None:
    if channels > MAX_NEURONS_PER_CORE:
        raise CapacityError(
            f"{channels} input channels exceed the per-core limit of "
            f"{MAX_NEURONS_PER_CORE}; downscale the input first")
    if channels < 1:
        raise ConfigError("need at least one input channel")


def downscale_images(images, side: int):
    """Block-average NxHxW images onto a side*side grid (block pooling).

    The grid must divide the image dimensions evenly.
    """
    if side < 1:
        raise ConfigError("downscale target must be positive")
    out = []
    for image in images:
        h = len(image)
        w = len(image[0])
        if h % side or w % side:
            raise ConfigError(
                f"cannot pool a {h}x{w} image onto a {side}x{side} grid; "
                "the grid must divide both dimensions")
        bh, bw = h // side, w // side
        features = []
        for bi in range(side):
            for bj in range(side):
                total = 0.0
                for i in range(bi * bh, (bi + 1) * bh):
                    for j in range(bj * bw, (bj + 1) * bw):
                        total += image[i][j]
                features.append(total / (bh * bw))
        out.append(features)
    return out


def normalize_features(features):
    """Scale a feature table into [0, 1] by its global maximum."""
    peak = 0.0
    for row in features:
        for v in row:
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"intensities must be finite and non-negative, got {v!r}")
            peak = max(peak, v)
    if peak <= 1.0:
        return [list(row) for row in features]
    return [[v / peak for v in row] for row in features]


def encode_dataset(features, labels, timesteps: int, mode: str = "rate",
                   seed: int | None = None) -> list[EventSample]:
    """Encode a feature table (rows of per-channel intensities) into samples."""
    features = normalize_features(features)
    if labels is not None and len(labels) != len(features):
        raise ConfigError(f"{len(labels)} labels for {len(features)} samples")
    if features:
        check_channel_count(len(features[0]))
    samples = []
    if mode == "rate":
        for i, row in enumerate(features):
            label = int(labels[i]) if labels is not None else None
            samples.append(EventSample(rate_encode(row, timesteps), label))
    elif mode == "bernoulli":
        if seed is None:
            raise ConfigError("bernoulli encoding requires a seed")
        rng = random.Random(seed)
        for i, row in enumerate(features):
            label = int(labels[i]) if labels is not None else None
            samples.append(EventSample(bernoulli_encode(row, timesteps, rng), label))
    else:
        raise ConfigError(f"unknown encoding mode {mode!r}")
    return samples
