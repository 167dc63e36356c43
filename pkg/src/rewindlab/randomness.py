"""Test-point scheduling, randomness modes, and the von Neumann extractor.

The polynomial detection layers need one field element per rewind window.
With shared randomness a fresh point per window is free; with private or
channel-extracted randomness the schedule reuses each point across a span
of consecutive windows so the total randomness budget shrinks to O(sqrt(n))
bits, which can then be conveyed (or extracted from channel noise) before
the simulation starts.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass

from . import detection

MODES = ("shared_seed", "private_conveyed", "channel_extracted")


def derive_seed(master_seed: int, *labels) -> int:
    """A named independent 64-bit stream seed from the master seed."""
    payload = master_seed.to_bytes(16, "big", signed=False) + ":".join(map(str, labels)).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def derive_rng(master_seed: int, *labels) -> random.Random:
    return random.Random(derive_seed(master_seed, *labels))


@dataclass(frozen=True)
class LayerSchedule:
    layer: int
    prime: int
    point_count: int
    reuse_span: int
    bits_per_point: int

    def point_index(self, block: int) -> int:
        """Which independent point window number ``block`` (1-based) uses."""
        return (block - 1) // self.reuse_span


@dataclass(frozen=True)
class TestPointSchedule:
    k: int
    layer_count: int
    mode: str
    layers: tuple  # LayerSchedule per l in 2..L

    @property
    def total_point_bits(self) -> int:
        return sum(s.bits_per_point * s.point_count for s in self.layers)

    def layer(self, l: int) -> LayerSchedule:
        return self.layers[l - 2]


def build_schedule(k: int, layer_count: int, mode: str = "shared_seed") -> TestPointSchedule:
    """Per-layer test-point counts and reuse spans.

    In shared_seed mode every window gets a fresh point.  In the private
    modes layer l gets k^ceil((L-l)/2) independent points, each reused for
    k^floor((L-l)/2) consecutive windows, covering all k^(L-l) windows.
    """
    if mode not in MODES:
        raise ValueError(f"unknown randomness mode {mode!r}")
    layers = []
    for l in range(2, layer_count + 1):
        blocks = k ** (layer_count - l)
        q = detection.select_prime(l, k)
        if mode == "shared_seed":
            point_count, reuse = blocks, 1
        else:
            point_count = k ** math.ceil((layer_count - l) / 2)
            reuse = k ** math.floor((layer_count - l) / 2)
        layers.append(
            LayerSchedule(
                layer=l,
                prime=q,
                point_count=point_count,
                reuse_span=reuse,
                bits_per_point=detection.field_element_width(q),
            )
        )
    return TestPointSchedule(k=k, layer_count=layer_count, mode=mode, layers=tuple(layers))


def assign_test_points(schedule: TestPointSchedule, seed: int) -> dict:
    """Draw the independent points for every layer from a named stream.

    Returns {layer: [points]}; both parties call this with the same seed in
    shared mode, or Alice draws and conveys in the private modes.
    """
    points = {}
    for s in schedule.layers:
        rng = derive_rng(seed, "testpoint", s.layer)
        points[s.layer] = [rng.randrange(s.prime) for _ in range(s.point_count)]
    return points


def von_neumann_extract(raw) -> list:
    """Debias a bit sequence: per non-overlapping pair, 01 -> 0, 10 -> 1."""
    out = []
    for i in range(0, len(raw) - 1, 2):
        a, b = raw[i], raw[i + 1]
        if a != b:
            out.append(0 if (a, b) == (0, 1) else 1)
    return out


def required_raw_bits(n_u: int, eps: float, delta_margin: float) -> int:
    """Raw channel uses needed so extraction falls short only with
    probability exp(-delta_margin^2 n_u / (2 (1 - delta_margin)))."""
    if n_u == 0:
        return 0
    if not 0.0 < eps < 1.0:
        raise ValueError(
            f"cannot extract randomness at crossover {eps}; a noiseless channel "
            "yields no noise bits (the erasure-mode scheme needs none)"
        )
    if not 0.0 < delta_margin < 1.0:
        raise ValueError(f"margin must be in (0, 1), got {delta_margin}")
    return math.ceil(n_u / (eps * (1.0 - eps) * (1.0 - delta_margin)))


def extraction_shortfall_bound(n_u: int, delta_margin: float) -> float:
    """Chernoff bound on the probability the extractor yields < n_u bits."""
    if n_u == 0:
        return 0.0
    return math.exp(-delta_margin**2 * n_u / (2.0 * (1.0 - delta_margin)))


@dataclass(frozen=True)
class RandomnessRealization:
    mode: str
    points: dict  # {layer: [points]}
    extra_channel_uses: int
    failure_flag: bool  # extraction yielded fewer than n_U bits


def realize_randomness(
    mode: str,
    schedule: TestPointSchedule,
    channel,
    eps: float,
    seed: int,
    delta_margin: float = 0.5,
    conveyance_rate: float = 0.5,
) -> RandomnessRealization:
    """Produce the test-point assignment plus its channel-use accounting.

    shared_seed: both parties derive points from the seed, zero cost.
    private_conveyed: Alice draws from the seed; the transfer is modeled as
    an error-free block transmission costing n_U / conveyance_rate uses (its
    residual decoding-error event is reported analytically, not simulated).
    channel_extracted: Bob sends zeros, Alice von-Neumann-extracts the noise
    and maps the output bits to field elements; failure_flag marks a yield
    shortfall.
    """
    from . import channels as ch

    if mode not in MODES:
        raise ValueError(f"unknown randomness mode {mode!r}")
    if mode == "shared_seed":
        return RandomnessRealization(mode, assign_test_points(schedule, seed), 0, False)

    n_u = schedule.total_point_bits
    if mode == "private_conveyed":
        points = assign_test_points(schedule, seed)
        return RandomnessRealization(mode, points, math.ceil(n_u / conveyance_rate), False)

    # channel_extracted: actually push zeros through the channel
    n_r = required_raw_bits(n_u, eps, delta_margin)
    rng = derive_rng(seed, "extraction")
    raw = []
    for _ in range(n_r):
        out = ch.transmit(channel, 0, rng)
        raw.append(1 if out.value == 1 else 0)
    extracted = von_neumann_extract(raw)
    if len(extracted) < n_u:
        # fall back to seeded points so the caller can still run; flagged
        return RandomnessRealization(mode, assign_test_points(schedule, seed), n_r, True)
    points = {}
    pos = 0
    for s in schedule.layers:
        layer_points = []
        for _ in range(s.point_count):
            bits = extracted[pos : pos + s.bits_per_point]
            pos += s.bits_per_point
            v = 0
            for b in bits:
                v = (v << 1) | b
            layer_points.append(v % s.prime)
        points[s.layer] = layer_points
    return RandomnessRealization(mode, points, n_r, False)
