"""Binary-input memoryless symmetric channels as finite crossover mixtures.

Every channel here is a mixture of crossover atoms ``(t, p)``: with
probability ``p`` the transmitted bit passes through a BSC with crossover
``t``.  Capacity and the Bhattacharyya parameter are then exact finite sums,
and a transmission is a two-stage categorical draw.  Continuous-output
channels (BiAWGN) are quantized to such a mixture at construction time.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

ERASURE = "E"

_WEIGHT_TOL = 1e-12


def binary_entropy(x: float) -> float:
    """Base-2 binary entropy, with h(0) = h(1) = 0 by continuity."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary_entropy argument must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def binary_entropy_inverse(y: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Inverse of the binary entropy restricted to [0, 1/2], by bisection.

    Monotone and derivative-free, hence robust at both endpoints.
    """
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"binary_entropy_inverse argument must be in [0, 1], got {y}")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ChannelOutput:
    """A single channel use: the received value and the realized crossover."""

    value: object  # 0, 1 or ERASURE
    crossover_used: float


@dataclass(frozen=True)
class ChannelModel:
    """A BMS channel as a finite mixture of crossover atoms.

    ``atoms`` is a list of ``(crossover, weight)`` pairs with crossovers in
    [0, 1/2] and weights summing to one.  If ``mark_erasures`` is set, a draw
    of a crossover exactly equal to 1/2 produces an erasure instead of a
    uniformly random bit.
    """

    atoms: tuple
    label: str = "channel"
    mark_erasures: bool = False
    _cum_weights: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("channel needs at least one atom")
        atoms = tuple((float(t), float(w)) for t, w in self.atoms)
        total = 0.0
        for t, w in atoms:
            if not 0.0 <= t <= 0.5:
                raise ValueError(f"crossover {t} outside [0, 1/2]")
            if w < 0.0:
                raise ValueError(f"negative atom weight {w}")
            total += w
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"atom weights sum to {total}, expected 1")
        object.__setattr__(self, "atoms", atoms)
        cum = []
        acc = 0.0
        for _, w in atoms:
            acc += w
            cum.append(acc)
        cum[-1] = 1.0
        object.__setattr__(self, "_cum_weights", tuple(cum))

    def draw_crossover(self, rng) -> float:
        """Draw one atom's crossover according to the mixture weights."""
        if len(self.atoms) == 1:
            return self.atoms[0][0]
        i = bisect.bisect_right(self._cum_weights, rng.random())
        return self.atoms[min(i, len(self.atoms) - 1)][0]


def make_bsc(eps: float) -> ChannelModel:
    """Binary symmetric channel with crossover probability ``eps``."""
    if not 0.0 <= eps <= 0.5:
        raise ValueError(f"BSC crossover must be in [0, 1/2], got {eps}")
    return ChannelModel(atoms=((eps, 1.0),), label=f"BSC({eps})")


def make_bec(eps: float, mark_erasures: bool = True) -> ChannelModel:
    """Binary erasure channel: crossover 1/2 with probability ``eps``, else 0."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"BEC erasure probability must be in [0, 1], got {eps}")
    if eps == 0.0:
        atoms = ((0.0, 1.0),)
    elif eps == 1.0:
        atoms = ((0.5, 1.0),)
    else:
        atoms = ((0.5, eps), (0.0, 1.0 - eps))
    return ChannelModel(atoms=atoms, label=f"BEC({eps})", mark_erasures=mark_erasures)


def make_biawgn(sigma: float, n_atoms: int = 4096) -> ChannelModel:
    """Binary-input AWGN channel quantized to ``n_atoms`` crossover atoms.

    Y = X + Z with X in {-1, +1} and Z ~ N(0, sigma^2).  The sufficient
    statistic's crossover is T = 1 / (1 + e^{|LLR|}) with LLR = 2y / sigma^2.
    Quantization uses equal-probability bins of the output distribution
    (conditioned on X = +1) with the conditional-mean crossover per bin,
    approximated by an 8-point sub-grid inside each bin.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if n_atoms < 2:
        raise ValueError(f"n_atoms must be at least 2, got {n_atoms}")
    from scipy.stats import norm

    sub = 8
    m = n_atoms * sub
    # midpoint quantiles of N(1, sigma^2)
    probs = (np.arange(m) + 0.5) / m
    y = 1.0 + sigma * norm.ppf(probs)
    llr = np.abs(2.0 * y / (sigma * sigma))
    # t = 1/(1+e^{llr}); use expit for numerical stability at large |llr|
    t = 1.0 / (1.0 + np.exp(np.minimum(llr, 700.0)))
    t_bins = t.reshape(n_atoms, sub).mean(axis=1)
    t_bins = np.clip(t_bins, 0.0, 0.5)
    atoms = tuple((float(tb), 1.0 / n_atoms) for tb in t_bins)
    return ChannelModel(atoms=atoms, label=f"BiAWGN({sigma}, {n_atoms} atoms)")


def transmit(channel: ChannelModel, bit: int, rng) -> ChannelOutput:
    """Send one bit through the channel using the caller's random stream."""
    t = channel.draw_crossover(rng)
    if channel.mark_erasures and t == 0.5:
        return ChannelOutput(value=ERASURE, crossover_used=t)
    flip = 1 if rng.random() < t else 0
    return ChannelOutput(value=bit ^ flip, crossover_used=t)


def shannon_capacity(channel: ChannelModel) -> float:
    """1 - E h(T) in bits per channel use."""
    return 1.0 - sum(w * binary_entropy(t) for t, w in channel.atoms)


def bhattacharyya(channel: ChannelModel) -> float:
    """E[2 sqrt(T (1 - T))]; governs repetition-decoding error beta^rho."""
    return sum(w * 2.0 * math.sqrt(t * (1.0 - t)) for t, w in channel.atoms)


def beta_for_bsc_of_capacity(capacity: float) -> float:
    """Bhattacharyya parameter of the BSC with the given Shannon capacity.

    The BSC maximizes the Bhattacharyya parameter among all BMS channels of
    the same capacity, so this is the extremal (worst-case) value.
    """
    if not 0.0 <= capacity <= 1.0:
        raise ValueError(f"capacity must be in [0, 1], got {capacity}")
    eps = binary_entropy_inverse(1.0 - capacity)
    return 2.0 * math.sqrt(eps * (1.0 - eps))


@dataclass(frozen=True)
class RepetitionChannel:
    """Send each bit ``repetitions`` times, decode by maximum likelihood.

    ``tie_mode`` decides what happens when the log-likelihood sum is exactly
    zero: ``random_break`` tosses a fair coin from the caller's stream,
    ``erasure`` outputs an erasure.
    """

    base: ChannelModel
    repetitions: int
    tie_mode: str = "random_break"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.tie_mode not in ("random_break", "erasure"):
            raise ValueError(f"unknown tie_mode {self.tie_mode!r}")


def repetition_transmit(rep: RepetitionChannel, bit: int, rng) -> ChannelOutput:
    """Transmit with repetitions and decode the majority-likelihood bit.

    The decision statistic accumulates (1 - 2 z_i) ln((1 - t_i) / t_i) per
    use.  A use with t = 0 decides the bit outright (infinite reliability);
    a use with t = 1/2 contributes nothing.
    """
    lam = 0.0
    decided = None
    for _ in range(rep.repetitions):
        out = transmit(rep.base, bit, rng)
        t = out.crossover_used
        if t == 0.0:
            decided = out.value  # noiseless use settles the vote
            continue
        if t == 0.5 or out.value == ERASURE:
            continue
        weight = math.log((1.0 - t) / t)
        lam += weight if out.value == 0 else -weight
    if decided is not None:
        return ChannelOutput(value=decided, crossover_used=math.nan)
    if lam > 0.0:
        value = 0
    elif lam < 0.0:
        value = 1
    elif rep.tie_mode == "erasure":
        return ChannelOutput(value=ERASURE, crossover_used=math.nan)
    else:
        value = 1 if rng.random() < 0.5 else 0
    return ChannelOutput(value=value, crossover_used=math.nan)
