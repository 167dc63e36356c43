"""The oracle suite: independent recomputations of every closed form.

Each check re-derives a quantity by brute force (exhaustive enumeration,
exact binomials, high-precision sweeps) and compares it to the library's
closed-form implementation.  ``run_all`` powers the `verify` CLI subcommand;
``misdetect_fn`` is injectable so a deliberately mutated implementation can
be shown to fail (mutation smoke test).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import analysis, channels, detection, randomness


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def exhaustive_misdetect(k: int, eps: float) -> float:
    """Sum of eps^|c| (1-eps)^(k-|c|) over all nonzero codewords, by
    enumerating all 2^k vectors and keeping those with zero syndrome."""
    code = detection.build_extended_hamming(k)
    h = code.parity_check.astype(np.int64)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=k):
        v = np.array(bits, dtype=np.int64)
        if v.any() and not ((h @ v) % 2).any():
            w = int(v.sum())
            total += eps**w * (1.0 - eps) ** (k - w)
    return total


def check_hamming(misdetect_fn=None, ks=(8, 16), eps_grid=(0.0, 0.01, 0.1, 0.25, 0.5)) -> CheckResult:
    fn = misdetect_fn or detection.hamming_misdetect_prob
    worst = 0.0
    for k in ks:
        for eps in eps_grid:
            got = float(fn(k, eps))
            want = exhaustive_misdetect(k, eps)
            worst = max(worst, abs(got - want))
    ok = worst <= 1e-12
    return CheckResult("hamming_misdetect_exhaustive", ok, f"max abs error {worst:.3e}")


def binomial_majority_error(eps: float, rho: int) -> float:
    """Exact repetition-decoding error over BSC(eps): majority of rho votes,
    even ties broken by a fair coin."""
    total = 0.0
    for j in range(rho + 1):
        p = math.comb(rho, j) * eps**j * (1.0 - eps) ** (rho - j)
        if 2 * j > rho:
            total += p
        elif 2 * j == rho:
            total += 0.5 * p
    return total


def check_repetition_bound(n_eps: int = 50, max_rho: int = 15) -> CheckResult:
    for eps in np.linspace(0.001, 0.499, n_eps):
        beta = 2.0 * math.sqrt(eps * (1.0 - eps))
        for rho in range(1, max_rho + 1):
            err = binomial_majority_error(float(eps), rho)
            if err > beta**rho + 1e-15:
                return CheckResult(
                    "repetition_error_vs_bhattacharyya",
                    False,
                    f"error {err:.3e} exceeds beta^rho {beta**rho:.3e} at eps={eps}, rho={rho}",
                )
    return CheckResult(
        "repetition_error_vs_bhattacharyya",
        True,
        f"exact binomial <= beta^rho on {n_eps}x{max_rho} grid",
    )


def check_poly_collisions(pairs: int = 25, length: int = 16, seed: int = 0) -> CheckResult:
    q = detection.select_prime(2, 8)
    rng = random.Random(seed)
    worst = Fraction(0)
    for _ in range(pairs):
        va = [rng.randrange(2) for _ in range(length)]
        vb = list(va)
        while vb == va:
            vb = [rng.randrange(2) for _ in range(length)]
        rate = detection.poly_collision_rate(va, vb, q)
        worst = max(worst, rate)
        if rate > Fraction(length - 1, q):
            return CheckResult(
                "poly_collision_exhaustive",
                False,
                f"collision rate {rate} exceeds ({length}-1)/{q}",
            )
    return CheckResult(
        "poly_collision_exhaustive", True, f"worst rate {worst} <= {Fraction(length - 1, q)}"
    )


def check_beta_extremality() -> CheckResult:
    worst = -1.0
    for c in (0.3, 0.5, 0.7, 0.9):
        bec = channels.make_bec(1.0 - c)
        sigma = _biawgn_sigma_for_capacity(c)
        awgn = channels.make_biawgn(sigma, n_atoms=1024)
        for ch in (bec, awgn):
            cap = channels.shannon_capacity(ch)
            excess = channels.bhattacharyya(ch) - channels.beta_for_bsc_of_capacity(cap)
            worst = max(worst, excess)
    ok = worst <= 1e-4
    return CheckResult("bsc_extremal_bhattacharyya", ok, f"max excess {worst:.3e}")


def _biawgn_sigma_for_capacity(c: float) -> float:
    """Bisection on sigma so the quantized BiAWGN capacity hits c."""
    lo, hi = 0.05, 10.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if channels.shannon_capacity(channels.make_biawgn(mid, n_atoms=512)) > c:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_headline() -> CheckResult:
    ratio = analysis.headline_ratio()
    ok = ratio >= analysis.HEADLINE_RATIO
    return CheckResult("headline_capacity_ratio", ok, f"ratio {ratio:.4f} >= {analysis.HEADLINE_RATIO}")


def check_entropy_inverse(samples: int = 200) -> CheckResult:
    worst = 0.0
    for i in range(samples + 1):
        y = i / samples
        x = channels.binary_entropy_inverse(y)
        worst = max(worst, abs(channels.binary_entropy(x) - y))
    ok = worst <= 1e-9
    return CheckResult("entropy_inverse_roundtrip", ok, f"max roundtrip error {worst:.3e}")


def check_extractor_properties(seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    raw = [rng.randrange(2) for _ in range(10_000)]
    out1 = randomness.von_neumann_extract(raw)
    out2 = randomness.von_neumann_extract(raw)
    if out1 != out2:
        return CheckResult("von_neumann_properties", False, "extractor is not deterministic")
    swapped = []
    for i in range(0, len(raw) - 1, 2):
        swapped.extend((raw[i + 1], raw[i]))
    flipped = randomness.von_neumann_extract(swapped)
    if flipped != [1 - b for b in out1]:
        return CheckResult(
            "von_neumann_properties", False, "pair swap does not complement the output"
        )
    return CheckResult(
        "von_neumann_properties", True, f"deterministic and swap-complementary on {len(raw)} bits"
    )


def check_mixture_mean_crossover(n_mixtures: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    worst = -1.0
    for _ in range(n_mixtures):
        m = rng.randrange(1, 6)
        weights = [rng.random() for _ in range(m)]
        s = sum(weights)
        atoms = tuple((rng.random() / 2.0, w / s) for w in weights)
        ch = channels.ChannelModel(atoms=atoms, label="random")
        mean_t = sum(w * t for t, w in ch.atoms)
        bound = analysis.bms_to_bsc_eps_bound(channels.shannon_capacity(ch))
        worst = max(worst, mean_t - bound)
    ok = worst <= 1e-12
    return CheckResult("mean_crossover_capacity_bound", ok, f"max excess {worst:.3e}")


def check_asymptotic_gap() -> CheckResult:
    prev = None
    worst_ratio = 0.0
    for k in (64, 128, 256, 512, 1024, 2048, 4096):
        eps, rate, gap = analysis.corollary1_schedule(k)
        if prev is not None and gap >= prev:
            return CheckResult("asymptotic_gap_trend", False, f"gap not decreasing at k={k}")
        prev = gap
        worst_ratio = max(worst_ratio, gap / math.sqrt(channels.binary_entropy(eps)))
    ok = worst_ratio <= 30.0
    return CheckResult("asymptotic_gap_trend", ok, f"max gap/sqrt(h(eps)) = {worst_ratio:.2f}")


def run_all(misdetect_fn=None) -> list:
    """Every oracle; pass a mutated ``misdetect_fn`` to watch the suite fail."""
    return [
        check_hamming(misdetect_fn, ks=(8,)),
        check_repetition_bound(),
        check_poly_collisions(),
        check_beta_extremality(),
        check_headline(),
        check_entropy_inverse(),
        check_extractor_properties(),
        check_mixture_mean_crossover(),
        check_asymptotic_gap(),
    ]
