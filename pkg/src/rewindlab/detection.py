"""Error-detection primitives: extended-Hamming syndromes and polynomial
fingerprints over a prime field.

Both primitives share the crucial one-sided property that equal inputs are
never reported unequal; only mis-detection (missing a real difference) has
nonzero probability, and that probability is exactly computable (Hamming)
or tightly bounded (fingerprints).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy


@dataclass(frozen=True)
class ExtendedHammingCode:
    """Extended Hamming code of length k = 2^m, parameters (k, k-m-1, 4).

    Column layout: positions 1..k-1 carry the m-bit binary expansions of
    1..k-1 in the Hamming rows; position k has all-zero Hamming rows.  The
    last row is all ones (overall parity).  Any valid extended-Hamming
    parity-check works for detection; this canonical layout is fixed for
    reproducibility.
    """

    k: int
    parity_check: np.ndarray

    @property
    def m(self) -> int:
        return self.k.bit_length() - 1

    @property
    def syndrome_bits(self) -> int:
        return self.m + 1


def build_extended_hamming(k: int) -> ExtendedHammingCode:
    if k < 8 or k & (k - 1):
        raise ValueError(f"block length must be a power of two >= 8, got {k}")
    m = k.bit_length() - 1
    h = np.zeros((m + 1, k), dtype=np.uint8)
    for col in range(k - 1):
        value = col + 1
        for row in range(m):
            h[row, col] = (value >> row) & 1
    h[m, :] = 1
    return ExtendedHammingCode(k=k, parity_check=h)


def syndrome(code: ExtendedHammingCode, vector) -> np.ndarray:
    """v . H^T over GF(2); zero iff the vector is a codeword."""
    v = np.asarray(vector, dtype=np.uint8)
    if v.shape != (code.k,):
        raise ValueError(f"vector length {v.shape} does not match block length {code.k}")
    return (code.parity_check @ v) % 2


def hamming_misdetect_prob(k: int, eps):
    """Probability that i.i.d. Bernoulli(eps) noise lands on a nonzero codeword.

    Closed form via the dual code weight enumerator.  Works for float or
    mpmath inputs; the k/2 exponent is an exact integer.
    """
    if k < 8 or k & (k - 1):
        raise ValueError(f"block length must be a power of two >= 8, got {k}")
    if not 0 <= eps <= 0.5:
        raise ValueError(f"crossover must be in [0, 1/2], got {eps}")
    x = 1 - 2 * eps
    return (1 + 2 * (k - 1) * x ** (k // 2) + x ** k) / (2 * k) - (1 - eps) ** k


def select_prime(l: int, k: int) -> int:
    """First prime at or above 2 k^(2+l); below 4 k^(2+l) by Bertrand.

    Guards against exceeding 64-bit arithmetic so fingerprint products stay
    exact in hardware integers downstream.
    """
    if l < 2:
        raise ValueError(f"polynomial layers start at 2, got {l}")
    lower = 2 * k ** (2 + l)
    if 4 * k ** (2 + l) >= 1 << 62:
        raise ValueError(
            f"prime bound 4*k^(2+l) = 4*{k}^{2 + l} overflows 64-bit arithmetic; "
            "use a smaller block size or fewer layers"
        )
    if sympy.isprime(lower):
        return lower
    return int(sympy.nextprime(lower))


def fingerprint(vector, u: int, q: int) -> int:
    """Evaluate the bit polynomial sum_i v_i U^(i-1) mod q by Horner's rule."""
    if not 0 <= u < q:
        raise ValueError(f"test point {u} outside field of size {q}")
    acc = 0
    for b in reversed(vector):
        acc = (acc * u + b) % q
    return acc


def _fingerprints_all_points(vector, q: int) -> np.ndarray:
    """Fingerprint of one vector at every point of F_q, vectorized."""
    u = np.arange(q, dtype=np.int64)
    acc = np.zeros(q, dtype=np.int64)
    for b in reversed(list(vector)):
        acc = (acc * u + int(b)) % q
    return acc


def poly_collision_rate(va, vb, q: int) -> Fraction:
    """Exact fraction of test points where two unequal vectors collide.

    At most (len - 1) / q, since the difference polynomial has degree below
    the vector length.
    """
    va = list(va)
    vb = list(vb)
    if len(va) != len(vb):
        raise ValueError("vectors must have equal length")
    if va == vb:
        raise ValueError("collision rate is 1 for equal vectors")
    if q < 2 * len(va):
        raise ValueError(f"prime {q} too small for vector length {len(va)}")
    collisions = int(np.count_nonzero(_fingerprints_all_points(va, q) == _fingerprints_all_points(vb, q)))
    return Fraction(collisions, q)


def field_element_width(q: int) -> int:
    return math.ceil(math.log2(q))


def field_element_bits(v: int, q: int) -> list:
    """Fixed-width big-endian bit encoding of a field element."""
    if not 0 <= v < q:
        raise ValueError(f"field element {v} outside [0, {q})")
    width = field_element_width(q)
    return [(v >> (width - 1 - i)) & 1 for i in range(width)]


def field_element_decode(bits, q: int):
    """Inverse of field_element_bits.

    A decoded value at or above q means the transmission was corrupted; the
    caller treats that conservatively as "not equal".  Returns None in that
    case.
    """
    width = field_element_width(q)
    if len(bits) != width:
        raise ValueError(f"expected {width} bits, got {len(bits)}")
    v = 0
    for b in bits:
        v = (v << 1) | (b & 1)
    return v if v < q else None
