"""Interactive protocols: transmission functions, speaker order, transcripts.

A protocol is a triple of deterministic maps over transcript prefixes: one
transmission function per party plus a speaker-order function known to both.
Prefixes are passed as tuples of bits.  Beyond the nominal length the maps
zero-extend, so a simulator may overshoot without special-casing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable

ALICE = "Alice"
BOB = "Bob"


@dataclass(frozen=True)
class Transcript:
    bits: tuple
    speakers: tuple

    def __post_init__(self):
        if len(self.bits) != len(self.speakers):
            raise ValueError("bits and speakers must have equal length")


@dataclass(frozen=True)
class InteractiveProtocol:
    """Deterministic maps (prefix -> bit) for each party and (prefix -> speaker)."""

    length: int
    phi_alice: Callable
    phi_bob: Callable
    psi: Callable
    name: str = "protocol"
    alternating: bool = False  # set when psi is fixed alternation (Alice odd)

    def speaker(self, prefix) -> str:
        if len(prefix) >= self.length:
            # overshoot: keep alternation parity so half-duplex stays agreed
            return ALICE if len(prefix) % 2 == 0 else BOB
        return self.psi(prefix)

    def next_bit(self, speaker: str, prefix) -> int:
        if len(prefix) >= self.length:
            return 0  # zero-extension beyond the nominal length
        phi = self.phi_alice if speaker == ALICE else self.phi_bob
        return phi(prefix)


def run_noiseless(protocol: InteractiveProtocol, length: int | None = None) -> Transcript:
    """Generate the transcript a noiseless link would produce."""
    n = protocol.length if length is None else length
    bits = []
    speakers = []
    for _ in range(n):
        prefix = tuple(bits)
        who = protocol.speaker(prefix)
        bits.append(protocol.next_bit(who, prefix))
        speakers.append(who)
    return Transcript(bits=tuple(bits), speakers=tuple(speakers))


def _original_prefix(protocol: InteractiveProtocol, sym_prefix):
    """Project a symmetrized-run prefix back to the original protocol's prefix.

    Each pair of symmetrized slots (Alice slot, Bob slot) carries one original
    step; the authoritative bit sits in the original speaker's slot.
    """
    orig = []
    for i in range(0, len(sym_prefix) - 1, 2):
        who = protocol.speaker(tuple(orig))
        orig.append(sym_prefix[i] if who == ALICE else sym_prefix[i + 1])
    return tuple(orig)


def symmetrize(protocol: InteractiveProtocol) -> InteractiveProtocol:
    """Force bit-vs-bit order: Alice speaks at odd times, Bob at even times.

    Each original step becomes two slots; the non-speaking party's slot
    carries a dummy zero.  Length doubles.
    """

    def sym_phi(party):
        def phi(prefix):
            orig_prefix = _original_prefix(protocol, prefix)
            if len(orig_prefix) >= protocol.length:
                return 0
            who = protocol.speaker(orig_prefix)
            if who != party:
                return 0  # dummy slot
            return protocol.next_bit(who, orig_prefix)

        return phi

    return InteractiveProtocol(
        length=2 * protocol.length,
        phi_alice=sym_phi(ALICE),
        phi_bob=sym_phi(BOB),
        psi=lambda prefix: ALICE if len(prefix) % 2 == 0 else BOB,
        name=f"{protocol.name}|bit-vs-bit",
        alternating=True,
    )


def recover_original(protocol: InteractiveProtocol, sym_transcript: Transcript) -> Transcript:
    """Undo symmetrization: pick the speaker's slot out of each pair."""
    bits = []
    speakers = []
    for _ in range(len(sym_transcript.bits) // 2):
        who = protocol.speaker(tuple(bits))
        i = 2 * len(bits)
        bits.append(sym_transcript.bits[i] if who == ALICE else sym_transcript.bits[i + 1])
        speakers.append(who)
    return Transcript(bits=tuple(bits), speakers=tuple(speakers))


def _prf_bit(seed: int, tag: str, prefix) -> int:
    payload = tag.encode() + seed.to_bytes(8, "big") + bytes(b & 1 for b in prefix)
    return hashlib.blake2b(payload, digest_size=1).digest()[0] & 1


def builtin_protocol(kind: str, n: int, seed: int = 0) -> InteractiveProtocol:
    """Deterministic test-corpus protocols.

    ``constant`` always sends zero; ``parity_echo`` sends the XOR of the
    prefix; ``prf_table`` derives every bit from a keyed hash of the prefix
    (the adversarial-ish Monte Carlo workload); ``adaptive_switch`` lets
    Alice's first bit pick the sole speaker for the rest of the run.
    """
    if n < 1:
        raise ValueError(f"protocol length must be >= 1, got {n}")
    alternate = lambda prefix: ALICE if len(prefix) % 2 == 0 else BOB

    if kind == "constant":
        zero = lambda prefix: 0
        return InteractiveProtocol(n, zero, zero, alternate, name=f"constant({n})", alternating=True)

    if kind == "parity_echo":
        parity = lambda prefix: sum(prefix) & 1
        return InteractiveProtocol(n, parity, parity, alternate, name=f"parity_echo({n})", alternating=True)

    if kind == "prf_table":
        return InteractiveProtocol(
            n,
            phi_alice=lambda prefix: _prf_bit(seed, "A", prefix),
            phi_bob=lambda prefix: _prf_bit(seed, "B", prefix),
            psi=alternate,
            name=f"prf_table({n}, seed={seed})",
            alternating=True,
        )

    if kind == "adaptive_switch":

        def psi(prefix):
            if not prefix:
                return ALICE
            return ALICE if prefix[0] == 1 else BOB

        return InteractiveProtocol(
            n,
            phi_alice=lambda prefix: _prf_bit(seed, "A", prefix),
            phi_bob=lambda prefix: _prf_bit(seed, "B", prefix),
            psi=psi,
            name=f"adaptive_switch({n}, seed={seed})",
        )

    raise ValueError(f"unknown protocol kind {kind!r}")
