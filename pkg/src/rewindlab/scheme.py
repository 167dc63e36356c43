"""The rewind-if-error interactive coding scheme.

Uncoded block simulation over the noisy channel, followed by layered error
detection: extended-Hamming syndromes over each block of k uncoded bits at
layer 1, polynomial fingerprints over geometrically growing windows at
layers 2..L.  A detected error rewinds the cursor to the window start and
zeroes the window so it is not re-detected.

Everything that can go wrong at runtime is data, not an exception: error
events are flags in the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import analysis, channels, detection, protocol as protocol_mod, randomness
from .channels import ERASURE

ALICE = protocol_mod.ALICE
BOB = protocol_mod.BOB


@dataclass(frozen=True)
class SchemeConfig:
    """Static parameters of a scheme instance.

    ``a`` and ``a_tilde`` are the repetition counts for detection bits
    (layer-l bits use a + 2l repetitions, layer-1 bits a_tilde); both odd so
    repetition decoding over a BSC never ties.  ``return_reps`` selects the
    repetition count of the feedback bit at layers >= 2: "accounting" charges
    a + 2l (matching the channel-use budget), "prose" uses a_tilde.
    """

    k: int
    layer_count: int
    a: int = 3
    a_tilde: int = 5
    xi: float = 0.05
    randomness_mode: str = "shared_seed"
    tie_mode: str = "random_break"
    return_reps: str = "accounting"

    def __post_init__(self):
        if self.k < 8 or self.k & (self.k - 1):
            raise ValueError(f"block size must be a power of two >= 8, got {self.k}")
        if self.layer_count < 1:
            raise ValueError(f"layer count must be >= 1, got {self.layer_count}")
        if self.a % 2 == 0 or self.a_tilde % 2 == 0:
            raise ValueError("repetition parameters must be odd")
        if self.randomness_mode not in randomness.MODES:
            raise ValueError(f"unknown randomness mode {self.randomness_mode!r}")
        if self.tie_mode not in ("random_break", "erasure"):
            raise ValueError(f"unknown tie_mode {self.tie_mode!r}")
        if self.return_reps not in ("accounting", "prose"):
            raise ValueError(f"return_reps must be 'accounting' or 'prose'")

    @property
    def detection_bits_layer1(self) -> int:
        return 3 + (self.k.bit_length() - 1)

    @property
    def sim_length(self) -> int:
        return self.k**self.layer_count

    def value_reps(self, l: int) -> int:
        return self.a_tilde if l == 1 else self.a + 2 * l

    def feedback_reps(self, l: int) -> int:
        if l == 1 or self.return_reps == "prose":
            return self.a_tilde
        return self.a + 2 * l


@dataclass(frozen=True)
class RunPlan:
    """The fixed schedule of a run: sizes, primes, and the channel-use budget."""

    config: SchemeConfig
    eps_effective: float
    n_covered: int
    primes: dict  # {l: q_l} for l >= 2
    bits_per_round: dict  # {l: detection bits transmitted per round}
    total_channel_uses: int

    @property
    def sim_length(self) -> int:
        return self.config.sim_length


def _budget(config: SchemeConfig) -> tuple:
    """Primes, per-round bit counts and the exact channel-use total."""
    k, L = config.k, config.layer_count
    primes = {}
    bits = {1: config.detection_bits_layer1}
    n = k**L
    n += config.a_tilde * bits[1] * k ** (L - 1)
    for l in range(2, L + 1):
        q = detection.select_prime(l, k)
        w = detection.field_element_width(q)
        if (1 << w) - 1 < q:
            raise ValueError(f"prime {q} leaves no encoding headroom for the announce symbol")
        primes[l] = q
        bits[l] = w + 1  # field element plus the feedback bit
        n += (config.value_reps(l) * w + config.feedback_reps(l)) * k ** (L - l)
    return primes, bits, n


def check_admissible(config: SchemeConfig, eps_effective: float):
    """Theorem-level admissibility: eps < 1/16 and k <= 1/(8 eps)."""
    if eps_effective > 0:
        if eps_effective >= 1.0 / 16.0:
            raise analysis.InfeasibleParameters(
                f"effective crossover {eps_effective} not below 1/16"
            )
        if config.k > 1.0 / (8.0 * eps_effective):
            raise analysis.InfeasibleParameters(
                f"block size {config.k} exceeds 1/(8*eps) = {1.0 / (8.0 * eps_effective):.4g}"
            )


def plan(config: SchemeConfig, eps_effective: float, n: int | None = None) -> RunPlan:
    """Fix the run schedule.

    If ``n`` is given, the layer count is raised until the simulation length
    k^L covers n / (zeta - xi); otherwise n is derived from the configured
    layer count as floor(k^L (zeta - xi)).
    """
    check_admissible(config, eps_effective)
    if eps_effective > 0:
        z = float(analysis.zeta(eps_effective, config.k, config.a, config.a_tilde))
    else:
        z = 1.0
    slack = z - config.xi
    if slack <= 0:
        raise analysis.InfeasibleParameters(
            f"zeta - xi = {z:.6g} - {config.xi} is not positive; reduce xi, the "
            f"block size, or the crossover probability"
        )
    if n is not None:
        needed = n / slack
        layers = max(1, math.ceil(math.log(needed, config.k)))
        if config.k**layers < needed:
            layers += 1
        if layers > config.layer_count:
            config = SchemeConfig(
                k=config.k,
                layer_count=layers,
                a=config.a,
                a_tilde=config.a_tilde,
                xi=config.xi,
                randomness_mode=config.randomness_mode,
                tie_mode=config.tie_mode,
                return_reps=config.return_reps,
            )
    else:
        n = math.floor(config.sim_length * slack)
    primes, bits, total = _budget(config)
    return RunPlan(
        config=config,
        eps_effective=eps_effective,
        n_covered=n,
        primes=primes,
        bits_per_round=bits,
        total_channel_uses=total,
    )


# --- detection rounds ----------------------------------------------------


def _default_pipe(channel, rng, tie_mode):
    def pipe(bit, reps):
        rep = channels.RepetitionChannel(channel, reps, tie_mode)
        return channels.repetition_transmit(rep, bit, rng).value

    return pipe


def detection_round_layer1(
    window_a,
    window_b,
    channel=None,
    reps: int = 5,
    rng=None,
    *,
    code: detection.ExtendedHammingCode | None = None,
    pending_a: bool = False,
    pending_b: bool = False,
    tie_mode: str = "random_break",
    pipe=None,
):
    """One extended-Hamming detection exchange over k-bit windows.

    Alice sends her syndrome plus the erasure-announce reserve bit, each with
    ``reps`` repetitions; Bob replies with his rewind bit.  Returns
    (b_alice, b_bob, alice_return_erased).
    """
    if pipe is None:
        pipe = _default_pipe(channel, rng, tie_mode)
    if code is None:
        code = detection.build_extended_hamming(len(window_a))
    s_a = detection.syndrome(code, window_a)
    s_b = detection.syndrome(code, window_b)
    announce = 1 if pending_a else 0
    received = [pipe(int(bit), reps) for bit in s_a]
    reserve = pipe(announce, reps)
    corrupted = any(v == ERASURE for v in received) or reserve == ERASURE
    b_bob = int(
        pending_b
        or corrupted
        or reserve == 1
        or any(int(r) != int(s) for r, s in zip(received, s_b))
    )
    ret = pipe(b_bob, reps)
    ret_erased = ret == ERASURE
    b_alice = int(pending_a or ret_erased or ret == 1)
    return b_alice, b_bob, ret_erased


def detection_round_higher(
    window_a,
    window_b,
    l: int,
    k: int,
    q: int,
    test_point: int,
    channel=None,
    rng=None,
    *,
    value_reps: int | None = None,
    feedback_reps: int | None = None,
    a: int = 3,
    pending_a: bool = False,
    pending_b: bool = False,
    tie_mode: str = "random_break",
    pipe=None,
):
    """One polynomial-fingerprint exchange for a layer l >= 2 window.

    Windows are zero-padded to the fixed per-layer length 2 k^l so both
    parties evaluate the same polynomial degree.  An announcing Alice sends
    the all-ones symbol, which decodes to a value >= q and is treated as
    inequality.  Returns (b_alice, b_bob, alice_return_erased).
    """
    if value_reps is None:
        value_reps = a + 2 * l
    if feedback_reps is None:
        feedback_reps = a + 2 * l
    if pipe is None:
        pipe = _default_pipe(channel, rng, tie_mode)
    target = 2 * k**l
    if len(window_a) > target or len(window_b) > target:
        raise ValueError(f"window exceeds the layer-{l} capacity {target}")
    pad_a = list(window_a) + [0] * (target - len(window_a))
    pad_b = list(window_b) + [0] * (target - len(window_b))
    width = detection.field_element_width(q)
    if pending_a:
        value = (1 << width) - 1  # >= q: the designated announce symbol
    else:
        value = detection.fingerprint(pad_a, test_point, q)
    sent_bits = [(value >> (width - 1 - i)) & 1 for i in range(width)]
    received = [pipe(b, value_reps) for b in sent_bits]
    if any(v == ERASURE for v in received):
        decoded = None
    else:
        decoded = detection.field_element_decode([int(v) for v in received], q)
    fp_b = detection.fingerprint(pad_b, test_point, q)
    b_bob = int(pending_b or decoded is None or decoded != fp_b)
    ret = pipe(b_bob, feedback_reps)
    ret_erased = ret == ERASURE
    b_alice = int(pending_a or ret_erased or ret == 1)
    return b_alice, b_bob, ret_erased


# --- the simulator -------------------------------------------------------


@dataclass
class PartyState:
    """One party's live state during a run."""

    name: str
    cursor: int = 0
    tau_hat: list = field(default_factory=list)
    uncoded: list = field(default_factory=list)  # one entry per global time step
    det_log: list = field(default_factory=list)  # [time, layer, bit] chronological
    window_start_cursor: dict = field(default_factory=dict)  # {layer: cursor}
    pending: set = field(default_factory=set)  # layers owed an erasure announce
    rewinds: dict = field(default_factory=dict)  # {layer: active-bit count}

    def window_bits(self, l: int, m: int, k: int) -> list:
        """Uncoded bits of the window plus nested lower-layer rewind bits."""
        lo, hi = (m - 1) * k**l, m * k**l
        bits = list(self.uncoded[lo:hi])
        for entry in self.det_log:
            if lo < entry[0] <= hi and entry[1] < l:
                bits.append(entry[2])
        return bits

    def rewind(self, l: int, m: int, k: int):
        self.cursor = self.window_start_cursor[l]
        del self.tau_hat[self.cursor :]
        lo, hi = (m - 1) * k**l, m * k**l
        for i in range(lo, hi):
            self.uncoded[i] = 0
        for entry in self.det_log:
            if lo < entry[0] <= hi and entry[1] < l:
                entry[2] = 0


@dataclass(frozen=True)
class SimulationResult:
    tau_hat_alice: tuple
    tau_hat_bob: tuple
    final_cursor_alice: int
    final_cursor_bob: int
    joint_rewinds: dict  # {layer: windows where either party's bit was active}
    rewinds_alice: dict
    rewinds_bob: dict
    channel_uses: int
    n_target: int
    sim_length: int
    e1: bool
    e2: bool
    extraction_failed: bool

    @property
    def min_cursor(self) -> int:
        return min(self.final_cursor_alice, self.final_cursor_bob)


def simulate(
    protocol: protocol_mod.InteractiveProtocol,
    channel: channels.ChannelModel,
    config: SchemeConfig,
    master_seed: int,
    run_plan: RunPlan | None = None,
    n: int | None = None,
    noise_hook=None,
    trace: list | None = None,
    check_invariants: bool = False,
) -> SimulationResult:
    """Run the full scheme once and report everything that happened.

    ``noise_hook(use_index, sent_bit, natural_value) -> value`` may override
    individual channel outputs for fault injection.  ``trace`` collects one
    record per uncoded step when given.  ``check_invariants`` asserts speaker
    agreement and the cursor bound on every step.
    """
    if not protocol.alternating:
        raise ValueError("simulate needs a bit-vs-bit protocol; symmetrize it first")
    eps_eff = sum(w * t for t, w in channel.atoms)
    if run_plan is None:
        run_plan = plan(config, eps_eff, n)
    config = run_plan.config
    k, L = config.k, config.layer_count
    sim_length = config.sim_length
    n_target = run_plan.n_covered

    schedule = randomness.build_schedule(k, L, config.randomness_mode)
    realization = randomness.realize_randomness(
        config.randomness_mode,
        schedule,
        channel,
        eps_eff,
        randomness.derive_seed(master_seed, "points"),
    )
    points = realization.points

    channel_rng = randomness.derive_rng(master_seed, "channel")
    use_count = 0

    def use_channel(bit):
        nonlocal use_count
        out = channels.transmit(channel, bit, channel_rng)
        value = out.value
        if noise_hook is not None:
            forced = noise_hook(use_count, bit, value)
            if forced is not None:
                value = forced
        use_count += 1
        return value

    def pipe(bit, reps):
        """Repetition-coded transmission of one detection bit."""
        lam = 0.0
        decided = None
        for _ in range(reps):
            t = channel.draw_crossover(channel_rng)
            if channel.mark_erasures and t == 0.5:
                value = ERASURE
            else:
                flip = 1 if channel_rng.random() < t else 0
                value = bit ^ flip
            nonlocal use_count
            if noise_hook is not None:
                forced = noise_hook(use_count, bit, value)
                if forced is not None:
                    value = forced
            use_count += 1
            if value == ERASURE or t == 0.5:
                continue
            if t == 0.0:
                decided = value
                continue
            w = math.log((1.0 - t) / t)
            lam += w if value == 0 else -w
        if decided is not None:
            return decided
        if lam > 0.0:
            return 0
        if lam < 0.0:
            return 1
        if config.tie_mode == "erasure":
            return ERASURE
        return 1 if channel_rng.random() < 0.5 else 0

    code = detection.build_extended_hamming(k)
    alice = PartyState(name=ALICE)
    bob = PartyState(name=BOB)
    parties = (alice, bob)
    for p in parties:
        p.rewinds = {l: 0 for l in range(1, L + 1)}
    joint_rewinds = {l: 0 for l in range(1, L + 1)}

    for i in range(1, sim_length + 1):
        # windows beginning at this step capture the post-rewind cursor
        for l in range(1, L + 1):
            if (i - 1) % k**l == 0:
                for p in parties:
                    p.window_start_cursor[l] = p.cursor

        for p in parties:
            p.cursor += 1
        if check_invariants:
            assert alice.cursor % 2 == bob.cursor % 2, "speaker disagreement"
        alice_speaks = alice.cursor % 2 == 1
        sender, receiver = (alice, bob) if alice_speaks else (bob, alice)
        role = ALICE if alice_speaks else BOB
        bit = protocol.next_bit(role, tuple(sender.tau_hat))
        value = use_channel(bit)
        if value == ERASURE:
            received = 0
            receiver.pending.add(1)
        else:
            received = int(value)
        sender.uncoded.append(bit)
        sender.tau_hat.append(bit)
        receiver.uncoded.append(received)
        receiver.tau_hat.append(received)
        if trace is not None:
            trace.append(
                {"time": i, "speaker": role, "sent": bit, "received": value, "layer_events": []}
            )

        for l in range(1, L + 1):
            if i % k**l != 0:
                continue
            m = i // k**l
            win_a = alice.window_bits(l, m, k)
            win_b = bob.window_bits(l, m, k)
            if l == 1:
                b_a, b_b, ret_erased = detection_round_layer1(
                    win_a,
                    win_b,
                    code=code,
                    pending_a=1 in alice.pending,
                    pending_b=1 in bob.pending,
                    pipe=pipe,
                    reps=config.a_tilde,
                )
            else:
                sched = schedule.layer(l)
                u = points[l][sched.point_index(m)]
                b_a, b_b, ret_erased = detection_round_higher(
                    win_a,
                    win_b,
                    l,
                    k,
                    run_plan.primes[l],
                    u,
                    value_reps=config.value_reps(l),
                    feedback_reps=config.feedback_reps(l),
                    pending_a=l in alice.pending,
                    pending_b=l in bob.pending,
                    pipe=pipe,
                )
            alice.pending.discard(l)
            bob.pending.discard(l)
            if ret_erased and b_a and l < L:
                # Alice rewinds on an erased feedback bit without knowing
                # Bob's decision; announce at the next layer to resynchronize
                alice.pending.add(l + 1)
            alice.det_log.append([i, l, b_a])
            bob.det_log.append([i, l, b_b])
            if b_a:
                alice.rewinds[l] += 1
            if b_b:
                bob.rewinds[l] += 1
            if b_a or b_b:
                joint_rewinds[l] += 1
            final_layer = l == L
            if b_a and not final_layer:
                alice.rewind(l, m, k)
            if b_b and not final_layer:
                bob.rewind(l, m, k)
            if trace is not None:
                trace[-1]["layer_events"].append(
                    {"layer": l, "window": m, "b_alice": b_a, "b_bob": b_b}
                )
        if check_invariants:
            rewound = sum(joint_rewinds[l] * k**l for l in range(1, L + 1))
            assert min(alice.cursor, bob.cursor) >= i - rewound, "cursor bound violated"

    if use_count != run_plan.total_channel_uses:
        raise AssertionError(
            f"channel-use count {use_count} deviates from the fixed budget "
            f"{run_plan.total_channel_uses}"
        )

    j = min(alice.cursor, bob.cursor)
    e1 = j < n_target
    truth = protocol_mod.run_noiseless(protocol, length=j).bits
    e2 = tuple(alice.tau_hat[:j]) != truth or tuple(bob.tau_hat[:j]) != truth
    return SimulationResult(
        tau_hat_alice=tuple(alice.tau_hat),
        tau_hat_bob=tuple(bob.tau_hat),
        final_cursor_alice=alice.cursor,
        final_cursor_bob=bob.cursor,
        joint_rewinds=joint_rewinds,
        rewinds_alice=alice.rewinds,
        rewinds_bob=bob.rewinds,
        channel_uses=use_count,
        n_target=n_target,
        sim_length=sim_length,
        e1=e1,
        e2=e2,
        extraction_failed=realization.failure_flag,
    )
