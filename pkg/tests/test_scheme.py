"""Scheme tests: planning, detection rounds, and the end-to-end simulator."""

import math
import random

import pytest

from rewindlab import analysis, channels, detection, protocol as proto, scheme
from rewindlab.channels import ERASURE


def make_protocol(n=200, seed=7):
    return proto.builtin_protocol("prf_table", n, seed=seed)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            scheme.SchemeConfig(k=6, layer_count=2)
        with pytest.raises(ValueError):
            scheme.SchemeConfig(k=8, layer_count=0)
        with pytest.raises(ValueError):
            scheme.SchemeConfig(k=8, layer_count=2, a=4)
        with pytest.raises(ValueError):
            scheme.SchemeConfig(k=8, layer_count=2, tie_mode="maybe")

    def test_repetition_counts(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=3)
        assert cfg.value_reps(1) == 5
        assert cfg.value_reps(2) == 7
        assert cfg.value_reps(3) == 9
        assert cfg.feedback_reps(2) == 7
        prose = scheme.SchemeConfig(k=8, layer_count=3, return_reps="prose")
        assert prose.feedback_reps(2) == 5

    def test_layer1_bits(self):
        assert scheme.SchemeConfig(k=8, layer_count=1).detection_bits_layer1 == 6
        assert scheme.SchemeConfig(k=64, layer_count=1).detection_bits_layer1 == 9


class TestPlan:
    def test_budget_oracle(self):
        # recompute the channel-use total from first principles
        cfg = scheme.SchemeConfig(k=8, layer_count=3)
        p = scheme.plan(cfg, 0.002)
        k, L = 8, 3
        expected = k**L + 5 * 6 * k ** (L - 1)
        for l in range(2, L + 1):
            w = detection.field_element_width(p.primes[l])
            expected += ((3 + 2 * l) * w + (3 + 2 * l)) * k ** (L - l)
        assert p.total_channel_uses == expected

    def test_layer_count_raised_to_cover_n(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=1)
        p = scheme.plan(cfg, 0.002, n=200)
        assert p.config.layer_count == 3
        assert p.n_covered == 200
        assert p.sim_length * (float(analysis.zeta(0.002, 8)) - cfg.xi) >= 200

    def test_n_derived_from_layers(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=3, xi=0.05)
        p = scheme.plan(cfg, 0.002)
        z = float(analysis.zeta(0.002, 8))
        assert p.n_covered == math.floor(8**3 * (z - 0.05))

    def test_admissibility_enforced(self):
        with pytest.raises(analysis.InfeasibleParameters):
            scheme.plan(scheme.SchemeConfig(k=8, layer_count=2), 0.1)

    def test_slack_exhausted(self):
        with pytest.raises(analysis.InfeasibleParameters):
            scheme.plan(scheme.SchemeConfig(k=8, layer_count=2, xi=0.999), 0.002)


class TestDetectionRounds:
    def test_layer1_equal_windows_pass(self):
        w = [1, 0, 1, 1, 0, 0, 1, 0]
        b_a, b_b, _ = scheme.detection_round_layer1(
            w, list(w), channels.make_bsc(0.0), 5, random.Random(0)
        )
        assert (b_a, b_b) == (0, 0)

    def test_layer1_flip_detected(self):
        w = [1, 0, 1, 1, 0, 0, 1, 0]
        v = list(w)
        v[3] ^= 1
        b_a, b_b, _ = scheme.detection_round_layer1(
            w, v, channels.make_bsc(0.0), 5, random.Random(0)
        )
        assert (b_a, b_b) == (1, 1)

    def test_layer1_codeword_difference_missed(self):
        # differences equal to a codeword are invisible to the syndrome;
        # that is exactly the mis-detection the closed form prices in
        code = detection.build_extended_hamming(8)
        w = [0] * 8
        import itertools

        for pos in itertools.combinations(range(8), 4):
            v = [0] * 8
            for i in pos:
                v[i] = 1
            if not detection.syndrome(code, v).any():
                break
        b_a, b_b, _ = scheme.detection_round_layer1(
            w, v, channels.make_bsc(0.0), 5, random.Random(0)
        )
        assert (b_a, b_b) == (0, 0)

    def test_layer1_pending_erasure_forces_rewind(self):
        w = [0] * 8
        b_a, b_b, _ = scheme.detection_round_layer1(
            w, list(w), channels.make_bsc(0.0), 5, random.Random(0), pending_a=True
        )
        assert (b_a, b_b) == (1, 1)
        b_a, b_b, _ = scheme.detection_round_layer1(
            w, list(w), channels.make_bsc(0.0), 5, random.Random(0), pending_b=True
        )
        assert b_b == 1

    def test_higher_equal_windows_pass(self):
        q = detection.select_prime(2, 8)
        w = [random.Random(1).randrange(2) for _ in range(64)]
        for u in (0, 5, 1234):
            b_a, b_b, _ = scheme.detection_round_higher(
                w, list(w), 2, 8, q, u, channels.make_bsc(0.0), random.Random(0)
            )
            assert (b_a, b_b) == (0, 0)

    def test_higher_difference_detected_except_collisions(self):
        q = detection.select_prime(2, 8)
        rng = random.Random(2)
        w = [rng.randrange(2) for _ in range(64)]
        v = list(w)
        v[10] ^= 1
        missed = 0
        for u in range(0, q, 97):
            b_a, b_b, _ = scheme.detection_round_higher(
                w, v, 2, 8, q, u, channels.make_bsc(0.0), random.Random(0)
            )
            assert b_a == b_b
            missed += b_b == 0
        # Lemma-level guarantee: collisions on at most (len-1)/q of all points
        assert missed / math.ceil(q / 97) <= 2 * (128 - 1) / q + 0.01

    def test_higher_announce_symbol(self):
        q = detection.select_prime(2, 8)
        w = [0] * 64
        b_a, b_b, _ = scheme.detection_round_higher(
            w, list(w), 2, 8, q, 17, channels.make_bsc(0.0), random.Random(0), pending_a=True
        )
        assert (b_a, b_b) == (1, 1)

    def test_window_capacity_guard(self):
        q = detection.select_prime(2, 8)
        with pytest.raises(ValueError):
            scheme.detection_round_higher(
                [0] * 200, [0] * 200, 2, 8, q, 1, channels.make_bsc(0.0), random.Random(0)
            )


class TestSimulateNoiseless:
    @pytest.mark.parametrize("kind", ["constant", "parity_echo", "prf_table"])
    def test_exact_simulation(self, kind):
        p = proto.builtin_protocol(kind, 100, seed=3)
        cfg = scheme.SchemeConfig(k=8, layer_count=2)
        res = scheme.simulate(p, channels.make_bsc(0.0), cfg, master_seed=1, check_invariants=True)
        assert not res.e1 and not res.e2
        assert res.tau_hat_alice == res.tau_hat_bob
        assert all(c == 0 for c in res.joint_rewinds.values())
        truth = proto.run_noiseless(p, length=res.sim_length)
        assert res.tau_hat_alice == truth.bits

    def test_symmetrized_adaptive_protocol(self):
        p = proto.symmetrize(proto.builtin_protocol("adaptive_switch", 30, seed=4))
        cfg = scheme.SchemeConfig(k=8, layer_count=2)
        res = scheme.simulate(p, channels.make_bsc(0.0), cfg, master_seed=1)
        recovered = proto.recover_original(
            proto.builtin_protocol("adaptive_switch", 30, seed=4),
            proto.Transcript(
                bits=res.tau_hat_alice[:60], speakers=(proto.ALICE, proto.BOB) * 30
            ),
        )
        assert recovered == proto.run_noiseless(proto.builtin_protocol("adaptive_switch", 30, seed=4))

    def test_non_alternating_rejected(self):
        p = proto.builtin_protocol("adaptive_switch", 30, seed=4)
        with pytest.raises(ValueError):
            scheme.simulate(p, channels.make_bsc(0.0), scheme.SchemeConfig(k=8, layer_count=2), 1)


class TestSimulateNoisy:
    def test_channel_use_budget_is_exact(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=3)
        p = scheme.plan(cfg, 0.002)
        for seed in range(3):
            res = scheme.simulate(
                make_protocol(), channels.make_bsc(0.002), cfg, master_seed=seed
            )
            assert res.channel_uses == p.total_channel_uses

    def test_seeded_reproducibility(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=3)
        a = scheme.simulate(make_protocol(), channels.make_bsc(0.002), cfg, master_seed=5)
        b = scheme.simulate(make_protocol(), channels.make_bsc(0.002), cfg, master_seed=5)
        assert a == b

    def test_cursor_inequality(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=3)
        for seed in range(5):
            res = scheme.simulate(
                make_protocol(), channels.make_bsc(0.004), cfg, master_seed=seed,
                check_invariants=True,
            )
            rewound = sum(res.joint_rewinds[l] * 8**l for l in range(1, 4))
            assert res.min_cursor >= res.sim_length - rewound

    def test_error_flags_rare_in_regime(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=3)
        bad = sum(
            scheme.simulate(
                make_protocol(), channels.make_bsc(0.002), cfg, master_seed=s
            ).e2
            for s in range(20)
        )
        assert bad == 0

    def test_randomness_modes_run(self):
        for mode in ("shared_seed", "private_conveyed", "channel_extracted"):
            cfg = scheme.SchemeConfig(k=8, layer_count=2, randomness_mode=mode)
            res = scheme.simulate(
                make_protocol(50), channels.make_bsc(0.002), cfg, master_seed=2
            )
            assert not res.e2


class TestFaultInjection:
    def test_single_flip_triggers_one_rewind(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=2)
        hook = lambda idx, bit, val: (bit ^ 1) if idx == 2 else None
        res = scheme.simulate(
            make_protocol(), channels.make_bsc(0.0), cfg, master_seed=1, noise_hook=hook,
            check_invariants=True,
        )
        assert res.joint_rewinds[1] == 1
        assert not res.e2
        # the redone simulation converges back to the true transcript
        truth = proto.run_noiseless(make_protocol(), length=res.min_cursor).bits
        assert res.tau_hat_alice[: res.min_cursor] == truth

    def test_flip_in_detection_bit_causes_false_alarm_at_most(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=2)
        # corrupt every repetition of the first syndrome bit: with a t=0 base
        # each use decides the vote outright, so all five must be hit
        targets = set(range(8, 13))
        hook = lambda idx, bit, val: (val ^ 1) if idx in targets else None
        res = scheme.simulate(
            make_protocol(), channels.make_bsc(0.0), cfg, master_seed=1, noise_hook=hook
        )
        assert res.joint_rewinds[1] == 1
        assert not res.e2


class TestErasures:
    def test_bec_runs_have_no_silent_errors(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=3, tie_mode="erasure")
        for seed in range(10):
            res = scheme.simulate(
                make_protocol(), channels.make_bec(0.02), cfg, master_seed=seed,
                check_invariants=True,
            )
            assert not res.e2

    def test_uncoded_erasure_is_announced(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=2, tie_mode="erasure")
        hook = lambda idx, bit, val: ERASURE if idx == 3 else None
        res = scheme.simulate(
            make_protocol(), channels.make_bec(0.0), cfg, master_seed=1, noise_hook=hook
        )
        assert res.joint_rewinds[1] == 1
        assert not res.e2


class TestTrace:
    def test_trace_records_every_step(self):
        cfg = scheme.SchemeConfig(k=8, layer_count=2)
        trace = []
        scheme.simulate(
            make_protocol(), channels.make_bsc(0.002), cfg, master_seed=3, trace=trace
        )
        assert len(trace) == 64
        assert set(trace[0]) == {"time", "speaker", "sent", "received", "layer_events"}
        # a layer-1 event at the end of every 8-step window
        assert all(trace[i]["layer_events"] for i in range(7, 64, 8))
        assert trace[63]["layer_events"][-1]["layer"] == 2
