"""Channel model tests: entropy, mixtures, capacity, repetition decoding."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rewindlab import channels
from rewindlab.channels import ERASURE


class TestBinaryEntropy:
    def test_endpoints(self):
        assert channels.binary_entropy(0.0) == 0.0
        assert channels.binary_entropy(1.0) == 0.0
        assert channels.binary_entropy(0.5) == 1.0

    def test_symmetry(self):
        for x in (0.1, 0.25, 0.4):
            assert channels.binary_entropy(x) == pytest.approx(channels.binary_entropy(1 - x))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            channels.binary_entropy(-0.1)

    @given(st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=200)
    def test_inverse_roundtrip(self, y):
        x = channels.binary_entropy_inverse(y)
        assert 0.0 <= x <= 0.5
        assert abs(channels.binary_entropy(x) - y) < 1e-9

    def test_inverse_endpoints(self):
        assert channels.binary_entropy_inverse(0.0) == 0.0
        assert channels.binary_entropy_inverse(1.0) == 0.5


class TestChannelModel:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            channels.ChannelModel(atoms=((0.1, 0.5), (0.2, 0.6)))

    def test_crossover_range(self):
        with pytest.raises(ValueError):
            channels.ChannelModel(atoms=((0.7, 1.0),))

    def test_empty(self):
        with pytest.raises(ValueError):
            channels.ChannelModel(atoms=())

    def test_draw_frequencies(self):
        ch = channels.ChannelModel(atoms=((0.0, 0.25), (0.1, 0.75)))
        rng = random.Random(1)
        hits = sum(ch.draw_crossover(rng) == 0.1 for _ in range(20000))
        assert abs(hits / 20000 - 0.75) < 0.01


class TestStandardChannels:
    def test_bsc_capacity(self):
        ch = channels.make_bsc(0.11)
        assert channels.shannon_capacity(ch) == pytest.approx(
            1.0 - channels.binary_entropy(0.11)
        )

    def test_bsc_bhattacharyya(self):
        eps = 0.03
        assert channels.bhattacharyya(channels.make_bsc(eps)) == pytest.approx(
            2.0 * math.sqrt(eps * (1 - eps))
        )

    def test_bec_capacity(self):
        assert channels.shannon_capacity(channels.make_bec(0.3)) == pytest.approx(0.7)

    def test_bec_erasure_marking(self):
        ch = channels.make_bec(1.0)
        out = channels.transmit(ch, 1, random.Random(0))
        assert out.value == ERASURE

    def test_bec_bhattacharyya(self):
        # for the BEC the Bhattacharyya parameter equals the erasure rate
        assert channels.bhattacharyya(channels.make_bec(0.25)) == pytest.approx(0.25)

    def test_biawgn_capacity_monotone_in_sigma(self):
        caps = [
            channels.shannon_capacity(channels.make_biawgn(s, n_atoms=256))
            for s in (0.5, 1.0, 2.0)
        ]
        assert caps[0] > caps[1] > caps[2]
        assert all(0.0 < c < 1.0 for c in caps)

    def test_biawgn_quantization_refines(self):
        fine = channels.shannon_capacity(channels.make_biawgn(1.0, n_atoms=4096))
        coarse = channels.shannon_capacity(channels.make_biawgn(1.0, n_atoms=16))
        finer = channels.shannon_capacity(channels.make_biawgn(1.0, n_atoms=8192))
        assert abs(fine - finer) < abs(coarse - finer)

    def test_biawgn_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            channels.make_biawgn(0.0)


class TestExtremality:
    def test_random_mixtures_bounded_by_bsc(self):
        # Jensen step: h^-1(1 - C) through the BSC formula dominates beta
        rng = random.Random(7)
        for _ in range(100):
            m = rng.randrange(1, 6)
            ws = [rng.random() for _ in range(m)]
            s = sum(ws)
            ch = channels.ChannelModel(
                atoms=tuple((rng.random() / 2, w / s) for w in ws), label="rand"
            )
            cap = channels.shannon_capacity(ch)
            assert channels.bhattacharyya(ch) <= channels.beta_for_bsc_of_capacity(cap) + 1e-9

    def test_bsc_is_tight(self):
        ch = channels.make_bsc(0.07)
        cap = channels.shannon_capacity(ch)
        assert channels.bhattacharyya(ch) == pytest.approx(
            channels.beta_for_bsc_of_capacity(cap), abs=1e-9
        )


class TestTransmit:
    def test_noiseless_identity(self):
        ch = channels.make_bsc(0.0)
        rng = random.Random(0)
        for bit in (0, 1):
            assert channels.transmit(ch, bit, rng).value == bit

    def test_seeded_reproducibility(self):
        ch = channels.make_bsc(0.3)
        a = [channels.transmit(ch, 0, random.Random(5)).value for _ in range(1)]
        b = [channels.transmit(ch, 0, random.Random(5)).value for _ in range(1)]
        assert a == b

    def test_flip_frequency(self):
        ch = channels.make_bsc(0.2)
        rng = random.Random(3)
        flips = sum(channels.transmit(ch, 0, rng).value for _ in range(20000))
        assert abs(flips / 20000 - 0.2) < 0.01


class TestRepetition:
    def test_validation(self):
        base = channels.make_bsc(0.1)
        with pytest.raises(ValueError):
            channels.RepetitionChannel(base, 0)
        with pytest.raises(ValueError):
            channels.RepetitionChannel(base, 3, tie_mode="bogus")

    def test_noiseless_short_circuit(self):
        rep = channels.RepetitionChannel(channels.make_bsc(0.0), 7)
        rng = random.Random(0)
        assert channels.repetition_transmit(rep, 1, rng).value == 1

    def test_all_erased_tie_modes(self):
        rep = channels.RepetitionChannel(channels.make_bec(1.0), 5, tie_mode="erasure")
        assert channels.repetition_transmit(rep, 1, random.Random(0)).value == ERASURE
        rep = channels.RepetitionChannel(channels.make_bec(1.0), 5, tie_mode="random_break")
        out = channels.repetition_transmit(rep, 1, random.Random(0)).value
        assert out in (0, 1)

    def test_error_rate_below_bhattacharyya_power(self):
        eps, rho, trials = 0.1, 5, 20000
        rep = channels.RepetitionChannel(channels.make_bsc(eps), rho)
        rng = random.Random(11)
        errors = sum(
            channels.repetition_transmit(rep, 0, rng).value != 0 for _ in range(trials)
        )
        beta = 2.0 * math.sqrt(eps * (1 - eps))
        assert errors / trials <= beta**rho + 3 * math.sqrt(beta**rho / trials)

    def test_bec_repetition_recovers_unless_all_erased(self):
        # over a BEC any surviving repetition decides correctly
        rep = channels.RepetitionChannel(channels.make_bec(0.5), 5, tie_mode="erasure")
        rng = random.Random(2)
        for _ in range(500):
            out = channels.repetition_transmit(rep, 1, rng).value
            assert out in (1, ERASURE)
