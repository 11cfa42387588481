import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from app.fec.channel import (
    NoiseSpec,
    bpsk,
    frame_rng,
    random_codeword,
    sigma_from_ebn0,
    to_llr,
    transmit,
    uncoded_ber,
)
from app.fec.ldpc import is_codeword


class TestSigma:
    def test_half_rate_zero_db(self):
        assert sigma_from_ebn0(NoiseSpec(eb_n0_db=0.0, rate=0.5)) == pytest.approx(1.0, abs=1e-15)

    def test_unit_rate_zero_db(self):
        assert sigma_from_ebn0(NoiseSpec(eb_n0_db=0.0, rate=1.0)) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_against_high_precision(self):
        getcontext().prec = 50
        exact = (Decimal(1) / (Decimal(2) * Decimal("0.25") * Decimal(10) ** (Decimal(3) / Decimal(10)))).sqrt()
        assert sigma_from_ebn0(NoiseSpec(eb_n0_db=3.0, rate=0.25)) == pytest.approx(float(exact), rel=1e-14)

    def test_strictly_decreasing(self):
        sigmas = [sigma_from_ebn0(NoiseSpec(eb_n0_db=db, rate=0.5)) for db in np.linspace(-5, 10, 31)]
        assert all(a > b for a, b in zip(sigmas, sigmas[1:]))

    @pytest.mark.parametrize("rate", [0.0, -0.5, 1.5])
    def test_invalid_rate(self, rate):
        with pytest.raises(ValueError):
            NoiseSpec(eb_n0_db=0.0, rate=rate)

    def test_non_finite_snr(self):
        with pytest.raises(ValueError):
            NoiseSpec(eb_n0_db=float("nan"), rate=0.5)


class TestTransmit:
    def test_symbols(self):
        frame = transmit([0, 1, 1, 0], 0.5, np.random.default_rng(0))
        assert frame.symbols.tolist() == [-1.0, 1.0, 1.0, -1.0]
        assert frame.received.shape == (4,)
        assert frame.sigma == 0.5

    def test_noiseless_limit(self):
        c = np.array([0, 1, 0, 1, 1, 0, 0])
        frame = transmit(c, 1e-12, np.random.default_rng(1))
        assert np.max(np.abs(frame.received - bpsk(c))) < 1e-9

    def test_sample_mean_and_variance(self):
        """All-zero frames at sigma=1: per-position mean near -1, variance near 1."""
        frame = transmit(np.zeros(7 * 100_000, dtype=np.uint8), 1.0, np.random.default_rng(42))
        r = frame.received.reshape(-1, 7)
        np.testing.assert_allclose(r.mean(axis=0), -1.0, atol=0.02)
        noise = frame.received - frame.symbols
        assert abs(noise.var() - 1.0) < 0.02

    def test_pure_function_of_stream(self):
        a = transmit(np.zeros(7), 0.8, frame_rng(5, 3))
        b = transmit(np.zeros(7), 0.8, frame_rng(5, 3))
        assert np.array_equal(a.received, b.received)

    def test_frame_streams_differ(self):
        a = transmit(np.zeros(7), 1.0, frame_rng(5, 0))
        b = transmit(np.zeros(7), 1.0, frame_rng(5, 1))
        assert not np.array_equal(a.received, b.received)

    def test_non_positive_sigma(self):
        with pytest.raises(ValueError):
            transmit(np.zeros(3), 0.0, np.random.default_rng(0))


class TestHelpers:
    def test_uncoded_ber(self):
        assert uncoded_ber(0.0, 1.0) == pytest.approx(0.5 * math.erfc(1.0))
        assert uncoded_ber(10.0, 1.0) < 1e-5
        with pytest.raises(ValueError):
            uncoded_ber(0.0, 0.0)

    def test_llr_scaling(self):
        np.testing.assert_allclose(to_llr(np.array([0.5, -1.0]), 0.5), [4.0, -8.0])

    def test_random_codeword(self, ham74):
        rng = np.random.default_rng(9)
        words = [random_codeword(ham74.generator, rng) for _ in range(20)]
        assert all(is_codeword(ham74, w) for w in words)
        assert len({w.tobytes() for w in words}) > 1
