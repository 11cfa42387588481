import numpy as np
import pytest

from app.fec.margin import mp, mp_scores


def bisect_zeta(y: np.ndarray, tau: float) -> float:
    """Solve sum [y - zeta]_+ = tau by interval halving."""
    lo, hi = y.min() - tau, y.max()
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if np.maximum(y - mid, 0.0).sum() > tau:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestExamples:
    def test_single_element(self):
        res = mp([5.0], 2.0)
        assert res.zeta == pytest.approx(3.0)
        np.testing.assert_allclose(res.scores, [1.0])

    def test_symmetric_pair(self):
        res = mp([0.0, 0.0], 2.0)
        assert res.zeta == pytest.approx(-1.0)
        np.testing.assert_allclose(res.scores, [0.5, 0.5])

    def test_dominant_first(self):
        scores = mp_scores([3.0, 1.0, 1.0], 2.0)
        assert scores.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.argmax(scores) == 0
        assert mp([3.0, 1.0, 1.0], 2.0).zeta == pytest.approx(bisect_zeta(np.array([3.0, 1.0, 1.0]), 2.0), abs=1e-9)

    def test_one_hot_when_gap_exceeds_tau(self):
        np.testing.assert_array_equal(mp_scores([10.0, 0.0, -1.0], 2.0), [1.0, 0.0, 0.0])

    @pytest.mark.parametrize("a", [-30.0, 0.0, 7.5])
    def test_uniform(self, a):
        np.testing.assert_allclose(mp_scores([a] * 4, 4.0), [0.25] * 4)

    def test_zeta_below_minimum(self):
        y = np.array([0.0, 0.1])
        res = mp(y, 5.0)
        assert res.zeta < y.min()
        assert res.support.tolist() == [0, 1]


class TestWaterFillingOracle:
    def test_random_instances(self):
        """Normalization and bisection agreement over 10^4 random vectors."""
        rng = np.random.default_rng(42)
        for _ in range(10_000):
            size = int(rng.integers(1, 201))
            y = rng.uniform(-50, 50, size=size)
            tau = float(rng.choice([0.01, 1.0, float(size)]))
            res = mp(y, tau)
            assert abs(res.scores.sum() - 1.0) <= 1e-9
            assert abs(res.zeta - bisect_zeta(y, tau)) <= 1e-9 * max(1.0, abs(res.zeta))

    def test_small_uniform_vectors(self):
        rng = np.random.default_rng(7)
        y = rng.uniform(-5, 5, size=10)
        assert mp(y, 3.0).zeta == pytest.approx(bisect_zeta(y, 3.0), abs=1e-9)


class TestProperties:
    def test_constraint_residual(self, rng):
        for _ in range(200):
            y = rng.normal(0, 10, size=int(rng.integers(1, 50)))
            tau = float(rng.uniform(0.01, 20))
            res = mp(y, tau)
            assert abs(np.maximum(y - res.zeta, 0).sum() - tau) <= 1e-9 * max(1.0, tau)

    def test_shift_equivariance(self, rng):
        y = rng.uniform(-5, 5, size=30)
        base = mp(y, 2.0)
        shifted = mp(y + 12.5, 2.0)
        assert shifted.zeta == pytest.approx(base.zeta + 12.5, abs=1e-9)
        np.testing.assert_allclose(shifted.scores, base.scores, atol=1e-9)

    def test_monotone_in_own_score(self, rng):
        y = rng.uniform(-3, 3, size=12)
        before = mp_scores(y, 1.5)
        for i in range(y.size):
            bumped = y.copy()
            bumped[i] += 0.7
            assert mp_scores(bumped, 1.5)[i] >= before[i] - 1e-12

    def test_exact_zeros_outside_support(self, rng):
        y = rng.uniform(-5, 5, size=40)
        res = mp(y, 1.0)
        outside = y <= res.zeta
        assert outside.any()
        assert (res.scores[outside] == 0.0).all()
        assert res.support.tolist() == np.flatnonzero(res.scores > 0).tolist()

    def test_sentinels_fall_outside_support(self):
        res = mp([-2.0, -2.5, -30.0, -30.0], 2.0)
        assert res.scores[2] == 0.0 and res.scores[3] == 0.0


class TestArgumentErrors:
    def test_empty(self):
        with pytest.raises(ValueError):
            mp([], 1.0)

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_non_positive_tau(self, tau):
        with pytest.raises(ValueError):
            mp([1.0, 2.0], tau)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite(self, bad):
        with pytest.raises(ValueError):
            mp([1.0, bad], 1.0)
