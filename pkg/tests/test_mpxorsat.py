import logging
from dataclasses import replace

import numpy as np
import pytest

from app.fec.channel import bpsk, random_codeword
from app.fec.ldpc import DimensionError, ParityCheckMatrix, syndrome
from app.fec.mpxorsat import (
    DecoderState,
    MpHyperParams,
    classify,
    decode,
    gradient_exact,
    flip_candidates,
    gradient_mp,
    h_ldpc,
    h_log,
    initialize,
    objective,
    step,
)

EPS = np.exp(-30.0)
WORKED_R = np.array([0.1236, -1.376, 0.105])
WORKED_PARAMS = MpHyperParams(tau=2.0, theta=-2.1, eta=0.5)


def make_state(h, d, q) -> DecoderState:
    state = DecoderState(d=np.asarray(d, dtype=float), q=np.asarray(q, dtype=float), sat_mask=np.ones(h.m, bool))
    state.sat_mask = classify(state, h)
    return state


def random_state(h, rng) -> DecoderState:
    return make_state(h, rng.choice([-1.0, 1.0], size=h.n), rng.uniform(-3.0, 0.0, size=h.n))


class TestHyperParams:
    def test_defaults(self, reg32):
        p = MpHyperParams()
        assert (p.theta, p.eta, p.i_max, p.q_min) == (-0.1, 0.005, 100, -30.0)
        assert p.flip_mode == "multi" and p.flip_gate == "majority"
        assert p.clamp_q and not p.reset_q_on_flip
        assert p.margin(reg32) == 24.0

    @pytest.mark.parametrize("changes", [{"tau": 0.0}, {"eta": -0.1}, {"i_max": 0}, {"q_min": -0.05}])
    def test_invalid(self, changes):
        with pytest.raises(ValueError):
            MpHyperParams(**changes)

    def test_positive_theta_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            p = MpHyperParams(theta=0.5)
        assert p.theta == 0.5
        assert "positive" in caplog.text

    def test_frozen(self):
        with pytest.raises(ValueError):
            MpHyperParams().eta = 1.0


class TestInitialize:
    def test_worked_example(self, majority):
        state = initialize(WORKED_R, majority, WORKED_PARAMS)
        assert state.d.tolist() == [1.0, -1.0, 1.0]
        np.testing.assert_allclose(state.q, np.log(np.tanh([0.1236, 1.376, 0.105])))
        assert state.q[1] == pytest.approx(-0.12777, abs=1e-4)
        assert state.sat_mask.sum() == 0
        assert state.iteration == 0

    def test_confidence_ignores_sign(self, reg32, rng):
        r = rng.normal(0.0, 1.5, size=reg32.n)
        a = initialize(r, reg32, MpHyperParams())
        b = initialize(-r, reg32, MpHyperParams(clamp_q=False))
        assert np.array_equal(a.q, b.q)
        assert np.array_equal(a.d, -b.d)
        assert (a.q < 0).all()

    def test_noiseless_codeword(self, ham74, ham74_codewords):
        for c in ham74_codewords:
            assert initialize(5.0 * bpsk(c), ham74, MpHyperParams()).sat_mask.all()

    def test_zero_input(self, majority):
        state = initialize([0.0, 1.0, -1.0], majority, MpHyperParams())
        assert state.d[0] == 1.0
        assert state.q[0] == pytest.approx(np.log(1e-12))
        assert np.isfinite(state.q).all()

    def test_length_mismatch(self, majority):
        with pytest.raises(DimensionError):
            initialize([0.1, 0.2], majority, MpHyperParams())


class TestClassify:
    def test_examples(self, majority):
        assert classify(make_state(majority, [1, 1, 1], [0, 0, 0]), majority).tolist() == [True, True]
        assert classify(make_state(majority, [1, -1, 1], [0, 0, 0]), majority).tolist() == [False, False]

    def test_matches_syndrome(self, reg32, rng):
        for _ in range(50):
            d = rng.choice([-1.0, 1.0], size=reg32.n)
            u = ((d + 1) / 2).astype(np.uint8)
            assert np.array_equal(classify(make_state(reg32, d, np.zeros(reg32.n)), reg32), syndrome(reg32, u) == 0)

    def test_odd_weight_row_uses_parity(self):
        h = ParityCheckMatrix(3, [[0, 1, 2]])
        # All-zero word: a valid codeword even though the product of d is -1
        assert classify(make_state(h, [-1, -1, -1], [0, 0, 0]), h).tolist() == [True]


class TestObjective:
    def test_all_satisfied_at_zero(self, majority):
        state = make_state(majority, [1, 1, 1], [0, 0, 0])
        assert h_log(state, majority) == pytest.approx(np.log(2 + EPS) + 30.0)

    def test_no_satisfied_clause(self, majority):
        state = make_state(majority, [1, -1, 1], [-1.0, -0.5, -2.0])
        z = np.array([-1.5, -2.5])
        assert h_log(state, majority) == pytest.approx(-30.0 - np.log(np.exp(z).sum() + EPS))

    def test_naive_evaluation(self, majority):
        state = initialize(WORKED_R, majority, WORKED_PARAMS)
        z = np.array([state.q[0] + state.q[1], state.q[1] + state.q[2]])
        sat = state.sat_mask
        naive = np.log(np.exp(z[sat]).sum() + EPS) - np.log(np.exp(z[~sat]).sum() + EPS)
        assert h_log(state, majority) == pytest.approx(naive, rel=1e-12)

    def test_relabeling_invariance(self, reg32, rng):
        state = random_state(reg32, rng)
        perm = rng.permutation(reg32.n)
        relabeled = ParityCheckMatrix(reg32.n, [perm[row] for row in reversed(reg32.rows)])
        d = np.empty(reg32.n)
        q = np.empty(reg32.n)
        d[perm] = state.d
        q[perm] = state.q
        other = make_state(relabeled, d, q)
        assert h_log(other, relabeled) == pytest.approx(h_log(state, reg32), rel=1e-12)

    def test_h_ldpc_terms(self, majority):
        state = initialize(WORKED_R, majority, WORKED_PARAMS)
        correlation = sum(WORKED_R[j] * state.d[j] * state.q[j] for j in range(3))
        assert h_ldpc(state, majority, WORKED_R) == pytest.approx(h_log(state, majority) + correlation)
        assert h_ldpc(state, majority, np.zeros(3)) == h_log(state, majority)

    def test_zero_q_drops_correlation(self, majority):
        state = make_state(majority, [1, -1, 1], [0, 0, 0])
        assert h_ldpc(state, majority, WORKED_R) == pytest.approx(h_log(state, majority))

    def test_objective_follows_normalize(self, majority):
        state = initialize(WORKED_R, majority, WORKED_PARAMS)
        assert objective(state, majority, WORKED_R, WORKED_PARAMS) == h_ldpc(state, majority, WORKED_R)
        plain = MpHyperParams(normalize=False)
        assert objective(state, majority, WORKED_R, plain) == h_log(state, majority)


def finite_difference(state, h, r, step_size=1e-6) -> np.ndarray:
    grad = np.empty(h.n)
    for j in range(h.n):
        e = np.zeros(h.n)
        e[j] = step_size
        up = h_ldpc(replace(state, q=state.q + e), h, r)
        down = h_ldpc(replace(state, q=state.q - e), h, r)
        grad[j] = (up - down) / (2 * step_size)
    return grad


class TestGradientExact:
    def test_single_clause(self):
        h = ParityCheckMatrix(2, [[0, 1]])
        state = make_state(h, [1, 1], [0, 0])
        r = np.array([0.3, -0.2])
        np.testing.assert_allclose(gradient_exact(state, h, r), 1 / (1 + EPS) + r)

    def test_worked_example_finite_difference(self, majority):
        state = initialize(WORKED_R, majority, WORKED_PARAMS)
        np.testing.assert_allclose(gradient_exact(state, majority, WORKED_R), finite_difference(state, majority, WORKED_R),
                                   rtol=1e-5, atol=1e-5)

    def test_random_states_finite_difference(self, reg32, rng):
        """100 random (24,32) states: analytic vs central differences with the partition frozen."""
        for _ in range(100):
            state = random_state(reg32, rng)
            r = rng.normal(0.0, 1.0, size=reg32.n)
            analytic = gradient_exact(state, reg32, r)
            numeric = finite_difference(state, reg32, r)
            assert np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))) <= 1e-5


class TestGradientMp:
    def test_uniform_satisfied_clauses(self, reg32):
        state = make_state(reg32, np.ones(reg32.n), np.zeros(reg32.n))
        assert state.sat_mask.all()
        grad = gradient_mp(state, reg32, np.zeros(reg32.n), MpHyperParams())
        np.testing.assert_allclose(grad, 1.0 / reg32.m)

    def test_unscaled_variant(self, reg32):
        state = make_state(reg32, np.ones(reg32.n), np.zeros(reg32.n))
        grad = gradient_mp(state, reg32, np.zeros(reg32.n), MpHyperParams(gradient="mp_unscaled"))
        np.testing.assert_allclose(grad, 3.0 / reg32.m)

    def test_zero_when_outside_every_support(self, ham74):
        # Clauses 0 and 1 sit far below clause 2, so only clause 2 is in the support
        state = make_state(ham74, np.ones(7), [-20.0, -20.0, 0, 0, 0, 0, 0])
        assert state.sat_mask.all()
        grad = gradient_mp(state, ham74, np.zeros(7), MpHyperParams())
        assert grad[0] == 0.0 and grad[1] == 0.0 and grad[2] == 0.0
        np.testing.assert_allclose(grad[[3, 4, 5, 6]], 1.0)

    def test_symmetric_variables(self, majority):
        state = make_state(majority, [1, -1, 1], [-1.0, -0.5, -1.0])
        grad = gradient_mp(state, majority, np.zeros(3), MpHyperParams(tau=2.0))
        assert grad[0] == pytest.approx(grad[2])

    def test_worked_example_direction(self, majority):
        state = initialize(WORKED_R, majority, WORKED_PARAMS)
        grad = gradient_mp(state, majority, WORKED_R, WORKED_PARAMS)
        np.testing.assert_allclose(grad, [-0.41682, 0.876, -0.35458], atol=1e-3)
        assert grad[1] > 0

    def test_normalize_off_drops_channel_term(self, majority):
        state = initialize(WORKED_R, majority, WORKED_PARAMS)
        with_term = gradient_mp(state, majority, WORKED_R, WORKED_PARAMS)
        without = gradient_mp(state, majority, WORKED_R, WORKED_PARAMS.model_copy(update={"normalize": False}))
        np.testing.assert_allclose(with_term - without, WORKED_R * state.d)


class TestStep:
    def test_first_iteration_of_worked_example(self, majority):
        state = step(initialize(WORKED_R, majority, WORKED_PARAMS), majority, WORKED_R, WORKED_PARAMS)
        assert state.iteration == 1
        assert state.d.tolist() == [1.0, -1.0, -1.0]
        np.testing.assert_allclose(state.q, [-2.30419, 0.0, -2.53975], atol=1e-3)
        assert state.sat_mask.tolist() == [False, True]
        # q1 is already below theta, so it flips on the next iteration
        assert state.q[0] < WORKED_PARAMS.theta

    def test_padded_check_term_keeps_first_bit_above_threshold(self, majority):
        # With no satisfied clause the padding entries of z+ all sit in the support
        params = WORKED_PARAMS.model_copy(update={"gradient": "mp_padded"})
        state = step(initialize(WORKED_R, majority, params), majority, WORKED_R, params)
        assert state.d.tolist() == [1.0, -1.0, -1.0]
        np.testing.assert_allclose(state.q, [-2.04408, 0.0, -2.29985], atol=1e-3)
        assert state.q[0] > params.theta

    def test_converged_state_unchanged(self, majority):
        state = make_state(majority, [1, 1, 1], [-1, -1, -1])
        assert step(state, majority, np.ones(3), WORKED_PARAMS) is state

    def test_multi_and_single_flip(self, majority):
        state = make_state(majority, [1, -1, 1], [-3.0, -2.5, -1.0])
        r = np.array([0.1, -0.1, 0.1])
        multi = step(state, majority, r, WORKED_PARAMS)
        single = step(state, majority, r, WORKED_PARAMS.model_copy(update={"flip_mode": "single"}))
        assert multi.d.tolist() == [-1.0, 1.0, 1.0]
        assert single.d.tolist() == [-1.0, -1.0, 1.0]

    def test_single_flip_tie_takes_lowest_index(self, majority):
        state = make_state(majority, [1, -1, 1], [-3.0, -3.0, -1.0])
        params = WORKED_PARAMS.model_copy(update={"flip_mode": "single"})
        assert step(state, majority, np.zeros(3), params).d.tolist() == [-1.0, -1.0, 1.0]

    def test_majority_gate(self, majority):
        # Clause 0 unsatisfied, clause 1 satisfied; only bit 0 has more unsatisfied clauses
        state = make_state(majority, [1, -1, -1], [-3.0, -3.0, -3.0])
        assert flip_candidates(state, majority, WORKED_PARAMS).tolist() == [True, False, False]
        assert step(state, majority, np.zeros(3), WORKED_PARAMS).d.tolist() == [-1.0, -1.0, -1.0]
        ungated = WORKED_PARAMS.model_copy(update={"flip_gate": "none"})
        assert step(state, majority, np.zeros(3), ungated).d.tolist() == [-1.0, 1.0, 1.0]

    def test_reset_on_flip(self, majority):
        state = make_state(majority, [1, -1, 1], [-3.0, -0.5, -1.0])
        params = WORKED_PARAMS.model_copy(update={"reset_q_on_flip": True})
        after = step(state, majority, np.zeros(3), params)
        assert after.d[0] == -1.0
        assert after.q[0] == 0.0

    def test_clamp(self, majority):
        state = make_state(majority, [1, -1, 1], [-0.01, -0.01, -0.01])
        r = np.array([5.0, -5.0, 5.0])
        clamped = step(state, majority, r, WORKED_PARAMS)
        free = step(state, majority, r, WORKED_PARAMS.model_copy(update={"clamp_q": False}))
        assert (clamped.q <= 0).all()
        assert (free.q > 0).any()


class TestDecode:
    def test_worked_example(self, majority):
        outcome = decode(WORKED_R, majority, WORKED_PARAMS, track=True)
        assert outcome.converged
        assert outcome.iterations_used <= 5
        assert outcome.decision.tolist() == [0, 0, 0]
        assert outcome.trajectory[0] == 0
        assert outcome.trajectory[-1] == 2
        assert len(outcome.trajectory) == outcome.iterations_used + 1

    def test_second_bit_never_flips(self, majority):
        state = initialize(WORKED_R, majority, WORKED_PARAMS)
        while not state.converged and state.iteration < 5:
            state = step(state, majority, WORKED_R, WORKED_PARAMS)
            assert state.d[1] == -1.0
        assert state.converged
        assert state.iteration == 2

    def test_threshold_only_schedule(self, majority):
        """Without the gate: bit 3 flips at iterations 1, 2 and 4, bit 1 at 2, 3 and 4, bit 2 never."""
        params = WORKED_PARAMS.model_copy(update={"flip_gate": "none"})
        state = initialize(WORKED_R, majority, params)
        decisions = []
        while not state.converged:
            state = step(state, majority, WORKED_R, params)
            decisions.append(state.d.tolist())
        assert decisions == [
            [1.0, -1.0, -1.0],
            [-1.0, -1.0, 1.0],
            [1.0, -1.0, 1.0],
            [-1.0, -1.0, -1.0],
        ]
        outcome = decode(WORKED_R, majority, params, track=True)
        assert outcome.iterations_used == 4
        assert outcome.trajectory == [0, 1, 1, 0, 2]

    def test_noiseless_codewords(self, ham74, ham74_codewords):
        for c in ham74_codewords:
            outcome = decode(5.0 * bpsk(c), ham74, MpHyperParams())
            assert outcome.converged and outcome.iterations_used == 0
            assert np.array_equal(outcome.decision, c)

    @pytest.mark.parametrize("flip_mode", ["multi", "single"])
    def test_hamming_single_errors(self, ham74, ham74_codewords, flip_mode):
        """Every codeword with one wrong bit received at amplitude 1 decodes back in one iteration."""
        params = MpHyperParams(flip_mode=flip_mode)
        for c in ham74_codewords:
            for j in range(7):
                r = 5.0 * bpsk(c)
                r[j] = -bpsk(c)[j]
                outcome = decode(r, ham74, params)
                assert outcome.converged, (c, j)
                assert outcome.iterations_used == 1, (c, j)
                assert np.array_equal(outcome.decision, c), (c, j)

    def test_confident_wrong_bit_is_kept(self, ham74, ham74_codewords):
        """
        A wrong bit received at |r| = 5 starts at q = log tanh 5 > theta and the
        r_j d_j term only pushes it up, so it never flips.
        """
        for c in ham74_codewords:
            for j in range(7):
                r = 5.0 * bpsk(c)
                r[j] = -r[j]
                outcome = decode(r, ham74, MpHyperParams(i_max=20))
                assert not outcome.converged, (c, j)
                assert outcome.iterations_used == 20
                assert np.array_equal(outcome.decision, (r > 0).astype(np.uint8)), (c, j)

    @pytest.mark.parametrize(
        "changes", [{}, {"flip_mode": "single"}, {"flip_gate": "none"}, {"gradient": "exact"}, {"reset_q_on_flip": True}],
    )
    def test_codeword_translation(self, reg32, rng, changes):
        """Decoding s*r for the sign pattern s of a codeword c gives the decision for r shifted by c."""
        params = MpHyperParams(**changes)
        for _ in range(25):
            c = random_codeword(reg32.generator, rng)
            r = -1.0 + 0.8 * rng.normal(size=reg32.n)
            base = decode(r, reg32, params, track=True)
            moved = decode(-bpsk(c) * r, reg32, params, track=True)
            assert np.array_equal(moved.decision, base.decision ^ c)
            assert moved.iterations_used == base.iterations_used
            assert moved.converged == base.converged
            assert moved.trajectory == base.trajectory

    def test_iteration_cap(self, majority):
        outcome = decode(WORKED_R, majority, WORKED_PARAMS.model_copy(update={"i_max": 1}))
        assert outcome.iterations_used == 1
        assert not outcome.converged

    @pytest.mark.parametrize("gradient", ["mp", "mp_unscaled", "mp_padded", "exact"])
    def test_converged_implies_codeword(self, reg32, rng, gradient):
        params = MpHyperParams(gradient=gradient)
        for _ in range(20):
            r = -1.0 + 0.8 * rng.normal(size=reg32.n)
            outcome = decode(r, reg32, params)
            if outcome.converged:
                assert not syndrome(reg32, outcome.decision).any()

    def test_deterministic(self, reg32, rng):
        r = -1.0 + rng.normal(size=reg32.n)
        a = decode(r, reg32, MpHyperParams(), track=True)
        b = decode(r, reg32, MpHyperParams(), track=True)
        assert np.array_equal(a.decision, b.decision)
        assert a.trajectory == b.trajectory and a.iterations_used == b.iterations_used
