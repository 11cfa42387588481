"""
MP-XOR-SAT decoding.

Every row of H is an XOR clause over the code bits. The decoder keeps bipolar
decisions d (bit 1 <-> +1) and log-confidences q <= 0, splits the clauses into
satisfied (P+) and unsatisfied (P-) sets, and climbs the objective

    H_log  = log(sum_{P+} exp(z_i) + eps) - log(sum_{P-} exp(z_i) + eps)
    H_LDPC = H_log + sum_j r_j d_j q_j          (z_i = sum_j h_ij q_j, eps = exp(q_min))

with the softmax-like gradient of each log-sum replaced by Margin Propagation
scores. A bit flips when its q falls below the threshold theta and, under the
default majority gate, more of its clauses are unsatisfied than satisfied.

q starts at log|tanh r| whatever the sign of r, and every quantity the loop
reads (|r|, r_j d_j and the syndrome) is unchanged when the received word is
translated by a codeword. Decoding c + e therefore gives the decision for e
shifted by c, with the same iteration count and trajectory.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import logsumexp

from app.config import DEFAULT_ETA, DEFAULT_I_MAX, DEFAULT_Q_MIN, DEFAULT_THETA, TANH_CLAMP
from app.fec.ldpc import DimensionError, ParityCheckMatrix
from app.fec.margin import mp

logger = logging.getLogger(__name__)

FlipMode = Literal["multi", "single"]
GradientKind = Literal["mp", "mp_unscaled", "mp_padded", "exact"]
FlipGate = Literal["majority", "none"]


class MpHyperParams(BaseModel):
    """Hyper-parameters of the MP-XOR-SAT loop. `tau=None` means tau = M of the code being decoded."""

    model_config = ConfigDict(frozen=True)

    tau: float | None = Field(default=None, gt=0.0)
    theta: float = DEFAULT_THETA
    eta: float = Field(default=DEFAULT_ETA, gt=0.0)
    i_max: int = Field(default=DEFAULT_I_MAX, ge=1)
    q_min: float = DEFAULT_Q_MIN
    flip_mode: FlipMode = "multi"
    # "none" flips on the threshold alone
    flip_gate: FlipGate = "majority"
    clamp_q: bool = True
    reset_q_on_flip: bool = False
    gradient: GradientKind = "mp"
    # Keep the sum_j r_j d_j q_j correlation term in objective and gradient
    normalize: bool = True
    # Feed 2r/sigma^2 instead of raw channel output
    llr_input: bool = False

    @model_validator(mode="after")
    def _check_threshold(self) -> "MpHyperParams":
        if not self.q_min < self.theta:
            raise ValueError(f"q_min ({self.q_min}) must lie below theta ({self.theta})")
        if self.theta > 0:
            logger.warning("theta=%s is positive; every bit stays a flip candidate whatever its confidence", self.theta)
        return self

    def margin(self, h: ParityCheckMatrix) -> float:
        return float(self.tau) if self.tau is not None else float(h.m)


@dataclass
class DecoderState:
    d: np.ndarray
    q: np.ndarray
    sat_mask: np.ndarray
    iteration: int = 0

    @property
    def converged(self) -> bool:
        return bool(self.sat_mask.all())

    @property
    def decision(self) -> np.ndarray:
        return (self.d > 0).astype(np.uint8)


@dataclass
class DecodeOutcome:
    decision: np.ndarray
    iterations_used: int
    converged: bool
    trajectory: list[int] | None = field(default=None)


def _received(r, h: ParityCheckMatrix) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (h.n,):
        raise DimensionError(f"received vector has shape {r.shape}, code needs ({h.n},)")
    return r


def _sat_mask(d: np.ndarray, h: ParityCheckMatrix) -> np.ndarray:
    # Satisfied <=> syndrome bit of u = [d > 0] is zero
    ones = (d > 0).astype(np.int64)
    return h.row_sums(ones) % 2 == 0


def classify(state: DecoderState, h: ParityCheckMatrix) -> np.ndarray:
    """Per-clause mask, True for clauses in P+."""
    return _sat_mask(state.d, h)


def initialize(r, h: ParityCheckMatrix, params: MpHyperParams) -> DecoderState:
    r = _received(r, h)
    d = np.where(r >= 0, 1.0, -1.0)
    # tanh of |r| keeps q bit-identical under a sign flip of r
    confidence = np.clip(np.tanh(np.abs(r)), TANH_CLAMP, 1.0 - TANH_CLAMP)
    return DecoderState(d=d, q=np.log(confidence), sat_mask=_sat_mask(d, h))


def h_log(state: DecoderState, h: ParityCheckMatrix, q_min: float = DEFAULT_Q_MIN) -> float:
    z = h.row_sums(state.q)
    sat = state.sat_mask
    satisfied = logsumexp(np.append(z[sat], q_min))
    unsatisfied = logsumexp(np.append(z[~sat], q_min))
    return float(satisfied - unsatisfied)


def h_ldpc(state: DecoderState, h: ParityCheckMatrix, r, q_min: float = DEFAULT_Q_MIN) -> float:
    r = _received(r, h)
    return h_log(state, h, q_min) + float(np.sum(r * state.d * state.q))


def objective(state: DecoderState, h: ParityCheckMatrix, r, params: MpHyperParams) -> float:
    if params.normalize:
        return h_ldpc(state, h, r, params.q_min)
    return h_log(state, h, params.q_min)


def _exact_check_term(state: DecoderState, h: ParityCheckMatrix, q_min: float) -> np.ndarray:
    z = h.row_sums(state.q)
    sat = state.sat_mask
    log_den_sat = logsumexp(np.append(z[sat], q_min))
    log_den_unsat = logsumexp(np.append(z[~sat], q_min))
    signed = np.where(sat, np.exp(z - log_den_sat), -np.exp(z - log_den_unsat))
    return h.col_sums(signed)


def _mp_check_term(state: DecoderState, h: ParityCheckMatrix, params: MpHyperParams) -> np.ndarray:
    """
    Check-node part of the MP gradient.

    z+ carries the satisfied clause scores and z- the unsatisfied ones, each
    padded with q_min where the clause belongs to the other set. The offsets
    zeta+/- come from the padded vectors. A clause contributes only through its
    own set: +[z_i - zeta+]_+ if satisfied, -[z_i - zeta-]_+ otherwise. The
    `mp_padded` variant also keeps the [q_min - zeta]_+ terms of the padding
    entries, which are nonzero whenever one set is empty or tiny. The scaled
    variants divide by tau * A_j, A_j counting the entries of variable j inside
    the support; A_j = 0 forces a zero numerator and the term is 0.
    """
    tau = params.margin(h)
    z = h.row_sums(state.q)
    sat = state.sat_mask

    plus = np.where(sat, z, params.q_min)
    minus = np.where(sat, params.q_min, z)
    zeta_plus = mp(plus, tau).zeta
    zeta_minus = mp(minus, tau).zeta
    excess_plus = np.maximum(plus - zeta_plus, 0.0)
    excess_minus = np.maximum(minus - zeta_minus, 0.0)
    in_plus = plus > zeta_plus
    in_minus = minus > zeta_minus
    if params.gradient != "mp_padded":
        excess_plus = np.where(sat, excess_plus, 0.0)
        excess_minus = np.where(sat, 0.0, excess_minus)
        in_plus &= sat
        in_minus &= ~sat

    numerator = h.col_sums(excess_plus - excess_minus)
    if params.gradient == "mp_unscaled":
        return numerator / tau

    a = h.col_sums(in_plus.astype(np.float64) + in_minus.astype(np.float64))
    return np.divide(numerator, tau * a, out=np.zeros_like(numerator), where=a > 0)


def _check_term(state: DecoderState, h: ParityCheckMatrix, params: MpHyperParams) -> np.ndarray:
    if params.gradient == "exact":
        return _exact_check_term(state, h, params.q_min)
    return _mp_check_term(state, h, params)


def gradient_exact(state: DecoderState, h: ParityCheckMatrix, r, q_min: float = DEFAULT_Q_MIN) -> np.ndarray:
    """dH_LDPC/dq with the clause partition held fixed."""
    r = _received(r, h)
    return _exact_check_term(state, h, q_min) + r * state.d


def gradient_mp(state: DecoderState, h: ParityCheckMatrix, r, params: MpHyperParams) -> np.ndarray:
    r = _received(r, h)
    grad = _mp_check_term(state, h, params)
    if params.normalize:
        grad = grad + r * state.d
    return grad


def flip_candidates(state: DecoderState, h: ParityCheckMatrix, params: MpHyperParams) -> np.ndarray:
    """
    Bits allowed to flip this iteration.

    q below theta, and under the majority gate more unsatisfied than satisfied
    clauses on the bit, so flipping it alone shrinks P-.
    """
    below = state.q < params.theta
    if params.flip_gate == "none":
        return below
    sat = state.sat_mask.astype(np.float64)
    return below & (h.col_sums(1.0 - sat) > h.col_sums(sat))


def _flip_mask(state: DecoderState, h: ParityCheckMatrix, params: MpHyperParams) -> np.ndarray:
    candidates = flip_candidates(state, h, params)
    if params.flip_mode == "multi" or not candidates.any():
        return candidates
    # Single mode: the most negative q, lowest index on ties
    mask = np.zeros_like(candidates)
    mask[np.argmin(np.where(candidates, state.q, np.inf))] = True
    return mask


def step(state: DecoderState, h: ParityCheckMatrix, r, params: MpHyperParams) -> DecoderState:
    """
    One iteration of the loop.

    The check-node term is taken from the partition at the top of the
    iteration; the flip candidates are judged on that partition too, and the
    correlation term r_j d_j then uses the flipped decisions.
    """
    if state.converged:
        return state
    r = _received(r, h)

    check = _check_term(state, h, params)
    flip = _flip_mask(state, h, params)
    d = np.where(flip, -state.d, state.d)

    grad = check + r * d if params.normalize else check
    q = state.q + params.eta * grad
    if params.clamp_q:
        q = np.minimum(q, 0.0)
    if params.reset_q_on_flip:
        q = np.where(flip, 0.0, q)

    return replace(state, d=d, q=q, sat_mask=_sat_mask(d, h), iteration=state.iteration + 1)


def decode(r, h: ParityCheckMatrix, params: MpHyperParams, track: bool = False) -> DecodeOutcome:
    r = _received(r, h)
    state = initialize(r, h, params)
    trajectory = [int(state.sat_mask.sum())] if track else None

    while not state.converged and state.iteration < params.i_max:
        state = step(state, h, r, params)
        if trajectory is not None:
            trajectory.append(int(state.sat_mask.sum()))

    if state.converged:
        logger.debug("converged after %d iterations", state.iteration)
    return DecodeOutcome(
        decision=state.decision,
        iterations_used=state.iteration,
        converged=state.converged,
        trajectory=trajectory,
    )
