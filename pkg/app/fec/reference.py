"""
Baseline decoders: log-domain sum-product (flooding schedule) and gradient-descent bit flipping.
"""

import logging
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.config import DEFAULT_I_MAX, GDBF_MULTI_THETA, SPA_LLR_CLIP
from app.fec.channel import to_llr
from app.fec.ldpc import DimensionError, ParityCheckMatrix, syndrome
from app.fec.mpxorsat import DecodeOutcome

logger = logging.getLogger(__name__)

# Floor for |tanh| before taking logs in the check update
_TINY = 1e-300
_ATANH_EDGE = 1.0 - 1e-15


class SpaParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    i_max: int = Field(default=DEFAULT_I_MAX, ge=1)
    llr_clip: float = Field(default=SPA_LLR_CLIP, gt=0.0)


class GdbfParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    i_max: int = Field(default=DEFAULT_I_MAX, ge=1)
    flip_mode: Literal["single", "multi"] = "single"
    theta: float = GDBF_MULTI_THETA


def _received(r, h: ParityCheckMatrix) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (h.n,):
        raise DimensionError(f"received vector has shape {r.shape}, code needs ({h.n},)")
    return r


def spa_decode(r, h: ParityCheckMatrix, sigma: float, params: SpaParams, track: bool = False) -> DecodeOutcome:
    """
    Sum-product decoding on LLRs log P(c=1)/P(c=0).

    With bit 1 sent as +1 the check rule reads
    tanh(m_c/2) = (-1)^deg * prod_{other edges} tanh(m_v/2),
    evaluated as sums of log-magnitudes plus a parity of negative signs.
    """
    r = _received(r, h)
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")

    clip = params.llr_clip
    e_rows, e_cols, starts = h.edge_rows, h.edge_cols, h.row_ptr[:-1]
    row_sign = np.where(h.row_degrees % 2 == 1, -1.0, 1.0)[e_rows]

    llr = np.clip(to_llr(r, sigma), -clip, clip)
    total = llr.copy()
    v2c = llr[e_cols]

    decision = (total > 0).astype(np.uint8)
    sat = syndrome(h, decision) == 0
    trajectory = [int(sat.sum())] if track else None
    iteration = 0

    while not sat.all() and iteration < params.i_max:
        t = np.tanh(v2c / 2.0)
        log_mag = np.log(np.maximum(np.abs(t), _TINY))
        negative = (t < 0).astype(np.int64)

        ext_log_mag = np.add.reduceat(log_mag, starts)[e_rows] - log_mag
        ext_negative = (np.add.reduceat(negative, starts)[e_rows] - negative) % 2
        product = row_sign * np.where(ext_negative == 1, -1.0, 1.0) * np.exp(ext_log_mag)

        c2v = np.clip(2.0 * np.arctanh(np.clip(product, -_ATANH_EDGE, _ATANH_EDGE)), -clip, clip)
        total = llr + np.bincount(e_cols, weights=c2v, minlength=h.n)
        v2c = np.clip(total[e_cols] - c2v, -clip, clip)

        iteration += 1
        decision = (total > 0).astype(np.uint8)
        sat = syndrome(h, decision) == 0
        if trajectory is not None:
            trajectory.append(int(sat.sum()))

    return DecodeOutcome(decision=decision, iterations_used=iteration, converged=bool(sat.all()), trajectory=trajectory)


def inversion_energy(x: np.ndarray, r: np.ndarray, h: ParityCheckMatrix) -> np.ndarray:
    """E_j = x_j r_j + sum over the clauses of j of the clause sign (+1 satisfied, -1 not)."""
    clause_sign = 1.0 - 2.0 * syndrome(h, (x > 0).astype(np.uint8))
    return x * r + h.col_sums(clause_sign)


def gdbf_decode(r, h: ParityCheckMatrix, params: GdbfParams, track: bool = False) -> DecodeOutcome:
    r = _received(r, h)
    x = np.where(r >= 0, 1.0, -1.0)
    iteration = 0
    trajectory = [] if track else None

    while True:
        sat = syndrome(h, (x > 0).astype(np.uint8)) == 0
        if trajectory is not None:
            trajectory.append(int(sat.sum()))
        if sat.all() or iteration == params.i_max:
            break

        energy = inversion_energy(x, r, h)
        flip = energy < params.theta if params.flip_mode == "multi" else np.zeros(h.n, dtype=bool)
        if not flip.any():
            # Single mode, or nothing under the threshold: flip the minimum (lowest index on ties)
            flip[np.argmin(energy)] = True
        x = np.where(flip, -x, x)
        iteration += 1

    return DecodeOutcome(
        decision=(x > 0).astype(np.uint8),
        iterations_used=iteration,
        converged=bool(sat.all()),
        trajectory=trajectory,
    )
