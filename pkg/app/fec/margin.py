"""Margin Propagation: the offset zeta with sum_i [y_i - zeta]_+ = tau, solved by reverse water-filling."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MpResult:
    zeta: float
    scores: np.ndarray
    support: np.ndarray


def mp(y, tau: float) -> MpResult:
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size == 0:
        raise ValueError("margin propagation needs at least one score")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not np.isfinite(y).all():
        raise ValueError("scores must be finite")

    u = np.sort(y)[::-1]
    cssv = np.cumsum(u) - tau
    ind = np.arange(1, y.size + 1)
    # Prefix k is admissible while the k-th largest value stays above its zeta_k
    admissible = np.flatnonzero(u - cssv / ind > 0)
    rho = admissible[-1] + 1
    zeta = float(cssv[rho - 1] / rho)

    excess = np.maximum(y - zeta, 0.0)
    return MpResult(zeta=zeta, scores=excess / tau, support=np.flatnonzero(excess > 0))


def mp_scores(y, tau: float) -> np.ndarray:
    return mp(y, tau).scores
