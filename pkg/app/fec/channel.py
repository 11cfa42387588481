"""
BPSK over AWGN.

Bit c maps to the symbol 2c - 1 and the receiver sees r = symbols + sigma * g.
Every frame draws from its own Philox stream keyed by (seed, frame index), so
frame k is the same no matter which worker evaluates it or in what order.
"""

import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.special import erfc

from app.fec.ldpc import encode


class NoiseSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    eb_n0_db: float
    rate: float = Field(gt=0.0, le=1.0)

    @field_validator("eb_n0_db")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"Eb/N0 must be finite, got {v}")
        return v


@dataclass(frozen=True)
class ChannelFrame:
    codeword: np.ndarray
    symbols: np.ndarray
    received: np.ndarray
    sigma: float


def sigma_from_ebn0(spec: NoiseSpec) -> float:
    """Noise standard deviation for unit-energy BPSK at the given Eb/N0 and code rate."""
    return math.sqrt(1.0 / (2.0 * spec.rate * 10.0 ** (spec.eb_n0_db / 10.0)))


def uncoded_ber(eb_n0_db: float, rate: float = 1.0) -> float:
    """Hard-decision BPSK bit error rate Q(sqrt(2 R Eb/N0)), the no-decoder reference."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    return float(0.5 * erfc(math.sqrt(rate * 10.0 ** (eb_n0_db / 10.0))))


def bpsk(codeword) -> np.ndarray:
    return 2.0 * np.asarray(codeword, dtype=np.float64) - 1.0


def transmit(codeword, sigma: float, rng: np.random.Generator) -> ChannelFrame:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    c = np.asarray(codeword, dtype=np.uint8)
    symbols = bpsk(c)
    received = symbols + sigma * rng.standard_normal(c.size)
    return ChannelFrame(codeword=c, symbols=symbols, received=received, sigma=float(sigma))


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Independent counter-based stream for one frame of one simulation."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, frame_index])))


def random_codeword(generator: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    message = rng.integers(0, 2, size=generator.shape[0])
    return encode(message, generator)


def to_llr(received: np.ndarray, sigma: float) -> np.ndarray:
    """Channel LLR log P(c=1|r)/P(c=0|r) for BPSK with bit 1 sent as +1."""
    return 2.0 * np.asarray(received, dtype=np.float64) / sigma**2
