"""
Monte-Carlo BER/FER engine.

Frame k of a run always sees the noise drawn from frame_rng(seed, k). Frames
are decoded in fixed-size batches (in a process pool when workers > 1) and
the frame-error stop rule is applied in frame-index order, so a SimRecord
depends only on (config, snr) and never on the worker count.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.config import BATCH_FRAMES, DEFAULT_SEED, MAX_FRAMES, STOP_FRAME_ERRORS, WORKERS_OVERRIDE
from app.fec.alist import load_code
from app.fec.channel import NoiseSpec, frame_rng, random_codeword, sigma_from_ebn0, transmit
from app.fec.decoders import DecoderSpec, run_decoder
from app.fec.ldpc import ParityCheckMatrix, is_codeword

logger = logging.getLogger(__name__)

TransmitMode = Literal["all_zero", "random_codeword"]
SWEEP_KEYS = ("tau", "theta", "eta")

MATCH, VALID_MISMATCH, INVALID = 0, 1, 2


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    decoder: DecoderSpec = Field(default_factory=DecoderSpec)
    snrs: tuple[float, ...] = Field(min_length=1)
    frame_errors: int = Field(default=STOP_FRAME_ERRORS, ge=1)
    max_frames: int = Field(default=MAX_FRAMES, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    transmit: TransmitMode = "all_zero"
    workers: int = Field(default=1, ge=1)

    @property
    def effective_workers(self) -> int:
        return WORKERS_OVERRIDE or self.workers


@dataclass
class SimRecord:
    decoder: str
    code: str
    snr_db: float
    n: int
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    match: int = 0
    valid_mismatch: int = 0
    invalid: int = 0
    total_iterations: int = 0
    params: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.n) if self.frames else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def mean_iterations(self) -> float:
        return self.total_iterations / self.frames if self.frames else 0.0

    def percentages(self) -> dict:
        """Outcome taxonomy as percentages of decoded frames."""
        scale = 100.0 / self.frames if self.frames else 0.0
        return {
            "match": self.match * scale,
            "valid_mismatch": self.valid_mismatch * scale,
            "invalid": self.invalid * scale,
        }

    def to_row(self) -> dict:
        return {
            "decoder": self.decoder,
            "code": self.code,
            "snr_db": self.snr_db,
            "frames": self.frames,
            "bit_errors": self.bit_errors,
            "frame_errors": self.frame_errors,
            "ber": self.ber,
            "fer": self.fer,
            "mean_iterations": self.mean_iterations,
            "match": self.match,
            "valid_mismatch": self.valid_mismatch,
            "invalid": self.invalid,
            "tau": self.params.get("tau"),
            "theta": self.params.get("theta"),
            "eta": self.params.get("eta"),
            "i_max": self.params.get("i_max"),
            "seed": self.seed,
        }


@lru_cache(maxsize=8)
def _matrix(code: str) -> ParityCheckMatrix:
    return load_code(code)


def _sigma(h: ParityCheckMatrix, snr: float) -> float:
    return sigma_from_ebn0(NoiseSpec(eb_n0_db=snr, rate=h.rate))


def _draw_frame(h: ParityCheckMatrix, sigma: float, seed: int, index: int, mode: TransmitMode):
    rng = frame_rng(seed, index)
    if mode == "random_codeword":
        codeword = random_codeword(h.generator, rng)
    else:
        codeword = np.zeros(h.n, dtype=np.uint8)
    return transmit(codeword, sigma, rng)


def simulate_frame(h: ParityCheckMatrix, decoder: DecoderSpec, sigma: float, seed: int, index: int,
                   mode: TransmitMode = "all_zero") -> tuple[int, int, int]:
    """Decode one frame; returns (bit errors, outcome, iterations)."""
    frame = _draw_frame(h, sigma, seed, index, mode)
    outcome = run_decoder(decoder, frame.received, h, sigma)
    valid = is_codeword(h, outcome.decision)
    if outcome.converged and not valid:
        raise RuntimeError(f"{decoder.label} reported convergence on a non-codeword (frame {index})")

    bit_errors = int(np.count_nonzero(outcome.decision != frame.codeword))
    if bit_errors == 0:
        kind = MATCH
    elif valid:
        kind = VALID_MISMATCH
    else:
        kind = INVALID
    return bit_errors, kind, outcome.iterations_used


def _run_batch(config: SimConfig, snr: float, start: int, count: int) -> np.ndarray:
    h = _matrix(config.code)
    sigma = _sigma(h, snr)
    out = np.empty((count, 3), dtype=np.int64)
    for offset in range(count):
        out[offset] = simulate_frame(h, config.decoder, sigma, config.seed, start + offset, config.transmit)
    return out


def _batches(config: SimConfig, snr: float, pool: ProcessPoolExecutor | None):
    """Yield per-frame result blocks in frame order, one wave of batches at a time."""
    width = config.effective_workers
    start = 0
    while start < config.max_frames:
        wave = []
        for _ in range(width):
            if start >= config.max_frames:
                break
            count = min(BATCH_FRAMES, config.max_frames - start)
            wave.append((start, count))
            start += count
        starts, counts = zip(*wave)
        if pool is None:
            yield from (_run_batch(config, snr, s, c) for s, c in wave)
        else:
            yield from pool.map(_run_batch, [config] * len(wave), [snr] * len(wave), starts, counts)


def _aggregate(record: SimRecord, block: np.ndarray) -> None:
    bit_errors, kinds, iterations = block[:, 0], block[:, 1], block[:, 2]
    record.frames += len(block)
    record.bit_errors += int(bit_errors.sum())
    record.frame_errors += int(np.count_nonzero(bit_errors))
    record.match += int(np.count_nonzero(kinds == MATCH))
    record.valid_mismatch += int(np.count_nonzero(kinds == VALID_MISMATCH))
    record.invalid += int(np.count_nonzero(kinds == INVALID))
    record.total_iterations += int(iterations.sum())


def run_point(config: SimConfig, snr: float, frames: int | None = None) -> SimRecord:
    """Frames in index order until the frame-error target or the cap; `frames` fixes the count instead."""
    if frames is not None:
        config = config.model_copy(update={"max_frames": frames})
    h = _matrix(config.code)
    record = SimRecord(
        decoder=config.decoder.label,
        code=h.name,
        snr_db=float(snr),
        n=h.n,
        params=config.decoder.csv_params(h),
        seed=config.seed,
    )
    if frames is None:
        logger.info("%s on %s at %.2f dB: running until %d frame errors", record.decoder, h.name, snr, config.frame_errors)
    else:
        logger.info("%s on %s at %.2f dB: decoding %d frames", record.decoder, h.name, snr, frames)

    workers = config.effective_workers
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for block in _batches(config, snr, pool):
            if frames is None:
                errors = np.cumsum(block[:, 0] > 0) + record.frame_errors
                hit = np.flatnonzero(errors >= config.frame_errors)
                if hit.size:
                    _aggregate(record, block[: hit[0] + 1])
                    break
            _aggregate(record, block)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)

    if frames is None and record.frame_errors < config.frame_errors:
        logger.warning(
            "%s at %.2f dB stopped at the %d-frame cap with %d frame errors",
            record.decoder, snr, record.frames, record.frame_errors,
        )
    logger.info("%s at %.2f dB: %d frames, BER=%.3e FER=%.3e", record.decoder, snr, record.frames, record.ber, record.fer)
    return record


def run(config: SimConfig) -> list[SimRecord]:
    return [run_point(config, snr) for snr in config.snrs]


def sweep(config: SimConfig, grid: dict[str, Sequence[float]]) -> list[tuple[dict, list[SimRecord]]]:
    """
    Evaluate every (tau, theta, eta) combination of `grid` at each SNR.

    Missing or empty dimensions keep the configured value; rows come out in
    itertools.product order over tau, theta, eta.
    """
    if config.decoder.name != "mpxorsat":
        raise ValueError(f"sweeps vary MP-XOR-SAT parameters, got decoder {config.decoder.name!r}")
    unknown = set(grid) - set(SWEEP_KEYS)
    if unknown:
        raise ValueError(f"cannot sweep {sorted(unknown)}; choose from {', '.join(SWEEP_KEYS)}")

    axes = [(key, list(grid.get(key) or [])) for key in SWEEP_KEYS]
    axes = [(key, values) for key, values in axes if values]
    combos = [dict(zip([k for k, _ in axes], values)) for values in itertools.product(*[v for _, v in axes])]

    results = []
    for i, combo in enumerate(combos, start=1):
        logger.info("sweep point %d/%d: %s", i, len(combos), combo or "defaults")
        point = config.model_copy(update={"decoder": config.decoder.with_mp(**combo)})
        results.append((combo, run(point)))
    return results


def normalization_arms(config: SimConfig, i_max_without: int | None = None) -> tuple[SimConfig, SimConfig]:
    """The two arms of the normalization ablation; same seed, so the same frames."""
    if config.decoder.name != "mpxorsat":
        raise ValueError(f"the normalization ablation needs the mpxorsat decoder, got {config.decoder.name!r}")
    with_norm = config.model_copy(update={"decoder": config.decoder.with_mp(normalize=True)})
    changes = {"normalize": False}
    if i_max_without is not None:
        changes["i_max"] = i_max_without
    without_norm = config.model_copy(update={"decoder": config.decoder.with_mp(**changes)})
    return with_norm, without_norm


def ablation_normalization(config: SimConfig, i_max_without: int | None = None) -> list[tuple[SimRecord, SimRecord]]:
    """
    Paired (with, without) runs of the r_j d_j q_j term on identical frames.

    The stop rule runs on the normalized arm; the other arm then decodes
    exactly that many frames, so both percentages share one denominator.
    """
    with_norm, without_norm = normalization_arms(config, i_max_without)
    pairs = []
    for snr in config.snrs:
        first = run_point(with_norm, snr)
        pairs.append((first, run_point(without_norm, snr, frames=first.frames)))
    return pairs


def constraint_trajectories(config: SimConfig, snr: float, frames: Sequence[int]) -> list[list[int]]:
    """Satisfied-clause count per iteration (index 0 = initialization) for the given frame indices."""
    h = _matrix(config.code)
    sigma = _sigma(h, snr)
    traces = []
    for index in frames:
        frame = _draw_frame(h, sigma, config.seed, index, config.transmit)
        traces.append(run_decoder(config.decoder, frame.received, h, sigma, track=True).trajectory)
    return traces
