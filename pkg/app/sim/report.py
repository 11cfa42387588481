import json
import logging
import math
from pathlib import Path
from typing import Iterable, Sequence

import pandas as pd

from app.fec.alist import provenance
from app.fec.channel import uncoded_ber
from app.fec.ldpc import ParityCheckMatrix
from app.sim.harness import SimConfig, SimRecord

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "decoder", "code", "snr_db", "frames", "bit_errors", "frame_errors", "ber", "fer", "mean_iterations",
    "match", "valid_mismatch", "invalid", "tau", "theta", "eta", "i_max", "seed",
]
FLOAT_FORMAT = "%.6g"


def records_frame(records: Iterable[SimRecord]) -> pd.DataFrame:
    df = pd.DataFrame([r.to_row() for r in records], columns=CSV_COLUMNS)
    # Integer columns stay integers even with empty parameter cells next to them
    df["i_max"] = df["i_max"].astype("Int64")
    return df


def write_csv(records: Sequence[SimRecord], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_frame(records).to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    logger.info("Wrote %d rows to %s", len(records), path)
    return path


def write_meta(csv_path, config: SimConfig, h: ParityCheckMatrix, decoders: Sequence[dict], extra: dict | None = None) -> Path:
    """Sidecar <csv>.meta.json; no timestamps so identical runs give identical bytes."""
    meta = {
        "code": {**provenance(h), "N": h.n, "M": h.m, "k": h.k, "rate": h.rate},
        "seed": config.seed,
        "stop_rule": {"frame_errors": config.frame_errors, "max_frames": config.max_frames},
        "transmit": config.transmit,
        "snr_db": list(config.snrs),
        "decoders": list(decoders),
    }
    if extra:
        meta.update(extra)
    path = Path(f"{csv_path}.meta.json")
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def summary_table(records: Sequence[SimRecord], rate: float) -> str:
    """Human-readable table for stdout, with the uncoded BPSK BER alongside."""
    rows = []
    for r in records:
        rows.append({
            "decoder": r.decoder,
            "snr_db": r.snr_db,
            "frames": r.frames,
            "frame_errors": r.frame_errors,
            "ber": r.ber,
            "fer": r.fer,
            "uncoded_ber": uncoded_ber(r.snr_db, rate),
            "mean_iter": r.mean_iterations,
            "match%": r.percentages()["match"],
        })
    return pd.DataFrame(rows).to_string(index=False, float_format=lambda v: f"{v:.4g}")


def snr_at_ber(records: Sequence[SimRecord], target: float) -> float | None:
    """
    Eb/N0 where BER crosses `target`, interpolating log10(BER) linearly
    between the two bracketing points. None when no pair brackets it.
    """
    if not target > 0:
        raise ValueError(f"target BER must be positive, got {target}")
    points = sorted((r.snr_db, r.ber) for r in records)
    for (s0, b0), (s1, b1) in zip(points, points[1:]):
        if b0 <= 0 or b1 <= 0:
            continue
        if b0 >= target >= b1 and b0 != b1:
            frac = (math.log10(b0) - math.log10(target)) / (math.log10(b0) - math.log10(b1))
            return s0 + frac * (s1 - s0)
        if b0 == target:
            return s0
    if points and points[-1][1] == target:
        return points[-1][0]
    return None


def write_trajectories(traces: dict[str, list[list[int]]], frames: Sequence[int], path) -> Path:
    """Long-format CSV: arm, frame, iteration, satisfied."""
    rows = [
        {"arm": arm, "frame": frame, "iteration": it, "satisfied": count}
        for arm, per_frame in traces.items()
        for frame, trace in zip(frames, per_frame)
        for it, count in enumerate(trace)
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=["arm", "frame", "iteration", "satisfied"]).to_csv(path, index=False, lineterminator="\n")
    return path
