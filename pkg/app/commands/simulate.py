"""simulate / sweep / ablate: Monte-Carlo runs written as CSV plus a stdout summary."""

import argparse
import logging

import pandas as pd
from pydantic import ValidationError

from app.commands.common import (
    UsageError,
    code_flags,
    decoder_flags,
    decoder_spec,
    parse_decoders,
    parse_grid,
    resolve_grid,
    sim_config,
    simulation_flags,
)
from app.fec.alist import load_code
from app.fec.decoders import DecoderSpec
from app.fec.ldpc import ParityCheckMatrix
from app.sim import harness
from app.sim.harness import SWEEP_KEYS, SimConfig, SimRecord
from app.sim.report import summary_table, write_csv, write_meta, write_trajectories

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    shared = [code_flags(), decoder_flags(), simulation_flags()]

    sim = subparsers.add_parser("simulate", parents=shared, help="BER/FER curve for one or more decoders.")
    sim.add_argument("--decoder", default="mpxorsat", help="Comma list of mpxorsat, spa, gdbf.")
    sim.set_defaults(handler=run_simulate)

    sw = subparsers.add_parser("sweep", parents=shared, help="MP-XOR-SAT hyper-parameter grid.")
    sw.add_argument("--grid", action="append", metavar="NAME=V1,V2",
                    help="Values for tau, theta or eta; repeatable. tau also takes multiples of M, e.g. 0.5M.")
    sw.set_defaults(handler=run_sweep)

    # Fresh parents: the ablation defaults to random codewords
    ab_parents = [code_flags(), decoder_flags(), simulation_flags(transmit="random_codeword")]
    ab = subparsers.add_parser("ablate", parents=ab_parents, help="With/without the normalization term on matched frames.")
    ab.add_argument("--i-max-without", type=int, default=None, help="Iteration cap of the un-normalized arm.")
    ab.add_argument("--trajectories", type=int, default=0, help="Trace this many frames per arm at the first SNR.")
    ab.add_argument("--trajectory-out", default=None, help="CSV for the traces (stdout when omitted).")
    ab.set_defaults(handler=run_ablate)


def _write(args, config: SimConfig, h: ParityCheckMatrix, specs: list[DecoderSpec], records: list[SimRecord],
           extra: dict | None = None) -> None:
    if not args.out:
        return
    write_csv(records, args.out)
    write_meta(args.out, config, h, [s.active_params() for s in specs], extra)


def run_simulate(args: argparse.Namespace) -> None:
    specs = [decoder_spec(args, name) for name in parse_decoders(args.decoder)]
    configs = [sim_config(args, spec) for spec in specs]
    h = load_code(args.code)

    records = [record for config in configs for record in harness.run(config)]
    print(summary_table(records, h.rate))
    _write(args, configs[0], h, specs, records)


def run_sweep(args: argparse.Namespace) -> None:
    spec = decoder_spec(args, "mpxorsat")
    config = sim_config(args, spec)
    h = load_code(args.code)

    grid = resolve_grid(parse_grid(args.grid), h.m)
    unknown = sorted(set(grid) - set(SWEEP_KEYS))
    if unknown:
        raise UsageError(f"--grid accepts {', '.join(SWEEP_KEYS)}; got {', '.join(unknown)}")
    for key, values in grid.items():
        for value in values:
            try:
                spec.with_mp(**{key: value})
            except ValidationError as e:
                raise UsageError(f"--grid {key}={value}: {e.errors()[0]['msg']}") from None

    results = harness.sweep(config, grid)
    records = [record for _, point in results for record in point]
    print(summary_table(records, h.rate))
    _write(args, config, h, [spec], records, extra={"grid": grid})


def run_ablate(args: argparse.Namespace) -> None:
    spec = decoder_spec(args, "mpxorsat")
    config = sim_config(args, spec)
    h = load_code(args.code)
    if args.i_max_without is not None and args.i_max_without < 1:
        raise UsageError(f"--i-max-without must be at least 1, got {args.i_max_without}")

    pairs = harness.ablation_normalization(config, args.i_max_without)
    rows = []
    for with_norm, without_norm in pairs:
        a, b = with_norm.percentages(), without_norm.percentages()
        rows.append({
            "snr_db": with_norm.snr_db,
            "match%": a["match"], "match%_nonorm": b["match"],
            "valid_mismatch%": a["valid_mismatch"], "valid_mismatch%_nonorm": b["valid_mismatch"],
            "invalid%": a["invalid"], "invalid%_nonorm": b["invalid"],
            "ber": with_norm.ber, "ber_nonorm": without_norm.ber,
        })
    print(pd.DataFrame(rows).to_string(index=False, float_format=lambda v: f"{v:.4g}"))

    with_cfg, without_cfg = harness.normalization_arms(config, args.i_max_without)
    records = [record for pair in pairs for record in pair]
    _write(args, config, h, [with_cfg.decoder, without_cfg.decoder], records,
           extra={"i_max_without": args.i_max_without})

    if args.trajectories > 0:
        frames = list(range(args.trajectories))
        snr = config.snrs[0]
        traces = {
            "normalized": harness.constraint_trajectories(with_cfg, snr, frames),
            "unnormalized": harness.constraint_trajectories(without_cfg, snr, frames),
        }
        if args.trajectory_out:
            write_trajectories(traces, frames, args.trajectory_out)
        else:
            for arm, per_frame in traces.items():
                for frame, trace in zip(frames, per_frame):
                    print(f"{arm} frame={frame} satisfied=" + ",".join(str(c) for c in trace))
