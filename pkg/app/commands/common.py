"""Flag groups and argument helpers shared by the subcommands."""

import argparse
import logging

from pydantic import ValidationError

from app.config import DEFAULT_ETA, DEFAULT_I_MAX, DEFAULT_Q_MIN, DEFAULT_SEED, DEFAULT_THETA, GDBF_MULTI_THETA
from app.config import MAX_FRAMES, SPA_LLR_CLIP, STOP_FRAME_ERRORS
from app.fec.decoders import DECODER_NAMES, DecoderSpec
from app.fec.mpxorsat import MpHyperParams
from app.fec.reference import GdbfParams, SpaParams
from app.sim.harness import SimConfig

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad command-line input; the CLI exits with status 1."""


def parse_floats(text: str | list[str], flag: str) -> tuple[float, ...]:
    """Numbers from one comma list or from several tokens, each of which may itself be a comma list."""
    if not isinstance(text, str):
        text = ",".join(text)
    try:
        values = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if not values:
        raise UsageError(f"{flag} is empty")
    return values


def parse_decoders(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = [n for n in names if n not in DECODER_NAMES]
    if unknown or not names:
        raise UsageError(f"--decoder takes a comma list of {', '.join(DECODER_NAMES)}, got {text!r}")
    return names


def parse_grid(items: list[str] | None) -> dict[str, list[str]]:
    """`--grid tau=6,12` entries as raw tokens; a tau token may be a multiple of M such as `0.5M`."""
    grid: dict[str, list[str]] = {}
    for item in items or []:
        key, sep, values = item.partition("=")
        key = key.strip()
        tokens = [t.strip() for t in values.split(",") if t.strip()]
        if not sep or not key or not tokens:
            raise UsageError(f"malformed --grid {item!r}; expected name=v1,v2,...")
        if key in grid:
            raise UsageError(f"--grid {key} given twice")
        grid[key] = tokens
    return grid


def resolve_grid(grid: dict[str, list[str]], m: int) -> dict[str, list[float]]:
    resolved = {}
    for key, tokens in grid.items():
        values = []
        for token in tokens:
            try:
                if key == "tau" and token.upper().endswith("M"):
                    factor = token[:-1].strip()
                    values.append((float(factor) if factor else 1.0) * m)
                else:
                    values.append(float(token))
            except ValueError:
                raise UsageError(f"--grid {key}: {token!r} is not a number") from None
        resolved[key] = values
    return resolved


def code_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--code", required=True, help="Builtin code (majority, ham74, reg32) or alist path.")
    return parent


def decoder_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    mp = parent.add_argument_group("MP-XOR-SAT")
    mp.add_argument("--tau", type=float, default=None, help="MP margin (default: number of clauses M).")
    mp.add_argument("--theta", type=float, default=DEFAULT_THETA, help="Flip threshold (default %(default)s).")
    mp.add_argument("--eta", type=float, default=DEFAULT_ETA, help="Learning rate (default %(default)s).")
    mp.add_argument("--q-min", type=float, default=DEFAULT_Q_MIN, help="Sentinel log(eps) (default %(default)s).")
    mp.add_argument("--flip-mode", choices=("multi", "single"), default="multi")
    mp.add_argument("--flip-gate", choices=("majority", "none"), default="majority",
                    help="majority: only bits with more unsatisfied than satisfied clauses may flip.")
    mp.add_argument("--gradient", choices=("mp", "mp_unscaled", "mp_padded", "exact"), default="mp")
    mp.add_argument("--no-clamp", action="store_true", help="Do not project q onto q <= 0.")
    mp.add_argument("--reset-q", action="store_true", help="Reset q to 0 for flipped bits.")
    mp.add_argument("--no-normalize", action="store_true", help="Drop the r_j d_j q_j correlation term.")
    mp.add_argument("--llr-input", action="store_true", help="Feed 2r/sigma^2 instead of raw r.")

    ref = parent.add_argument_group("reference decoders")
    ref.add_argument("--llr-clip", type=float, default=SPA_LLR_CLIP, help="SPA message clip (default %(default)s).")
    ref.add_argument("--gdbf-mode", choices=("single", "multi"), default="single")
    ref.add_argument("--gdbf-theta", type=float, default=GDBF_MULTI_THETA, help="GDBF multi-flip threshold.")

    parent.add_argument("--i-max", type=int, default=DEFAULT_I_MAX,
                        help="Iteration cap, shared by every decoder (default %(default)s).")
    return parent


def simulation_flags(transmit: str = "all_zero") -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    # argparse reads a bare "-2,0" token as a flag; --snr=-2,0 and --snr -2 0 both work
    parent.add_argument("--snr", required=True, nargs="+", action="extend", metavar="DB",
                        help="Eb/N0 values in dB, comma or space separated.")
    parent.add_argument("--stop-errors", type=int, default=STOP_FRAME_ERRORS, help="Frame errors per point (default %(default)s).")
    parent.add_argument("--max-frames", type=int, default=MAX_FRAMES, help="Frame cap per point (default %(default)s).")
    parent.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parent.add_argument("--workers", type=int, default=1, help="Worker processes; MP_LDPC_THREADS overrides.")
    parent.add_argument("--transmit", choices=("all_zero", "random_codeword"), default=transmit,
                        help="Transmitted words (default %(default)s).")
    parent.add_argument("--out", default=None, help="CSV output path (a .meta.json sidecar is written next to it).")
    return parent


def decoder_spec(args: argparse.Namespace, name: str) -> DecoderSpec:
    try:
        return DecoderSpec(
            name=name,
            mp=MpHyperParams(
                tau=args.tau,
                theta=args.theta,
                eta=args.eta,
                i_max=args.i_max,
                q_min=args.q_min,
                flip_mode=args.flip_mode,
                flip_gate=args.flip_gate,
                clamp_q=not args.no_clamp,
                reset_q_on_flip=args.reset_q,
                gradient=args.gradient,
                normalize=not args.no_normalize,
                llr_input=args.llr_input,
            ),
            spa=SpaParams(i_max=args.i_max, llr_clip=args.llr_clip),
            gdbf=GdbfParams(i_max=args.i_max, flip_mode=args.gdbf_mode, theta=args.gdbf_theta),
        )
    except ValidationError as e:
        raise UsageError(_first_error(e)) from None


def sim_config(args: argparse.Namespace, decoder: DecoderSpec) -> SimConfig:
    try:
        return SimConfig(
            code=args.code,
            decoder=decoder,
            snrs=parse_floats(args.snr, "--snr"),
            frame_errors=args.stop_errors,
            max_frames=args.max_frames,
            seed=args.seed,
            transmit=args.transmit,
            workers=args.workers,
        )
    except ValidationError as e:
        raise UsageError(_first_error(e)) from None


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(p) for p in err["loc"]) or "parameters"
    return f"invalid {where}: {err['msg']}"
