import argparse
import sys
from pathlib import Path

import numpy as np

from app.commands.common import UsageError, code_flags, decoder_flags, decoder_spec
from app.fec.alist import load_code
from app.fec.channel import NoiseSpec, sigma_from_ebn0
from app.fec.decoders import DECODER_NAMES, run_decoder


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "decode",
        parents=[code_flags(), decoder_flags()],
        help="Decode one received frame of N reals.",
    )
    parser.add_argument("--input", default="-", help="File of N whitespace-separated reals, or - for stdin.")
    parser.add_argument("--decoder", choices=DECODER_NAMES, default="mpxorsat")
    parser.add_argument("--sigma", type=float, default=None, help="Channel noise std for SPA / --llr-input.")
    parser.add_argument("--snr", type=float, default=None, help="Eb/N0 in dB; sets sigma from the code rate.")
    parser.add_argument("--trace", action="store_true", help="Also print satisfied clauses per iteration.")
    parser.set_defaults(handler=run)


def _read_received(source: str) -> np.ndarray:
    text = sys.stdin.read() if source == "-" else Path(source).read_text()
    try:
        return np.array([float(tok) for tok in text.split()], dtype=np.float64)
    except ValueError:
        raise UsageError("input must be whitespace-separated real numbers") from None


def run(args: argparse.Namespace) -> None:
    spec = decoder_spec(args, args.decoder)
    h = load_code(args.code)
    r = _read_received(args.input)
    if r.size != h.n:
        raise UsageError(f"{h.name} needs {h.n} received values, got {r.size}")

    if args.sigma is not None:
        if not args.sigma > 0:
            raise UsageError(f"--sigma must be positive, got {args.sigma}")
        sigma = args.sigma
    elif args.snr is not None:
        sigma = sigma_from_ebn0(NoiseSpec(eb_n0_db=args.snr, rate=h.rate))
    else:
        sigma = 1.0

    outcome = run_decoder(spec, r, h, sigma, track=args.trace)
    bits = "".join(str(b) for b in outcome.decision)
    print(f"u={bits} converged={int(outcome.converged)} iters={outcome.iterations_used}")
    if args.trace:
        print("trajectory=" + ",".join(str(c) for c in outcome.trajectory))
