import argparse

from app.commands.common import UsageError
from app.config import BUILTIN_CODES
from app.fec.alist import load_alist, load_code, resolve_alist, save_alist
from app.fec.ldpc import ParityCheckMatrix, builtin_matrix, describe


def register(subparsers) -> None:
    parser = subparsers.add_parser("codes", help="List builtin codes or validate and summarize an alist file.")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--alist", default=None, help="Alist file to validate and summarize; bare names are looked up in the codes directory.")
    source.add_argument("--code", default=None, help="Builtin name or alist path to summarize.")
    parser.add_argument("--save", default=None, help="Write the selected code as an alist file.")
    parser.set_defaults(handler=run)


def summary_line(h: ParityCheckMatrix) -> str:
    info = describe(h)
    return f"N={info['N']} M={info['M']} rank={info['rank']} rowdeg={info['rowdeg']} coldeg={info['coldeg']}"


def run(args: argparse.Namespace) -> None:
    if args.alist is None and args.code is None:
        if args.save:
            raise UsageError("--save needs --alist or --code")
        for name in BUILTIN_CODES:
            print(f"{name} {summary_line(builtin_matrix(name))}")
        return

    h = load_alist(resolve_alist(args.alist)) if args.alist is not None else load_code(args.code)
    print(summary_line(h))
    if args.save:
        save_alist(h, args.save)
