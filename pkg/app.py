# File: app.py

"""
Friendship mobility toolkit.

    python app.py ingest --checkins checkins.txt --edges edges.txt --out-dir runs/demo
    python app.py analyze --snapshot runs/demo/snapshot.parquet --out-dir runs/demo
    python app.py build-models --snapshot runs/demo/snapshot.parquet --user 42 --out-dir runs/demo
    python app.py gen --models runs/demo/models.json --out-dir runs/demo
    python app.py gen --model rwp --out-dir runs/demo
    python app.py simulate --compare runs/demo/traces_fmm.trc runs/demo/traces_rwp.trc --out-dir runs/demo
"""

import argparse
import logging
import sys
from typing import List, Optional

import src.config as config
from src.commands import COMMANDS, run_command
from src.utils.errors import IO_EXIT_CODE, FmmError

logger = logging.getLogger("fmm")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmm",
        description="Checkin analytics, friendship-based mobility traces and MANET congestion runs.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, module in COMMANDS.items():
        sub = subparsers.add_parser(name, help=(module.__doc__ or "").strip().splitlines()[0])
        sub.add_argument("--out-dir", default=config.DEFAULT_SAVE_PATH, help="Directory for all outputs")
        sub.add_argument("--seed", type=int, help=f"Master seed (default {config.DEFAULT_SEED})")
        sub.add_argument("--config", help="key = value settings file; flags override it")
        sub.add_argument("--plot", action="store_true", help="Also write PNG figures")
        module.configure(sub)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        run_command(args.command, args)
    except FmmError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return IO_EXIT_CODE
    return 0


if __name__ == "__main__":
    sys.exit(main())
