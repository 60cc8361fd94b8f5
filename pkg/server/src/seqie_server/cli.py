"""Entry point: ie-server [--model stub|<checkpoint>] [--device] [--port] ...

A model that fails to load exits with a diagnostic instead of serving a
broken endpoint. Stub mode needs no model artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys

import uvicorn

from .app import create_app
from .engines import load_engine


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ie-server")
    parser.add_argument("--model", default=os.environ.get("IE_SERVER_MODEL", "stub"),
                        help="Checkpoint name/path, or 'stub' (env: IE_SERVER_MODEL).")
    parser.add_argument("--device", default=os.environ.get("IE_SERVER_DEVICE", "cpu"))
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int,
                        default=int(os.environ.get("IE_SERVER_PORT", "8000")))
    parser.add_argument("--max-batch-size", type=int, default=16)
    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    try:
        engine = load_engine(args.model, device=args.device)
    except Exception as exc:  # noqa: BLE001 - any load failure is fatal
        print(f"error: failed to load model {args.model!r}: {exc}", file=sys.stderr)
        sys.exit(1)
    app = create_app(engine, max_batch_size=args.max_batch_size)
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
