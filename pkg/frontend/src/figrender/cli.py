"""Batch entry point: render every figure from a directory of tables."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import RenderError
from .manifest import build_manifest
from .render import FORMATS, render

EXIT_OK = 0
EXIT_ERROR = 2

ALL_FIGURES = tuple(range(1, 10))


def _parse_figures(text: str) -> tuple[int, ...]:
    ids = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            fid = int(piece)
        except ValueError:
            raise RenderError(f"bad figure id {piece!r}") from None
        if fid not in ALL_FIGURES:
            raise RenderError(f"figure id {fid} outside 1..9")
        if fid not in ids:
            ids.append(fid)
    if not ids:
        raise RenderError("no figure ids given")
    return tuple(ids)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render the diagnostic figures from their CSV tables.",
    )
    parser.add_argument("out_dir",
                        help="directory holding the figN_*.csv tables; images land here")
    parser.add_argument("--figures", default=None, metavar="IDS",
                        help="comma-separated figure ids (default: all nine)")
    parser.add_argument("--format", choices=FORMATS, default="png")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        table_dir = Path(args.out_dir)
        if not table_dir.is_dir():
            raise RenderError(f"{table_dir} is not a directory")
        ids = ALL_FIGURES if args.figures is None else _parse_figures(args.figures)
        for fid in ids:
            manifest = build_manifest(fid, table_dir)
            path = render(manifest, table_dir / f"fig{fid}.{args.format}", dpi=args.dpi)
            print(f"wrote {path}")
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
