"""Script entry point: fwm-figures --spec <name> --in <dir> --out <dir>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURES, FigureError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="fwm-figures",
        description="Render sweep CSV outputs as figures")
    ap.add_argument("--spec", required=True,
                    help=f"figure name, one of: {', '.join(sorted(FIGURES))}")
    ap.add_argument("--in", dest="in_dir", required=True,
                    help="directory holding the sweep CSV files")
    ap.add_argument("--out", dest="out_dir", required=True,
                    help="directory to write the image into")
    args = ap.parse_args(argv)
    try:
        path = render(args.spec, Path(args.in_dir), Path(args.out_dir))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
