"""figures --in <csv> --fig <id> --out <png/svg path>"""

import argparse
import sys

from .figures import FIGURES, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render paper-style figures from fdmac scenario CSV files.",
    )
    parser.add_argument("--in", dest="csv_path", required=True, help="input CSV")
    parser.add_argument("--fig", dest="figure", required=True, choices=sorted(FIGURES))
    parser.add_argument("--out", dest="out_path", required=True, help="output image path")
    args = parser.parse_args(argv)
    spec = FigureSpec(csv_path=args.csv_path, figure=args.figure, out_path=args.out_path)
    try:
        render(spec)
    except SchemaError as exc:
        parser.exit(2, f"figures: {exc}\n")
    except FileNotFoundError as exc:
        parser.exit(2, f"figures: {exc}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
