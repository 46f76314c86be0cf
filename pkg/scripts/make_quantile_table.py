#!/usr/bin/env python3
"""Regenerate the critical-value table of the standardized similarity
estimator over the full published grid (plus the normal limit row)."""

import argparse

from simcorr.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--output", default=None,
                        help="write the table here instead of stdout")
    parser.add_argument("--format", choices=["text", "csv"], default="text")
    args = parser.parse_args()
    argv = ["quantiles", "--format", args.format]
    if args.output:
        argv += ["-o", args.output]
    raise SystemExit(cli_main(argv))


if __name__ == "__main__":
    main()
