#!/usr/bin/env python3
"""Empirical coverage of the exact confidence intervals across elliptical
families, correlation levels and sample sizes.

For each cell the standardized estimator is replicated on seeded draws and
compared against the exact critical value; the resulting coverage table is
written as CSV. Nominal coverage should be reproduced within Monte-Carlo
error for every family, including the Cauchy.
"""

import argparse
import math

import numpy as np

from simcorr.distributions import finite_sample_quantile
from simcorr.similarity import fisher
from simcorr.simulation import (
    EllipticalFamily,
    SeededRng,
    build_equicorrelation,
    sample_elliptical,
)

FAMILIES = (("gaussian", None), ("student-t", 5.0), ("cauchy", None))


def coverage_cell(kind, nu, rho, T, reps, level, seed):
    fam = EllipticalFamily(kind=kind, nu=nu,
                           scatter=build_equicorrelation(1.0, rho, 2))
    x = sample_elliptical(fam, T * reps, SeededRng(seed)).reshape(reps, T, 2)
    s = x[..., 0] + x[..., 1]
    d = x[..., 0] - x[..., 1]
    gam = np.log(np.abs(s) / np.abs(d)).mean(axis=-1)
    z = math.sqrt(T) * (gam - fisher(rho)) / (math.pi / 2.0)
    q = finite_sample_quantile((1.0 + level) / 2.0, T)
    return float(np.mean(np.abs(z) <= q))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("-o", "--output", default="coverage.csv")
    args = parser.parse_args()

    lines = ["family,rho,T,level,coverage"]
    seed = args.seed
    for kind, nu in FAMILIES:
        for rho in (0.0, 0.5, 0.9):
            for T in (8, 40, 78):
                seed += 1
                for level in (0.90, 0.95):
                    cov = coverage_cell(kind, nu, rho, T, args.reps, level, seed)
                    lines.append(f"{kind},{rho},{T},{level},{cov:.4f}")
                    print(lines[-1])
    with open(args.output, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
