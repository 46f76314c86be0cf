"""Command-line front end.

Subcommands:

* ``estimate``  -- similarity estimate of a CSV panel, optional benchmarks
* ``ci``        -- confidence interval for the correlation
* ``quantiles`` -- critical-value table of the standardized estimator
* ``simulate``  -- seeded Monte-Carlo sampling study
* ``garch``     -- two-step fit of the robust correlation GARCH

Structured results are emitted as JSON documents with floats at 17
significant digits; tabular side outputs (histograms, filtered paths) are
CSV. Outputs carry a content digest of the input and the seed actually
used, and contain no timestamps, so a fixed invocation is byte-stable.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import math
import os
import sys
import tempfile

import numpy as np
from scipy.stats import norm

from . import __version__
from .benchmarks import greiner_map, kendall_tau, quadrant_correlation, sample_correlation
from .distributions import finite_sample_quantile
from .errors import (
    DataError,
    DegenerateObservationError,
    DomainError,
    EstimationError,
    NumericalError,
    SimcorrError,
)
from .garch import FitConfig, fit_two_step
from .inference import correlation_ci, standardize, zero_correlation_test
from .similarity import (
    as_sample,
    equicorr_phi_inverse,
    gamma_hat,
    gamma_hat_bias_corrected,
    inverse_fisher,
)
from .simulation import (
    STUDY_ESTIMATORS,
    EllipticalFamily,
    SeededRng,
    build_equicorrelation,
    mc_sampling_study,
)
from .special import omega_n

# Published critical-value grid: T rows and probability columns
TABLE_T_GRID = tuple(range(1, 26)) + (30, 35, 40, 45, 50, 55, 60, 70, 80, 90, 100)
TABLE_P_GRID = (0.90, 0.95, 0.96, 0.97, 0.975, 0.98, 0.985, 0.99,
                0.995, 0.9975, 0.9995)


# ---------------------------------------------------------------------------
# deterministic JSON with 17-significant-digit floats


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(float(x), ".17g")


def _dump_json(obj, out: list, indent: int) -> None:
    pad = " " * indent
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (key, val) in enumerate(items):
            out.append(pad + "  ")
            _dump_json(str(key), out, indent + 2)
            out.append(": ")
            _dump_json(val, out, indent + 2)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, val in enumerate(seq):
            out.append(pad + "  ")
            _dump_json(val, out, indent + 2)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_document(doc: dict) -> str:
    out: list[str] = []
    _dump_json(doc, out, 0)
    out.append("\n")
    return "".join(out)


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(doc: dict, output: str | None) -> None:
    text = dumps_document(doc)
    if output:
        _write_atomic(output, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# CSV panel ingestion


def read_panel(path: str, delimiter: str = ","):
    """Parse a rectangular numeric CSV; first row may be a header.

    Returns (values, digest, column_names). Parse failures name the
    1-based file row and column.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as err:
        raise DataError(f"cannot read {path}: {err}") from None
    digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    text = raw.decode("utf-8")
    rows = [line for line in text.splitlines() if line.strip() != ""]
    if not rows:
        raise DataError(f"{path} is empty")

    first = [cell.strip() for cell in rows[0].split(delimiter)]
    names = None
    start = 0

    def _is_number(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    if not all(_is_number(c) for c in first):
        names = first
        start = 1
        if len(rows) == 1:
            raise DataError(f"{path} contains a header but no data rows")

    width = len(rows[start].split(delimiter))
    data = np.empty((len(rows) - start, width))
    for i, line in enumerate(rows[start:], start=start):
        cells = [cell.strip() for cell in line.split(delimiter)]
        if len(cells) != width:
            raise DataError(
                f"row {i + 1}: expected {width} cells, found {len(cells)}")
        for j, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"parse error at row {i + 1}, column {j + 1}: {cell!r}") from None
            if not math.isfinite(value):
                raise DataError(
                    f"non-finite value at row {i + 1}, column {j + 1}")
            data[i - start, j] = value
    if names is not None and len(names) != width:
        raise DataError("header width does not match data width")
    return data, digest, names


def _document(command: str, digest: str | None, seed: int | None,
              parameters: dict) -> dict:
    return {
        "command": command,
        "tool-version": __version__,
        "inputs-digest": digest,
        "seed": seed,
        "parameters": parameters,
        "estimates": None,
        "intervals": None,
        "paths": None,
        "diagnostics": {},
    }


# ---------------------------------------------------------------------------
# subcommands


def _parse_standardize(spec: str):
    if spec == "none":
        return None
    if spec == "sample":
        return ("sample-stdev", None)
    if spec.startswith("scales="):
        try:
            scales = [float(v) for v in spec[len("scales="):].split(",")]
        except ValueError:
            raise DomainError(f"bad scales specification {spec!r}") from None
        return ("external-scales", scales)
    raise DomainError(f"--standardize must be none, sample or scales=..., got {spec!r}")


def cmd_estimate(args) -> int:
    values, digest, names = read_panel(args.file, args.delimiter)
    doc = _document("estimate", digest, None, {
        "file": args.file,
        "demean": args.demean,
        "standardize": args.standardize,
        "bias_correct": args.bias_correct,
        "benchmarks": args.benchmarks,
    })
    if args.demean:
        values = values - values.mean(axis=0)
    sample = as_sample(values)
    std = _parse_standardize(args.standardize)
    if std is not None:
        method, scales = std
        sample = standardize(sample, method=method, scales=scales)

    est = gamma_hat_bias_corrected(sample) if args.bias_correct else gamma_hat(sample)
    n = est.n
    if n == 2:
        rho_point = inverse_fisher(est.gamma_hat)
    else:
        g = est.gamma_hat if est.bias_corrected else est.gamma_hat + omega_n(n)
        rho_point = equicorr_phi_inverse(g, n)
    estimates = {
        "gamma_hat": est.gamma_hat,
        "bias_corrected": est.bias_corrected,
        "T": est.T,
        "n": est.n,
        "correlation_point": rho_point,
    }
    if args.benchmarks:
        if n != 2:
            raise DataError("benchmark estimators need a 2-column panel")
        tau = kendall_tau(sample)
        estimates["benchmarks"] = {
            "sample": sample_correlation(sample),
            "fisher-sample": float(np.arctanh(np.clip(
                sample_correlation(sample), -1.0 + 1e-15, 1.0 - 1e-15))),
            "kendall": tau,
            "kendall-greiner": greiner_map(tau),
            "quadrant": quadrant_correlation(sample),
        }
    doc["estimates"] = estimates
    if names:
        doc["diagnostics"]["columns"] = names
    _emit(doc, args.output)
    return 0


def cmd_ci(args) -> int:
    values, digest, names = read_panel(args.file, args.delimiter)
    doc = _document("ci", digest, None, {
        "file": args.file,
        "level": args.level,
        "law": args.law,
        "target": args.target,
    })
    sample = as_sample(values)
    ci = correlation_ci(sample, level=args.level, law=args.law, target=args.target)
    test = zero_correlation_test(sample)
    doc["estimates"] = {
        "gamma_hat": ci.gamma_hat,
        "T": ci.T,
        "n": ci.n,
    }
    doc["intervals"] = {
        "target": ci.target,
        "level": ci.level,
        "law": ci.law,
        "lower": ci.lower,
        "upper": ci.upper,
        "fisher_lower": ci.fisher_lower,
        "fisher_upper": ci.fisher_upper,
        "caveats": list(ci.caveats),
    }
    doc["diagnostics"]["zero_correlation_p_value"] = test.p_value
    if names:
        doc["diagnostics"]["columns"] = names
    _emit(doc, args.output)
    return 0


def _parse_grid(text: str, cast):
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            out.append(cast(token))
        except ValueError:
            raise DomainError(f"bad grid value {token!r}") from None
    if not out:
        raise DomainError("empty grid")
    return out


def cmd_quantiles(args) -> int:
    T_grid = (list(TABLE_T_GRID) if args.T_list == "default"
              else _parse_grid(args.T_list, int))
    p_grid = (list(TABLE_P_GRID) if args.p_list == "default"
              else _parse_grid(args.p_list, float))
    for T in T_grid:
        if T < 1:
            raise DomainError(f"T must be >= 1, got {T}")
    for p in p_grid:
        if not (0.0 < p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {p}")

    rows = []
    for T in T_grid:
        rows.append([finite_sample_quantile(p, T) for p in p_grid])
    normal_row = [float(norm.ppf(p)) for p in p_grid]

    buf = io.StringIO()
    if args.format == "csv":
        buf.write("T," + ",".join(format(p, "g") for p in p_grid) + "\n")
        for T, row in zip(T_grid, rows):
            buf.write(str(T) + "," + ",".join(f"{q:.4f}" for q in row) + "\n")
        buf.write("normal," + ",".join(f"{q:.4f}" for q in normal_row) + "\n")
    else:
        head = ["T".rjust(7)] + [format(p, "g").rjust(8) for p in p_grid]
        buf.write(" ".join(head) + "\n")
        for T, row in zip(T_grid, rows):
            buf.write(" ".join([str(T).rjust(7)] + [f"{q:.4f}".rjust(8) for q in row]) + "\n")
        buf.write(" ".join(["N(0,1)".rjust(7)] + [f"{q:.4f}".rjust(8) for q in normal_row]) + "\n")
    if args.output:
        _write_atomic(args.output, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def _summary_dict(s) -> dict:
    out = {
        "mean": s.mean,
        "variance": s.variance,
        "quantiles": {format(p, "g"): q for p, q in s.quantiles.items()},
    }
    if s.standardized_mean is not None:
        out["standardized_mean"] = s.standardized_mean
        out["standardized_quantiles"] = {
            format(p, "g"): q for p, q in s.standardized_quantiles.items()}
    return out


def cmd_simulate(args) -> int:
    if args.family == "student-t" and not args.nu > 0:
        raise DomainError("--nu must be positive for student-t")
    scatter = build_equicorrelation(1.0, args.rho, args.n)
    family = EllipticalFamily(kind=args.family, scatter=scatter,
                              nu=args.nu if args.family == "student-t" else None)
    estimators = tuple(e.strip() for e in args.estimators.split(",") if e.strip())
    rng = SeededRng(args.seed)
    study = mc_sampling_study(family, args.T, args.reps,
                              estimators=estimators, rng=rng)
    doc = _document("simulate", None, args.seed, {
        "family": args.family,
        "nu": args.nu if args.family == "student-t" else None,
        "rho": args.rho,
        "n": args.n,
        "T": args.T,
        "reps": args.reps,
        "estimators": list(estimators),
        "rng_algorithm": study.rng_algorithm,
    })
    doc["estimates"] = {
        "center": study.center,
        "summaries": {name: _summary_dict(s) for name, s in study.estimators.items()},
    }
    doc["diagnostics"]["redraws"] = study.redraws
    _emit(doc, args.output)
    if args.output:
        hist_path = os.path.splitext(args.output)[0] + ".hist.csv"
        buf = io.StringIO()
        buf.write("estimator,bin_left,bin_right,count,density\n")
        for name, s in study.estimators.items():
            total = float(s.bin_counts.sum())
            for i in range(len(s.bin_counts)):
                left = s.bin_edges[i]
                right = s.bin_edges[i + 1]
                count = int(s.bin_counts[i])
                width = right - left
                density = count / (total * width) if width > 0 else 0.0
                buf.write(f"{name},{_format_float(left)},{_format_float(right)},"
                          f"{count},{_format_float(density)}\n")
        _write_atomic(hist_path, buf.getvalue())
    return 0


def cmd_garch(args) -> int:
    values, digest, names = read_panel(args.file, args.delimiter)
    doc = _document("garch", digest, None, {
        "file": args.file,
        "mode": args.mode,
        "emit_paths": args.emit_paths,
    })
    if args.mode == "bivariate" and values.shape[1] != 2:
        raise DataError(
            f"bivariate mode needs a 2-column panel, got {values.shape[1]} columns")
    config = FitConfig(mode=args.mode)
    try:
        fit = fit_two_step(values, config)
    except EstimationError as err:
        doc["diagnostics"]["error"] = str(err)
        doc["diagnostics"]["best_so_far"] = (
            list(np.asarray(err.best, dtype=float)) if err.best is not None else None)
        _emit(doc, args.output)
        raise

    doc["estimates"] = {
        "mu": list(fit.paths.mu),
        "egarch": [
            {"alpha": p.alpha, "beta": p.beta, "kappa": p.kappa, "eta": p.eta}
            for p in fit.egarch
        ],
        "egarch_se": ([None if se is None else list(se) for se in fit.egarch_se]
                      if fit.egarch_se is not None else None),
        "correlation": {
            "alpha": fit.corr.alpha,
            "beta": fit.corr.beta,
            "kappa": fit.corr.kappa,
            "mode": fit.corr.mode,
            "n": fit.corr.n,
        },
        "correlation_se": list(fit.corr_se) if fit.corr_se is not None else None,
        "loglik_volatility": list(fit.loglik_volatility),
        "loglik_correlation": fit.loglik_correlation,
        "loglik_total": fit.loglik_total,
    }
    doc["diagnostics"].update(fit.diagnostics)
    if names:
        doc["diagnostics"]["columns"] = names

    # invariant spot-check before anything is written
    rho = fit.paths.rho
    lo = -1.0 / (fit.corr.n - 1) if args.mode == "deco" else -1.0
    if not (np.all(rho > lo) and np.all(rho < 1.0)):
        raise NumericalError("filtered correlation left its open interval",
                             diagnostics={"min": float(rho.min()),
                                          "max": float(rho.max())})

    if args.emit_paths:
        if not args.output:
            raise DomainError("--emit-paths requires --output")
        path_csv = os.path.splitext(args.output)[0] + ".paths.csv"
        buf = io.StringIO()
        n = values.shape[1]
        buf.write("t," + ",".join(f"h_{i + 1}" for i in range(n)) + ",phi,rho\n")
        for t in range(values.shape[0]):
            hrow = ",".join(_format_float(fit.paths.h[t, i]) for i in range(n))
            buf.write(f"{t + 1},{hrow},{_format_float(fit.paths.phi[t])},"
                      f"{_format_float(fit.paths.rho[t])}\n")
        _write_atomic(path_csv, buf.getvalue())
        doc["paths"] = {"file": path_csv, "rows": int(values.shape[0])}
    _emit(doc, args.output)
    return 0


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simcorr",
        description="Robust similarity-based correlation estimation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("estimate", help="similarity estimate of a CSV panel")
    p.add_argument("file")
    p.add_argument("--demean", action="store_true")
    p.add_argument("--standardize", default="none",
                   help="none | sample | scales=a,b,...")
    p.add_argument("--bias-correct", dest="bias_correct", action="store_true")
    p.add_argument("--benchmarks", action="store_true")
    p.add_argument("--delimiter", default=",")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("ci", help="confidence interval for the correlation")
    p.add_argument("file")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--law", choices=["exact", "asymptotic", "auto"], default="auto")
    p.add_argument("--target", choices=["rho", "xi"], default="rho")
    p.add_argument("--delimiter", default=",")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("quantiles", help="critical values of the standardized estimator")
    p.add_argument("--T-list", dest="T_list", default="default",
                   help="comma list of sample sizes, or 'default' for the full grid")
    p.add_argument("--p-list", dest="p_list", default="default",
                   help="comma list of probabilities, or 'default'")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_quantiles)

    p = sub.add_parser("simulate", help="Monte-Carlo sampling study")
    p.add_argument("--family", choices=["gaussian", "student-t", "cauchy"],
                   required=True)
    p.add_argument("--nu", type=float, default=5.0)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimators", default="gamma,fisher-sample",
                   help="comma list from: " + ",".join(STUDY_ESTIMATORS))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("garch", help="fit the robust correlation GARCH")
    p.add_argument("file")
    p.add_argument("--mode", choices=["bivariate", "deco"], required=True)
    p.add_argument("--emit-paths", dest="emit_paths", action="store_true")
    p.add_argument("--delimiter", default=",")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_garch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, DegenerateObservationError, DomainError) as err:
        print(f"simcorr: data error: {err}", file=sys.stderr)
        return 3
    except (NumericalError, EstimationError) as err:
        print(f"simcorr: numerical failure: {err}", file=sys.stderr)
        return 4
    except SimcorrError as err:
        print(f"simcorr: error: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
