"""Command-line front end.

    wfa test     --input profiles.csv [--method ...]   hypothesis test on CSV curves
    wfa dist     --p P --q Q --lambda L --op cdf --at X  evaluate the kappa law
    wfa simulate --reps 2000 --seed 7                   null simulation + adequacy
    wfa dwt      --input curve.csv --wavelet d4          dump a decomposition

Every subcommand writes one JSON document (stdout unless ``--output``).
Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from typing import Sequence

import numpy as np

from . import __version__
from .dist import KappaDist
from .dwt import WAVELETS, dwt_forward, dwt_inverse, flatten
from .errors import InputError, NumericalError
from .kappa import DF_MODES, METHODS, TestConfig, run_test
from .mc import SimSpec, null_adequacy, simulate_null
from .profiles import PAD_MODES, RHO_POLICIES, is_power_of_two, load_profiles, next_power_of_two, pad_curves
from .rng import DEFAULT_SEED

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
DIST_OPS = ("pdf", "cdf", "quantile", "moments")


# --------------------------------------------------------------------------- JSON

def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    # keep integral floats recognisably floating point
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits.

    Non-finite floats become ``null``.  NumPy scalars and arrays are accepted.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, np.generic):
        obj = obj.item()
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.generic)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wfa-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(doc: dict, output: str | None) -> None:
    text = to_json(doc) + "\n"
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(output, text)


# ---------------------------------------------------------------------- commands

def _config(args) -> TestConfig:
    return TestConfig(wavelet=args.wavelet, l_t=args.levels, method=args.method,
                      alpha=args.alpha, df_mode=args.df_mode, rho_policy=args.rho)


def cmd_test(args) -> int:
    cfg = _config(args)
    ps = load_profiles(args.input, pad_mode=args.pad)
    report = run_test(ps, cfg)
    doc = report.to_dict()
    doc["treatments"] = list(ps.labels)
    doc["replicates"] = list(ps.replicate_counts)
    doc["n"] = ps.length
    _emit(doc, args.output)
    return EXIT_OK


def cmd_dist(args) -> int:
    d = KappaDist(args.p, args.q, args.lam)
    doc = {"p": d.p, "q": d.q, "lambda": d.lam, "op": args.op}
    if args.op == "moments":
        m = d.moments()
        doc.update({"mean": m.mean, "variance": m.variance,
                    "law_mean": m.law_mean, "law_variance": m.law_variance,
                    "coefficient_second_moment": m.mu_coeff,
                    "coefficient_fourth_moment": m.fourth})
    else:
        if not args.at:
            raise InputError(f"--at is required for --op {args.op}")
        at = np.array(args.at, dtype=float)
        if not np.all(np.isfinite(at)):
            raise InputError("--at values must be finite")
        if args.op == "pdf":
            values = d.pdf(at)
        elif args.op == "cdf":
            values = d.cdf(at)
        else:
            if not np.all((at > 0) & (at < 1)):
                raise InputError("quantile levels must lie in (0, 1)")
            values = d.ppf(at)
        doc.update({"at": at.tolist(), "values": np.atleast_1d(values).tolist()})
    _emit(doc, args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    methods = args.method or ["exact", "binom-chisq"]
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}")
    spec = SimSpec(T=args.treatments, r=args.replicates, n=args.length, wavelet=args.wavelet,
                   l_t=args.levels, reps=args.reps, seed=args.seed, rho_policy=args.rho)
    result = simulate_null(spec, workers=args.workers)
    reports = {m: null_adequacy(result, m, args.df_mode).to_dict() for m in methods}
    doc = {
        "spec": {"T": spec.T, "r": spec.r, "n": spec.n, "wavelet": spec.wavelet,
                 "l_t": spec.config().levels(spec.n), "reps": spec.reps, "seed": spec.seed,
                 "rho_policy": spec.rho_policy},
        "lambda": result.lam,
        "slots": {"p": result.p_slots, "q": result.q_slots},
        "method": methods[0],
        **reports[methods[0]],
        "reports": reports,
    }
    if args.samples_out:
        write_atomic(args.samples_out, "".join(f"{_format_float(float(k))}\n" for k in result.kappa))
    _emit(doc, args.output)
    return EXIT_OK


def _read_curve(path: str) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if rows and rows[0] and rows[0][0].strip() == "treatment":
        rows = [r[2:] for r in rows[1:]]
    elif rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]  # header row
    if len(rows) != 1:
        raise InputError(f"expected a single curve row, found {len(rows)}")
    try:
        curve = np.array([float(c) for c in rows[0]])
    except ValueError as exc:
        raise InputError(f"non-numeric cell ({exc})") from None
    if curve.size == 0 or not np.all(np.isfinite(curve)):
        raise InputError("curve must be non-empty and finite")
    return curve


def cmd_dwt(args) -> int:
    y = _read_curve(args.input)
    padded_from = None
    if not is_power_of_two(y.size) or y.size < 2:
        if args.pad == "none":
            raise InputError(f"length not a power of two: n={y.size} (use --pad)")
        padded_from = y.size
        y = pad_curves(y, max(2, next_power_of_two(y.size)), args.pad)
    d = dwt_forward(y, args.wavelet, args.j0)
    err = None
    if args.roundtrip:
        err = float(np.max(np.abs(dwt_inverse(d) - y)))
    doc = {
        "wavelet": d.wavelet,
        "n": d.n,
        "J": d.J,
        "j0": d.j0,
        "padded_from": padded_from,
        "details": [{"level": j, "coefficients": d.details[j].tolist()} for j in d.levels()],
        "scaling": {"level": d.j0, "coefficients": d.scaling.tolist()},
        "flat": flatten(d).tolist(),
        "roundtrip_max_error": err,
    }
    _emit(doc, args.output)
    return EXIT_OK


# ------------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wfa", description="Wavelet thresholding test for curves.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--output", help="output path (default: stdout)")

    shape = _Parser(add_help=False)
    shape.add_argument("--wavelet", choices=WAVELETS, default="haar")
    shape.add_argument("--levels", type=int, default=None, metavar="L_T",
                       help="number of finest levels to threshold (default: all)")
    shape.add_argument("--df-mode", choices=DF_MODES, default="fractional")
    shape.add_argument("--rho", choices=RHO_POLICIES, default="zero")

    p = sub.add_parser("test", parents=[common, shape], help="run the test on a profile CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=METHODS, default="binom-chisq")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--pad", choices=PAD_MODES, default="reflect")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("dist", parents=[common], help="evaluate the kappa law")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--op", choices=DIST_OPS, required=True)
    p.add_argument("--at", type=float, nargs="+")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("simulate", parents=[common, shape], help="null simulation and adequacy report")
    p.add_argument("--treatments", type=int, default=3)
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--length", type=int, default=256)
    p.add_argument("--reps", type=_positive_int, default=2000)
    p.add_argument("--seed", type=_positive_int, default=DEFAULT_SEED)
    p.add_argument("--method", choices=METHODS, action="append",
                   help="law(s) to compare against; repeatable (default: exact and binom-chisq)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--samples-out", help="CSV file receiving one simulated kappa per line")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dwt", parents=[common], help="decompose a single curve")
    p.add_argument("--input", required=True)
    p.add_argument("--wavelet", choices=WAVELETS, default="haar")
    p.add_argument("--j0", type=int, default=0)
    p.add_argument("--pad", choices=PAD_MODES, default="none")
    p.add_argument("--roundtrip", action="store_true", help="also report the reconstruction error")
    p.set_defaults(func=cmd_dwt)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (NumericalError, ArithmeticError) as exc:
        print(f"wfa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError, OSError) as exc:
        print(f"wfa: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
