"""Command-line front end.

Results go to stdout as JSON (byte-identical for identical flags).  Each run
also emits one manifest line on stderr with the config echo, versions and
wall time; ``--manifest PATH`` writes it to a file instead.

Exit codes: 0 success, 1 usage error, 2 documented infeasibility (stdout then
carries ``{"error": {"reason": ...}}``).
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .cleanup import lemma2_sum
from .dickman import rho
from .errors import UnitFracError
from .pipeline import PipelineConfig, decompose, min_ratio_bruteforce, tightness_check, verify
from .primes import default_sieve_limit, psi, psi_prime
from .rational import format_rational, parse_rational
from .smooth import count_representations, lemma4_details, read_instance

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which is reserved here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: str
    config: dict
    versions: dict = field(default_factory=dict)
    wall_time: float = 0.0
    result_path: str | None = None
    exit_code: int = 0


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _terms(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"terms must be comma-separated integers, got {text!r}") from None


def _n_range(text: str) -> range:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("range must look like LO:HI")
    return range(int(lo), int(hi) + 1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="unitfrac", description=__doc__.splitlines()[0])
    p.add_argument("--manifest", help="write the run manifest here instead of stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("decompose", help="write r as distinct unit fractions with denominators >= N")
    d.add_argument("--r", type=_rational, required=True, help='"a/b" or an integer')
    target = d.add_mutually_exclusive_group(required=True)
    target.add_argument("--N", type=int)
    target.add_argument("--N-range", type=_n_range, help="batch over LO:HI inclusive")
    d.add_argument("--epsilon", type=float, default=1 / 6)
    d.add_argument("--delta", type=float, default=0.5)
    d.add_argument("--max-ratio", type=float, default=64.0)
    d.add_argument("--time-limit", type=float, default=8.0, help="seconds per decomposition")
    d.add_argument("--format", choices=("json", "text"), default="json")
    d.add_argument("--detail", action="store_true", help="include cleanup trace and tail data")
    d.add_argument("--jobs", type=int, default=1, help="worker processes for --N-range")

    v = sub.add_parser("verify", help="re-check a representation")
    v.add_argument("--r", type=_rational, required=True)
    v.add_argument("--N", type=int, required=True)
    v.add_argument("--terms", type=_terms, required=True, help="comma-separated denominators")
    v.add_argument("--slack", type=float, default=2.0)

    c = sub.add_parser("count", help="exact count of subsets of an instance with a given reciprocal sum")
    c.add_argument("--instance", required=True, help='file: header "M hi y", then one member per line')
    c.add_argument("--target", type=_rational, required=True)
    c.add_argument(
        "--method", choices=("exact-convolution", "brute-force", "float-exponential"), default="exact-convolution"
    )

    s = sub.add_parser("psi", help="count integers <= x whose prime-power factors are all <= y")
    s.add_argument("--x", type=int, required=True)
    s.add_argument("--y", type=int, required=True)

    r = sub.add_parser("rho", help="Dickman's function")
    r.add_argument("--u", type=float, required=True)

    l2 = sub.add_parser("lemma2", help="reciprocal mass of (N, cN] carried by large prime powers")
    l2.add_argument("--N", type=int, required=True)
    l2.add_argument("--c", type=float, default=2.0)
    l2.add_argument("--threshold", type=int, help="default N / log N")

    l4 = sub.add_parser("lemma4", help="short-interval dichotomy for a frequency h")
    l4.add_argument("--M", type=int, required=True)
    l4.add_argument("--h", type=float, required=True)
    l4.add_argument("--epsilon", type=float, default=0.1)
    l4.add_argument("--kappa", type=float, default=0.25)

    m = sub.add_parser("min-ratio", help="exhaustive minimum of x_k/x_1 inside [N, x_max]")
    m.add_argument("--r", type=_rational, required=True)
    m.add_argument("--N", type=int, required=True)
    m.add_argument("--x-max", type=int, required=True)
    return p


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        epsilon=args.epsilon, delta=args.delta, max_ratio=args.max_ratio, time_limit=args.time_limit
    )


def _decompose_one(r: Fraction, N: int, config: PipelineConfig, detail: bool) -> dict:
    try:
        return decompose(r, N, config).to_dict(detail)
    except UnitFracError as exc:
        return {"N": N, "r": format_rational(r), "error": exc.to_dict()}


def cmd_decompose(args) -> tuple[object, int]:
    if args.r <= 0:
        raise UsageError("r must be positive")
    config = _config(args)
    if args.N is not None:
        if args.N < 2:
            raise UsageError("N must be at least 2")
        d = decompose(args.r, args.N, config)
        return (d.to_text() if args.format == "text" else d.to_dict(args.detail)), EXIT_OK
    if args.N_range.start < 2 or len(args.N_range) == 0:
        raise UsageError("N range must be non-empty with LO >= 2")
    jobs = [(args.r, N, config, args.detail) for N in args.N_range]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_decompose_one, *zip(*jobs)))
    else:
        rows = [_decompose_one(*j) for j in jobs]
    code = EXIT_OK if all("error" not in row for row in rows) else EXIT_INFEASIBLE
    if args.format == "text":
        lines = []
        for row in rows:
            if "error" in row:
                lines.append(f"N={row['N']}: {row['error']['reason']}")
            else:
                lines.append(f"{row['r']} = " + " + ".join(f"1/{x}" for x in row["terms"]))
        return "\n".join(lines), code
    return rows, code


def cmd_verify(args):
    report = verify(terms=args.terms, r=args.r, N=args.N)
    if args.terms and args.slack >= 1:
        report["tightness"] = tightness_check(terms=args.terms, slack=args.slack)
    return report, EXIT_OK


def cmd_count(args):
    si = read_instance(args.instance)
    res = count_representations(si, args.target, method=args.method)
    return {"instance": {"M": si.M, "hi": si.hi, "y": si.y, "l": si.l}, "target": format_rational(args.target), **res.to_dict()}, EXIT_OK


def cmd_psi(args):
    if args.x < 1 or args.y < 2:
        raise UsageError("need x >= 1 and y >= 2")
    count = psi_prime(args.x, args.y)
    u = math.log(args.x) / math.log(args.y)
    estimate = args.x * rho(u)
    return {
        "x": args.x,
        "y": args.y,
        "psi_prime": count,
        "psi": psi(args.x, args.y),
        "u": u,
        "debruijn_estimate": estimate,
        "ratio": count / estimate,
    }, EXIT_OK


def cmd_rho(args):
    if args.u < 0:
        raise UsageError("u must be non-negative")
    return {"u": args.u, "rho": rho(args.u)}, EXIT_OK


def cmd_lemma2(args):
    if args.N < 3 or args.c <= 1:
        raise UsageError("need N >= 3 and c > 1")
    threshold = args.threshold if args.threshold is not None else math.floor(args.N / math.log(args.N))
    exact, main = lemma2_sum(args.N, args.c, threshold)
    return {
        "N": args.N,
        "c": args.c,
        "threshold": threshold,
        "exact": float(exact),
        "main_term": main,
        "relative_error": abs(float(exact) / main - 1.0) if main else None,
    }, EXIT_OK


def cmd_lemma4(args):
    if not 0 < args.epsilon < 0.125:
        raise UsageError("epsilon must lie in (0, 1/8)")
    if args.M < 3:
        raise UsageError("M must be at least 3")
    out = lemma4_details(args.M, args.h, args.epsilon, kappa=args.kappa)
    out["P"] = str(out["P"])
    return out, EXIT_OK


def cmd_min_ratio(args):
    if args.r <= 0:
        raise UsageError("r must be positive")
    if args.x_max < args.N:
        raise UsageError("x-max must be at least N")
    ratio, witness = min_ratio_bruteforce(args.r, args.N, args.x_max)
    return {
        "r": format_rational(args.r),
        "N": args.N,
        "x_max": args.x_max,
        "ratio": format_rational(ratio),
        "ratio_float": float(ratio),
        "witness": witness,
        "above_e": float(ratio) > math.e,
    }, EXIT_OK


COMMANDS = {
    "decompose": cmd_decompose,
    "verify": cmd_verify,
    "count": cmd_count,
    "psi": cmd_psi,
    "rho": cmd_rho,
    "lemma2": cmd_lemma2,
    "lemma4": cmd_lemma4,
    "min-ratio": cmd_min_ratio,
}


def _echo(args) -> dict:
    out = {}
    for key, val in sorted(vars(args).items()):
        if isinstance(val, Fraction):
            val = format_rational(val)
        elif isinstance(val, range):
            val = f"{val.start}:{val.stop - 1}"
        out[key] = val
    out["sieve_limit"] = default_sieve_limit()
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    manifest = RunManifest(
        command=args.command,
        config=_echo(args),
        versions={"unitfrac": __version__, "python": platform.python_version(), "numpy": np.__version__},
        result_path="<stdout>",
    )
    try:
        result, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"unitfrac {args.command}: {exc}", file=sys.stderr)
        result, code = None, EXIT_USAGE
    except UnitFracError as exc:
        print(f"unitfrac {args.command}: {exc}", file=sys.stderr)
        result, code = {"error": exc.to_dict()}, EXIT_INFEASIBLE
    except ValueError as exc:
        # input validation inside the library (bad N, bad ranges, malformed files)
        print(f"unitfrac {args.command}: {exc}", file=sys.stderr)
        result, code = None, EXIT_USAGE
    if result is not None:
        if isinstance(result, str):
            print(result)
        else:
            print(json.dumps(result, separators=(",", ":")))
    manifest.wall_time = time.perf_counter() - started
    manifest.exit_code = code
    line = json.dumps({"manifest": asdict(manifest)}, default=str)
    if args.manifest:
        with open(args.manifest, "w") as fh:
            fh.write(line + "\n")
    else:
        print(line, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
