"""Command-line entry point: ``aligned-smm <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import codec, partition, security, serialization, simulator
from .codec import Partition, SchemeParams
from .errors import AlignedSMMError, PreconditionError
from .ffield import DEFAULT_PRIME_Q, FieldMatrix, FieldPrime, mat_mul


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected a rational like 1/2, got {text!r}") from exc


def _index_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _threads() -> int:
    return max(1, int(os.environ.get(partition.THREADS_ENV, "1") or 1))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _describe(res: partition.OptimizationResult) -> str:
    flag = "" if res.feasible else "  (infeasible: Q > N)"
    return (f"{res.method:>10}: r_A={res.r_A} r_B={res.r_B} Q={res.Q} "
            f"R={res.rate} ~ {float(res.rate):.6f}{flag}")


def cmd_optimize_rate(args) -> int:
    results = []
    if args.method in ("exhaustive", "both"):
        results.append(partition.exhaustive_rate_opt(args.n, args.ell))
    if args.method in ("theorem1", "both"):
        results.append(partition.theorem1_estimate(args.n, args.ell))
    gap = None
    if args.method == "both":
        gap = results[0].rate.as_fraction() - results[1].rate.as_fraction()
    if args.json:
        payload = {"results": [r.to_dict() for r in results]}
        if gap is not None:
            payload["additive_gap"] = f"{gap.numerator}/{gap.denominator}"
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        lines = [_describe(r) for r in results]
        if gap is not None:
            lines.append(f"additive gap: {gap.numerator}/{gap.denominator} ~ {float(gap):.3g}")
        _emit("\n".join(lines), args.out)
    return 0


def cmd_optimize_threshold(args) -> int:
    results = []
    if args.method in ("exhaustive", "both"):
        results.append(partition.exhaustive_threshold_opt(args.n, args.ell, args.rth))
    if args.method in ("theorem2", "both"):
        results.append(partition.theorem2_estimate(args.n, args.ell, args.rth))
    if args.json:
        _emit(json.dumps({"R_th": str(args.rth), "results": [r.to_dict() for r in results]},
                         indent=2), args.out)
    else:
        _emit("\n".join(_describe(r) for r in results), args.out)
    return 0


def _params(args) -> SchemeParams:
    return SchemeParams(args.n, args.ell, FieldPrime(args.q))


def cmd_roundtrip(args) -> int:
    A = serialization.read_matrix(args.a)
    B = serialization.read_matrix(args.b)
    if A.prime != B.prime:
        raise PreconditionError("A and B are over different fields")
    if args.q is not None and args.q != A.prime.q:
        raise PreconditionError(f"--q {args.q} does not match the input files (q={A.prime.q})")
    args.q = A.prime.q
    params = _params(args)
    part = Partition(args.ra, args.rb)
    shares = codec.encode(A, B, part, params, args.seed, pad=args.pad)
    dropped = set(args.drop)
    bad = [i for i in dropped if not 1 <= i <= params.N]
    if bad:
        raise PreconditionError(f"--drop indices {bad} outside [1, {params.N}]")
    answers = []
    for share in shares:
        # every share and answer goes through the wire format
        wire = serialization.share_to_bytes(share)
        if args.shares_dir:
            Path(args.shares_dir).mkdir(parents=True, exist_ok=True)
            (Path(args.shares_dir) / f"share_{share.server_index}.bin").write_bytes(wire)
        if share.server_index in dropped:
            continue
        ans = codec.server_compute(serialization.share_from_bytes(wire, params))
        answers.append(serialization.answer_from_bytes(serialization.answer_to_bytes(ans), params))
    product = codec.decode(answers, part, params, A.rows, B.cols)
    _emit(serialization.format_matrix(product), args.out)
    if product == mat_mul(A, B):
        print("VERIFIED", file=sys.stderr if not args.out else sys.stdout)
        return 0
    print("MISMATCH", file=sys.stderr if not args.out else sys.stdout)
    return 1


def cmd_sweep_rate(args) -> int:
    rows = partition.rate_sweep(args.n, workers=_threads())
    recs = partition.rate_records(rows)
    if args.json:
        _emit(partition.to_json(recs, N=args.n), args.out)
    else:
        _emit(partition.to_csv(recs, partition.RATE_COLUMNS), args.out)
    return 0


def cmd_sweep_gap(args) -> int:
    sweep = partition.gap_sweep(args.n, workers=_threads())
    recs = partition.gap_records(sweep)
    if args.json:
        _emit(partition.to_json(recs, **partition.gap_summary(sweep)), args.out)
    else:
        _emit(partition.to_csv(recs, partition.GAP_COLUMNS), args.out)
        summary = partition.gap_summary(sweep)
        print(f"max gap {summary['max_gap']} ~ {summary['max_gap_decimal']}, "
              f"suboptimal {summary['suboptimal_count']}", file=sys.stderr)
    return 0


def cmd_security_check(args) -> int:
    report = security.masking_matrix_check(_params(args), args.ra, args.rb, args.mode,
                                           args.count, args.seed)
    _emit(report.to_json(), args.out)
    return 0 if report.all_invertible else 1


def _straggler_from_args(args) -> simulator.StragglerConfig:
    if args.config:
        return simulator.StragglerConfig.from_file(args.config)
    return simulator.StragglerConfig(
        model=args.model, slow_set=tuple(args.slow), slow_delay=args.slow_delay,
        mean=args.mean, seed=args.seed, delays=tuple(args.delays))


def cmd_simulate(args) -> int:
    strag = _straggler_from_args(args)
    if args.a and args.b:
        A = serialization.read_matrix(args.a)
        B = serialization.read_matrix(args.b)
        args.q = A.prime.q
    else:
        A = FieldMatrix.random(args.m or args.ra, args.k, args.q, args.seed)
        B = FieldMatrix.random(args.k, args.p or args.rb, args.q, args.seed + 1)
    report = simulator.run_simulation(A, B, Partition(args.ra, args.rb), _params(args), strag,
                                      seed=args.seed, workers=_threads(), pad=args.pad)
    _emit(report.to_json(), args.out)
    return 0 if report.decoded_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aligned-smm",
        description="Two-sided secure distributed matrix multiplication with aligned secret sharing.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, ell=True):
        p.add_argument("--n", type=int, required=True, help="number of servers N")
        if ell:
            p.add_argument("--ell", type=int, required=True, help="collusion level")
        p.add_argument("--out", help="write the result here instead of stdout")
        p.add_argument("--json", action="store_true", help="JSON instead of text/CSV")

    p = sub.add_parser("optimize-rate", help="maximize the rate r_A r_B / Q")
    common(p)
    p.add_argument("--method", choices=("exhaustive", "theorem1", "both"), default="exhaustive")
    p.set_defaults(func=cmd_optimize_rate)

    p = sub.add_parser("optimize-threshold", help="minimize Q subject to a rate floor")
    common(p)
    p.add_argument("--rth", type=_rational, required=True, help="rate threshold, e.g. 1/2")
    p.add_argument("--method", choices=("exhaustive", "theorem2", "both"), default="exhaustive")
    p.set_defaults(func=cmd_optimize_threshold)

    def scheme(p):
        p.add_argument("--ra", type=int, default=1)
        p.add_argument("--rb", type=int, default=1)
        p.add_argument("--q", type=int, default=None, help=f"field prime (default {DEFAULT_PRIME_Q})")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--pad", action="store_true", help="zero-pad inputs to block multiples")

    p = sub.add_parser("roundtrip", help="encode, compute, drop servers, decode, verify")
    common(p)
    scheme(p)
    p.add_argument("--a", required=True, help="matrix file for A")
    p.add_argument("--b", required=True, help="matrix file for B")
    p.add_argument("--drop", type=_index_list, default=[], help="servers that never answer")
    p.add_argument("--shares-dir", help="also write every share frame here")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("sweep-rate", help="rate per collusion level (CSV)")
    common(p, ell=False)
    p.set_defaults(func=cmd_sweep_rate)

    p = sub.add_parser("sweep-gap", help="optimum vs closed-form estimate per collusion level (CSV)")
    common(p, ell=False)
    p.set_defaults(func=cmd_sweep_gap)

    p = sub.add_parser("security-check", help="masking-matrix invertibility over l-subsets")
    common(p)
    scheme(p)
    p.add_argument("--mode", choices=("all", "all_subsets", "sampled"), default="all")
    p.add_argument("--count", type=int, default=None)
    p.set_defaults(func=cmd_security_check)

    p = sub.add_parser("simulate", help="straggler simulation, JSON report")
    common(p)
    scheme(p)
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=2, help="inner dimension for random inputs")
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--config", help="key=value straggler config file")
    p.add_argument("--model", choices=simulator.MODELS, default="none")
    p.add_argument("--slow", type=_index_list, default=[])
    p.add_argument("--slow-delay", type=float, default=float("inf"))
    p.add_argument("--mean", type=float, default=1.0)
    p.add_argument("--delays", type=_float_list, default=[])
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "q", None) is None and args.command != "roundtrip":
        args.q = DEFAULT_PRIME_Q
    try:
        return args.func(args)
    except AlignedSMMError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
