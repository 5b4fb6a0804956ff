"""Command-line interface: factor, bench, relations.

Exit codes: 0 success, 1 starvation/failure, 2 usage errors.  Defaults for
the shared knobs can be overridden with SSSFACTOR_* environment variables
(e.g. SSSFACTOR_SEED=7, SSSFACTOR_THREADS=4), which is handy in CI.
"""

import argparse
import csv
import dataclasses
import json
import os
import random
import statistics
import sys
import time

from .engine import (
    FactorResult,
    RunConfig,
    collect_relations,
    factor,
    prepare,
)
from .numtheory import FoundFactor, is_probable_prime

ENV_PREFIX = "SSSFACTOR_"

SCHEMA_VERSION = 1

FACTOR_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "n", "factors", "success", "stats", "config"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "n": {"type": "string"},
        "factors": {
            "type": "array",
            "items": {"type": "array", "minItems": 2, "maxItems": 2},
        },
        "residue": {"type": "string"},
        "success": {"type": "boolean"},
        "stats": {"type": "object"},
        "config": {"type": "object"},
    },
}

BENCH_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "mode", "config", "runs"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "mode": {"enum": ["factor", "relations"]},
        "config": {"type": "object"},
        "runs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "n",
                    "digits",
                    "algo",
                    "seed",
                    "rounds",
                    "candidates",
                    "relations",
                ],
                "properties": {
                    "n": {"type": "string"},
                    "digits": {"type": "integer"},
                    "algo": {"enum": ["sss", "sssf", "qs"]},
                    "seed": {"type": "integer"},
                    "wall_seconds": {"type": "number"},
                    "phase_seconds": {"type": "object"},
                    "success": {"type": "boolean"},
                    "rounds": {"type": "integer"},
                    "candidates": {"type": "integer"},
                    "relations": {
                        "type": "object",
                        "required": ["fulls", "partials", "combined"],
                    },
                },
            },
        },
    },
}


def _env(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), fallback)


def _env_int(name: str, fallback=None):
    raw = _env(name)
    return int(raw) if raw is not None else fallback


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--algo", choices=("sss", "sssf", "qs"), default=_env("algo"),
        help="relation search variant (default: sss, sssf from 75 digits)",
    )
    parser.add_argument("--m", type=int, default=_env_int("m"),
                        help="factor-base target size (default: by digit count)")
    parser.add_argument("--n", type=int, default=_env_int("n"),
                        help="small-base size (default: by digit count)")
    parser.add_argument("--k", type=int, default=_env_int("k"),
                        help="primes per subsum modulus (default: 6, sssf 7)")
    parser.add_argument("--rho", type=int, default=_env_int("rho", 10),
                        help="filter split ratio (sssf)")
    parser.add_argument("--delta", type=int, default=_env_int("delta", 5),
                        help="filter cutoff offset (sssf)")
    parser.add_argument("--threads", type=int, default=_env_int("threads", 1))
    parser.add_argument("--seed", type=int, default=_env_int("seed", 0))
    parser.add_argument("--max-rounds", type=int, default=_env_int("max_rounds"))
    parser.add_argument("--no-partials", action="store_true",
                        help="disable the large-prime variant")
    parser.add_argument("--exact-batch", action="store_true",
                        help="use the exact (repeated-squaring) batch test")


def _config_from(args) -> RunConfig:
    return RunConfig(
        algo=args.algo,
        m=args.m,
        n=args.n,
        k=args.k,
        rho=args.rho,
        delta=args.delta,
        seed=args.seed,
        threads=args.threads,
        max_rounds=args.max_rounds,
        use_partials=not args.no_partials,
        exact_batch=args.exact_batch,
    )


def _config_echo(config: RunConfig) -> dict:
    return dataclasses.asdict(config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sssfactor",
        description="Integer factorization via smooth subsum search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_factor = sub.add_parser("factor", help="factor one integer")
    p_factor.add_argument("number", type=int, help="integer to factor (decimal)")
    p_factor.add_argument("--json", action="store_true", help="JSON output")
    _add_config_flags(p_factor)
    p_factor.set_defaults(func=cmd_factor)

    p_bench = sub.add_parser(
        "bench", help="generate balanced semiprimes and time the algorithms"
    )
    p_bench.add_argument("--digits", required=True,
                         help="digit count, or comma-separated list (e.g. 30,35)")
    p_bench.add_argument("--count", type=int, default=5,
                         help="semiprimes per digit count")
    p_bench.add_argument("--algos", default="sss",
                         help="comma-separated subset of sss,sssf,qs")
    p_bench.add_argument("--timeout-seconds", type=float, default=None,
                         help="count relations found within the budget "
                              "instead of timing full factorizations")
    p_bench.add_argument("--out", default="bench_report",
                         help="output prefix; writes <out>.json and <out>.csv")
    _add_config_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_rel = sub.add_parser(
        "relations", help="dump collected relations without running phase 2"
    )
    p_rel.add_argument("number", type=int,
                       help="integer to collect relations for")
    p_rel.add_argument("--rounds", type=int, default=None,
                       help="cap on search rounds")
    p_rel.add_argument("--out", default="-",
                       help="full-relation CSV path ('-' for stdout)")
    p_rel.add_argument("--partials-out", default=None,
                       help="partial-relation CSV path")
    _add_config_flags(p_rel)
    p_rel.set_defaults(func=cmd_relations)

    return parser


def _print_factors(result: FactorResult) -> None:
    if result.factors == [(result.n, 1)]:
        print(f"{result.n} (prime)")
        return
    for p, e in result.factors:
        print(p if e == 1 else f"{p}^{e}")
    if not result.success:
        print(f"unfactored residue: {result.residue}", file=sys.stderr)


def cmd_factor(args) -> int:
    config = _config_from(args)
    if args.number < 2:
        print("n must be at least 2", file=sys.stderr)
        return 2
    result = factor(args.number, config)
    if args.json:
        payload = {
            "schema_version": SCHEMA_VERSION,
            **result.as_dict(),
            "config": _config_echo(config),
        }
        print(json.dumps(payload, indent=2))
    else:
        _print_factors(result)
    return 0 if result.success else 1


def random_prime(digits: int, rng: random.Random) -> int:
    """A random probable prime with exactly `digits` digits."""
    lo, hi = 10 ** (digits - 1), 10 ** digits
    while True:
        candidate = rng.randrange(lo, hi) | 1
        if is_probable_prime(candidate):
            return candidate


def generate_semiprime(digits: int, rng: random.Random) -> tuple[int, int, int]:
    """A d-digit product of two distinct probable primes of about equal size."""
    if digits < 2:
        raise ValueError("semiprimes need at least 2 digits")
    hi = (digits + 1) // 2
    lo = digits // 2
    while True:
        p = random_prime(hi, rng)
        q = random_prime(lo, rng)
        n = p * q
        if p != q and len(str(n)) == digits:
            return n, p, q


def _bench_factor_run(n: int, config: RunConfig) -> dict:
    t0 = time.perf_counter()
    result = factor(n, config)
    wall = time.perf_counter() - t0
    return {
        "wall_seconds": wall,
        "success": result.success,
        "rounds": result.stats.rounds,
        "candidates": result.stats.candidates,
        "phase_seconds": dict(result.stats.phase_seconds),
        "relations": {
            "fulls": result.stats.fulls,
            "partials": result.stats.partials,
            "combined": result.stats.combined,
        },
    }


def _bench_relations_run(n: int, config: RunConfig, budget: float) -> dict:
    t0 = time.perf_counter()
    fb, sb, pre, ctx = prepare(n, config)
    deadline = time.monotonic() + budget
    _, stats = collect_relations(n, config, fb, sb, pre, ctx, deadline=deadline)
    wall = time.perf_counter() - t0
    return {
        "wall_seconds": wall,
        "success": True,
        "rounds": stats.rounds,
        "candidates": stats.candidates,
        "phase_seconds": dict(stats.phase_seconds),
        "relations": {
            "fulls": stats.fulls,
            "partials": stats.partials,
            "combined": stats.combined,
        },
    }


def _summarize(runs: list[dict], mode: str) -> list[dict]:
    groups: dict[tuple[int, str], list[float]] = {}
    for record in runs:
        key = (record["digits"], record["algo"])
        if mode == "factor":
            value = record["wall_seconds"]
        else:
            rel = record["relations"]
            value = rel["fulls"] + rel["partials"]
        groups.setdefault(key, []).append(value)
    metric = "wall_seconds" if mode == "factor" else "relations_found"
    rows = []
    for (digits, algo), values in sorted(groups.items()):
        rows.append(
            {
                "digits": digits,
                "algo": algo,
                "runs": len(values),
                "metric": metric,
                "mean": statistics.fmean(values),
                "std": statistics.pstdev(values) if len(values) > 1 else 0.0,
            }
        )
    return rows


def cmd_bench(args) -> int:
    try:
        digit_list = [int(d) for d in str(args.digits).split(",") if d]
        algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    except ValueError:
        print("bad --digits value", file=sys.stderr)
        return 2
    if not digit_list or not algos:
        print("need at least one digit count and one algorithm", file=sys.stderr)
        return 2
    for a in algos:
        if a not in ("sss", "sssf", "qs"):
            print(f"unknown algorithm {a!r}", file=sys.stderr)
            return 2
    if any(d < 8 for d in digit_list):
        print("bench needs at least 8 digits (smaller inputs never reach "
              "the relation search)", file=sys.stderr)
        return 2

    base = _config_from(args)
    mode = "factor" if args.timeout_seconds is None else "relations"
    rng = random.Random(args.seed)
    runs = []
    for digits in digit_list:
        for index in range(args.count):
            n, _, _ = generate_semiprime(digits, rng)
            for algo in algos:
                config = dataclasses.replace(base, algo=algo)
                if mode == "factor":
                    record = _bench_factor_run(n, config)
                else:
                    record = _bench_relations_run(n, config, args.timeout_seconds)
                record.update(
                    {
                        "n": str(n),
                        "digits": digits,
                        "algo": algo,
                        "seed": args.seed,
                        "index": index,
                        "config": _config_echo(config),
                    }
                )
                runs.append(record)
                rel = record["relations"]
                print(
                    f"{digits}d {algo:>4} n={n} "
                    f"wall={record['wall_seconds']:.3f}s "
                    f"fulls={rel['fulls']} partials={rel['partials']} "
                    f"combined={rel['combined']}"
                )

    report = {
        "schema_version": SCHEMA_VERSION,
        "mode": mode,
        "config": _config_echo(base),
        "timeout_seconds": args.timeout_seconds,
        "runs": runs,
    }
    json_path = args.out + ".json"
    csv_path = args.out + ".csv"
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2)
    summary = _summarize(runs, mode)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["digits", "algo", "runs", "metric", "mean", "std"]
        )
        writer.writeheader()
        writer.writerows(summary)
    for row in summary:
        print(
            f"summary {row['digits']}d {row['algo']:>4} "
            f"{row['metric']}: {row['mean']:.3f} +/- {row['std']:.3f} "
            f"({row['runs']} runs)"
        )
    print(f"wrote {json_path} and {csv_path}")
    return 0


def cmd_relations(args) -> int:
    config = _config_from(args)
    if args.rounds is not None:
        config = dataclasses.replace(config, max_rounds=args.rounds)
    if args.number < 2:
        print("n must be at least 2", file=sys.stderr)
        return 2
    try:
        fb, sb, pre, ctx = prepare(args.number, config)
    except ValueError as exc:
        print(f"cannot collect relations for {args.n}: {exc}", file=sys.stderr)
        return 2
    except FoundFactor as exc:
        print(f"small prime factor found during setup: {exc.divisor}",
              file=sys.stderr)
        return 1
    try:
        store, _ = collect_relations(args.number, config, fb, sb, pre, ctx)
    except FoundFactor as exc:
        print(f"lucky divisor during collection: {exc.divisor}", file=sys.stderr)
        return 1
    dump = store.fulls_csv()
    if args.out == "-":
        sys.stdout.write(dump)
    else:
        with open(args.out, "w") as fh:
            fh.write(dump)
    if args.partials_out:
        with open(args.partials_out, "w") as fh:
            fh.write(store.partials_csv())
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
