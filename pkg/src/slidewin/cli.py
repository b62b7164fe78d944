"""Command-line harness: ``gen`` writes streams, ``run`` benchmarks one
algorithm, ``compare`` merges several runs over a shared stream.

Exit codes: 0 success, 2 configuration error, 3 error-bound violation
when --assert-bound is active.  SLIDEWIN_SEED overrides --seed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bench import ConfigError, RunConfig, compare, run, write_csv
from .streams import StreamConfig, gen_synthetic, save_stream


def _parse_gen_spec(spec: str) -> dict:
    out = {}
    for item in spec.split(","):
        if not item:
            continue
        key, _, val = item.partition("=")
        if not val:
            raise ConfigError(f"bad --gen entry {item!r}, expected key=value")
        out[key] = val
    return out


def _parse_regimes(text: str):
    regimes = []
    for part in text.split(";"):
        start, _, scale = part.partition(":")
        try:
            regimes.append((int(start), float(scale)))
        except ValueError as exc:
            raise ConfigError(f"bad regime entry {part!r}, expected start:scale") from exc
    return tuple(regimes)


def _stream_config(args, seed: int) -> StreamConfig:
    spec = _parse_gen_spec(args.gen)
    try:
        return StreamConfig(
            m_x=int(spec.pop("mx")),
            m_y=int(spec.pop("my")),
            n=int(spec.pop("n")),
            N=int(spec.pop("N")),
            R=float(spec.pop("R")),
            seed=seed,
            arrival=spec.pop("arrival", "unit"),
            lam=float(spec.pop("lam", 2.0)),
            regime_schedule=_parse_regimes(spec.pop("regimes")) if "regimes" in spec else None,
        )
    except KeyError as exc:
        raise ConfigError(f"--gen spec is missing {exc.args[0]}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad --gen spec: {exc}") from exc


def _effective_seed(args) -> int:
    env = os.environ.get("SLIDEWIN_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"SLIDEWIN_SEED must be an integer, got {env!r}") from exc
    return args.seed


def _add_stream_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--gen", help="synthetic stream spec, e.g. mx=40,my=60,n=5000,N=1000,R=64")
    src.add_argument("--in", dest="infile", help="existing cpsv1 stream file")
    p.add_argument("--seed", type=int, default=0)


def _add_run_args(p: argparse.ArgumentParser, size_required: bool = True) -> None:
    size = p.add_mutually_exclusive_group(required=size_required)
    size.add_argument("--eps", type=float, help="target correlation error (ell = ceil(1/eps))")
    size.add_argument("--ell", type=int, help="sketch size in columns")
    p.add_argument("--N", type=int, help="window size (defaults to the stream's)")
    p.add_argument("--R", type=float, help="norm-product bound override (file streams)")
    p.add_argument("--mode", choices=["sequence", "time"], default="sequence")
    p.add_argument("--query-every", type=int, help="sampling cadence (default 1000, or 200 for short streams)")
    p.add_argument("--out", help="metrics CSV path")
    p.add_argument("--no-timing", action="store_true",
                   help="write update_time_us as 0 for byte-reproducible output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slidewin")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic stream to a cpsv1 file")
    g.add_argument("--gen", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="benchmark one algorithm over a stream")
    r.add_argument("--algorithm", required=True, choices=["hds", "ads", "cod", "naive"])
    _add_stream_args(r)
    _add_run_args(r)
    r.add_argument("--assert-bound", nargs="?", const="auto", default=None,
                   help="fail (exit 3) if max corr_err exceeds the bound "
                        "(default 8*eps)")

    c = sub.add_parser("compare", help="run several algorithms on one stream")
    c.add_argument("--algorithms", required=True,
                   help="comma-separated subset of hds,ads,cod,naive")
    c.add_argument("--ells", help="comma-separated sketch-size sweep")
    _add_stream_args(c)
    _add_run_args(c, size_required=False)
    return parser


def _run_config(args, seed, algorithm, ell=None, eps=None) -> RunConfig:
    stream = _stream_config(args, seed) if args.gen else None
    return RunConfig(
        algorithm=algorithm,
        stream=stream,
        stream_path=args.infile,
        ell=ell,
        eps=eps,
        N=args.N,
        R=args.R,
        mode=args.mode,
        query_every=args.query_every,
        seed=seed,
        timing=not args.no_timing,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            seed = _effective_seed(args)
            cfg = _stream_config(args, seed)
            save_stream(args.out, gen_synthetic(cfg), cfg.m_x, cfg.m_y, cfg.n)
            print(f"wrote {cfg.n} pairs to {args.out}")
            return 0

        if args.command == "run":
            seed = _effective_seed(args)
            cfg = _run_config(args, seed, args.algorithm, ell=args.ell, eps=args.eps)
            rows = run(cfg)
            if args.out:
                write_csv(args.out, rows)
                print(f"wrote {len(rows)} rows to {args.out}")
            if args.assert_bound is not None:
                eps = args.eps if args.eps is not None else 1.0 / args.ell
                bound = 8 * eps if args.assert_bound == "auto" else float(args.assert_bound)
                worst = max(
                    (r.corr_err for r in rows if isinstance(r.step, int)), default=0.0
                )
                if worst > bound:
                    print(f"bound violated: max corr_err {worst} > {bound}", file=sys.stderr)
                    return 3
                print(f"bound holds: max corr_err {worst} <= {bound}")
            return 0

        # compare
        seed = _effective_seed(args)
        algos = [a.strip() for a in args.algorithms.split(",") if a.strip()]
        if not algos:
            raise ConfigError("--algorithms must name at least one algorithm")
        given = sum(v is not None for v in (args.eps, args.ell, args.ells))
        if given != 1:
            raise ConfigError("compare needs exactly one of --eps, --ell, --ells")
        ells = (
            [int(v) for v in args.ells.split(",")]
            if args.ells
            else [args.ell] if args.ell else None
        )
        cfgs = []
        for algo in algos:
            if ells:
                for ell in ells:
                    cfgs.append(_run_config(args, seed, algo, ell=ell))
            else:
                cfgs.append(_run_config(args, seed, algo, eps=args.eps))
        rows = compare(cfgs)
        if args.out:
            write_csv(args.out, rows)
            print(f"wrote {len(rows)} rows to {args.out}")
        return 0
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
