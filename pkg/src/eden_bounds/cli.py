"""``eden-bounds`` command line."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import PRESETS, BoxConfig
from .leveln import MAX_LEVEL
from .mc import estimate_tau
from .report import build_report, to_csv, to_json, to_table


def parse_dims(text: str) -> list[int]:
    """``"22"``, ``"2-40"`` or ``"2,3,22"`` (ranges inclusive, mixable)."""
    dims: set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = (int(x) for x in part.split("-", 1))
            if lo > hi:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            dims.update(range(lo, hi + 1))
        else:
            dims.add(int(part))
    if min(dims) < 2:
        raise argparse.ArgumentTypeError("dimensions must be >= 2")
    return sorted(dims)


def _dims_arg(text: str) -> list[int]:
    try:
        return parse_dims(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _level_arg(text: str) -> int:
    n = int(text)
    if not 1 <= n <= MAX_LEVEL:
        raise argparse.ArgumentTypeError(f"levels must be in 1..{MAX_LEVEL}")
    return n


def resolve_config(args) -> BoxConfig:
    if args.config:
        cfg = BoxConfig.from_file(args.config)
    elif args.mode == "custom":
        if not args.box:
            raise ValueError("--mode custom needs --box or --config")
        return BoxConfig.parse_box(args.box)
    else:
        cfg = BoxConfig.preset(args.mode)
    if args.box:
        cfg = cfg.with_levels(BoxConfig.parse_box(args.box).shapes)
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _render(rows, cfg, args) -> str:
    if args.format == "csv":
        return to_csv(rows)
    if args.format == "json":
        return to_json(rows, cfg, args.mode)
    return to_table(rows)


def cmd_report(args) -> int:
    cfg = resolve_config(args)
    dims = args.dim if isinstance(args.dim, list) else [args.dim]
    rows = build_report(dims, args.levels, cfg, workers=args.threads)
    _emit(_render(rows, cfg, args), args.out)
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"d={r.d}: {r.error}", file=sys.stderr)
    return 1 if failed else 0


def cmd_mc(args) -> int:
    results = []
    for d in args.dim:
        est = estimate_tau(d, args.levels, args.samples, args.seed, workers=args.threads)
        results.append({"d": d, "n": args.levels, "mean": est.mean,
                        "std_error": est.std_error, "samples": est.samples, "seed": est.seed})
    if args.format == "json":
        text = json.dumps(results, indent=2) + "\n"
    else:
        text = "d,n,mean,std_error,samples,seed\n" + "".join(
            f"{r['d']},{r['n']},{r['mean']!r},{r['std_error']!r},{r['samples']},{r['seed']}\n"
            for r in results)
    _emit(text, args.out)
    return 0


def cmd_check(args) -> int:
    """DP bound against MC mean - 3 std_error at every level up to --levels."""
    cfg = resolve_config(args)
    rows = build_report(args.dim, args.levels, cfg)
    status = 0
    lines = []
    for row in rows:
        if row.error:
            lines.append(f"d={row.d}: ERROR {row.error}")
            status = 1
            continue
        for n, bound in row.axis_upper.items():
            est = estimate_tau(row.d, n, args.samples, args.seed, workers=args.threads)
            low = (est.mean - 3 * est.std_error) / n
            ok = low <= bound
            status |= not ok
            lines.append(f"d={row.d} n={n}: bound {bound:.6f}  MC {est.mean / n:.6f} "
                         f"+- {est.std_error / n:.6f}  {'PASS' if ok else 'FAIL'}")
    _emit("\n".join(lines) + "\n", args.out)
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=[*PRESETS, "custom"], default="fast",
                        help="box preset (default: fast)")
    common.add_argument("--box", help="per-level shapes, e.g. 100000,2000x200,400x60x20")
    common.add_argument("--config", help="JSON box config file")
    common.add_argument("--format", choices=["csv", "json", "table"], default="table")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes for scans and MC")
    mc_opts = argparse.ArgumentParser(add_help=False)
    mc_opts.add_argument("--samples", type=int, default=100_000)
    mc_opts.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="eden-bounds", description=(
        "Upper bounds on the axis speed of the Eden model compared with the "
        "diagonal lower bound."))
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="bounds for one dimension")
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--levels", type=_level_arg, default=2, help="highest level (1..5)")
    c.set_defaults(func=cmd_report)

    s = sub.add_parser("scan", parents=[common], help="bound table over a range of dimensions")
    s.add_argument("--dim", type=_dims_arg, required=True, help="e.g. 2-40 or 2,3,22")
    s.add_argument("--levels", type=_level_arg, default=2)
    s.set_defaults(func=cmd_report)

    m = sub.add_parser("mc", parents=[common, mc_opts], help="Monte Carlo estimate of E[tau_n]")
    m.add_argument("--dim", type=_dims_arg, required=True)
    m.add_argument("--levels", type=int, default=1, help="plane index n")
    m.set_defaults(func=cmd_mc)

    k = sub.add_parser("check", parents=[common, mc_opts],
                       help="assert every DP bound dominates the MC estimate")
    k.add_argument("--dim", type=_dims_arg, required=True)
    k.add_argument("--levels", type=_level_arg, default=2)
    k.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - report, then exit nonzero
        print(f"eden-bounds: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
