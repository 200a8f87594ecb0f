"""Command-line entry point.

Subcommands:
  run          one chain from a YAML spec, CSVs into the output directory
  replicates   every replicate in the spec, rep000/.. subdirs plus summary.csv
  alpha-sweep  one run per jump-power value, alpha_sweep.csv
  compare      side-by-side ESS and ESS/sec from existing summary.csv dirs
  validate     parse and check a spec without running anything

Exit codes: 0 success, 2 bad config or arguments, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .harness import ConfigError, ExperimentRuntimeError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("spec", help="path to a YAML experiment spec")
    parser.add_argument("--seed", type=int, default=None, help="override base_seed")
    parser.add_argument("--out-dir", default=None, help="override output_dir from the spec")
    parser.add_argument(
        "--full-trace", action="store_true",
        help="also write a thinned trace.csv per replicate",
    )
    parser.add_argument(
        "--thin", type=int, default=10,
        help="keep every THIN-th state in trace.csv (default 10)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acmtm",
        description="Component-wise multiple-try samplers: run, replicate, compare.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single chain")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("replicates", help="run all replicates of a spec")
    _add_common(p_rep)
    p_rep.add_argument(
        "--threads", type=int, default=1,
        help="worker processes (default 1; results are identical either way)",
    )
    p_rep.set_defaults(func=cmd_replicates)

    p_alpha = sub.add_parser("alpha-sweep", help="sweep the jump-power exponent")
    _add_common(p_alpha)
    p_alpha.add_argument(
        "--alphas", type=float, nargs="+", default=None,
        help="jump-power values (falls back to 'alphas' in the spec)",
    )
    p_alpha.set_defaults(func=cmd_alpha_sweep)

    p_cmp = sub.add_parser("compare", help="compare finished runs by ESS and ESS/sec")
    p_cmp.add_argument("dirs", nargs="+", help="directories each holding a summary.csv")
    p_cmp.add_argument("--labels", nargs="+", default=None, help="one label per directory")
    p_cmp.add_argument("--out-dir", default=".", help="where to write compare.csv")
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="check a spec without running it")
    p_val.add_argument("spec", help="path to a YAML experiment spec")
    p_val.set_defaults(func=cmd_validate)

    return parser


def _load_spec(args) -> harness.ExperimentSpec:
    spec = harness.parse_experiment_spec(args.spec)
    if getattr(args, "seed", None) is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError(f"--seed must be a non-negative 64-bit integer, got {args.seed}")
        spec = replace(spec, base_seed=args.seed)
    if getattr(args, "out_dir", None):
        spec = replace(spec, output_dir=args.out_dir)
    if getattr(args, "thin", 1) < 1:
        raise ConfigError(f"--thin must be >= 1, got {args.thin}")
    return spec


def _print_report(report: harness.ReplicateReport, out: Path) -> None:
    agg = report.aggregate
    n = len(report.results)
    act = ", ".join(f"{v:.3g}" for v in agg["act"]["mean"])
    ess = ", ".join(f"{v:.4g}" for v in agg["ess"]["mean"])
    print(f"{report.spec.label}: {n} replicate(s), {report.spec.iterations} sweeps each")
    print(f"  asj  mean {agg['asj']['mean']:.4g}   wall mean {agg['wall_time']['mean']:.3g}s")
    print(f"  act  mean per coordinate: {act}")
    print(f"  ess  mean per coordinate: {ess}")
    print(f"  wrote {out / 'summary.csv'}")


def cmd_run(args) -> int:
    spec = _load_spec(args)
    out = Path(spec.output_dir)
    report = harness.run_replicates(
        replace(spec, replicates=1), out, thin=args.thin, full_trace=args.full_trace,
    )
    harness.write_plot_script(out)
    _print_report(report, out)
    return EXIT_OK


def cmd_replicates(args) -> int:
    if args.threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {args.threads}")
    spec = _load_spec(args)
    out = Path(spec.output_dir)
    report = harness.run_replicates(
        spec, out, threads=args.threads, thin=args.thin, full_trace=args.full_trace,
    )
    harness.write_plot_script(out)
    _print_report(report, out)
    return EXIT_OK


def cmd_alpha_sweep(args) -> int:
    spec = _load_spec(args)
    out = Path(spec.output_dir)
    results = harness.alpha_sweep(spec, args.alphas, out)
    harness.write_plot_script(out)
    print(f"{spec.label}: alpha sweep, {spec.iterations} sweeps per value")
    for a, res in results:
        act = ", ".join(f"{v:.3g}" for v in res.report.act)
        print(f"  alpha {a:<6g} asj {res.report.asj:.4g}   act {act}")
    print(f"  wrote {out / 'alpha_sweep.csv'}")
    return EXIT_OK


def cmd_compare(args) -> int:
    dirs = [Path(d) for d in args.dirs]
    if len(dirs) < 2:
        raise ConfigError("compare needs at least two directories")
    labels = args.labels
    if labels is None:
        labels = [d.name or str(d) for d in dirs]
    if len(labels) != len(dirs):
        raise ConfigError(f"{len(dirs)} directories but {len(labels)} labels")
    aggs = []
    for d in dirs:
        summary = d / "summary.csv"
        if not summary.exists():
            raise ConfigError(f"no summary.csv in {d}")
        aggs.append(harness.aggregate_from_summary(harness.read_summary_csv(summary)))
    try:
        header, rows = harness.compare_report(aggs, labels, args.out_dir)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    widths = [max(len(str(h)), 12) for h in header]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        cells = [str(row[0])] + [f"{v:.4g}" for v in row[1:]]
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    print(f"wrote {Path(args.out_dir) / 'compare.csv'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = harness.parse_experiment_spec(args.spec)
    target = harness.build_target(spec.target)
    print(f"ok: {args.spec}")
    print(f"  target    {target.label} (dim {target.dim})")
    print(f"  sampler   {spec.sampler.kind} (m={spec.sampler.m})")
    print(f"  run       {spec.iterations} sweeps, burn-in {spec.burn_in}, "
          f"{spec.replicates} replicate(s), base seed {spec.base_seed}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExperimentRuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # anything unexpected is a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
