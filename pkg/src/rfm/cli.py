"""Command-line interface: run one config, run a suite table, or ablate
row rescaling.

The RFM_THREADS environment variable caps the BLAS thread count; it is
applied before numpy loads, which is why all numerical imports happen
inside main().
"""

from __future__ import annotations

import argparse
import os
import sys


def _apply_thread_env() -> None:
    threads = os.environ.get("RFM_THREADS")
    if not threads:
        return
    if not threads.isdigit() or int(threads) < 1:
        raise SystemExit(f"RFM_THREADS must be a positive integer, got {threads!r}")
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, threads)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfm",
        description="Random feature method PDE solver experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single experiment config")
    run.add_argument("--config", required=True, help="path to a config JSON file")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=None, help="directory for CSV row and field snapshots")
    run.add_argument("--dump-system", default=None, help="write the assembled system to this path")

    table = sub.add_parser("table", help="run every config of a suite, median over seeds")
    table.add_argument("--suite", required=True, help="suite name")
    table.add_argument("--seeds", type=int, default=5, help="number of seeds (default 5)")
    table.add_argument("--out", default=None, help="directory for the suite CSV")

    ablate = sub.add_parser("ablate-rescale", help="run a config with and without rescaling")
    ablate.add_argument("--config", required=True, help="path to a config JSON file")

    return parser


def _print_record(record, stream=sys.stdout) -> None:
    head = (
        f"{record.suite}/{record.name}: seed={record.seed} M={record.m_features} "
        f"N={record.n_rows} columns={record.n_columns} rank={record.rank} "
        f"loss={record.loss:.3e} wall={record.wall_time_s:.2f}s"
    )
    print(head, file=stream)
    if record.errors:
        parts = [f"{k}={v:.3e}" for k, v in sorted(record.errors.items())]
        print("  errors: " + " ".join(parts), file=stream)


def main(argv=None) -> int:
    _apply_thread_env()
    args = _build_parser().parse_args(argv)

    from dataclasses import replace

    from .experiments import (
        ExperimentConfig,
        rescale_ablation,
        run_experiment,
        run_table,
    )

    try:
        if args.command == "run":
            config = ExperimentConfig.load(args.config)
            if args.seed is not None:
                config = replace(config, seed=args.seed)
            record = run_experiment(
                config,
                out_dir=args.out,
                dump_system=args.dump_system,
                snapshot=args.out is not None,
            )
            _print_record(record)
        elif args.command == "table":
            rows = run_table(args.suite, list(range(args.seeds)), out_dir=args.out)
            cols = ("suite", "M", "N", "seed_count", "err_u_linf", "err_u_l2rel",
                    "rank", "loss", "wall_time_s", "label")
            print("\t".join(cols))
            for row in rows:
                print("\t".join(str(row[c]) for c in cols))
            if args.out:
                print(f"wrote {os.path.join(args.out, args.suite + '.csv')}")
        elif args.command == "ablate-rescale":
            config = ExperimentConfig.load(args.config)
            on, off = rescale_ablation(config)
            print("rescaling on:")
            _print_record(on)
            print("rescaling off:")
            _print_record(off)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
