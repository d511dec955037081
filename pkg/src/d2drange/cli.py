"""Command-line interface.

Subcommands: validate | sweep | optimize | compare. Exit codes: 0 success,
1 usage or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import _kernels
from .analytic import QuadratureError
from .experiments import (
    COMPARE_CLASS_COLUMNS,
    COMPARE_SUMMARY_COLUMNS,
    OPTIMIZE_COLUMNS,
    SWEEP_ARGMIN_COLUMNS,
    SWEEP_COLUMNS,
    VALIDATE_COLUMNS,
    cmd_compare,
    cmd_optimize,
    cmd_sweep,
    cmd_validate,
    write_csv,
)
from .scenario import ScenarioError, load_scenario, with_overrides

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _float_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated float list: {exc}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="d2drange", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("validate", "check the analytic model against the simulator"),
        ("sweep", "energy breakdown over an r_max grid"),
        ("optimize", "per-class optimal r_max for given weights"),
        ("compare", "selective vs common r_max strategies"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="scenario JSON file")
        cmd.add_argument("--seed", type=int, default=None, help="override base seed")
        cmd.add_argument(
            "--realizations", type=int, default=None, help="override realization count"
        )
        cmd.add_argument("--out", default=None, help="output directory")
        if name in ("validate", "sweep"):
            cmd.add_argument(
                "--rmax", type=_float_list, default=None, help="comma-separated r_max list (m)"
            )
        if name in ("optimize", "compare"):
            cmd.add_argument(
                "--w", type=_float_list, default=None, help="comma-separated weight list"
            )
    return parser


def _run(args) -> int:
    scenario = load_scenario(args.config)
    scenario = with_overrides(
        scenario,
        seed=args.seed,
        realizations=args.realizations,
        output_dir=args.out,
    )
    out_dir = scenario.output_dir
    os.makedirs(out_dir, exist_ok=True)
    print(f"kernel backend: {_kernels.BACKEND}")

    if args.command == "validate":
        rows, all_pass = cmd_validate(scenario, args.rmax)
        write_csv(os.path.join(out_dir, "validate.csv"), VALIDATE_COLUMNS, rows)
        for row in rows:
            status = "ok" if row["within_threshold"] else "MISMATCH"
            print(
                f"class {row['class_id']} r_max {row['r_max_m']:g} m: "
                f"rel diff {row['rel_diff']:.4f} [{status}]"
            )
        print(f"validation {'PASS' if all_pass else 'FAIL'} (threshold 5% on total energy)")
        return 0

    if args.command == "sweep":
        if args.rmax is None:
            raise ScenarioError("sweep requires --rmax")
        rows, argmin_rows = cmd_sweep(scenario, args.rmax)
        write_csv(os.path.join(out_dir, "sweep.csv"), SWEEP_COLUMNS, rows)
        write_csv(
            os.path.join(out_dir, "sweep_argmin.csv"), SWEEP_ARGMIN_COLUMNS, argmin_rows
        )
        for row in argmin_rows:
            print(
                f"class {row['class_id']} [{row['source']}]: best r_max "
                f"{row['r_best_m']:g} m, E {row['e_total_j']:.4g} J"
            )
        return 0

    if args.command == "optimize":
        w_values = args.w if args.w else [0.5]
        rows = []
        for w in sorted(set(w_values)):
            rows.extend(cmd_optimize(scenario, w))
        write_csv(os.path.join(out_dir, "optimize.csv"), OPTIMIZE_COLUMNS, rows)
        for row in rows:
            print(
                f"w {row['w']:g} class {row['class_id']} [{row['method']}]: "
                f"r_hat {row['r_hat_m']:.2f} m, cost {row['cost_j']:.4g} J"
            )
        return 0

    if args.command == "compare":
        w_values = args.w if args.w else [0.1, 0.4, 0.7, 0.9]
        summary, per_class = cmd_compare(scenario, w_values)
        write_csv(
            os.path.join(out_dir, "compare_summary.csv"), COMPARE_SUMMARY_COLUMNS, summary
        )
        write_csv(
            os.path.join(out_dir, "compare_classes.csv"), COMPARE_CLASS_COLUMNS, per_class
        )
        for row in summary:
            if row["budget_feasible"]:
                print(
                    f"w {row['w']:g}: I2D savings vs matched-budget common "
                    f"{row['savings_vs_budget_pct']:.1f}% "
                    f"(vs cost-optimal common {row['savings_vs_common_pct']:.1f}%)"
                )
            else:
                print(f"w {row['w']:g}: budget matching infeasible")
        return 0

    raise ScenarioError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
