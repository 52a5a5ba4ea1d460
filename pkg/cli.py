import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from bound_checks import (
    check_theorem_3_1,
    check_theorem_3_2,
    check_theorem_4_1,
    check_theorem_4_3,
    compare_shift_variants,
    n_stability,
    stability_lines,
)
from errors import (
    ApproximationError,
    CertificateViolationError,
    ConfigError,
    QuadratureError,
    TailNotAbsorbedError,
)
from experiment_config import COMMANDS, load_config
from operator_moments import verify_moments
import plots
import reports
from stancu_operators import eval_grid

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CHECKERS = {
    "T3.1": check_theorem_3_1,
    "T3.2": check_theorem_3_2,
    "T4.3": check_theorem_4_3,
}

# flag -> config key; flags carry raw strings, experiment_config parses them
FLAGS = {
    "--n-list": "n_list",
    "--a": "a",
    "--alpha": "alpha",
    "--beta": "beta",
    "--x-start": "x_start",
    "--x-stop": "x_stop",
    "--x-step": "x_step",
    "--function": "function",
    "--tail-eps": "tail_eps",
    "--k-max": "k_max",
    "--out-dir": "out_dir",
    "--format": "format",
    "--theorem": "theorem",
    "--operator": "operator",
    "--orders": "orders",
    "--n-jobs": "n_jobs",
    "--x-max": "x_max",
}


def _out(config, name):
    return os.path.join(config.out_dir, name)


def cmd_eval(config):
    f = config.test_function()
    policy = config.policy()
    xs = config.x_grid
    params_list = config.params_grid()
    values = [
        eval_grid(p, f, xs, policy, operator=config.operator, n_jobs=config.n_jobs) for p in params_list
    ]
    df = reports.eval_frame(params_list, xs, values)
    print(df.to_string(index=False))
    if config.wants("csv"):
        reports.write_csv(df, _out(config, "eval.csv"))
    return EXIT_OK


def cmd_verify_moments(config):
    all_reports = []
    for p in config.params_grid():
        all_reports.extend(verify_moments(p, config.x_grid))
    counts = reports.moment_summary(all_reports)
    print(f"literal: {counts.get(('literal', 'match'), 0)} match, "
          f"{counts.get(('literal', 'mismatch'), 0)} mismatch (findings, see report)")
    bad = counts.get(("reconstructed", "mismatch"), 0)
    print(f"reconstructed: {counts.get(('reconstructed', 'match'), 0)} match, {bad} mismatch")
    if config.wants("csv"):
        for form in ("literal", "reconstructed"):
            rows = [r for r in all_reports if r.form == form]
            reports.write_csv(reports.moment_frame(rows), _out(config, f"moments_{form}.csv"))
    if config.wants("report"):
        reports.write_text(reports.moment_report(all_reports), _out(config, "moments_report.txt"))
    return EXIT_VERIFICATION_FAILED if bad else EXIT_OK


def cmd_check_bounds(config):
    f = config.test_function()
    checker = CHECKERS[config.theorem]
    policy = config.policy()
    records = []
    lines = [f"{config.theorem} for {f.name}", ""]
    for group in config.params_groups():
        group_records = checker(group, f, config.x_grid, policy=policy, n_jobs=config.n_jobs)
        records.extend(group_records)
        stability = n_stability(group_records)
        p = group[0]
        line = (f"a={p.a:g} alpha={p.alpha:g} beta={p.beta:g}: fitted constant "
                f"{group_records[0].fitted_constant:.6g}, holds {sum(r.holds for r in group_records)}"
                f"/{len(group_records)}, spread {stability.spread:.3g}, blow-up {stability.blowup:.3g}")
        print(line)
        lines.append(line)
        lines.extend(stability_lines(stability))
        if config.theorem == "T3.1" and config.wants("report"):
            for variant, summary in compare_shift_variants(group, f, config.x_grid, policy, config.n_jobs).items():
                lines.append(f"  shift {variant}: K={summary['fitted_constant']:.6g}, "
                             f"all hold {summary['all_hold']}, spread {summary['spread']:.3g}")
    if config.wants("csv"):
        reports.write_csv(reports.bound_frame(records), _out(config, "bounds.csv"))
    if config.wants("report"):
        reports.write_text("\n".join(lines) + "\n", _out(config, "bounds_report.txt"))
    if config.wants("svg"):
        plots.write_svg(plots.bound_figure(records), _out(config, "bounds.svg"))
    return EXIT_OK if all(r.holds for r in records) else EXIT_VERIFICATION_FAILED


def cmd_converge(config):
    tables = []
    for group in config.params_groups():
        base = group[0]
        table = check_theorem_4_1(base, config.n_list, orders=config.orders)
        tables.append((base, table))
        for order in table.norms:
            print(f"a={base.a:g} alpha={base.alpha:g} beta={base.beta:g} i={order}: slope {table.slopes[order]}")
    if config.wants("csv"):
        reports.write_csv(reports.convergence_frame(tables), _out(config, "converge.csv"))
    if config.wants("svg"):
        plots.write_svg(plots.convergence_figure(tables), _out(config, "converge.svg"))
    return EXIT_OK


HANDLERS = {
    "eval": cmd_eval,
    "verify-moments": cmd_verify_moments,
    "check-bounds": cmd_check_bounds,
    "converge": cmd_converge,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cli.py",
        description="Generalized Baskakov-Kantorovich-Stancu operators: evaluation, moments and bound checks",
    )
    parser.add_argument("command", choices=COMMANDS)
    for flag, key in FLAGS.items():
        parser.add_argument(flag, dest=key, default=None)
    parser.add_argument("--config", default=None, help="key=value file, overridden by flags")
    parser.add_argument("--allow-unordered-stancu", dest="allow_unordered_stancu",
                        action="store_const", const="true", default=None)
    parser.add_argument("--log-level", default=None)
    return parser


def _configure_logging(level):
    level = (level or os.getenv("BKS_LOG_LEVEL", "WARNING")).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    load_dotenv()
    _configure_logging(args.log_level)
    overrides = {key: getattr(args, key) for key in list(FLAGS.values()) + ["allow_unordered_stancu"]}
    try:
        config = load_config(args.command, overrides, args.config)
        return HANDLERS[config.command](config)
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (TailNotAbsorbedError, QuadratureError) as e:
        print(f"Numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CertificateViolationError as e:
        print(f"Verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFICATION_FAILED
    except ApproximationError as e:
        # parameter, domain and growth-class problems caught only once the run starts
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
