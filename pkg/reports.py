"""CSV tables and the plain-text report.

Every file is written to a temporary sibling first and renamed on success, so
a failed run never leaves a partial file behind.
"""
import logging
import os
import tempfile

import pandas as pd

from bound_checks import EXACT_ZERO
from operator_moments import TYPO_NORMALISATIONS, constant_term_finding, fourth_moment_bound

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
MOMENT_COLUMNS = ["n", "a", "alpha", "beta", "x", "order", "kind", "closed_form", "oracle",
                  "abs_diff", "rel_diff", "verdict"]
BOUND_COLUMNS = ["theorem", "n", "a", "alpha", "beta", "x", "empirical_error", "theoretical_bound",
                 "fitted_constant", "holds"]
EVAL_COLUMNS = ["x", "n", "a", "alpha", "beta", "value"]
CONVERGENCE_COLUMNS = ["a", "alpha", "beta", "order", "n", "norm", "slope"]

STANCU_NOTE = (
    "Stancu baselines: the point operator uses C(n,k) x^k (1-x)^(n-k) f((k+alpha)/(n+beta)); "
    "the Kantorovich-Stancu baseline integrates over [(k+alpha)/(n+beta+1), (k+alpha+1)/(n+beta+1)] "
    "so that alpha = beta = 0 gives the classical Kantorovich operator."
)
HOLDER_NOTE = (
    "sqrt is only Holder-1/2 at the origin: Omega(sqrt; delta) shrinks like sqrt(delta), so the "
    "Omega(1e-4) <= 0.01 Omega(1) vanishing check does not hold for it although Omega still tends to 0."
)


def _params_columns(p):
    return {"n": p.n, "a": p.a, "alpha": p.alpha, "beta": p.beta}


def moment_frame(reports):
    rows = [
        {**_params_columns(r.params), "x": r.x, "order": r.order, "kind": r.kind,
         "closed_form": r.closed_form, "oracle": r.oracle, "abs_diff": r.abs_diff,
         "rel_diff": r.rel_diff, "verdict": r.verdict}
        for r in reports
    ]
    return pd.DataFrame(rows, columns=MOMENT_COLUMNS)


def bound_frame(records):
    rows = [
        {"theorem": r.theorem, **_params_columns(r.params), "x": r.x,
         "empirical_error": r.empirical_error, "theoretical_bound": r.theoretical_bound,
         "fitted_constant": r.fitted_constant, "holds": r.holds}
        for r in records
    ]
    return pd.DataFrame(rows, columns=BOUND_COLUMNS)


def eval_frame(params_list, xs, values):
    rows = []
    for p, column in zip(params_list, values):
        for x, value in zip(xs, column):
            rows.append({"x": float(x), **_params_columns(p), "value": float(value)})
    return pd.DataFrame(rows, columns=EVAL_COLUMNS)


def convergence_frame(tables):
    """tables: list of (params, ConvergenceTable)"""
    rows = []
    for p, table in tables:
        for order, n, norm, slope in table.rows():
            rows.append({"a": p.a, "alpha": p.alpha, "beta": p.beta, "order": order, "n": n,
                         "norm": norm, "slope": slope if slope == EXACT_ZERO else FLOAT_FORMAT % slope})
    return pd.DataFrame(rows, columns=CONVERGENCE_COLUMNS)


def write_atomic(path, write):
    """Call write(tmp) on a temporary file beside path, then rename it into place"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.splitext(path)[1])
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info("wrote %s", path)
    return path


def write_csv(df, path):
    return write_atomic(path, lambda tmp: df.to_csv(tmp, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))


def write_text(text, path):
    def write(tmp):
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)

    return write_atomic(path, write)


def moment_summary(reports):
    counts = {}
    for r in reports:
        key = (r.form, r.verdict)
        counts[key] = counts.get(key, 0) + 1
    return counts


def fourth_moment_dominance(reports):
    """(cells checked, cells where the bound falls below the oracle) over n >= 5"""
    checked = failed = 0
    for r in reports:
        if r.kind == "central_T" and r.order == 4 and r.form == "literal" and r.params.n >= 5:
            checked += 1
            bound, _ = fourth_moment_bound(r.params, r.x)
            if bound < r.oracle:
                failed += 1
    return checked, failed


def discrepancy_ledger(reports):
    """Text lines for every literal-formula finding plus the standing notes"""
    lines = ["Discrepancy ledger", "=================="]
    findings = [r for r in reports if r.form == "literal" and not r.matches]
    if findings:
        lines.append(f"{len(findings)} literal formula value(s) disagree with the oracle:")
        for r in findings:
            lines.append(
                f"  {r.kind} order {r.order} at {r.params}, x={r.x:g}: "
                f"literal {r.closed_form:.17g}, oracle {r.oracle:.17g}, diff {r.closed_form - r.oracle:.3e}"
            )
    else:
        lines.append("All literal formula values agree with the oracle.")
    seen = []
    for r in reports:
        if r.params not in seen:
            seen.append(r.params)
    lines.append("")
    lines.append("Constant term of T(t^2; x), settled at x = 0:")
    for p in seen:
        found = constant_term_finding(p)
        lines.append(
            f"  {p}: oracle {found['oracle']:.17g}, printed {found['printed']:.17g}, "
            f"integrated {found['integrated']:.17g}; printed - oracle = {found['printed_minus_oracle']:.3e} "
            f"(predicted -alpha/(n+beta)^2 = {found['predicted_gap']:.3e}); supported: {found['supported']}"
        )
    lines.append("")
    lines.append("Normalisations applied to literal formulas:")
    lines.extend(f"  {where}: {note}" for where, note in TYPO_NORMALISATIONS)
    lines.append("")
    lines.append(STANCU_NOTE)
    lines.append(HOLDER_NOTE)
    return lines


def moment_report(reports):
    counts = moment_summary(reports)
    checked, failed = fourth_moment_dominance(reports)
    lines = [
        "Moment verification",
        "===================",
        f"literal: {counts.get(('literal', 'match'), 0)} match, {counts.get(('literal', 'mismatch'), 0)} mismatch",
        f"reconstructed: {counts.get(('reconstructed', 'match'), 0)} match, "
        f"{counts.get(('reconstructed', 'mismatch'), 0)} mismatch",
        f"fourth-moment bound dominates the oracle in {checked - failed} of {checked} cells with n >= 5",
        "",
    ]
    return "\n".join(lines + discrepancy_ledger(reports)) + "\n"
