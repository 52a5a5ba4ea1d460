import plotly.graph_objects as go

from bound_checks import EXACT_ZERO
from reports import write_atomic


def convergence_figure(tables):
    """Log-log decay of ||T(t^i) - x^i||_rho against n, one trace per (params, order)"""
    fig = go.Figure()
    for p, table in tables:
        for order, values in table.norms.items():
            if table.slopes[order] == EXACT_ZERO:
                continue
            fig.add_trace(go.Scatter(
                x=list(table.n_values), y=values, mode="lines+markers",
                name=f"i={order}, a={p.a:g}, alpha={p.alpha:g}, beta={p.beta:g} (slope {table.slopes[order]:.3f})",
            ))
    fig.update_xaxes(type="log", title="n")
    fig.update_yaxes(type="log", title="weighted sup deviation")
    fig.update_layout(title="Korovkin test functions", template="plotly_white")
    return fig


def bound_figure(records):
    """Empirical error and fitted bound per cell, x on the horizontal axis, one pair of traces per n"""
    fig = go.Figure()
    by_n = {}
    for r in records:
        by_n.setdefault((r.params.a, r.params.alpha, r.params.beta, r.params.n), []).append(r)
    for (a, alpha, beta, n), cells in by_n.items():
        label = f"n={n}, a={a:g}, alpha={alpha:g}, beta={beta:g}"
        xs = [r.x for r in cells]
        fig.add_trace(go.Scatter(x=xs, y=[r.empirical_error for r in cells], mode="markers",
                                 name=f"error {label}"))
        fig.add_trace(go.Scatter(x=xs, y=[r.theoretical_bound for r in cells], mode="lines",
                                 line={"dash": "dash"}, name=f"bound {label}"))
    theorem = records[0].theorem if records else ""
    fig.update_yaxes(type="log", title="value")
    fig.update_xaxes(title="x")
    fig.update_layout(title=f"{theorem}: error against fitted bound", template="plotly_white")
    return fig


def write_svg(fig, path):
    """Static export through kaleido"""
    return write_atomic(path, lambda tmp: fig.write_image(tmp, format="svg"))
