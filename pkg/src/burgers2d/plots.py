"""Matplotlib figure rendering for the report paths (no pyplot state, Agg only)."""

from __future__ import annotations

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_BRANCH_STYLE = {
    "symmetric": {"color": "tab:blue"},
    "pitchfork_plus": {"color": "black"},
    "pitchfork_minus": {"color": "dimgray"},
}


def _new_figure(figsize=(6.0, 4.0)):
    fig = Figure(figsize=figsize)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path, metadata: dict | None = None) -> None:
    path = str(path)
    kwargs = {"dpi": 150, "bbox_inches": "tight"}
    if path.endswith(".svg"):
        # the SVG writer only accepts Dublin Core keys; drop the date so
        # outputs are reproducible and carry provenance in the Source field
        md = {"Date": None}
        if metadata:
            md["Source"] = ", ".join(f"{k}={v}" for k, v in metadata.items())
        kwargs["metadata"] = md
    elif metadata and path.endswith(".png"):
        kwargs["metadata"] = {k: str(v) for k, v in metadata.items()}
    fig.savefig(path, **kwargs)


def save_bifurcation_figure(branches, path, lambda0=None, title=None, metadata=None) -> None:
    """lambda vs l1 norm for each branch: stable solid, unstable dashed."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    for branch in branches:
        style = _BRANCH_STYLE.get(branch.id, {"color": "tab:red"})
        lams = [p.lam for p in branch.points]
        norms = [p.norm_l1 for p in branch.points]
        stable = [p.stable for p in branch.points]
        # split into maximal runs of constant stability so the line style tracks it
        start = 0
        labeled = set()
        for i in range(1, len(lams) + 1):
            if i == len(lams) or stable[i] != stable[start]:
                ls = "-" if stable[start] else "--"
                label = None
                key = (branch.id, stable[start])
                if key not in labeled:
                    label = f"{branch.id} ({'stable' if stable[start] else 'unstable'})"
                    labeled.add(key)
                ax.plot(lams[start:i], norms[start:i], ls, label=label, **style)
                start = i
    if lambda0 is not None:
        ax.axvline(lambda0, color="tab:red", lw=0.8, alpha=0.6)
        ax.annotate(f"$\\lambda_0 = {lambda0:.4f}$", (lambda0, ax.get_ylim()[1] * 0.05),
                    fontsize=8, rotation=90, va="bottom")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\|u(\lambda)\|_{\ell^1}$")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="upper left")
    _save(fig, path, metadata)


def save_bounds_figure(report, path, metadata=None) -> None:
    """Log-log inverse norms vs lambda per (m, l, N) group, from a certification report."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    groups = {}
    for pt in report.points:
        groups.setdefault((pt["m"], pt["l"], pt["N"]), []).append(pt)
    for (m, l, N), pts in sorted(groups.items()):
        pts.sort(key=lambda p: p["lambda"])
        lams = [p["lambda"] for p in pts]
        for norm_key, marker in (("l1_norm", "o"), ("linf_norm", "s"), ("grad_norm", "^")):
            ax.loglog(lams, [p[norm_key] for p in pts], marker + "-", ms=3,
                      label=f"{norm_key} (m={m}, l={l}, N={N})")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("inverse norm")
    ax.legend(fontsize=6, loc="lower left")
    _save(fig, path, metadata)


def save_trace_figure(trace, path, metadata=None) -> None:
    """Iteration differences on a log scale; visualizes the contraction."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    ns = [s["n"] for s in trace.steps]
    ax.semilogy(ns, [s["diff_l1_1"] for s in trace.steps], "o-", ms=3, label=r"$\ell^1_1$ diff")
    ax.semilogy(ns, [s["weighted_diff"] for s in trace.steps], "s-", ms=3, label="weighted diff")
    if trace.tol > 0:
        ax.axhline(trace.tol, color="tab:red", lw=0.8, label="tol")
    ax.set_xlabel("iteration")
    ax.set_ylabel("difference")
    ax.legend(fontsize=8)
    _save(fig, path, metadata)
