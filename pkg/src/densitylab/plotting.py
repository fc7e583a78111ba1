"""Figure rendering for reports.

Every report path can optionally render a matplotlib figure next to its
data file.  Figures are diagnostic companions to the delimited output, not
part of the byte-identical reproducibility contract.
"""

from __future__ import annotations

from pathlib import Path


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({
        "figure.figsize": (7.0, 4.2),
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 10,
    })
    return plt


def save_series_figure(series: dict, path: str | Path, title: str = "",
                       ylabel: str = "value", hlines: dict | None = None) -> None:
    """Plot one or more (n, value) point series on a log-x axis.

    ``series`` maps legend labels to point lists; ``hlines`` draws labeled
    horizontal reference levels (estimates, bounds).
    """
    plt = _plt()
    fig, ax = plt.subplots()
    for name, pts in series.items():
        if not pts:
            continue
        ns = [p[0] for p in pts]
        vs = [p[1] for p in pts]
        ax.plot(ns, vs, marker="o", markersize=3, linewidth=1.2, label=name)
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    if hlines:
        for name, level in hlines.items():
            ax.axhline(level, linestyle="--", linewidth=0.9, alpha=0.7)
            ax.annotate(f"{name} = {level:.6g}", xy=(0.01, level),
                        xycoords=("axes fraction", "data"),
                        fontsize=8, va="bottom")
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=130)
    plt.close(fig)


def figure_path_for(out_path: str | Path) -> Path:
    return Path(out_path).with_suffix(".png")
