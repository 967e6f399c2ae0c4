"""Figure builders for the sweep-harness CSV outputs.

Rendering is pinned to the Agg canvas with a fixed rc set so a given CSV
always produces byte-identical image files; none of this depends on the
caller's matplotlib state.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib as mpl
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .tables import Table, convergence_fits, error_columns, read_table

# everything a rendered byte depends on gets an explicit value here
FIXED_RC = {
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.5,
    "legend.fontsize": 9.0,
    "svg.hashsalt": "heliplot",
}

_GUIDE_SLOPE = -0.5


def _new_figure() -> Figure:
    fig = Figure()
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, out_path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    # the default PNG Software tag carries the library version; drop it so
    # the bytes depend on the data and the rc set only
    fig.savefig(out_path, metadata={"Software": None}
                if out_path.suffix == ".png" else None)
    return out_path


def build_convergence_figure(table: Table) -> Figure:
    """Log-log error-vs-sigma scatter, least-squares lines, slope labels."""
    with mpl.rc_context(FIXED_RC):
        fits = convergence_fits(table)
        sigma = table.col("sigma")
        fig = _new_figure()
        ax = fig.add_subplot()
        for name, (slope, intercept) in fits.items():
            pts = ax.loglog(sigma, table.col(name), "o",
                            label=f"{name}: slope {slope:.6f}")[0]
            ax.loglog(sigma, np.exp(intercept) * sigma**slope, "-",
                      color=pts.get_color(), alpha=0.7)
        first = table.col(error_columns(table)[0])
        guide = first[0] * (sigma / sigma[0]) ** _GUIDE_SLOPE
        ax.loglog(sigma, guide, "k--", alpha=0.6,
                  label="slope -1/2 guide")
        ax.set_xlabel("sigma")
        ax.set_ylabel("error")
        if table.has("t_star"):
            ax.set_title(f"distance to the planar run at t = {table.col('t_star')[0]:g}")
        ax.legend()
        fig.tight_layout()
    return fig


def plot_convergence(csv_path, out_path) -> Path:
    return _save(build_convergence_figure(read_table(csv_path)), out_path)


ENERGY_COLUMNS = ("sigma", "t", "kinetic", "dissipation_cum",
                  "sigma_terms_cum", "residual")


def build_energy_figure(table: Table) -> Figure:
    """Stacked energy budget over time, residual on the right axis.

    The kinetic band plus the two cumulative bands should fill a constant
    level (the initial energy); a dashed exponential fit tracks the decay
    of the kinetic edge whenever the data allows one.
    """
    for name in ENERGY_COLUMNS:
        if not table.has(name):
            raise ValueError(f"missing column {name!r} "
                             f"(have {', '.join(table.header)})")
    with mpl.rc_context(FIXED_RC):
        fig = _new_figure()
        ax = fig.add_subplot()
        axr = ax.twinx()
        sigmas = np.unique(table.col("sigma"))
        for s in sigmas:
            rows = table.col("sigma") == s
            t = table.col("t")[rows]
            kinetic = table.col("kinetic")[rows]
            tag = f" (sigma {s:g})" if sigmas.size > 1 else ""
            ax.stackplot(t, kinetic, table.col("dissipation_cum")[rows],
                         table.col("sigma_terms_cum")[rows],
                         labels=[f"kinetic{tag}", f"dissipated{tag}",
                                 f"pitch terms{tag}"],
                         alpha=0.55)
            if np.all(kinetic > 0.0) and t.size >= 2:
                rate, loge0 = np.polyfit(t, np.log(kinetic), 1)
                ax.plot(t, np.exp(loge0 + rate * t), "k--",
                        label=f"exp fit{tag}, rate {-rate:.2f}")
            axr.plot(t, table.col("residual")[rows], color="crimson",
                     linewidth=1.0, label=f"residual{tag}")
        ax.set_xlabel("t")
        ax.set_ylabel("energy budget")
        axr.set_ylabel("budget residual", color="crimson")
        axr.tick_params(axis="y", labelcolor="crimson")
        handles, labels = ax.get_legend_handles_labels()
        hr, lr = axr.get_legend_handles_labels()
        ax.legend(handles + hr, labels + lr, loc="center right")
        fig.tight_layout()
    return fig


def plot_energy(csv_path, out_path) -> Path:
    return _save(build_energy_figure(read_table(csv_path)), out_path)
