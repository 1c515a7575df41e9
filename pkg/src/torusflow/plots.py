"""Plot rendering from persisted CSV artifacts.

Plots are derived views only: every number shown is read back from a CSV or
summary file, never recomputed, so figures always agree with the data a
scenario shipped.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _read_matrix_csv(path):
    lines = Path(path).read_text().splitlines()
    cols = [float(v) for v in lines[0].split(",")[1:]]
    labels = []
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        labels.append(parts[0])
        rows.append([float(v) for v in parts[1:]])
    return labels, np.array(cols), np.array(rows)


def _loglog_fit_plot(path, out_png, title):
    labels, ts, rows = _read_matrix_csv(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, row in zip(labels, rows):
        mask = np.isfinite(row) & (row > 0) & (ts > 0)
        if mask.sum() < 2:
            continue
        slope, intercept = np.polyfit(np.log(ts[mask]), np.log(row[mask]), 1)
        ax.loglog(ts[mask], row[mask], "o-", ms=3, label=f"{label} (slope {slope:.3f})")
    ax.set_xlabel("t")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def _heatmap_plot(path, out_png, title):
    labels, ts, rows = _read_matrix_csv(path)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    im = ax.imshow(rows, aspect="auto", origin="lower", cmap="viridis",
                   extent=(0, len(ts), -0.5, len(labels) - 0.5))
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=7)
    ax.set_xlabel("time index")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def _series_plot(path, out_png, title, logy=False):
    labels, ts, rows = _read_matrix_csv(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, row in zip(labels, rows):
        mask = np.isfinite(row)
        if logy:
            ax.semilogy(ts[mask], np.maximum(row[mask], 1e-300), "o-", ms=3, label=label)
        else:
            ax.plot(ts[mask], row[mask], "o-", ms=3, label=label)
    ax.set_xlabel("t")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


_RENDERERS = {
    "smoothing_rates_sup_grad1.csv": (_loglog_fit_plot, "sup |grad h| vs t"),
    "smoothing_rates_sup_grad2.csv": (_loglog_fit_plot, "sup |grad^2 h| vs t"),
    "beta_weak_inf_m_C_t.csv": (_heatmap_plot, "m(C, t)"),
    "perturbation_stability_sup_diff.csv": (_loglog_fit_plot, "sup |R' - R''| over shrinking balls"),
    "gauge_drift_drift.csv": (_loglog_fit_plot, "gauge drift distance"),
    "rf_residual_residual.csv": (_series_plot, "Ricci flow residual"),
    "max_principle_min_R.csv": (_series_plot, "min R(t)"),
    "rigidity_probe_flat_defect.csv": (_series_plot, "flat defect"),
}


def render_resolution_dir(directory):
    directory = Path(directory)
    made = []
    for name, (renderer, title) in _RENDERERS.items():
        src = directory / name
        if not src.is_file():
            continue
        out = src.with_suffix(".png")
        try:
            renderer(src, out, title)
            made.append(out)
        except Exception as exc:  # plot failure must not fail the run
            (directory / (src.stem + ".plot_error.txt")).write_text(str(exc) + "\n")
    return made


def render_artifacts(root):
    """Render plots for every resolution directory under a scenario output."""
    root = Path(root)
    made = []
    for sub in sorted(root.glob("res*")):
        if sub.is_dir():
            made.extend(render_resolution_dir(sub))
    return made
