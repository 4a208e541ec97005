"""Deterministic SVG figures (log-log fits, per-cell profiles)."""

from __future__ import annotations

import matplotlib

matplotlib.use("svg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "svg.hashsalt": "carleson-lab",
    "svg.fonttype": "none",
    "path.simplify": False,
    "font.size": 9,
}
METADATA = {"Date": None, "Creator": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=METADATA)
    plt.close(fig)


def fit_figure(fit, path, title="", xlabel="constant", ylabel="lower bound on the norm"):
    """Log-log scatter of the sweep points with the least-squares line."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.4))
        x, y = np.array(fit.points).T
        ax.loglog(x, y, "o", ms=4, color="k", label="sweep")
        xs = np.geomspace(x.min(), x.max(), 50)
        ax.loglog(xs, np.exp(fit.intercept) * xs**fit.slope, "-", color="C0", lw=1,
                  label=f"slope {fit.slope:.3f} (rms {fit.residual:.2g})")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)


def profile_figure(path, series: dict, title=""):
    """Per-cell curves on the circle, e.g. residual against majorant."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.0))
        for name, v in series.items():
            v = np.asarray(v, dtype=float)
            x = (np.arange(v.size) + 0.5) / v.size
            ax.step(x, v, where="mid", lw=0.8, label=name)
        ax.set_xlim(0, 1)
        ax.set_xlabel("x")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)
