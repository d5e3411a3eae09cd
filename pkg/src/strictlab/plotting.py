"""Figures written next to the CSV outputs.

All figures go through the Agg backend with fixed rc settings and no
timestamp metadata, so identical data produce identical PNG bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

golden_mean = (np.sqrt(5.0) - 1.0) / 2.0
fig_width = 5.0
fig_size = (fig_width, fig_width * golden_mean)

params = {
    "axes.labelsize": 9,
    "font.size": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "font.family": "DejaVu Sans",
    "figure.figsize": fig_size,
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

_METADATA = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_METADATA)
    plt.close(fig)


def plot_summary(rows, path):
    """Bond-class fractions and |m| against beta for a sweep of independent runs."""
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        beta = np.array([r["beta"] for r in rows])
        for key, label, fmt in (("f_lt", r"$r\leq\rho$", "o-"), ("f_mid", "gap", "s-"),
                                ("f_gt", r"$r\geq\rho+\varepsilon$", "^-"), ("m_abs", "$|m|$", "d--")):
            ax.errorbar(beta, [r[key] for r in rows], yerr=[r[key + "_err"] for r in rows],
                        fmt=fmt, label=label, capsize=2)
        ax.axhline(0.75, color="k", lw=0.6, ls=":")
        ax.set_xscale("log")
        ax.set_xlabel(r"$\beta$")
        ax.set_ylabel("fraction")
        ax.set_ylim(-0.05, 1.05)
        ax.legend(loc="best")
        _save(fig, path)


def plot_hysteresis(points, path):
    with plt.rc_context(params):
        fig, (ax0, ax1) = plt.subplots(2, 1, sharex=True, figsize=(fig_width, 1.4 * fig_width * golden_mean))
        for direction, color, marker in (("up", "C0", "o"), ("down", "C3", "v")):
            pts = [p for p in points if p["direction"] == direction]
            beta = [p["beta"] for p in pts]
            ax0.errorbar(beta, [p["f_lt"] for p in pts], yerr=[p["f_lt_err"] for p in pts],
                         color=color, marker=marker, capsize=2, label=direction)
            ax1.errorbar(beta, [p["m_abs"] for p in pts], yerr=[p["m_abs_err"] for p in pts],
                         color=color, marker=marker, capsize=2, label=direction)
        ax0.set_ylabel(r"$\langle P^<\rangle$")
        ax1.set_ylabel(r"$\langle |m| \rangle$")
        ax1.set_xlabel(r"$\beta$")
        ax1.set_xscale("log")
        ax0.legend(loc="best")
        _save(fig, path)


def plot_bounds(reports, path, beta_star=None, crossover=None):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        beta = np.array([r["beta"] for r in reports])
        for key, label in (("p_gt_bound", r"$P^>$"), ("p_lt_bound", r"$P^<$"),
                           ("pair_bound", r"$P^<P^>$"), ("p0_bound", r"$P^0$"),
                           ("stagger_bound", "staggered")):
            y = np.array([r[key] for r in reports], dtype=float)
            y = np.where((y > 1e-15) & (y < 1e9), y, np.nan)  # outside the plotted window
            ax.plot(beta, y, label=label)
        for b, ls, name in ((beta_star, "--", r"$\beta^*$"), (crossover, ":", r"$\hat\beta$")):
            if b is not None:
                ax.axvline(b, color="k", ls=ls, lw=0.8, label=name)
        ax.axhline(1.0, color="grey", lw=0.6)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_ylim(1e-12, 1e6)
        ax.set_xlim(beta.min(), beta.max())
        ax.set_xlabel(r"$\beta$")
        ax.set_ylabel("upper bound")
        ax.legend(loc="best", ncol=2)
        _save(fig, path)


def plot_oracle(rows, path):
    """z-scores of sampler estimates against exact values, grouped by beta."""
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        betas = sorted({r["beta"] for r in rows})
        names = list(dict.fromkeys(r["observable"] for r in rows))
        width = 0.8 / max(len(betas), 1)
        x = np.arange(len(names))
        for i, b in enumerate(betas):
            z = [next(r["z"] for r in rows if r["beta"] == b and r["observable"] == n) for n in names]
            ax.bar(x + i * width, np.clip(z, -6, 6), width, label=rf"$\beta={b:g}$")
        for s in (-3, 3):
            ax.axhline(s, color="k", ls=":", lw=0.8)
        ax.set_xticks(x + 0.4 - width / 2)
        ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylabel("(estimate - exact) / error")
        ax.legend(loc="best")
        _save(fig, path)
