"""Figure rendering for report outputs.

Every CLI report that emits delimited data can render a companion PNG next to
it; all functions take already-computed report data and a target path.
"""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

_FIGSIZE = (6.0, 3.8)


def _new_axes(xlabel, ylabel, title):
    fig, ax = plt.subplots(figsize=_FIGSIZE, constrained_layout=True)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.grid(alpha=0.3, linewidth=0.5)
    return fig, ax


def save_clt_figure(report, path) -> None:
    fig, ax = _new_axes("normalized log|L| difference", "probability mass",
                        f"value distribution at T={report.T:g} (KS={report.ks:.3f})")
    centers = 0.5 * (report.bin_edges[:-1] + report.bin_edges[1:])
    width = np.diff(report.bin_edges)
    ax.bar(centers, report.bin_mass, width=width, alpha=0.6, label="empirical")
    ax.plot(centers, report.target_mass, "k-", lw=1.2, label="Gaussian target")
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_zero_figure(zeros, t0, t1, path) -> None:
    fig, ax = _new_axes("t", "zero count up to t", f"critical-line zeros on [{t0:g}, {t1:g}]")
    if zeros:
        ords = np.array([z for z, _ in zeros])
        ax.step(ords, np.arange(1, len(ords) + 1), where="post")
    ax.set_xlim(t0, t1)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_moment_figure(rows, path) -> None:
    fig, ax = _new_axes("T", "normalized moment ratio", "mollified moment ratios")
    ts = [r["T"] for r in rows]
    for key, marker in (("rho5", "o"), ("rho6", "s"), ("rho7", "^")):
        ax.plot(ts, [r[key] for r in rows], marker=marker, ms=4, label=key)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_eval_figure(ts, log_abs, path) -> None:
    fig, ax = _new_axes("t", "log|L(1/2+it)|", "critical-line profile")
    ax.plot(ts, log_abs, lw=0.7)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_jsigma_figure(rows, path) -> None:
    fig, ax = _new_axes("sigma", "J_sigma", "mollified strip moments")
    sig = [r["sigma"] for r in rows]
    val = [max(r["estimate"], 1e-300) for r in rows]
    ax.semilogy(sig, val, "o-", ms=4)
    fig.savefig(path, dpi=150)
    plt.close(fig)
