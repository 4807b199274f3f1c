"""Matplotlib figures for ``powerinterp report``."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}      # keep PNG bytes free of version strings


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)


def plot_singular(sd, path):
    """Critical points and zeros of each annulus in (log|z|, arg) coordinates."""
    fig, ax = plt.subplots(figsize=(7, 4))
    cps = sd.critical_points
    if cps:
        s = np.array([c.point.log_mod for c in cps])
        t = np.array([c.point.arg for c in cps])
        sign = np.array([c.sign for c in cps])
        ax.scatter(s[sign > 0], t[sign > 0], s=14, c="black", label="critical, value +")
        ax.scatter(s[sign < 0], t[sign < 0], s=14, facecolors="white", edgecolors="black",
                   label="critical, value -")
    zs = [z for z in sd.zeros if not z.point.is_origin]
    if zs:
        ax.scatter([z.point.log_mod for z in zs], [z.point.arg for z in zs], s=10, marker="x",
                   c="tab:red", label="zero")
    ax.set_xlabel("log|z|")
    ax.set_ylabel("arg z")
    ax.set_ylim(-math.pi * 1.05, math.pi * 1.05)
    ax.legend(loc="upper left", fontsize=8)
    _save(fig, path)


def plot_dilatation(report, path):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    labels = [f"{'P' if a.kind == 'power' else 'I'}{a.j}" for a in report.annuli]
    ks = [a.max_K for a in report.annuli]
    colors = ["tab:blue" if a.kind == "power" else "tab:orange" for a in report.annuli]
    ax.bar(labels, ks, color=colors)
    ax.axhline(report.K_hat, color="gray", lw=0.8, ls="--")
    ax.set_ylabel("sampled max K")
    _save(fig, path)


def plot_bound(bound, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    J = np.arange(1, len(bound.partial_sums) + 1)
    ax.plot(J, bound.partial_sums, "o-", label="truncated bound")
    if bound.tail_bound is not None:
        ax.axhline(bound.closed_form + bound.tail_bound, color="gray", ls="--",
                   label="with tail bound")
    ax.set_xlabel("J")
    ax.set_ylabel("bound on I")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_wandering(report, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    js = [r.j for r in report.inclusions]
    ms = [r.margin for r in report.inclusions]
    ax.bar([str(j) for j in js], ms, color=["tab:green" if m > 0 else "tab:red" for m in ms])
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xlabel("j")
    ax.set_ylabel("log-space margin of h(A_j) in A_{j+1}")
    _save(fig, path)
