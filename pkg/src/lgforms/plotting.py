"""Figure rendering for CLI reports.

Each function takes report data already computed by the library and
writes one PNG; nothing here is interactive and nothing recomputes.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "plot_gap_scan",
    "plot_counts",
    "plot_verify",
    "plot_decompose",
    "plot_psi",
]


def _save(fig, outdir: str, name: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_gap_scan(rows: list, outdir: str, name: str = "gap_scan.png") -> str:
    ns = [r["n"] for r in rows if r.get("normalized") is not None]
    vals = [r["normalized"] for r in rows if r.get("normalized") is not None]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(ns, vals, "o-", label="normalized gap")
    mins = [r["running_min"] for r in rows if r.get("normalized") is not None]
    ax.plot(ns, mins, "--", color="gray", label="running min")
    ax.set_xlabel("complete locale size n")
    ax.set_ylabel("gap / n")
    ax.set_ylim(bottom=0)
    ax.legend(frameon=False)
    return _save(fig, outdir, name)


def plot_counts(reports: list, outdir: str, name: str = "counts.png") -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ns = [r["n"] for r in reports]
    for ell in sorted(reports[0]["perimeters"]):
        ratios = [r["perimeters"][ell] / r["size"] for r in reports]
        ax.plot(ns, ratios, "o-", label=f"perimeter {ell} / size")
    ax.set_xlabel("box radius n")
    ax.set_ylabel("fraction")
    ax.set_ylim(bottom=0)
    ax.legend(frameon=False)
    return _save(fig, outdir, name)


def plot_verify(reports: list, outdir: str, name: str = "verify.png") -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = [r.name for r in reports]
    ratios = [r.worst_ratio for r in reports]
    ax.bar(range(len(names)), ratios, color="steelblue")
    ax.axhline(1.0, color="crimson", lw=1, label="bound")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("worst lhs/rhs")
    ax.legend(frameon=False)
    return _save(fig, outdir, name)


def plot_decompose(result, outdir: str, name: str = "decompose.png") -> str:
    fig, axes = plt.subplots(1, 2, figsize=(7.5, 3.2))
    res = result.residuals
    axes[0].bar(range(len(res)), res, color="steelblue")
    axes[0].set_xlabel("direction")
    axes[0].set_ylabel("residual norm")
    im = axes[1].imshow(result.a, cmap="coolwarm", aspect="auto")
    axes[1].set_xlabel("direction")
    axes[1].set_ylabel("conserved index")
    axes[1].set_title("current coefficients")
    fig.colorbar(im, ax=axes[1], shrink=0.8)
    return _save(fig, outdir, name)


def plot_psi(steps: list, outdir: str, name: str = "psi.png") -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ns = [s.n for s in steps]
    ax.plot(ns, [s.dagger_sup_norm**2 for s in steps], "o-", label="boundary part sq norm")
    ax.plot(ns, [s.bound_value for s in steps], "s--", label="bound")
    ax.set_xlabel("n")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    return _save(fig, outdir, name)
