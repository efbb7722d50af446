"""Report rendering: deterministic JSON/CSV plus matplotlib figures.

Every CLI subcommand writes a machine-readable report (JSON or CSV) and,
next to it, a PNG figure summarizing the same numbers.  Reports echo the
run configuration and tolerances so they are self-describing; identical
configurations produce byte-identical files.
"""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

_FIG_KW = dict(dpi=110, bbox_inches="tight", metadata={"Software": "snlab"})


def write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, default=_coerce)
        fh.write("\n")


def _coerce(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x)}")


def write_csv(path: str, header: list, rows: list) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def figure_area_law(fit: dict, path: str) -> None:
    sizes = np.array(fit["sizes"])
    ents = np.array(fit["entropies"])
    alpha, gamma = fit["alpha"], fit["gamma"]
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    xs = np.linspace(0, sizes.max() * 1.1, 50)
    ax.plot(xs, alpha * xs - gamma, "-", color="tab:gray", lw=1,
            label=rf"$S = \alpha|\partial X| - \gamma$")
    ax.plot(sizes, ents, "o", color="tab:blue")
    ax.axhline(-gamma, color="tab:red", ls=":", lw=1, label=rf"$-\gamma = {-gamma:.5f}$")
    ax.set_xlabel(r"boundary edges $|\partial X|$")
    ax.set_ylabel(r"$S(X)$ (nats)")
    ax.legend(fontsize=8)
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)


def figure_axioms(report: dict, path: str) -> None:
    recs = report["records"]
    vals = [abs(r["value"]) for r in recs]
    labels = [f"{r['kind']}@{r['anchor']}" for r in recs]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.35 * len(vals)), 3.0))
    ax.bar(range(len(vals)), [max(v, 1e-18) for v in vals], color="tab:blue")
    ax.axhline(report["tolerance"], color="tab:red", ls=":", label="tolerance")
    ax.set_yscale("log")
    ax.set_xticks(range(len(vals)))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("|axiom value|")
    ax.legend(fontsize=8)
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)


def figure_sectors(decomp: dict, path: str) -> None:
    blocks = decomp["blocks"]
    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    ax.bar(range(len(blocks)), [b["weight"] for b in blocks], color="tab:blue")
    ax.set_xlabel("sector")
    ax.set_ylabel("weight in reference")
    ax.set_title(f"{decomp['sector_count']} sector(s)", fontsize=9)
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)


def figure_residuals(values: dict, path: str, ylabel: str = "residual") -> None:
    keys = list(values)
    vals = [max(abs(values[k]), 1e-18) for k in keys]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(keys)), 3.0))
    ax.bar(range(len(keys)), vals, color="tab:blue")
    ax.set_yscale("log")
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=45, fontsize=7, ha="right")
    ax.set_ylabel(ylabel)
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)


def figure_spectrum(energies: np.ndarray, path: str, target: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    ax.plot(np.arange(len(energies)), np.sort(energies), "o", ms=3)
    if target is not None:
        ax.axhline(target, color="tab:red", ls=":", lw=1, label=f"ground = {target:g}")
        ax.legend(fontsize=8)
    ax.set_xlabel("state")
    ax.set_ylabel("energy")
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)
