"""Figures for the CLI report path: flattened stars and fiber circles."""
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .om import sign_str  # noqa: E402

_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def plot_flat_star(atlas, vertex, path):
    """Star of a vertex drawn in its own chart coordinates (2-manifolds only)."""
    if atlas.n != 2:
        return None
    coords = {u: tuple(float(c) for c in x) for u, x in atlas.coords[vertex].items()}
    fig, ax = plt.subplots(figsize=(4, 4))
    for s in atlas.X.star_tops((vertex,)):
        pts = [coords[v] for v in s] + [coords[s[0]]]
        ax.fill([p[0] for p in pts], [p[1] for p in pts], color="0.9", ec="0.3", lw=1)
    for u, (x, y) in sorted(coords.items(), key=lambda kv: str(kv[0])):
        ax.plot(x, y, "o", color="k" if u == vertex else "C0", ms=4)
        ax.annotate(str(u), (x, y), textcoords="offset points", xytext=(4, 4), fontsize=9)
    ax.set_aspect("equal")
    ax.set_title(f"star of {vertex} in its chart")
    ax.set_xticks([])
    ax.set_yticks([])
    return _save(fig, path)


def plot_fiber_circle(yelem, path, theta=None):
    """Fiber polygon of one Y element: vertex cells as dots, edge cells as arcs."""
    circ = yelem.circle
    L = len(circ)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    zeros = [sum(1 for s in z if s == 0) for z in circ]
    for i, z in enumerate(circ):
        ang = 2 * math.pi * i / L
        x, y = math.cos(ang), math.sin(ang)
        if zeros[i] > min(zeros):
            ax.plot(x, y, "o", color="k", ms=5)
        else:
            a0, a1 = 2 * math.pi * (i - 0.5) / L, 2 * math.pi * (i + 0.5) / L
            ts = [a0 + (a1 - a0) * k / 20 for k in range(21)]
            ax.plot([math.cos(t) for t in ts], [math.sin(t) for t in ts], color="C1", lw=2)
        ax.annotate(sign_str(z), (1.18 * x, 1.18 * y), ha="center", va="center", fontsize=7, family="monospace")
    if theta is not None:
        ax.text(0, 0, f"Theta = 1/{L} per edge", ha="center", fontsize=8)
    ax.set_xlim(-1.6, 1.6)
    ax.set_ylim(-1.6, 1.6)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(f"fiber over Y element {yelem.id} ({yelem.cell})", fontsize=9)
    return _save(fig, path)


def plot_cell_counts(counts: dict, path, title="simplices by dimension"):
    fig, ax = plt.subplots(figsize=(4.5, 3))
    dims = sorted(counts)
    ax.bar([str(d) for d in dims], [counts[d] for d in dims], color="C0")
    ax.set_yscale("log")
    ax.set_xlabel("dimension")
    ax.set_ylabel("count")
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return _save(fig, path)
