"""Figure rendering for the CLI report paths.

Every plot is written straight to a file (Agg backend, no display).
Curves are prepended with the origin point: before the first step no
node has migrated and no alternative path is available.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

_STYLE = {"greedy": "o-", "optimal": "s-", "random": "^--"}


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def availability_figure(curves: dict[str, list[int]], path: str) -> None:
    """Cumulative available alternative paths per migration step."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, curve in sorted(curves.items()):
        xs = list(range(len(curve) + 1))
        ax.plot(xs, [0] + list(curve), _STYLE.get(label, "o-"), label=label)
    ax.set_xlabel("migration step")
    ax.set_ylabel("available alternative paths")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def savings_figure(series: dict[str, list[float]], path: str) -> None:
    """Capacity savings (Gbit/s) per migration step."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in sorted(series.items()):
        xs = list(range(len(values) + 1))
        ax.plot(xs, [0.0] + list(values), _STYLE.get(label, "o-"), label=label)
    ax.set_xlabel("migration step")
    ax.set_ylabel("capacity savings (Gbit/s)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def runtime_figure(points: dict[str, list[tuple[int, float]]], path: str) -> None:
    """Scheduling wall time versus network size, log time axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, series in sorted(points.items()):
        if not series:
            continue
        xs = [n for n, _ in series]
        ys = [ms for _, ms in series]
        ax.plot(xs, ys, _STYLE.get(label, "o-"), label=label)
    ax.set_yscale("log")
    ax.set_xlabel("nodes")
    ax.set_ylabel("schedule computation (ms)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)
