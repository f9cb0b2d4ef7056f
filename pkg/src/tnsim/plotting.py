"""Deterministic SVG figures from CSV tables."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("line", "heatmap")


class PlotError(ValueError):
    pass


def read_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise PlotError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    if not body:
        raise PlotError(f"{path}: no data rows")
    return header, body


def _column(header, body, name) -> list[str]:
    if name not in header:
        raise PlotError(f"unknown column {name!r}; available: {', '.join(header)}")
    j = header.index(name)
    return [r[j] for r in body]


def _floats(values, name) -> np.ndarray:
    try:
        return np.array([float(v) for v in values])
    except ValueError as err:
        raise PlotError(f"column {name!r} is not numeric: {err}") from err


def _save(fig, out: Path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": "tnsim", "svg.fonttype": "none"}):
        fig.savefig(out, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def plot_line(header, body, out: Path, x: str | None = None, y: Sequence[str] | None = None,
              group: str | None = None) -> None:
    """One polyline per ``y`` column, or per value of ``group`` when given."""
    x = x or header[0]
    xs = _floats(_column(header, body, x), x)
    if y is None:
        y = [c for c in header if c not in (x, group)]
        if group is not None:
            y = y[:1]
    for c in y:
        _column(header, body, c)
    fig, ax = plt.subplots(figsize=(6, 4))
    if group is not None:
        keys = _column(header, body, group)
        ys = _floats(_column(header, body, y[0]), y[0])
        for g in sorted(set(keys)):
            m = np.array([k == g for k in keys])
            order = np.argsort(xs[m], kind="stable")
            ax.plot(xs[m][order], ys[m][order], marker="o", label=f"{group}={g}")
        ax.set_ylabel(y[0])
    else:
        for c in y:
            ax.plot(xs, _floats(_column(header, body, c), c), label=c)
        ax.set_ylabel(y[0] if len(y) == 1 else "value")
    ax.set_xlabel(x)
    if group is not None or len(y) > 1:
        ax.legend()
    fig.tight_layout()
    _save(fig, out)


def plot_heatmap(header, body, out: Path, x: str, y: str, z: str) -> None:
    """Color map of ``z`` over the grid spanned by the distinct ``x`` and ``y`` values."""
    xs = _floats(_column(header, body, x), x)
    ys = _floats(_column(header, body, y), y)
    zcol = _column(header, body, z)
    labels = sorted(set(zcol))
    try:
        zs = _floats(zcol, z)
        ticks = None
    except PlotError:
        # categorical column (phase labels): map to integer codes
        zs = np.array([labels.index(v) for v in zcol], dtype=float)
        ticks = labels
    ux, uy = np.unique(xs), np.unique(ys)
    grid = np.full((uy.size, ux.size), np.nan)
    for a, b, c in zip(xs, ys, zs):
        grid[np.searchsorted(uy, b), np.searchsorted(ux, a)] = c
    fig, ax = plt.subplots(figsize=(6, 4))
    im = ax.imshow(grid, origin="lower", aspect="auto", interpolation="nearest")
    ax.set_xticks(range(ux.size), [f"{v:g}" for v in ux])
    ax.set_yticks(range(uy.size), [f"{v:g}" for v in uy])
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    cb = fig.colorbar(im, ax=ax, label=z)
    if ticks is not None:
        cb.set_ticks(range(len(ticks)), labels=ticks)
    fig.tight_layout()
    _save(fig, out)


def plot_file(data, kind: str, out, x=None, y=None, z=None, group=None) -> Path:
    """Render ``data`` (CSV) as ``kind``; nothing is written if validation fails."""
    if kind not in KINDS:
        raise PlotError(f"kind must be one of {KINDS}, got {kind!r}")
    header, body = read_table(data)
    out = Path(out)
    if kind == "line":
        plot_line(header, body, out, x, [y] if isinstance(y, str) else y, group)
    else:
        if not (x and y and z):
            raise PlotError("heatmap needs x, y and z columns")
        plot_heatmap(header, body, out, x, y, z)
    return out
