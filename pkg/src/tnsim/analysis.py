"""Post-processing: dynamical phase labels, magnetization curves, boundaries and convergence."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.signal import find_peaks

COHERENT = "Coherent"
INCOHERENT = "Incoherent"
UNCLASSIFIED = "Unclassified"

MIN_SAMPLES = 8


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real series."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.real(np.asarray(self.values))
        if t.ndim != 1 or t.shape != v.shape:
            raise AnalysisError("times and values must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise AnalysisError("time series contains NaN or infinite entries")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12):
                raise AnalysisError("time grid must be uniform and increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class PhaseLabel:
    """Classification result. ``evidence`` lists ``(kind, time, value)`` extrema."""

    value: str
    evidence: tuple = ()
    reason: str = ""

    @property
    def valley_then_peak(self) -> bool:
        kinds = [e[0] for e in self.evidence]
        return "valley" in kinds and "peak" in kinds[kinds.index("valley"):]


def classify_dynamics(ts: TimeSeries, prominence: float = 0.01,
                      min_separation: float | None = None) -> PhaseLabel:
    """Label a ``<sigma_z(t)>`` series as coherent or incoherent.

    The series is coherent when some valley is followed by a later peak, both
    with prominence at least ``prominence``. Extrema closer than
    ``min_separation`` (default ``2 * dt``) are thinned by ``find_peaks``.
    Series shorter than eight samples are left unclassified.
    """
    if prominence <= 0:
        raise AnalysisError("prominence must be > 0")
    if len(ts) < MIN_SAMPLES:
        return PhaseLabel(UNCLASSIFIED, reason=f"too short ({len(ts)} samples)")
    dt = ts.dt
    sep = 2 * dt if min_separation is None else float(min_separation)
    distance = max(1, int(math.floor(sep / dt + 1e-9)))
    v, t = ts.values, ts.times
    valleys, _ = find_peaks(-v, prominence=prominence, distance=distance)
    peaks, _ = find_peaks(v, prominence=prominence, distance=distance)
    extrema = sorted([(i, "valley") for i in valleys] + [(i, "peak") for i in peaks])
    evidence = tuple((kind, float(t[i]), float(v[i])) for i, kind in extrema)
    if valleys.size and np.any(peaks > valleys[0]):
        return PhaseLabel(COHERENT, evidence, "valley followed by a later peak")
    if not extrema:
        return PhaseLabel(INCOHERENT, evidence, "monotone within the prominence threshold")
    return PhaseLabel(INCOHERENT, evidence, "no valley followed by a later peak")


# -- ground-state scans

SCAN_COLUMNS = ("h", "abs_mz", "energy", "discarded_weight")


def abs_magnetization(state) -> float:
    """``|sum_i <sigma_z_i>| / N`` of a spin-1/2 state."""
    from .mps import local_expectations

    mz = np.real(local_expectations(state, "sz"))
    return float(abs(np.sum(mz)) / len(mz))


def magnetization_curve(results) -> np.ndarray:
    """Rows ``(h, |M_z|, E0, max discarded weight)`` sorted by ``h``.

    ``results`` holds ``(h, DmrgResult)`` or ``(h, DmrgResult, config_tag)``
    entries. Results on different lattices, or with different tags, raise
    :class:`AnalysisError`.
    """
    rows, shapes, tags = [], set(), set()
    for entry in results:
        h, res = entry[0], entry[1]
        tags.add(entry[2] if len(entry) > 2 else None)
        shapes.add(tuple(b.kind for b in res.state.bases))
        rows.append([float(h), abs_magnetization(res.state), float(res.energy), float(res.max_discarded_weight)])
    if not rows:
        raise AnalysisError("no scan results")
    if len(shapes) > 1 or len(tags) > 1:
        raise AnalysisError(f"scan mixes configurations (tags {sorted(map(str, tags))}, {len(shapes)} lattices)")
    rows.sort(key=lambda r: r[0])
    return np.array(rows, dtype=float)


def first_crossing(curve: np.ndarray, level: float = 0.5) -> float | None:
    """Smallest ``h`` in the curve with ``abs_mz < level`` (``None`` if never)."""
    below = np.nonzero(curve[:, 1] < level)[0]
    return float(curve[below[0], 0]) if below.size else None


def is_monotone_nonincreasing(values: Sequence[float], slack: float = 0.0) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= slack))


# -- phase boundaries


@dataclass(frozen=True)
class Bracket:
    """``alpha_c`` interval for one ``s``. ``None`` bounds mean the grid never crossed."""

    s: float
    lower: float | None
    upper: float | None
    excluded: tuple = ()

    @property
    def midpoint(self) -> float | None:
        if self.lower is None or self.upper is None:
            return None
        return 0.5 * (self.lower + self.upper)

    @property
    def bounded(self) -> bool:
        return self.lower is not None and self.upper is not None


def phase_diagram(grid: Iterable[tuple[float, float, PhaseLabel]]) -> list[Bracket]:
    """Bracket ``alpha_c`` for every ``s`` from ``(alpha, s, label)`` triples.

    The upper edge is the smallest incoherent ``alpha``; the lower edge is the
    largest coherent ``alpha`` below it. Unclassified points are skipped and
    listed in ``excluded``. A missing edge is ``None`` (unbounded).
    """
    by_s: dict[float, list[tuple[float, str]]] = {}
    for a, s, lab in grid:
        by_s.setdefault(float(s), []).append((float(a), lab.value))
    out = []
    for s in sorted(by_s):
        pts = sorted(by_s[s])
        excluded = tuple(a for a, v in pts if v == UNCLASSIFIED)
        pts = [(a, v) for a, v in pts if v != UNCLASSIFIED]
        first_inc = next((a for a, v in pts if v == INCOHERENT), None)
        coh = [a for a, v in pts if v == COHERENT and (first_inc is None or a < first_inc)]
        out.append(Bracket(s, coh[-1] if coh else None, first_inc, excluded))
    return out


def brackets_nondecreasing(brackets: Sequence[Bracket]) -> bool:
    """True when both bracket edges never decrease with ``s`` (missing edges compare as -+inf)."""
    lo = [-math.inf if b.lower is None else b.lower for b in brackets]
    hi = [math.inf if b.upper is None else b.upper for b in brackets]
    return all(x <= y for x, y in zip(lo, lo[1:])) and all(x <= y for x, y in zip(hi, hi[1:]))


# -- convergence


@dataclass(frozen=True)
class ConvergenceVerdict:
    parameter: str
    values: tuple
    deviations: tuple
    converged_at: float | None
    tol: float

    @property
    def converged(self) -> bool:
        return self.converged_at is not None


def _as_series(x):
    if isinstance(x, TimeSeries):
        return x.times, x.values
    arr = np.real(np.asarray(x, dtype=complex))
    return None, arr


def convergence_check(runs, tol: float, parameter: str = "M") -> ConvergenceVerdict:
    """Convergence of a series (or scalar) in a control parameter.

    ``runs`` is a sequence of ``(value, TimeSeries | array | scalar)`` pairs
    (or a mapping), sorted by value. ``deviations[k]`` is the max abs
    difference between run ``k`` and run ``k + 1``; ``converged_at`` is the
    smallest value whose successor deviation is at most ``tol``.
    """
    items = list(runs.items()) if isinstance(runs, Mapping) else list(runs)
    if len(items) < 2:
        raise AnalysisError("convergence_check needs at least two runs")
    if tol <= 0:
        raise AnalysisError("tol must be > 0")
    values = [v for v, _ in items]
    if values != sorted(values):
        raise AnalysisError("runs must be sorted by parameter value")
    series = [_as_series(x) for _, x in items]
    devs = []
    for (t0, a), (t1, b) in zip(series, series[1:]):
        if a.shape != b.shape or (t0 is not None and t1 is not None and not np.allclose(t0, t1)):
            raise AnalysisError("runs are sampled on misaligned time grids")
        devs.append(float(np.max(np.abs(a - b))) if a.size else 0.0)
    at = next((values[k] for k, d in enumerate(devs) if d <= tol), None)
    return ConvergenceVerdict(parameter, tuple(values), tuple(devs), at, tol)
