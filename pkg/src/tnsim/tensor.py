"""Dense complex tensor primitives.

Tensors are plain ``numpy.ndarray`` objects of dtype ``complex128`` in C order
(last index fastest), so every reshape below is consistent with that
linearization. The helpers here add the shape and finiteness checks the MPS
layers rely on and the truncation bookkeeping for bond compression.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

DTYPE = np.complex128


class TensorError(ValueError):
    """Raised for malformed tensor arguments (bad axes, shapes, non-finite data)."""


def as_tensor(x) -> np.ndarray:
    """Return ``x`` as a C-ordered complex128 array with all extents >= 1."""
    t = np.ascontiguousarray(x, dtype=DTYPE)
    if any(n < 1 for n in t.shape):
        raise TensorError(f"tensor extents must be >= 1, got shape {t.shape}")
    return t


def _check_finite(m: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(m)):
        raise TensorError(f"{what}: input contains non-finite entries")


@dataclass(frozen=True)
class TruncationReport:
    """Outcome of a truncated SVD.

    ``singular_values`` holds the full descending spectrum, ``kept`` how many
    of them survived, and ``discarded_weight`` the dropped share of the
    squared spectrum.
    """

    kept: int
    discarded_weight: float
    singular_values: np.ndarray = field(repr=False)


def contract(a, axes_a: Sequence[int], b, axes_b: Sequence[int]) -> np.ndarray:
    """Sum over paired axes of ``a`` and ``b``.

    The result carries the free axes of ``a`` followed by the free axes of
    ``b``, each in their original order.
    """
    a = np.asarray(a, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    axes_a = [int(i) for i in axes_a]
    axes_b = [int(i) for i in axes_b]
    if len(axes_a) != len(axes_b):
        raise TensorError("axis lists must have equal length")
    for axes, t, name in ((axes_a, a, "a"), (axes_b, b, "b")):
        if len(set(axes)) != len(axes):
            raise TensorError(f"duplicate axes for {name}: {axes}")
        for ax in axes:
            if not 0 <= ax < t.ndim:
                raise TensorError(f"axis {ax} out of range for {name} with rank {t.ndim}")
    for i, j in zip(axes_a, axes_b):
        if a.shape[i] != b.shape[j]:
            raise TensorError(
                f"extent mismatch: a axis {i} has {a.shape[i]}, b axis {j} has {b.shape[j]}"
            )
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def _svd(m: np.ndarray):
    try:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge on nearly degenerate spectra
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")


def svd_truncate(m, max_keep: int, cutoff: float = 0.0):
    """Truncated SVD ``m ~ U @ diag(S) @ V``.

    Singular values below ``cutoff * S[0]`` are dropped, then at most
    ``max_keep`` are kept. At least one value is always kept, so a zero matrix
    comes back as a rank-1 factorization with ``S == [0]``.

    Returns
    -------
    U, S, V, report
        ``U`` has orthonormal columns, ``V`` orthonormal rows, ``S`` is real.
        Real float64 input stays real; everything else is promoted to complex.
    """
    m = np.asarray(m)
    m = m.astype(np.float64 if m.dtype == np.float64 else DTYPE, copy=False)
    if m.ndim != 2:
        raise TensorError(f"svd_truncate needs a rank-2 tensor, got rank {m.ndim}")
    if max_keep < 1:
        raise TensorError("max_keep must be >= 1")
    if cutoff < 0:
        raise TensorError("cutoff must be >= 0")
    _check_finite(m, "svd_truncate")

    u, s, vh = _svd(m)
    total = float(np.sum(s**2))
    if s.size and s[0] > 0:
        rank = int(np.count_nonzero(s >= cutoff * s[0])) if cutoff > 0 else int(np.count_nonzero(s > 0))
    else:
        rank = 0
    kept = max(1, min(max_keep, rank))
    dropped = float(np.sum(s[kept:] ** 2))
    weight = dropped / total if total > 0 else 0.0
    report = TruncationReport(kept=kept, discarded_weight=min(max(weight, 0.0), 1.0), singular_values=s)
    return u[:, :kept], s[:kept], vh[:kept, :], report


def qr_orthonormalize(m, side: str = "left"):
    """Split ``m`` into an orthonormal factor and a remainder.

    ``side="left"`` returns ``(Q, R)`` with ``Q`` having orthonormal columns and
    ``Q @ R == m``. ``side="right"`` returns ``(Q, L)`` with ``Q`` having
    orthonormal rows and ``L @ Q == m``. Phases are fixed so that the diagonal
    of the triangular remainder is real and nonnegative.
    """
    m = np.asarray(m, dtype=DTYPE)
    if m.ndim != 2:
        raise TensorError(f"qr_orthonormalize needs a rank-2 tensor, got rank {m.ndim}")
    _check_finite(m, "qr_orthonormalize")
    if side == "left":
        q, r = scipy.linalg.qr(m, mode="economic")
        q, r = _fix_phases(q, r)
        return q, r
    if side == "right":
        q, r = scipy.linalg.qr(m.conj().T, mode="economic")
        q, r = _fix_phases(q, r)
        return q.conj().T, r.conj().T
    raise TensorError(f"side must be 'left' or 'right', got {side!r}")


def _fix_phases(q: np.ndarray, r: np.ndarray):
    d = np.diagonal(r)
    a = np.abs(d)
    normal = a >= np.finfo(a.dtype).tiny
    ph = np.ones_like(d)
    # d / |d| is exact for real values but overflows for subnormal ones, where the angle is used
    ph[normal] = d[normal] / a[normal]
    tiny = (a > 0) & ~normal
    ph[tiny] = np.exp(1j * np.angle(d[tiny])) if np.iscomplexobj(d) else np.sign(d[tiny])
    return q * ph[np.newaxis, :], r * ph.conj()[:, np.newaxis]
