"""Matrix product states and operators.

An MPS holds rank-3 site tensors ``A[a_{i-1}, s_i, a_i]`` with ``a_0 = a_N = 1``.
``center`` records the orthogonality center when the state is in mixed
canonical form (tensors to its left are left isometries, tensors to its
right are right isometries) and is ``None`` otherwise.

Functions here never modify their inputs; site tensors are stored read-only.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import env as E
from .sites import SiteBasis, is_hermitian_name, local_op
from .tensor import DTYPE, as_tensor, qr_orthonormalize, svd_truncate


def _frozen(t: np.ndarray) -> np.ndarray:
    t = as_tensor(t)
    t.setflags(write=False)
    return t


def geometric_caps(bases: Sequence[SiteBasis]) -> list[int]:
    """Largest meaningful bond dimension at every cut ``0..N``."""
    dims = [b.dim for b in bases]
    n = len(dims)
    caps = []
    for cut in range(n + 1):
        left = int(np.prod(dims[:cut], dtype=float)) if cut else 1
        right = int(np.prod(dims[cut:], dtype=float)) if cut < n else 1
        caps.append(min(left, right))
    return caps


class MPS:
    """Finite matrix product state."""

    def __init__(self, tensors: Sequence[np.ndarray], bases: Sequence[SiteBasis], center: int | None = None):
        tensors = tuple(_frozen(t) for t in tensors)
        bases = tuple(bases)
        if len(tensors) != len(bases) or not tensors:
            raise ValueError("need one tensor per site basis and at least one site")
        for i, (t, b) in enumerate(zip(tensors, bases)):
            if t.ndim != 3:
                raise ValueError(f"site {i}: MPS tensors are rank 3, got rank {t.ndim}")
            if t.shape[1] != b.dim:
                raise ValueError(f"site {i}: physical extent {t.shape[1]} != basis dimension {b.dim}")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for i in range(len(tensors) - 1):
            if tensors[i].shape[2] != tensors[i + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {i} and {i + 1}")
        if center is not None and not 0 <= center < len(tensors):
            raise ValueError(f"center {center} out of range")
        self.tensors = tensors
        self.bases = bases
        self.center = center

    def __len__(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [1] + [t.shape[2] for t in self.tensors]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def to_dense(self) -> np.ndarray:
        v = np.ones((1, 1), dtype=DTYPE)
        for t in self.tensors:
            v = np.tensordot(v, t, axes=(1, 0)).reshape(-1, t.shape[2])
        return v.reshape(-1)

    def norm(self) -> float:
        return float(np.sqrt(max(overlap(self, self).real, 0.0)))

    def scaled(self, factor: complex) -> "MPS":
        k = self.center if self.center is not None else 0
        ts = list(self.tensors)
        ts[k] = ts[k] * factor
        return MPS(ts, self.bases, self.center)

    def normalized(self) -> "MPS":
        return self.scaled(1.0 / self.norm())


class MPO:
    """Finite matrix product operator with tensors ``W[w_l, s_out, s_in, w_r]``."""

    def __init__(self, tensors: Sequence[np.ndarray], bases: Sequence[SiteBasis]):
        tensors = tuple(_frozen(t) for t in tensors)
        bases = tuple(bases)
        if len(tensors) != len(bases) or not tensors:
            raise ValueError("need one tensor per site basis and at least one site")
        for i, (w, b) in enumerate(zip(tensors, bases)):
            if w.ndim != 4 or w.shape[1] != b.dim or w.shape[2] != b.dim:
                raise ValueError(f"site {i}: MPO tensor shape {w.shape} does not match basis dimension {b.dim}")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[3] != 1:
            raise ValueError("MPO boundary bonds must have dimension 1")
        for i in range(len(tensors) - 1):
            if tensors[i].shape[3] != tensors[i + 1].shape[0]:
                raise ValueError(f"MPO bond mismatch between sites {i} and {i + 1}")
        self.tensors = tensors
        self.bases = bases

    def __len__(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [1] + [w.shape[3] for w in self.tensors]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def to_dense(self) -> np.ndarray:
        dim = int(np.prod([b.dim for b in self.bases]))
        if dim > 2**12:
            raise ValueError(f"refusing to build a dense {dim}x{dim} matrix")
        m = np.ones((1, 1, 1), dtype=DTYPE)  # out, in, w
        for w in self.tensors:
            t = np.tensordot(m, w, axes=(2, 0))  # out, in, s', s, w'
            o, i, so, si, wr = t.shape
            m = t.transpose(0, 2, 1, 3, 4).reshape(o * so, i * si, wr)
        return m[:, :, 0]

    def apply_dense(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-vector product without forming the dense matrix."""
        dims = [b.dim for b in self.bases]
        v = np.asarray(vec, dtype=DTYPE).reshape([1] + dims + [1])
        # v[w, s_0..s_{N-1}, 1]: contract sites one by one, carrying the MPO bond in front
        t = v
        for i, w in enumerate(self.tensors):
            # t axes: (w_left, out_0..out_{i-1}, s_i, s_{i+1}.., 1)
            t = np.tensordot(w, t, axes=([0, 2], [0, i + 1]))  # s_out, w_r, out_0.., s_{i+1}..
            t = np.moveaxis(t, 0, i + 1)  # w_r, out_0..out_{i-1}, s_out, ...
        return t.reshape(-1)


def _check_same_bases(a: Sequence[SiteBasis], b: Sequence[SiteBasis]) -> None:
    if tuple(a) != tuple(b):
        raise ValueError("site bases do not match")


def mps_product(bases: Sequence[SiteBasis], local_states: Sequence[Sequence[complex]]) -> MPS:
    """Product state with bond dimension 1 everywhere, center at site 0."""
    if len(bases) != len(local_states):
        raise ValueError("need one local state per site")
    tensors = []
    for i, (b, v) in enumerate(zip(bases, local_states)):
        v = np.asarray(v, dtype=DTYPE).reshape(-1)
        if v.size != b.dim:
            raise ValueError(f"site {i}: local state has {v.size} entries, basis dimension is {b.dim}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError(f"site {i}: local state is not normalized")
        tensors.append(v.reshape(1, b.dim, 1))
    return MPS(tensors, bases, center=0)


def basis_state(basis: SiteBasis, index: int) -> np.ndarray:
    v = np.zeros(basis.dim, dtype=DTYPE)
    v[index] = 1.0
    return v


def random_mps(bases: Sequence[SiteBasis], max_bond: int, rng=None, real: bool = False) -> MPS:
    """Normalized random state with bonds ``min(max_bond, geometric cap)``, center 0.

    ``real=True`` draws real entries, which keeps DMRG on real Hamiltonians in float64.
    """
    rng = np.random.default_rng(rng)
    caps = geometric_caps(bases)
    dims = [min(max_bond, c) for c in caps]
    tensors = []
    for i, b in enumerate(bases):
        shape = (dims[i], b.dim, dims[i + 1])
        t = rng.standard_normal(shape)
        tensors.append(t if real else t + 1j * rng.standard_normal(shape))
    psi = canonicalize(MPS(tensors, bases), 0)
    return psi.normalized()


def mps_from_dense(vec, bases: Sequence[SiteBasis], max_bond: int | None = None, cutoff: float = 0.0) -> MPS:
    """Exact (or truncated) MPS of a dense vector by successive SVDs."""
    dims = [b.dim for b in bases]
    rest = np.asarray(vec, dtype=DTYPE).reshape(1, -1)
    if rest.size != int(np.prod(dims)):
        raise ValueError("vector length does not match the product of basis dimensions")
    keep = max_bond or rest.size
    tensors = []
    for d in dims[:-1]:
        a = rest.shape[0]
        m = rest.reshape(a * d, -1)
        u, s, vh, _ = svd_truncate(m, keep, cutoff)
        tensors.append(u.reshape(a, d, -1))
        rest = s[:, None] * vh
    tensors.append(rest.reshape(rest.shape[0], dims[-1], 1))
    return MPS(tensors, bases, center=len(dims) - 1)


def overlap(bra: MPS, ket: MPS) -> complex:
    """``<bra|ket>``."""
    _check_same_bases(bra.bases, ket.bases)
    t = np.ones((1, 1), dtype=DTYPE)
    for a, b in zip(bra.tensors, ket.tensors):
        t = np.tensordot(t, b, axes=(1, 0))  # bra, s, ket
        t = np.tensordot(a.conj(), t, axes=([0, 1], [0, 1]))
    return complex(t[0, 0])


def _left_move(a: np.ndarray, nxt: np.ndarray):
    l, d, r = a.shape
    q, rem = qr_orthonormalize(a.reshape(l * d, r), "left")
    return q.reshape(l, d, -1), np.tensordot(rem, nxt, axes=(1, 0))


def _right_move(prev: np.ndarray, a: np.ndarray):
    l, d, r = a.shape
    q, rem = qr_orthonormalize(a.reshape(l, d * r), "right")
    return np.tensordot(prev, rem, axes=(2, 0)), q.reshape(-1, d, r)


def canonicalize(psi: MPS, new_center: int) -> MPS:
    """Mixed canonical form about ``new_center``; the represented vector is unchanged."""
    n = len(psi)
    if not 0 <= new_center < n:
        raise IndexError(f"center {new_center} out of range for {n} sites")
    ts = [np.array(t) for t in psi.tensors]
    if psi.center is None:
        left_from, right_from = 0, n - 1
    else:
        left_from = right_from = psi.center
    for i in range(left_from, new_center):
        ts[i], ts[i + 1] = _left_move(ts[i], ts[i + 1])
    for i in range(right_from, new_center, -1):
        ts[i - 1], ts[i] = _right_move(ts[i - 1], ts[i])
    return MPS(ts, psi.bases, new_center)


def isometry_residuals(psi: MPS) -> list[float]:
    """Per-site deviation from the isometry condition implied by ``psi.center``."""
    if psi.center is None:
        raise ValueError("state has no canonical center")
    out = []
    for i, t in enumerate(psi.tensors):
        l, d, r = t.shape
        if i < psi.center:
            m = t.reshape(l * d, r)
            out.append(float(np.abs(m.conj().T @ m - np.eye(r)).max()))
        elif i > psi.center:
            m = t.reshape(l, d * r)
            out.append(float(np.abs(m @ m.conj().T - np.eye(l)).max()))
        else:
            out.append(0.0)
    return out


def compress(psi: MPS, max_bond: int, cutoff: float = 0.0):
    """SVD compression sweep.

    Returns ``(state, total_discarded_weight)``. The result keeps the input norm
    and has its center on the last site.
    """
    if max_bond < 1:
        raise ValueError("max_bond must be >= 1")
    norm0 = psi.norm()
    ts = [np.array(t) for t in canonicalize(psi, 0).tensors]
    total = 0.0
    for i in range(len(ts) - 1):
        l, d, r = ts[i].shape
        u, s, vh, rep = svd_truncate(ts[i].reshape(l * d, r), max_bond, cutoff)
        total += rep.discarded_weight
        ts[i] = u.reshape(l, d, -1)
        ts[i + 1] = np.tensordot(s[:, None] * vh, ts[i + 1], axes=(1, 0))
    last_norm = np.linalg.norm(ts[-1])
    if last_norm > 0:
        ts[-1] = ts[-1] * (norm0 / last_norm)
    return MPS(ts, psi.bases, len(ts) - 1), total


def expectation(psi: MPS, op: MPO) -> complex:
    """``<psi|op|psi>`` (not divided by the norm)."""
    _check_same_bases(psi.bases, op.bases)
    L = E.edge_env()
    for a, w in zip(psi.tensors, op.tensors):
        L = E.update_left(L, a, w)
    return complex(L[0, 0, 0])


def mpo_expectation_normalized(psi: MPS, op: MPO) -> complex:
    return expectation(psi, op) / overlap(psi, psi)


def site_expectations(psi: MPS, ops: dict[int, np.ndarray]) -> dict[int, complex]:
    """Normalized ``<O_i>`` for a dict ``{site: matrix}``."""
    if not ops:
        return {}
    phi = psi if psi.center == 0 else canonicalize(psi, 0)
    nrm = float(np.vdot(phi.tensors[0].reshape(-1), phi.tensors[0].reshape(-1)).real)
    out = {}
    L = np.ones((1, 1), dtype=DTYPE)
    for i in range(max(ops) + 1):
        a = phi.tensors[i]
        if i in ops:
            t = np.tensordot(L, a, axes=(1, 0))  # bra, s, r
            t = np.tensordot(t, ops[i], axes=(1, 1))  # bra, r, s'
            out[i] = complex(np.tensordot(a.conj(), t, axes=([0, 2, 1], [0, 1, 2]))) / nrm
        t = np.tensordot(L, a, axes=(1, 0))
        L = np.tensordot(a.conj(), t, axes=([0, 1], [0, 1]))
    return out


def local_expectations(psi: MPS, op_name: str, sites: Sequence[int] | None = None) -> list[float]:
    """Per-site ``<op>``; the operator must be one of the Hermitian named operators."""
    if not is_hermitian_name(op_name):
        raise ValueError(f"operator {op_name!r} is not a Hermitian observable")
    sites = list(range(len(psi))) if sites is None else list(sites)
    vals = site_expectations(psi, {i: local_op(psi.bases[i], op_name) for i in sites})
    return [vals[i].real for i in sites]


def apply_mpo(op: MPO, psi: MPS) -> MPS:
    """Exact ``op|psi>``; bond dimensions multiply."""
    _check_same_bases(psi.bases, op.bases)
    ts = []
    for a, w in zip(psi.tensors, op.tensors):
        t = np.tensordot(w, a, axes=(2, 1))  # wl, s', wr, al, ar
        wl, d, wr, al, ar = t.shape
        ts.append(t.transpose(0, 3, 1, 2, 4).reshape(wl * al, d, wr * ar))
    return MPS(ts, psi.bases)


def _orth_complement_fill(q: np.ndarray, target: int, rng) -> np.ndarray:
    """Extend orthonormal columns ``q`` to ``target`` columns with random directions."""
    rows = q.shape[0]
    while q.shape[1] < target:
        extra = rng.standard_normal((rows, target - q.shape[1])) + 1j * rng.standard_normal(
            (rows, target - q.shape[1])
        )
        extra -= q @ (q.conj().T @ extra)
        extra -= q @ (q.conj().T @ extra)
        u, s, _ = np.linalg.svd(extra, full_matrices=False)
        good = s > 1e-8 * max(1.0, s[0] if s.size else 1.0)
        q = np.hstack([q, u[:, good]])
    return q[:, :target]


def expand_bond(psi: MPS, h: MPO, target_bond: int, krylov_order: int = 2, rng=0) -> MPS:
    """Enlarge bonds to ``min(target_bond, geometric cap)`` while keeping the state.

    At every cut the new left basis contains the old one exactly plus the
    dominant new directions of ``H|psi>, H^2|psi>, ...`` (each compressed to
    ``target_bond``); remaining slots are filled with random orthogonal
    directions. The returned state equals ``psi / |psi|`` and is left-canonical
    with center on the last site. If ``target_bond`` is below the current
    maximal bond the input is returned unchanged.
    """
    _check_same_bases(psi.bases, h.bases)
    if target_bond < psi.max_bond:
        return psi
    rng = np.random.default_rng(rng)
    caps = geometric_caps(psi.bases)
    base = psi.normalized()
    comps = [base]
    vec = base
    for _ in range(krylov_order):
        vec, _ = compress(apply_mpo(h, vec), target_bond, 1e-14)
        nrm = vec.norm()
        if nrm == 0:
            break
        comps.append(vec.scaled(1.0 / nrm))
    weights = [1.0] + [1e-3**k for k in range(1, len(comps))]

    n = len(psi)
    carries = [np.ones((1, 1), dtype=DTYPE) for _ in comps]
    out = []
    m_prev = 1
    for i in range(n):
        d = psi.bases[i].dim
        blocks = [np.tensordot(c, comp.tensors[i], axes=(1, 0)) for c, comp in zip(carries, comps)]
        if i == n - 1:
            out.append(blocks[0].reshape(m_prev, d, 1))
            break
        mats = [b.reshape(m_prev * d, -1) for b in blocks]
        m_new = min(target_bond, caps[i + 1])
        # exact column space of the kept state first
        u, s, _ = np.linalg.svd(mats[0], full_matrices=False)
        q = u[:, s > 1e-13 * max(s[0], 1e-300)] if s.size and s[0] > 0 else u[:, :0]
        others = np.hstack([w * m for w, m in zip(weights[1:], mats[1:])]) if len(mats) > 1 else None
        if others is not None and q.shape[1] < m_new:
            rest = others - q @ (q.conj().T @ others)
            u2, s2, _ = np.linalg.svd(rest, full_matrices=False)
            scale = max(float(s2[0]) if s2.size else 0.0, 1e-300)
            take = u2[:, s2 > 1e-10 * scale][:, : m_new - q.shape[1]]
            q = np.hstack([q, take])
            q, _ = np.linalg.qr(q)
        q = _orth_complement_fill(q, m_new, rng)
        out.append(q.reshape(m_prev, d, m_new))
        carries = [q.conj().T @ m for m in mats]
        m_prev = m_new
    res = MPS(out, psi.bases, center=n - 1)
    return res.normalized()
