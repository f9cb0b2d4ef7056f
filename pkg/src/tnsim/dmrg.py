"""Two-site DMRG ground-state search."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import env as E
from .mps import MPO, MPS, canonicalize, expectation, overlap
from .tensor import svd_truncate

log = logging.getLogger(__name__)

DENSE_LOCAL_DIM = 256
LOCAL_KRYLOV = 12


class DmrgError(RuntimeError):
    pass


@dataclass
class SweepSpec:
    max_bond: int
    cutoff: float = 1e-10
    noise: float = 0.0

    def __post_init__(self):
        if self.max_bond < 1:
            raise ValueError("max_bond must be >= 1")
        if self.cutoff < 0 or self.noise < 0:
            raise ValueError("cutoff and noise must be >= 0")


@dataclass
class DmrgSchedule:
    """Sweep plan. Entries run in order; the last one repeats until converged.

    ``max_sweeps`` caps the total number of sweeps (default: schedule length + 10).
    """

    sweeps: list[SweepSpec]
    energy_tol: float = 1e-8
    max_local_iters: int = 100
    local_tol: float = 1e-10
    max_sweeps: int | None = None

    def __post_init__(self):
        self.sweeps = [s if isinstance(s, SweepSpec) else SweepSpec(*s) for s in self.sweeps]
        if not self.sweeps:
            raise ValueError("a DMRG schedule needs at least one sweep")
        if self.energy_tol <= 0 or self.local_tol <= 0 or self.max_local_iters < 1:
            raise ValueError("tolerances must be > 0 and max_local_iters >= 1")

    @classmethod
    def ramp(cls, bonds, cutoff: float = 1e-10, noise: float = 0.0, **kw) -> "DmrgSchedule":
        """One sweep per bond dimension in ``bonds``; noise halves each sweep and is 0 on the last."""
        specs = []
        for k, m in enumerate(bonds):
            specs.append(SweepSpec(m, cutoff, noise * 0.5**k if k < len(bonds) - 1 else 0.0))
        return cls(specs, **kw)

    def plan(self):
        total = self.max_sweeps if self.max_sweeps is not None else len(self.sweeps) + 10
        for k in range(max(total, len(self.sweeps))):
            yield k, self.sweeps[min(k, len(self.sweeps) - 1)], k >= len(self.sweeps) - 1


@dataclass
class DmrgResult:
    energy: float
    state: MPS
    energy_per_sweep: list[float] = field(default_factory=list)
    converged: bool = False
    max_discarded_weight: float = 0.0


def _lanczos_lowest(mv, v0, krylov: int, tol: float, max_matvecs: int):
    """Lowest eigenpair by Lanczos restarted from the current Ritz vector.

    Stops when the residual norm drops below ``tol * max(1, |e|)`` or after
    ``max_matvecs`` products.
    """
    n = v0.size
    m = max(2, min(krylov, n))
    x = v0 / np.linalg.norm(v0)
    used = 0
    e = np.inf
    while True:
        V = np.zeros((m, n), dtype=x.dtype)
        alpha, beta = [], []
        V[0] = x
        k = 0
        for k in range(m):
            w = mv(V[k])
            used += 1
            alpha.append(np.vdot(V[k], w).real)
            for _ in range(2):
                w = w - V[: k + 1].T @ (V[: k + 1].conj() @ w)
            b = np.linalg.norm(w)
            if k + 1 == m or b < 1e-14 * max(1.0, abs(alpha[-1])):
                break
            beta.append(b)
            V[k + 1] = w / b
        T = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
        ev, u = np.linalg.eigh(T)
        e = ev[0]
        x = u[:, 0].astype(V.dtype) @ V[: len(alpha)]
        x /= np.linalg.norm(x)
        # residual of the Ritz pair equals b * |last component|
        res = b * abs(u[-1, 0])
        if res <= tol * max(1.0, abs(e)) or used >= max_matvecs or len(alpha) < m:
            return float(e), x


def _local_ground(L, W1, W2, R, theta, schedule: DmrgSchedule):
    shape = theta.shape
    dim = theta.size

    if dim <= DENSE_LOCAL_DIM:
        h = np.einsum("xwy,wspv,vtqu,zuk->xstzypqk", L, W1, W2, R, optimize=True).reshape(dim, dim)
        h = 0.5 * (h + h.conj().T)
        w, v = np.linalg.eigh(h)
        e, vec = w[0], v[:, 0]
    else:
        def mv(x):
            return E.apply_h2(L, W1, W2, R, x.reshape(shape)).reshape(-1)

        v0 = theta.reshape(-1)
        if not np.any(v0):
            v0 = np.ones(dim, dtype=theta.dtype)
        e, vec = _lanczos_lowest(mv, v0, LOCAL_KRYLOV, schedule.local_tol, schedule.max_local_iters)
    if not (np.isfinite(e) and np.all(np.isfinite(vec))):
        raise DmrgError(f"local eigensolver broke down (energy {e})")
    vec = vec / np.linalg.norm(vec)
    return float(np.real(e)), vec.reshape(shape)


def _split(theta, spec: SweepSpec, rng, move_right: bool):
    a, d1, d2, b = theta.shape
    m = theta.reshape(a * d1, d2 * b)
    if spec.noise > 0:
        pert = rng.standard_normal(m.shape)
        if np.iscomplexobj(m):
            pert = pert + 1j * rng.standard_normal(m.shape)
        pert *= spec.noise * np.linalg.norm(m) / np.linalg.norm(pert)
        # noise only steers the kept basis; the stored state is the projection of theta
        u, _, vh, _ = svd_truncate(m + pert, spec.max_bond, spec.cutoff)
        if move_right:
            rest = u.conj().T @ m
            left, right = u, rest
        else:
            rest = m @ vh.conj().T
            left, right = rest, vh
        kept = np.linalg.norm(rest) ** 2
        weight = max(0.0, 1.0 - kept / np.linalg.norm(m) ** 2)
    else:
        u, s, vh, rep = svd_truncate(m, spec.max_bond, spec.cutoff)
        weight = rep.discarded_weight
        if move_right:
            left, right = u, s[:, None] * vh
        else:
            left, right = u * s[None, :], vh
    k = left.shape[1]
    if move_right:
        right = right / np.linalg.norm(right)
    else:
        left = left / np.linalg.norm(left)
    return left.reshape(a, d1, k), right.reshape(k, d2, b), weight


def dmrg_ground_state(h: MPO, init: MPS, schedule: DmrgSchedule, rng=0) -> DmrgResult:
    """Minimize ``<psi|h|psi>/<psi|psi>`` by two-site sweeps starting from ``init``."""
    if tuple(h.bases) != tuple(init.bases):
        raise ValueError("MPO and initial state live on different site bases")
    n = len(init)
    if n < 2:
        raise ValueError("two-site DMRG needs at least two sites")
    if init.norm() == 0:
        raise ValueError("initial state has zero norm")
    rng = np.random.default_rng(rng)
    psi = canonicalize(init, 0).normalized()
    ts = [np.array(t) for t in psi.tensors]
    ws = list(h.tensors)
    if all(not np.any(t.imag) for t in ts + ws):
        # real problems sweep in float64, which is about four times cheaper
        ts = [t.real.copy() for t in ts]
        ws = [w.real.copy() for w in ws]
    e0 = expectation(psi, h).real
    Ls = [None] * n
    Rs = [None] * n
    Ls[0] = np.ones((1, 1, 1), dtype=ts[0].dtype)
    Rs[n - 1] = Ls[0].copy()
    for i in range(n - 1, 0, -1):
        Rs[i - 1] = E.update_right(Rs[i], ts[i], ws[i])

    energies = []
    max_w = 0.0
    converged = False
    for k, spec, final_stage in schedule.plan():
        for i in range(n - 1):
            theta = np.tensordot(ts[i], ts[i + 1], axes=(2, 0))
            _, theta = _local_ground(Ls[i], ws[i], ws[i + 1], Rs[i + 1], theta, schedule)
            ts[i], ts[i + 1], wgt = _split(theta, spec, rng, move_right=True)
            max_w = max(max_w, wgt)
            Ls[i + 1] = E.update_left(Ls[i], ts[i], ws[i])
        for i in range(n - 2, -1, -1):
            theta = np.tensordot(ts[i], ts[i + 1], axes=(2, 0))
            _, theta = _local_ground(Ls[i], ws[i], ws[i + 1], Rs[i + 1], theta, schedule)
            ts[i], ts[i + 1], wgt = _split(theta, spec, rng, move_right=False)
            max_w = max(max_w, wgt)
            Rs[i] = E.update_right(Rs[i + 1], ts[i + 1], ws[i + 1])
        state = MPS(ts, h.bases, center=0)
        energy = (expectation(state, h) / overlap(state, state)).real
        energies.append(float(energy))
        log.info("sweep %d (M=%d): E=%.12f max bond %d", k, spec.max_bond, energy, state.max_bond)
        if final_stage and spec.noise == 0 and len(energies) >= 2 \
                and abs(energies[-1] - energies[-2]) < schedule.energy_tol:
            converged = True
            break
    state = MPS(ts, h.bases, center=0).normalized()
    if energies[-1] > e0 + schedule.energy_tol:
        log.warning("DMRG finished above the initial energy (%.12g > %.12g)", energies[-1], e0)
    return DmrgResult(
        energy=energies[-1],
        state=state,
        energy_per_sweep=energies,
        converged=converged,
        max_discarded_weight=max_w,
    )
