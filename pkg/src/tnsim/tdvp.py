"""Real-time TDVP with symmetric projector-splitting sweeps.

One time step sweeps left to right with ``dt/2`` and back right to left with
``dt/2`` (second order). Site tensors are propagated forward with the local
effective Hamiltonian and the bond (or single-site, for the two-site variant)
tensors backward, all through Krylov exponentials.

The one-site integrator cannot change bond dimensions, so it refuses states
whose bonds are below ``min(max_bond, geometric cap)``: run
:func:`tnsim.mps.expand_bond` first (the hybrid scheme does this itself when
it switches over).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import env as E
from .krylov import KrylovError, expm_krylov
from .mpo import mpo_from_terms
from .mps import MPO, MPS, canonicalize, expand_bond, expectation, geometric_caps, overlap, site_expectations
from .sites import local_op
from .tensor import qr_orthonormalize, svd_truncate
from .trajectory import ObservableSpec, Trajectory, is_local_spec

log = logging.getLogger(__name__)

SCHEMES = ("one-site", "two-site", "hybrid")


class TdvpError(RuntimeError):
    pass


@dataclass
class TdvpConfig:
    dt: float
    n_steps: int
    scheme: str = "hybrid"
    switch_step: int = 10
    max_bond: int = 16
    cutoff: float = 1e-12
    krylov_dim: int = 32
    krylov_tol: float = 1e-13
    # bond target for an expand_bond pass before the first step (0 = off)
    pre_expand: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.n_steps < 0:
            raise ValueError("n_steps must be >= 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.max_bond < 1 or self.krylov_dim < 2:
            raise ValueError("max_bond must be >= 1 and krylov_dim >= 2")
        if self.pre_expand < 0:
            raise ValueError("pre_expand must be >= 0")

    @property
    def total_time(self) -> float:
        return self.dt * self.n_steps


def bonds_saturated(psi: MPS, max_bond: int) -> bool:
    caps = geometric_caps(psi.bases)
    return all(b == min(max_bond, c) for b, c in zip(psi.bond_dims, caps))


class _Sweeper:
    """Mutable working copy of a state plus its environments."""

    def __init__(self, h: MPO, psi: MPS, cfg: TdvpConfig):
        self.ws = h.tensors
        self.cfg = cfg
        psi = canonicalize(psi, 0)
        self.ts = [np.array(t) for t in psi.tensors]
        n = len(self.ts)
        self.Ls = [None] * n
        self.Rs = [None] * n
        self.Ls[0] = E.edge_env()
        self.Rs[n - 1] = E.edge_env()
        for i in range(n - 1, 0, -1):
            self.Rs[i - 1] = E.update_right(self.Rs[i], self.ts[i], self.ws[i])
        self.bases = psi.bases
        self.step_index = 0
        self.discarded = 0.0

    def state(self) -> MPS:
        return MPS(self.ts, self.bases, center=0)

    def _expm(self, mv, x, tau):
        try:
            return expm_krylov(mv, x, tau, self.cfg.krylov_dim, self.cfg.krylov_tol)
        except KrylovError as err:
            raise TdvpError(f"Krylov exponential failed at step {self.step_index}: {err}") from err

    # -- one-site
    def one_site_step(self, dt: float) -> None:
        n = len(self.ts)
        tau = -0.5j * dt
        ts, ws, Ls, Rs = self.ts, self.ws, self.Ls, self.Rs
        for i in range(n):
            L, W, R = Ls[i], ws[i], Rs[i]
            ts[i] = self._expm(lambda x: E.apply_h1(L, W, R, x), ts[i], tau)
            if i == n - 1:
                break
            a, d, b = ts[i].shape
            q, c = qr_orthonormalize(ts[i].reshape(a * d, b), "left")
            ts[i] = q.reshape(a, d, -1)
            Ls[i + 1] = E.update_left(Ls[i], ts[i], ws[i])
            Ln, Rn = Ls[i + 1], Rs[i]
            c = self._expm(lambda x: E.apply_h0(Ln, Rn, x), c, -tau)
            ts[i + 1] = np.tensordot(c, ts[i + 1], axes=(1, 0))
        for i in range(n - 1, -1, -1):
            L, W, R = Ls[i], ws[i], Rs[i]
            ts[i] = self._expm(lambda x: E.apply_h1(L, W, R, x), ts[i], tau)
            if i == 0:
                break
            a, d, b = ts[i].shape
            q, c = qr_orthonormalize(ts[i].reshape(a, d * b), "right")
            ts[i] = q.reshape(-1, d, b)
            Rs[i - 1] = E.update_right(Rs[i], ts[i], ws[i])
            Ln, Rn = Ls[i], Rs[i - 1]
            c = self._expm(lambda x: E.apply_h0(Ln, Rn, x), c, -tau)
            ts[i - 1] = np.tensordot(ts[i - 1], c, axes=(2, 0))

    # -- two-site
    def two_site_step(self, dt: float) -> float:
        n = len(self.ts)
        tau = -0.5j * dt
        ts, ws, Ls, Rs = self.ts, self.ws, self.Ls, self.Rs
        cfg = self.cfg
        worst = 0.0
        for i in range(n - 1):
            L, W1, W2, R = Ls[i], ws[i], ws[i + 1], Rs[i + 1]
            theta = np.tensordot(ts[i], ts[i + 1], axes=(2, 0))
            theta = self._expm(lambda x: E.apply_h2(L, W1, W2, R, x), theta, tau)
            a, d1, d2, b = theta.shape
            u, s, vh, rep = svd_truncate(theta.reshape(a * d1, d2 * b), cfg.max_bond, cfg.cutoff)
            worst = max(worst, rep.discarded_weight)
            ts[i] = u.reshape(a, d1, -1)
            ts[i + 1] = (s[:, None] * vh).reshape(-1, d2, b)
            Ls[i + 1] = E.update_left(Ls[i], ts[i], ws[i])
            if i < n - 2:
                Ln, Wn, Rn = Ls[i + 1], ws[i + 1], Rs[i + 1]
                ts[i + 1] = self._expm(lambda x: E.apply_h1(Ln, Wn, Rn, x), ts[i + 1], -tau)
        for i in range(n - 2, -1, -1):
            L, W1, W2, R = Ls[i], ws[i], ws[i + 1], Rs[i + 1]
            theta = np.tensordot(ts[i], ts[i + 1], axes=(2, 0))
            theta = self._expm(lambda x: E.apply_h2(L, W1, W2, R, x), theta, tau)
            a, d1, d2, b = theta.shape
            u, s, vh, rep = svd_truncate(theta.reshape(a * d1, d2 * b), cfg.max_bond, cfg.cutoff)
            worst = max(worst, rep.discarded_weight)
            ts[i] = (u * s[None, :]).reshape(a, d1, -1)
            ts[i + 1] = vh.reshape(-1, d2, b)
            Rs[i] = E.update_right(Rs[i + 1], ts[i + 1], ws[i + 1])
            if i > 0:
                Ln, Wn, Rn = Ls[i], ws[i], Rs[i]
                ts[i] = self._expm(lambda x: E.apply_h1(Ln, Wn, Rn, x), ts[i], -tau)
        return worst


def _observable_evaluator(h: MPO, observables: Mapping[str, ObservableSpec]):
    local = {k: v for k, v in observables.items() if is_local_spec(v)}
    mpos = {k: (v if isinstance(v, MPO) else mpo_from_terms(v, h.bases))
            for k, v in observables.items() if not is_local_spec(v)}

    def evaluate(psi: MPS, nrm2: float) -> dict:
        if psi.center != 0:
            psi = canonicalize(psi, 0)
        out = {}
        for k, (site, name) in local.items():
            out[k] = site_expectations(psi, {site: local_op(psi.bases[site], name)})[site]
        for k, m in mpos.items():
            out[k] = expectation(psi, m) / nrm2
        return {k: out[k] for k in observables}

    return evaluate


def tdvp_evolve(h: MPO, psi0: MPS, cfg: TdvpConfig,
                observables: Mapping[str, ObservableSpec] | None = None) -> Trajectory:
    """Evolve ``psi0`` under ``h`` for ``cfg.n_steps`` steps, sampling every step.

    ``observables`` maps names to ``(site, operator_name)`` pairs, product-term
    lists or MPOs. Raises :class:`TdvpError` if a one-site run is requested on
    a state whose bonds have not been expanded.

    With ``cfg.pre_expand > 0`` the start state is first padded by
    :func:`expand_bond` (the state itself is unchanged). Two-site steps from a
    product state otherwise cannot see couplings between non-adjacent sites
    during the first step, which leaves an O(dt) global error.
    """
    if tuple(h.bases) != tuple(psi0.bases):
        raise ValueError("MPO and state live on different site bases")
    observables = dict(observables or {})
    if cfg.pre_expand:
        psi0 = expand_bond(psi0, h, min(cfg.pre_expand, cfg.max_bond))
    if cfg.scheme == "one-site" and not bonds_saturated(psi0, cfg.max_bond):
        raise TdvpError(
            f"one-site TDVP needs bonds min(max_bond={cfg.max_bond}, cap) but the state has "
            f"{psi0.bond_dims}; call expand_bond(psi, h, {cfg.max_bond}) first"
        )
    evaluate = _observable_evaluator(h, observables)
    sw = _Sweeper(h, psi0, cfg)
    traj = Trajectory()

    def sample(step: int, discarded: float) -> None:
        psi = sw.state()
        nrm2 = overlap(psi, psi).real
        energy = expectation(psi, h).real / nrm2
        traj.record(step * cfg.dt, evaluate(psi, nrm2), float(np.sqrt(nrm2)), energy, psi.max_bond, discarded)

    sample(0, 0.0)
    one_site = cfg.scheme == "one-site"
    for step in range(1, cfg.n_steps + 1):
        sw.step_index = step
        if cfg.scheme == "hybrid" and not one_site:
            psi = sw.state()
            if bonds_saturated(psi, cfg.max_bond) or step > cfg.switch_step:
                if not bonds_saturated(psi, cfg.max_bond):
                    psi = expand_bond(psi, h, cfg.max_bond)
                    sw = _Sweeper(h, psi, cfg)
                    sw.step_index = step
                one_site = True
                log.info("hybrid TDVP switches to one-site updates at step %d", step)
        if one_site:
            sw.one_site_step(cfg.dt)
            discarded = 0.0
        else:
            discarded = sw.two_site_step(cfg.dt)
        if not all(np.all(np.isfinite(t)) for t in sw.ts):
            raise TdvpError(f"non-finite tensor entries at step {step}")
        sample(step, discarded)
    traj.final_state = sw.state()
    return traj
