"""Lanczos approximation of ``exp(tau H) v`` for Hermitian ``H``."""

from __future__ import annotations

import numpy as np


class KrylovError(RuntimeError):
    pass


def _expm_tridiag(alpha, beta, tau):
    T = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
    w, u = np.linalg.eigh(T)
    return u @ (np.exp(tau * w) * u[0].conj())


def expm_krylov(matvec, v: np.ndarray, tau: complex, krylov_dim: int = 30, tol: float = 1e-12,
                max_splits: int = 8) -> np.ndarray:
    """Return ``exp(tau * H) @ v`` where ``matvec`` applies ``H``.

    The Lanczos basis is fully reorthogonalized. Convergence uses the usual a
    posteriori bound ``beta_m |[exp(tau T_m) e_1]_m| <= tol``, relative to
    ``|v|``. When ``krylov_dim`` vectors do not suffice, ``tau`` is split in
    halves (at most ``max_splits`` times) before giving up with
    :class:`KrylovError`.
    """
    try:
        return _expm_krylov_once(matvec, v, tau, krylov_dim, tol)
    except KrylovError:
        if max_splits <= 0:
            raise
    half = expm_krylov(matvec, v, tau / 2, krylov_dim, tol, max_splits - 1)
    return expm_krylov(matvec, half, tau / 2, krylov_dim, tol, max_splits - 1)


def _expm_krylov_once(matvec, v, tau, krylov_dim, tol):
    shape = v.shape
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return np.zeros_like(v)
    n = v.size
    m = max(1, min(krylov_dim, n))
    V = np.zeros((m + 1, n), dtype=np.complex128)
    V[0] = v.reshape(-1) / nrm
    alpha = np.zeros(m)
    beta = np.zeros(m)
    for j in range(m):
        w = matvec(V[j].reshape(shape)).reshape(-1)
        alpha[j] = np.vdot(V[j], w).real
        for _ in range(2):
            w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        c = _expm_tridiag(alpha[: j + 1], beta[:j], tau)
        scale = max(1.0, float(np.max(np.abs(alpha[: j + 1]))))
        if beta[j] <= 1e-13 * scale or j + 1 == n:
            # invariant subspace: the result is exact
            return (nrm * (c @ V[: j + 1])).reshape(shape)
        if beta[j] * abs(c[j]) <= tol:
            return (nrm * (c @ V[: j + 1])).reshape(shape)
        V[j + 1] = w / beta[j]
    raise KrylovError(f"Krylov exponential not converged with {m} vectors (tau={tau})")
