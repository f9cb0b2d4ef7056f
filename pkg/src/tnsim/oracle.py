"""Brute-force reference solutions on the full Hilbert space.

Everything here works directly from the symbolic term list, never from an
MPO, so agreement with the tensor-network solvers is a genuine cross-check.
"""

from __future__ import annotations

import logging
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .sites import ProductTerm, SiteBasis, local_op, validate_terms
from .tensor import DTYPE
from .trajectory import ObservableSpec, Trajectory, is_local_spec

log = logging.getLogger(__name__)

MAX_GROUND_DIM = 2**20
MAX_PROPAGATE_DIM = 2**18


class OracleError(RuntimeError):
    pass


class DenseHamiltonian:
    """Full-space action of a sum of product terms."""

    def __init__(self, terms: Sequence[ProductTerm], bases: Sequence[SiteBasis], max_dim: int = MAX_GROUND_DIM):
        terms = list(terms)
        validate_terms(terms, bases)
        self.terms = terms
        self.bases = tuple(bases)
        self.dims = [b.dim for b in bases]
        self.dimension = int(np.prod(self.dims, dtype=float))
        if self.dimension > max_dim:
            raise OracleError(f"Hilbert dimension {self.dimension} exceeds the cap {max_dim}")
        self._ops = [
            (t.coefficient, [(s, local_op(self.bases[s], name)) for s, name in t.factors]) for t in terms
        ]
        self._sparse = None

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Apply the terms one by one to the vector reshaped as a site tensor."""
        psi = np.asarray(v, dtype=DTYPE).reshape(self.dims)
        out = np.zeros_like(psi)
        for c, factors in self._ops:
            w = psi
            for s, op in factors:
                w = np.moveaxis(np.tensordot(op, w, axes=(1, s)), 0, s)
            out += c * w
        return out.reshape(-1)

    def to_sparse(self) -> sp.csr_matrix:
        if self._sparse is None:
            n = len(self.dims)
            mat = sp.csr_matrix((self.dimension, self.dimension), dtype=DTYPE)
            for c, factors in self._ops:
                ops = dict(factors)
                # runs of identities collapse into one identity block
                m = sp.identity(1, dtype=DTYPE, format="csr")
                run = 1
                for s in range(n):
                    if s in ops:
                        if run > 1:
                            m = sp.kron(m, sp.identity(run, dtype=DTYPE, format="csr"), format="csr")
                        m = sp.kron(m, sp.csr_matrix(ops[s]), format="csr")
                        run = 1
                    else:
                        run *= self.dims[s]
                if run > 1:
                    m = sp.kron(m, sp.identity(run, dtype=DTYPE, format="csr"), format="csr")
                mat = mat + c * m
            mat.sum_duplicates()
            self._sparse = mat.tocsr()
        return self._sparse

    def to_dense(self) -> np.ndarray:
        if self.dimension > 2**12:
            raise OracleError("dense matrix only available up to dimension 4096")
        return self.to_sparse().toarray()


def local_operator_action(bases: Sequence[SiteBasis], site: int, name: str, v: np.ndarray) -> np.ndarray:
    dims = [b.dim for b in bases]
    psi = np.asarray(v, dtype=DTYPE).reshape(dims)
    op = local_op(bases[site], name)
    return np.moveaxis(np.tensordot(op, psi, axes=(1, site)), 0, site).reshape(-1)


def lanczos_ground(matvec, dim: int, seed: int = 0, tol: float = 1e-10, krylov: int = 60,
                   max_restarts: int = 200, v0: np.ndarray | None = None):
    """Lowest eigenpair of a Hermitian operator by restarted Lanczos.

    Every Krylov vector is reorthogonalized against all previous ones (twice).
    Converged when ``|H x - E x| <= tol * max(|ritz values|, 1)``.
    """
    rng = np.random.default_rng(seed)
    if v0 is None:
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    else:
        v = np.asarray(v0, dtype=DTYPE).copy()
    v = v / np.linalg.norm(v)
    m = min(krylov, dim)
    scale = 1.0
    for restart in range(max_restarts):
        V = np.zeros((m + 1, dim), dtype=DTYPE)
        V[0] = v
        alpha = np.zeros(m)
        beta = np.zeros(m)
        k = m
        for j in range(m):
            w = matvec(V[j])
            alpha[j] = np.vdot(V[j], w).real
            for _ in range(2):
                w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-14 * max(scale, abs(alpha[j]), 1.0):
                k = j + 1
                break
            V[j + 1] = w / beta[j]
        T = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
        evals, evecs = np.linalg.eigh(T)
        scale = max(scale, float(np.max(np.abs(evals))))
        energy = float(evals[0])
        x = evecs[:, 0] @ V[:k]
        x /= np.linalg.norm(x)
        res = np.linalg.norm(matvec(x) - energy * x)
        log.debug("lanczos restart %d: E=%.15g residual=%.3e", restart, energy, res)
        if res <= tol * scale or k < m:
            return energy, x
        v = x
    raise OracleError(f"Lanczos did not converge after {max_restarts} restarts (residual {res:.3e})")


def ed_ground(terms: Sequence[ProductTerm], bases: Sequence[SiteBasis], seed: int = 0, tol: float = 1e-10):
    """Ground energy and unit ground vector of ``sum(terms)``."""
    ham = DenseHamiltonian(terms, bases, MAX_GROUND_DIM)
    if ham.dimension <= 64:
        evals, evecs = np.linalg.eigh(ham.to_dense())
        return float(evals[0]), evecs[:, 0].astype(DTYPE)
    mat = ham.to_sparse()
    return lanczos_ground(mat.dot, ham.dimension, seed=seed, tol=tol)


def expectation_dense(ham_or_spec, bases, v: np.ndarray) -> complex:
    if is_local_spec(ham_or_spec):
        site, name = ham_or_spec
        return complex(np.vdot(v, local_operator_action(bases, site, name, v)))
    ham = ham_or_spec if isinstance(ham_or_spec, DenseHamiltonian) else DenseHamiltonian(ham_or_spec, bases)
    return complex(np.vdot(v, ham.matvec(v)))


def exact_propagate(terms: Sequence[ProductTerm], bases: Sequence[SiteBasis], psi0: np.ndarray, dt: float,
                    n_steps: int, observables: Mapping[str, ObservableSpec] | None = None) -> Trajectory:
    """Sample ``exp(-i H t) psi0`` at ``t = k dt`` for ``k = 0..n_steps``."""
    ham = DenseHamiltonian(terms, bases, MAX_PROPAGATE_DIM)
    psi = np.asarray(psi0, dtype=DTYPE).reshape(-1)
    if psi.size != ham.dimension:
        raise OracleError("initial vector has the wrong dimension")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise OracleError("initial vector must be normalized")
    observables = dict(observables or {})
    obs_ops = {
        k: (spec if is_local_spec(spec) else DenseHamiltonian(spec, bases, MAX_PROPAGATE_DIM))
        for k, spec in observables.items()
    }
    mat = ham.to_sparse()
    caps = _max_schmidt_cap(ham.dims)
    traj = Trajectory()

    def sample(step: int, v: np.ndarray) -> None:
        nrm = float(np.linalg.norm(v))
        energy = float(np.vdot(v, mat.dot(v)).real) / nrm**2
        obs = {k: expectation_dense(op, bases, v) / nrm**2 for k, op in obs_ops.items()}
        traj.record(step * dt, obs, nrm, energy, caps)

    sample(0, psi)
    gen = (-1j) * mat
    step = 0
    while step < n_steps:
        # batches of grid points let scipy reuse its norm estimates; chunking bounds memory
        k = min(64, n_steps - step)
        states = expm_multiply(gen, psi, start=0.0, stop=k * dt, num=k + 1, endpoint=True)
        for j in range(1, k + 1):
            if not np.all(np.isfinite(states[j])):
                raise OracleError(f"propagation produced non-finite values at step {step + j}")
            sample(step + j, states[j])
        psi = states[k]
        step += k
    return traj


def _max_schmidt_cap(dims: Sequence[int]) -> int:
    best = 1
    for cut in range(1, len(dims)):
        best = max(best, min(int(np.prod(dims[:cut])), int(np.prod(dims[cut:]))))
    return best
