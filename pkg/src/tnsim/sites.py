"""Local Hilbert spaces, named single-site operators and symbolic product terms.

Operator names understood by :func:`local_op`:

===============  ==========================================================
basis            names
===============  ==========================================================
any              ``id``
spin_half        ``sx sy sz sp sm up down`` (Pauli matrices, index 0 = up)
electronic       ``proj0 proj1 flip sx sy sz`` (``flip = |0><1| + |1><0|``)
boson            ``b bdag n x_dimless p_dimless x2_dimless p2_dimless``
exp_dvr          ``dvr_kin dvr_cos dvr_sin dvr_theta dvr_cis dvr_trans``
===============  ==========================================================

``x_dimless = (b + bdag)/sqrt(2)`` and ``p_dimless = i(bdag - b)/sqrt(2)``.
The squared coordinates are the projections of the untruncated operators onto
the kept levels, so ``x2_dimless + p2_dimless = 2n + 1`` exactly and a mode
``(w/2)(p^2 + x^2)`` has spectrum ``w(n + 1/2)`` at any truncation.

``dvr_kin`` is ``-d^2/dtheta^2`` on the periodic grid (eigenvalues ``k^2``);
callers attach the ``1/(2I)`` prefactor as a term coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .tensor import DTYPE

KINDS = ("spin_half", "boson", "exp_dvr", "electronic")
HERMITIAN_NAMES = frozenset(
    {
        "id", "sx", "sy", "sz", "up", "down", "proj0", "proj1", "flip", "n",
        "x_dimless", "p_dimless", "x2_dimless", "p2_dimless",
        "dvr_kin", "dvr_cos", "dvr_sin", "dvr_theta", "dvr_cis", "dvr_trans",
    }
)


class OperatorError(ValueError):
    """Unknown operator name or an operator that does not fit its basis."""


@dataclass(frozen=True)
class SiteBasis:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind in ("spin_half", "electronic") and self.dim != 2:
            raise ValueError(f"{self.kind} basis has dimension 2, got {self.dim}")
        if self.kind == "boson" and self.dim < 2:
            raise ValueError("boson truncation must keep at least 2 levels")
        if self.kind == "exp_dvr" and (self.dim < 3 or self.dim % 2 == 0):
            raise ValueError(f"exp_dvr needs an odd number of points >= 3, got {self.dim}")

    @classmethod
    def spin_half(cls) -> "SiteBasis":
        return cls("spin_half", 2)

    @classmethod
    def electronic(cls) -> "SiteBasis":
        return cls("electronic", 2)

    @classmethod
    def boson(cls, levels: int) -> "SiteBasis":
        return cls("boson", int(levels))

    @classmethod
    def exp_dvr(cls, n_points: int) -> "SiteBasis":
        return cls("exp_dvr", int(n_points))

    def op(self, name: str) -> np.ndarray:
        return local_op(self, name)


def dvr_grid(n_points: int) -> np.ndarray:
    """Grid ``theta_j = 2 pi j / N`` of the periodic exponential DVR."""
    return 2.0 * np.pi * np.arange(n_points) / n_points


def dvr_momenta(n_points: int) -> np.ndarray:
    half = (n_points - 1) // 2
    return np.arange(-half, half + 1)


def dvr_transform(n_points: int) -> np.ndarray:
    """Unitary ``U[j, k] = exp(i k theta_j)/sqrt(N)`` from plane waves to grid points."""
    theta = dvr_grid(n_points)
    k = dvr_momenta(n_points)
    return np.exp(1j * np.outer(theta, k)) / math.sqrt(n_points)


def dvr_second_derivative(n_points: int) -> np.ndarray:
    """Grid representation of ``-d^2/dtheta^2``, built as ``U diag(k^2) U^dagger``."""
    u = dvr_transform(n_points)
    k = dvr_momenta(n_points)
    t = (u * (k.astype(float) ** 2)[np.newaxis, :]) @ u.conj().T
    # exact result is real symmetric; strip rounding noise
    t = 0.5 * (t + t.conj().T)
    return t.real.copy()


def _boson_ladder(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)


def _boson_squared_coordinates(d: int):
    # project the (d+2)-level operators so the top levels are not truncated
    big = _boson_ladder(d + 2)
    x = (big + big.T) / math.sqrt(2.0)
    p = 1j * (big.T - big) / math.sqrt(2.0)
    return (x @ x)[:d, :d], (p @ p)[:d, :d]


@lru_cache(maxsize=None)
def _cached_op(kind: str, dim: int, name: str) -> np.ndarray:
    if name == "id":
        return np.eye(dim, dtype=DTYPE)
    if kind in ("spin_half", "electronic"):
        mats = {
            "sx": [[0, 1], [1, 0]],
            "sy": [[0, -1j], [1j, 0]],
            "sz": [[1, 0], [0, -1]],
        }
        if kind == "spin_half":
            mats.update(sp=[[0, 1], [0, 0]], sm=[[0, 0], [1, 0]], up=[[1, 0], [0, 0]], down=[[0, 0], [0, 1]])
        else:
            mats.update(proj0=[[1, 0], [0, 0]], proj1=[[0, 0], [0, 1]], flip=[[0, 1], [1, 0]])
        if name in mats:
            return np.array(mats[name], dtype=DTYPE)
    elif kind == "boson":
        b = _boson_ladder(dim)
        if name == "b":
            return b.astype(DTYPE)
        if name == "bdag":
            return b.T.astype(DTYPE)
        if name == "n":
            return np.diag(np.arange(dim, dtype=float)).astype(DTYPE)
        if name == "x_dimless":
            return ((b + b.T) / math.sqrt(2.0)).astype(DTYPE)
        if name == "p_dimless":
            return (1j * (b.T - b) / math.sqrt(2.0)).astype(DTYPE)
        if name in ("x2_dimless", "p2_dimless"):
            x2, p2 = _boson_squared_coordinates(dim)
            return np.asarray(x2 if name == "x2_dimless" else p2, dtype=DTYPE)
    elif kind == "exp_dvr":
        theta = dvr_grid(dim)
        if name == "dvr_kin":
            return dvr_second_derivative(dim).astype(DTYPE)
        if name == "dvr_cos":
            return np.diag(np.cos(theta)).astype(DTYPE)
        if name == "dvr_sin":
            return np.diag(np.sin(theta)).astype(DTYPE)
        if name == "dvr_theta":
            # principal branch (-pi, pi]
            return np.diag(np.angle(np.exp(1j * theta))).astype(DTYPE)
        if name == "dvr_trans":
            return np.diag((np.cos(theta) < 0).astype(float)).astype(DTYPE)
        if name == "dvr_cis":
            return np.diag((np.cos(theta) >= 0).astype(float)).astype(DTYPE)
    raise OperatorError(f"operator {name!r} is not defined on a {kind} basis")


def local_op(basis: SiteBasis, name: str) -> np.ndarray:
    """Matrix of the named operator on ``basis`` (a fresh copy)."""
    return _cached_op(basis.kind, basis.dim, name).copy()


def dvr_potential(n_points: int, f) -> np.ndarray:
    """Diagonal grid matrix of an arbitrary potential ``f(theta)``."""
    return np.diag(np.asarray(f(dvr_grid(n_points)), dtype=DTYPE))


def is_hermitian_name(name: str) -> bool:
    return name in HERMITIAN_NAMES


@dataclass(frozen=True)
class ProductTerm:
    """``coefficient * prod_k op(name_k) at site_k`` with strictly increasing sites."""

    coefficient: complex
    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        factors = tuple((int(s), str(n)) for s, n in self.factors)
        object.__setattr__(self, "factors", factors)
        c = complex(self.coefficient)
        object.__setattr__(self, "coefficient", c)
        if not factors:
            raise ValueError("a product term needs at least one factor")
        sites = [s for s, _ in factors]
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise ValueError(f"term sites must be strictly increasing, got {sites}")
        if not (math.isfinite(c.real) and math.isfinite(c.imag)) or c == 0:
            raise ValueError(f"term coefficient must be finite and nonzero, got {c}")

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.factors)


def term(coefficient, *factors) -> ProductTerm:
    """Shorthand: ``term(-1.0, (0, "sz"), (1, "sz"))``."""
    return ProductTerm(coefficient, tuple(factors))


def validate_terms(terms: Sequence[ProductTerm], bases: Sequence[SiteBasis]) -> None:
    if not terms:
        raise ValueError("empty term list")
    n = len(bases)
    for t in terms:
        for site, name in t.factors:
            if not 0 <= site < n:
                raise ValueError(f"site index {site} out of range for {n} sites")
            local_op(bases[site], name)
