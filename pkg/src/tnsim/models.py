"""Benchmark Hamiltonians as product-term lists.

* 2D transverse-field Ising model on a snake-ordered ``nx x ny`` lattice.
* Spin-boson model with an exponentially discretized sub-Ohmic bath.
* Two-state retinal photoisomerization model: electronic site, periodic
  torsion in an exponential DVR, a coupling mode and harmonic bath modes.

Retinal energies are handled in hartree and times in atomic units; parameter
files may give energies in eV and are converted on the way in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mps import MPS, basis_state, mps_product
from .sites import ProductTerm, SiteBasis, dvr_grid, dvr_momenta, dvr_second_derivative, term

HARTREE_IN_EV = 27.211386245988


def ev_to_hartree(x):
    return x / HARTREE_IN_EV


def hartree_to_ev(x):
    return x * HARTREE_IN_EV


# ---------------------------------------------------------------- Ising


@dataclass
class IsingParams:
    """``H = -J sum_<ij> sz_i sz_j - h sum_i sx_i - pin sz_0``.

    ``pin=None`` selects the default pinning field ``1e-3 * J`` on snake site 0;
    pass ``0.0`` to switch it off.
    """

    nx: int
    ny: int
    J: float = 1.0
    h: float = 1.0
    bc: str = "open"
    pin: float | None = None

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.nx * self.ny < 2:
            raise ValueError(f"lattice {self.nx}x{self.ny} needs extents >= 1 and at least two sites")
        if self.J <= 0:
            raise ValueError("J must be positive (ferromagnetic)")
        if self.bc not in ("open", "periodic"):
            raise ValueError(f"bc must be 'open' or 'periodic', got {self.bc!r}")

    @property
    def pin_field(self) -> float:
        return 1e-3 * self.J if self.pin is None else float(self.pin)

    @property
    def n_sites(self) -> int:
        return self.nx * self.ny


def snake_index(x: int, y: int, nx: int) -> int:
    """Chain position of lattice site ``(x, y)``; odd rows run backwards."""
    return y * nx + (x if y % 2 == 0 else nx - 1 - x)


def ising_bonds(p: IsingParams) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Nearest-neighbour bonds; periodic wraps only along extents >= 3 (shorter ones would double up)."""
    bonds = []
    for y in range(p.ny):
        for x in range(p.nx):
            if x + 1 < p.nx:
                bonds.append(((x, y), (x + 1, y)))
            elif p.bc == "periodic" and p.nx > 2:
                bonds.append(((x, y), (0, y)))
            if y + 1 < p.ny:
                bonds.append(((x, y), (x, y + 1)))
            elif p.bc == "periodic" and p.ny > 2:
                bonds.append(((x, y), (x, 0)))
    return bonds


def ising2d_terms(p: IsingParams):
    """Return ``(terms, bases, site_map)`` with ``site_map[(x, y)] -> chain index``."""
    site_map = {(x, y): snake_index(x, y, p.nx) for y in range(p.ny) for x in range(p.nx)}
    terms = []
    for a, b in ising_bonds(p):
        i, j = sorted((site_map[a], site_map[b]))
        terms.append(term(-p.J, (i, "sz"), (j, "sz")))
    if p.h != 0:
        terms.extend(term(-p.h, (i, "sx")) for i in range(p.n_sites))
    if p.pin_field != 0:
        terms.append(term(-p.pin_field, (0, "sz")))
    bases = [SiteBasis.spin_half()] * p.n_sites
    return terms, bases, site_map


# ---------------------------------------------------------------- spin-boson


@dataclass
class SpinBosonParams:
    delta: float = 1.0
    eps: float = 0.0
    alpha: float = 0.1
    s: float = 0.5
    omega_c: float = 10.0
    n_modes: int = 4
    d_b: int = 10

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.omega_c <= 0:
            raise ValueError("omega_c must be > 0")
        if self.s <= 0:
            raise ValueError("spectral exponent s must be > 0")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.d_b < 2:
            raise ValueError("d_b must be >= 2")


@dataclass
class BathDiscretization:
    omegas: np.ndarray
    couplings: np.ndarray


def spectral_density(omega, alpha: float, s: float, omega_c: float):
    """``J(w) = 2 pi alpha w_c^(1-s) w^s exp(-w/w_c)``."""
    omega = np.asarray(omega, dtype=float)
    return 2 * np.pi * alpha * omega_c ** (1 - s) * omega**s * np.exp(-omega / omega_c)


def discretize_bath(alpha: float, s: float, omega_c: float, n_modes: int) -> BathDiscretization:
    """Exponential discretization of the spectral density.

    Mode ``k`` sits at ``w_k = -w_c ln(1 - k/(N+1))``, the inverse of the
    cumulative density ``rho(w) = ((N+1)/w_c) exp(-w/w_c)``; its coupling is
    ``g_k^2 = J(w_k) / (pi rho(w_k)) = 2 alpha w_c^(2-s) w_k^s / (N+1)``.
    """
    if n_modes < 1:
        raise ValueError("need at least one bath mode")
    if s <= 0:
        raise ValueError("spectral exponent s must be > 0")
    k = np.arange(1, n_modes + 1)
    omegas = -omega_c * np.log(1.0 - k / (n_modes + 1.0))
    couplings = np.sqrt(2.0 * alpha * omega_c ** (2.0 - s) * omegas**s / (n_modes + 1.0))
    return BathDiscretization(omegas, couplings)


def spin_boson_terms(p: SpinBosonParams):
    """Site 0 is the spin, sites ``1..N`` the bath modes. Zero coefficients are dropped."""
    bath = discretize_bath(p.alpha, p.s, p.omega_c, p.n_modes)
    terms = []
    if p.delta != 0:
        terms.append(term(p.delta / 2, (0, "sx")))
    if p.eps != 0:
        terms.append(term(p.eps / 2, (0, "sz")))
    for k, (w, g) in enumerate(zip(bath.omegas, bath.couplings), start=1):
        terms.append(term(w, (k, "n")))
        if g != 0:
            # (sz/2) g (b + bdag) = (g/sqrt(2)) sz x_dimless
            terms.append(term(g / math.sqrt(2.0), (0, "sz"), (k, "x_dimless")))
    bases = [SiteBasis.spin_half()] + [SiteBasis.boson(p.d_b)] * p.n_modes
    return terms, bases


def spin_boson_initial_state(p: SpinBosonParams) -> MPS:
    """Spin up, every mode in its vacuum; bond dimension 1."""
    _, bases = spin_boson_terms(p)
    return mps_product(bases, [basis_state(b, 0) for b in bases])


# ---------------------------------------------------------------- exponential DVR


@dataclass
class ExpDvrBasis:
    n_points: int
    inertia: float
    grid: np.ndarray = field(repr=False)
    kinetic: np.ndarray = field(repr=False)


def exp_dvr(n_points: int, inertia: float) -> ExpDvrBasis:
    """Periodic grid and kinetic matrix ``-(1/2I) d^2/dtheta^2`` from plane waves ``exp(i k theta)``."""
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError(f"exponential DVR needs an odd number of points >= 3, got {n_points}")
    if inertia <= 0:
        raise ValueError("inertia must be > 0")
    kin = dvr_second_derivative(n_points) / (2.0 * inertia)
    return ExpDvrBasis(n_points, inertia, dvr_grid(n_points), kin)


def free_rotor_levels(n_points: int, inertia: float) -> np.ndarray:
    return np.sort(dvr_momenta(n_points).astype(float) ** 2 / (2.0 * inertia))


# ---------------------------------------------------------------- retinal


@dataclass
class RetinalParams:
    """Two-state torsion/coupling-mode/bath model.

    Energies (``W0, W1, E1, omega_c, kappa_c, lam`` and the bath ``(omega_j,
    kappa_j)`` pairs) are in ``input_units``; ``inertia`` is in inverse energy
    units of the same system. ``full_model`` requires the 23-mode bath.
    """

    inertia: float
    W0: float
    W1: float
    E1: float
    omega_c: float
    kappa_c: float
    lam: float
    bath: list = field(default_factory=list)
    n_theta: int = 51
    d_modes: int = 6
    input_units: str = "ev"
    full_model: bool = True

    def __post_init__(self):
        self.bath = [tuple(float(x) for x in pair) for pair in self.bath]
        if self.input_units not in ("ev", "hartree"):
            raise ValueError(f"input_units must be 'ev' or 'hartree', got {self.input_units!r}")
        if self.n_theta < 3 or self.n_theta % 2 == 0:
            raise ValueError(f"n_theta must be odd and >= 3, got {self.n_theta}")
        if self.full_model and len(self.bath) != 23:
            raise ValueError(f"the full model has 23 bath modes, got {len(self.bath)}")
        if any(len(pair) != 2 for pair in self.bath):
            raise ValueError("bath entries are (omega_j, kappa_j) pairs")
        if self.inertia <= 0 or self.omega_c <= 0 or any(w <= 0 for w, _ in self.bath):
            raise ValueError("inertia and all frequencies must be > 0")
        if self.d_modes < 2:
            raise ValueError("d_modes must be >= 2")

    def in_hartree(self) -> "RetinalParams":
        if self.input_units == "hartree":
            return self
        conv = ev_to_hartree
        return RetinalParams(
            inertia=self.inertia * HARTREE_IN_EV,
            W0=conv(self.W0), W1=conv(self.W1), E1=conv(self.E1),
            omega_c=conv(self.omega_c), kappa_c=conv(self.kappa_c), lam=conv(self.lam),
            bath=[(conv(w), conv(k)) for w, k in self.bath],
            n_theta=self.n_theta, d_modes=self.d_modes, input_units="hartree",
            full_model=self.full_model,
        )

    @property
    def n_sites(self) -> int:
        return 3 + len(self.bath)


def _harmonic(site: int, omega: float) -> list[ProductTerm]:
    return [term(omega / 2, (site, "x2_dimless")), term(omega / 2, (site, "p2_dimless"))]


def retinal_bases(p: RetinalParams) -> list[SiteBasis]:
    return [SiteBasis.electronic(), SiteBasis.exp_dvr(p.n_theta)] + [SiteBasis.boson(p.d_modes)] * (
        1 + len(p.bath)
    )


def retinal_terms(p: RetinalParams):
    """Sites: electronic, torsion (DVR), coupling mode, bath modes. Energies in hartree."""
    q = p.in_hartree()
    terms = [term(1.0 / (2.0 * q.inertia), (1, "dvr_kin"))]
    # S0: (W0/2)(1 - cos)
    if q.W0 != 0:
        terms += [term(q.W0 / 2, (0, "proj0")), term(-q.W0 / 2, (0, "proj0"), (1, "dvr_cos"))]
    # S1: E1 - (W1/2)(1 - cos)
    if q.E1 - q.W1 / 2 != 0:
        terms.append(term(q.E1 - q.W1 / 2, (0, "proj1")))
    if q.W1 != 0:
        terms.append(term(q.W1 / 2, (0, "proj1"), (1, "dvr_cos")))
    terms += _harmonic(2, q.omega_c)
    if q.kappa_c != 0:
        terms.append(term(q.kappa_c, (0, "proj1"), (2, "x_dimless")))
    if q.lam != 0:
        terms.append(term(q.lam, (0, "flip"), (2, "x_dimless")))
    for j, (w, kap) in enumerate(q.bath, start=3):
        terms += _harmonic(j, w)
        if kap != 0:
            terms.append(term(kap, (0, "proj1"), (j, "x_dimless")))
    return terms, retinal_bases(q)


def retinal_nuclear_terms(p: RetinalParams):
    """Ground-surface nuclear Hamiltonian on sites ``1..`` of the full chain, re-indexed from 0."""
    q = p.in_hartree()
    terms = [term(1.0 / (2.0 * q.inertia), (0, "dvr_kin"))]
    if q.W0 != 0:
        terms += [term(q.W0 / 2, (0, "id")), term(-q.W0 / 2, (0, "dvr_cos"))]
    terms += _harmonic(1, q.omega_c)
    for j, (w, _) in enumerate(q.bath, start=2):
        terms += _harmonic(j, w)
    return terms, retinal_bases(q)[1:]


def retinal_observables() -> dict:
    return {"p_s0": (0, "proj0"), "p_s1": (0, "proj1"), "p_trans": (1, "dvr_trans")}


def retinal_initial_state(p: RetinalParams, max_bond: int = 4, seed: int = 0) -> MPS:
    """Ground state of the S0 nuclear Hamiltonian (via DMRG) placed on the S1 surface."""
    from .dmrg import DmrgSchedule, dmrg_ground_state
    from .mpo import mpo_from_terms
    from .mps import random_mps

    terms, bases = retinal_nuclear_terms(p)
    h = mpo_from_terms(terms, bases)
    sched = DmrgSchedule.ramp([max_bond, max_bond], energy_tol=1e-12, local_tol=1e-12)
    res = dmrg_ground_state(h, random_mps(bases, max_bond, seed, real=True), sched, rng=seed)
    nuclear = res.state
    el = SiteBasis.electronic()
    first = basis_state(el, 1).reshape(1, 2, 1)
    return MPS([first, *nuclear.tensors], [el, *nuclear.bases], center=None).normalized()


def retinal_reduced_bath(n_modes: int = 4):
    """Placeholder bath for desk-scale tests: frequencies and shifts in eV (not literature values)."""
    omegas = np.linspace(0.02, 0.2, n_modes)
    kappas = 0.02 * np.ones(n_modes)
    return [(float(w), float(k)) for w, k in zip(omegas, kappas)]
