"""Sampled time evolution records shared by the MPS integrator and the oracle."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .sites import ProductTerm

# an observable is either a single named operator on one site or a sum of product terms
ObservableSpec = Union[tuple[int, str], Sequence[ProductTerm]]


def is_local_spec(spec) -> bool:
    return isinstance(spec, tuple) and len(spec) == 2 and isinstance(spec[0], (int, np.integer))


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    observables: dict[str, list[complex]] = field(default_factory=dict)
    norms: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    bond_profile: list[int] = field(default_factory=list)
    discarded: list[float] = field(default_factory=list)
    final_state: object = field(default=None, repr=False, compare=False)

    def record(self, t: float, obs: Mapping[str, complex], norm: float, energy: float, max_bond: int,
               discarded: float = 0.0) -> None:
        self.times.append(float(t))
        for k, v in obs.items():
            self.observables.setdefault(k, []).append(complex(v))
        self.norms.append(float(norm))
        self.energies.append(float(energy))
        self.bond_profile.append(int(max_bond))
        self.discarded.append(float(discarded))

    def series(self, name: str) -> np.ndarray:
        """Real part of an observable as an array."""
        return np.real(np.asarray(self.observables[name]))

    def __len__(self) -> int:
        return len(self.times)

    def header(self) -> list[str]:
        return ["time", *self.observables, "norm", "energy", "max_bond"]

    def rows(self) -> list[list]:
        out = []
        for i, t in enumerate(self.times):
            row = [t] + [float(np.real(self.observables[k][i])) for k in self.observables]
            row += [self.norms[i], self.energies[i], self.bond_profile[i]]
            out.append(row)
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.header())
            for row in self.rows():
                w.writerow([_fmt(x) for x in row])


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Column name -> float array."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trajectory file")
    header, body = rows[0], rows[1:]
    if not body:
        raise ValueError(f"{path}: trajectory has no samples")
    data = np.array([[float(x) for x in r] for r in body], dtype=float)
    return {name: data[:, j] for j, name in enumerate(header)}
