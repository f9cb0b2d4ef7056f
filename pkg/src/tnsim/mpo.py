"""Compile symbolic product-term sums into an MPO.

The construction is a finite-state automaton over the site chain. On every
bond the automaton is in one of

* ``start``: no factor of the current term applied yet (identity so far),
* ``done``: the term is complete (identity from here on),
* an open prefix: the factors of a term left of the bond, without coefficient.

Prefixes are keyed by their factor tuple, so terms sharing leading factors
share states, and coefficients are attached to the last factor. Sites between
two active factors carry the identity. The resulting bond dimension is
``2 + (number of distinct open prefixes)`` on interior bonds.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .mps import MPO
from .sites import ProductTerm, SiteBasis, local_op, validate_terms
from .tensor import DTYPE

START, DONE = 0, 1


def _bond_states(terms: Sequence[ProductTerm], n: int) -> list[dict]:
    states = [dict() for _ in range(n + 1)]
    for t in terms:
        first, last = t.sites[0], t.sites[-1]
        for b in range(first + 1, last + 1):
            key = tuple(f for f in t.factors if f[0] < b)
            if key not in states[b]:
                states[b][key] = 2 + len(states[b])
    return states


def mpo_from_terms(terms: Sequence[ProductTerm], bases: Sequence[SiteBasis]) -> MPO:
    """Exact MPO of ``sum(terms)`` on the chain ``bases``."""
    terms = list(terms)
    validate_terms(terms, bases)
    n = len(bases)
    states = _bond_states(terms, n)
    dims = [1] + [2 + len(states[b]) for b in range(1, n)] + [1]

    def idx(b: int, key) -> int:
        # boundary bonds are one-dimensional: bond 0 only starts, bond n only finishes
        if b in (0, n):
            return 0
        return key if isinstance(key, int) else states[b][key]

    ws = []
    for i, basis in enumerate(bases):
        d = basis.dim
        w = np.zeros((dims[i], d, d, dims[i + 1]), dtype=DTYPE)
        eye = np.eye(d, dtype=DTYPE)
        if i + 1 < n:
            w[idx(i, START), :, :, START] = eye
        if i > 0:
            w[DONE, :, :, idx(i + 1, DONE)] = eye
        ws.append(w)

    for t in terms:
        sites = t.sites
        first, last = sites[0], sites[-1]
        ops = dict(t.factors)
        for i in range(first, last + 1):
            w = ws[i]
            op = local_op(bases[i], ops[i]) if i in ops else np.eye(bases[i].dim, dtype=DTYPE)
            left = idx(i, START) if i == first else idx(i, tuple(f for f in t.factors if f[0] < i))
            right = idx(i + 1, DONE) if i == last else idx(i + 1, tuple(f for f in t.factors if f[0] <= i))
            if i == last:
                w[left, :, :, right] += t.coefficient * op
            else:
                w[left, :, :, right] = op
    return MPO(ws, bases)
