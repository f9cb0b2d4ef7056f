import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnsim.sites import (HERMITIAN_NAMES, OperatorError, ProductTerm, SiteBasis, dvr_grid, dvr_potential,
                         dvr_second_derivative, local_op, term, validate_terms)

BASES = [SiteBasis.spin_half(), SiteBasis.electronic(), SiteBasis.boson(5), SiteBasis.exp_dvr(7)]


def dvr_kinetic_closed_form(n):
    """-d^2/dtheta^2 on the periodic N-point grid, summed analytically over k = -(N-1)/2..(N-1)/2."""
    t = np.empty((n, n))
    for j in range(n):
        for l in range(n):
            d = j - l
            if d == 0:
                t[j, l] = (n * n - 1) / 12.0
            else:
                x = math.pi * d / n
                t[j, l] = (-1) ** d * math.cos(x) / (2 * math.sin(x) ** 2)
    return t


@pytest.mark.parametrize("basis", BASES, ids=lambda b: b.kind)
def test_named_hermitian_operators(basis):
    for name in HERMITIAN_NAMES:
        try:
            m = local_op(basis, name)
        except OperatorError:
            continue
        assert m.shape == (basis.dim, basis.dim)
        assert np.max(np.abs(m - m.conj().T)) <= 1e-12, name


def test_pauli_algebra():
    s = SiteBasis.spin_half()
    sx, sy, sz = (local_op(s, n) for n in ("sx", "sy", "sz"))
    np.testing.assert_allclose(sx @ sy - sy @ sx, 2j * sz)
    np.testing.assert_allclose(local_op(s, "sp") + local_op(s, "sm"), sx)


def test_boson_ladder_and_coordinates():
    d = 6
    b = SiteBasis.boson(d)
    a, ad, n = local_op(b, "b"), local_op(b, "bdag"), local_op(b, "n")
    np.testing.assert_allclose(ad @ a, n, atol=1e-14)
    x2, p2 = local_op(b, "x2_dimless"), local_op(b, "p2_dimless")
    np.testing.assert_allclose(x2 + p2, 2 * n + np.eye(d), atol=1e-12)
    x = local_op(b, "x_dimless")
    # away from the truncation edge the squared coordinate is x @ x
    np.testing.assert_allclose((x @ x)[: d - 1, : d - 1], x2[: d - 1, : d - 1], atol=1e-12)
    # no wraparound: b on the top level stays in the space
    assert np.all(a[:, 0] == 0)


@pytest.mark.parametrize("n", [3, 5, 11, 21])
def test_dvr_kinetic_matches_closed_form(n):
    np.testing.assert_allclose(dvr_second_derivative(n), dvr_kinetic_closed_form(n), atol=1e-10)


def test_dvr_potentials_diagonal_and_commuting():
    n = 9
    b = SiteBasis.exp_dvr(n)
    cos = local_op(b, "dvr_cos")
    np.testing.assert_allclose(np.diag(cos), np.cos(dvr_grid(n)))
    assert np.count_nonzero(cos - np.diag(np.diag(cos))) == 0
    trans, cis = local_op(b, "dvr_trans"), local_op(b, "dvr_cis")
    np.testing.assert_allclose(trans + cis, np.eye(n))
    np.testing.assert_allclose(cos @ trans, trans @ cos)
    np.testing.assert_allclose(dvr_potential(n, np.cos), cos)


def test_basis_validation():
    with pytest.raises(ValueError):
        SiteBasis.exp_dvr(4)
    with pytest.raises(ValueError):
        SiteBasis("qutrit", 3)
    with pytest.raises(OperatorError):
        local_op(SiteBasis.spin_half(), "b")


def test_product_term_invariants():
    t = term(2.0, (0, "sz"), (3, "sx"))
    assert t.sites == (0, 3)
    with pytest.raises(ValueError, match="increasing"):
        term(1.0, (2, "sz"), (1, "sz"))
    with pytest.raises(ValueError, match="nonzero"):
        term(0.0, (0, "sz"))
    with pytest.raises(ValueError):
        term(float("nan"), (0, "sz"))
    with pytest.raises(ValueError):
        ProductTerm(1.0, ())


def test_validate_terms():
    bases = [SiteBasis.spin_half()] * 2
    validate_terms([term(1.0, (0, "sz"))], bases)
    with pytest.raises(ValueError, match="out of range"):
        validate_terms([term(1.0, (2, "sz"))], bases)
    with pytest.raises(OperatorError):
        validate_terms([term(1.0, (0, "n"))], bases)
    with pytest.raises(ValueError, match="empty"):
        validate_terms([], bases)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 15))
def test_dvr_kinetic_spectrum_property(half):
    n = 2 * half + 1
    ev = np.linalg.eigvalsh(dvr_second_derivative(n))
    k = np.arange(-half, half + 1)
    np.testing.assert_allclose(ev, np.sort(k.astype(float) ** 2), atol=1e-9)
