import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forster.errors import DomainError, ResonanceNotFoundError, SingularityError
from forster.pair import (Geometry, PairBasis, PhysicalParams, build_hamiltonian,
                          dipole_coupling, find_resonance_field, forster_defect,
                          pair_eigensplitting, vdw_shift)


@pytest.mark.parametrize("f, expected", [
    (0.0, 8.5),
    (32.0, 0.0),
    (64.0, -127.5),
    (20.0, 8.5 * (1 - 0.625**4)),  # 7.2030029296875
])
def test_forster_defect_values(params, f, expected):
    assert forster_defect(f, params) == pytest.approx(expected, abs=1e-12)


def test_forster_defect_example_roundings(params):
    assert round(forster_defect(20.0, params), 3) == 7.203
    assert forster_defect(64.0, params) <= -100.0


def test_forster_defect_rejects_negative_field(params):
    with pytest.raises(DomainError):
        forster_defect(-1.0, params)


def test_forster_defect_strictly_decreasing(params):
    f = np.linspace(0, 100, 1001)
    assert np.all(np.diff(forster_defect(f, params)) < 0)


@pytest.mark.parametrize("r, expected", [(8.1, 6.759), (10.0, 3.592)])
def test_dipole_coupling_values(params, r, expected):
    assert dipole_coupling(r, params) == pytest.approx(expected, abs=5e-4)


def test_dipole_coupling_cubic(params):
    assert dipole_coupling(16.2, params) == pytest.approx(dipole_coupling(8.1, params) / 8, rel=1e-14)


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_dipole_coupling_rejects_nonpositive(params, r):
    with pytest.raises(DomainError):
        dipole_coupling(r, params)


def test_params_invariants():
    with pytest.raises(DomainError):
        PhysicalParams(c3=-1)
    with pytest.raises(DomainError):
        PhysicalParams(f_res=0)
    with pytest.raises(DomainError):
        PhysicalParams(stark_exponent=1)
    with pytest.raises(DomainError):
        Geometry(0.0)
    assert Geometry(8.1).in_documented_range
    assert not Geometry(25.0).in_documented_range


def test_basis_order():
    assert [b.name for b in PairBasis] == ["GG", "DG_SYM", "DD", "PF_SYM"]


def test_hamiltonian_layout(params):
    h = build_hamiltonian(delta=2.0, omega=1.5, f=20.0, r=9.0, params=params)
    link = math.sqrt(2) * 1.5 / 2
    expected = np.array([
        [0.0, link, 0.0, 0.0],
        [link, -1.0, link, 0.0],
        [0.0, link, -2.0, dipole_coupling(9.0, params)],
        [0.0, 0.0, dipole_coupling(9.0, params), -2.0 + forster_defect(20.0, params)],
    ])
    np.testing.assert_allclose(h, expected, rtol=0, atol=1e-14)


def test_hamiltonian_resonant_block_eigenvalues(params):
    h = build_hamiltonian(0.0, 0.0, params.f_res, 8.1, params)
    w = np.linalg.eigvalsh(h[2:, 2:])
    np.testing.assert_allclose(w, [-6.75917, 6.75917], atol=1e-5)


def test_hamiltonian_uncoupled_is_diagonal(params):
    h = build_hamiltonian(3.0, 0.0, 10.0, 1e6, params)
    assert np.max(np.abs(h - np.diag(np.diag(h)))) < 1e-12


def test_hamiltonian_rejects_negative_omega(params):
    with pytest.raises(DomainError):
        build_hamiltonian(0.0, -1.0, 0.0, 8.1, params)


@settings(max_examples=50, deadline=None)
@given(delta=st.floats(-50, 50), omega=st.floats(0, 10), f=st.floats(0, 100),
       r=st.floats(5, 20))
def test_hamiltonian_hermitian(delta, omega, f, r):
    h = build_hamiltonian(delta, omega, f, r, PhysicalParams())
    assert np.max(np.abs(h - h.conj().T)) <= 1e-12 * max(1.0, np.max(np.abs(h)))


def test_eigensplitting_resonance(params):
    es = pair_eigensplitting(params.f_res, 8.1, params)
    assert es.splitting == pytest.approx(2 * math.sqrt(2) * 2540 / 8.1**3, rel=1e-12)
    assert round(es.splitting, 3) == 13.518
    assert es.mixing_angle == pytest.approx(math.pi / 4, abs=1e-12)
    assert pair_eigensplitting(params.f_res, 10.0, params).splitting / 2 == pytest.approx(3.59, abs=5e-3)


def test_eigensplitting_uncoupled_limit():
    p = PhysicalParams()
    es = pair_eigensplitting(10.0, 1e5, p)
    assert es.splitting == pytest.approx(abs(forster_defect(10.0, p)), rel=1e-9)
    assert es.mixing_angle == pytest.approx(0.0, abs=1e-9)
    es = pair_eigensplitting(64.0, 1e5, p)
    assert es.mixing_angle == pytest.approx(0.0, abs=1e-9)


def test_eigensplitting_matches_numerical_diagonalization(params):
    for f in (0.0, 20.0, 32.0, 50.0):
        h = build_hamiltonian(0.0, 0.0, f, 9.0, params)[2:, 2:]
        w = np.linalg.eigvalsh(h)
        es = pair_eigensplitting(f, 9.0, params)
        np.testing.assert_allclose(es.eigenvalues, w, atol=1e-12)


def test_r3_law_exact(params):
    rs = np.linspace(5, 20, 31)
    prod = np.array([pair_eigensplitting(params.f_res, r, params).splitting * r**3 for r in rs])
    assert np.ptp(prod) / prod[0] < 1e-9


@settings(max_examples=60, deadline=None)
@given(f=st.floats(0, 80), r=st.floats(5, 20))
def test_avoided_crossing_minimum_and_trace(f, r):
    p = PhysicalParams()
    es = pair_eigensplitting(f, r, p)
    v = dipole_coupling(r, p)
    assert es.splitting >= 2 * v * (1 - 1e-14)
    if abs(f - p.f_res) > 1e-6:
        assert es.splitting > 2 * v
    assert sum(es.eigenvalues) == pytest.approx(forster_defect(f, p), abs=1e-9)


def test_vdw_examples(params):
    assert vdw_shift(0.0, 8.1, params, "exact") == pytest.approx(
        4.25 - math.sqrt(4.25**2 + dipole_coupling(8.1, params) ** 2), rel=1e-12)
    assert round(vdw_shift(0.0, 8.1, params, "exact"), 3) == -3.734
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        assert round(vdw_shift(0.0, 8.1, params, "perturbative"), 3) == -5.375
    assert round(vdw_shift(64.0, 10.0, params, "perturbative"), 3) == 0.101
    assert vdw_shift(5.0, 1e6, params, "exact") == pytest.approx(0.0, abs=1e-15)


def test_vdw_perturbative_warns_outside_validity(params):
    with pytest.warns(RuntimeWarning):
        vdw_shift(0.0, 7.0, params, "perturbative")


def test_vdw_singular_at_resonance(params):
    with pytest.raises(SingularityError, match="exact"):
        vdw_shift(params.f_res, 8.1, params, "perturbative")


@settings(max_examples=60, deadline=None)
@given(f=st.floats(45, 120), r=st.floats(5, 20))
def test_vdw_first_order_agreement(f, r):
    p = PhysicalParams()
    v, d = dipole_coupling(r, p), forster_defect(f, p)
    ratio = abs(v / d)
    if ratio >= 0.1:
        return
    exact = vdw_shift(f, r, p, "exact")
    pert = vdw_shift(f, r, p, "perturbative")
    assert abs(exact - pert) / abs(pert) < 2 * ratio**2


def test_find_resonance_field():
    assert find_resonance_field(PhysicalParams()) == 32.0
    assert find_resonance_field(PhysicalParams(delta0=17.0)) == 32.0
    assert find_resonance_field(PhysicalParams(stark_exponent=2)) == 32.0
    p = PhysicalParams(f_res=27.3, stark_exponent=3)
    f = find_resonance_field(p)
    assert abs(forster_defect(f, p)) < 1e-9


def test_find_resonance_no_sign_change():
    with pytest.raises(ResonanceNotFoundError):
        find_resonance_field(PhysicalParams(delta0=0.0))
    with pytest.raises(ResonanceNotFoundError):
        find_resonance_field(PhysicalParams(), defect=lambda f: 5.0 + f)


def test_find_resonance_custom_defect():
    f = find_resonance_field(PhysicalParams(), defect=lambda f: 10.0 - 0.25 * f)
    assert f == pytest.approx(40.0, abs=1e-8)
