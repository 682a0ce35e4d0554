import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omegaspace.riemann_core import INF, DomainError
from omegaspace.schauder import (
    Basis,
    CoeffArray,
    basis_eval,
    basis_function,
    extract_coeffs,
    fourier_restrict,
    phi_inv_map,
    phi_map,
    project_future,
    project_past,
    series_eval,
    series_function,
    taylor_coeffs_entire,
)

from strategies import bidisk_coord, complex_normal, rng_seeds


def random_array(rng, N, basis=Basis.SCHAUDER):
    return CoeffArray(complex_normal(rng, (N + 1, N + 1)), basis)


def exp_diagonal(N):
    return CoeffArray(np.diag([1 / math.factorial(k) for k in range(N + 1)]), Basis.SCHAUDER)


# --- CoeffArray -----------------------------------------------------------------

def test_coeff_array_validation():
    with pytest.raises(ValueError):
        CoeffArray(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        CoeffArray(np.array([[np.nan]]))
    S = CoeffArray.unit(3, 2, 1)
    assert S.N == 3 and S.a[2, 1] == 1
    with pytest.raises(ValueError):
        S.a[0, 0] = 5


def test_json_layout_is_row_major():
    a = np.arange(9).reshape(3, 3) + 0.5j
    obj = CoeffArray(a, Basis.MONOMIAL).to_json()
    assert obj["N"] == 2 and obj["basis"] == "monomial"
    assert obj["coeffs"][1] == [1.0, 0.5] and obj["coeffs"][3] == [3.0, 0.5]


@given(rng_seeds(), st.integers(0, 6))
def test_json_round_trip(seed, N):
    S = random_array(np.random.default_rng(seed), N)
    back = CoeffArray.from_json(json.loads(json.dumps(S.to_json())))
    assert back.basis is S.basis and np.array_equal(back.a, S.a)


def test_json_length_checked():
    with pytest.raises(ValueError):
        CoeffArray.from_json({"N": 1, "basis": "schauder", "coeffs": [[1, 0]]})


# --- basis ------------------------------------------------------------------------

def test_basis_examples():
    assert basis_eval(0, 0, INF, 3) == 1
    assert basis_eval(0, 0, 0.3, 0.2j) == 1
    assert basis_eval(1, 1, INF, INF) == -1
    assert abs(basis_eval(2, 1, 0.5, 0.5) - 2 / 9) < 1e-15


def test_basis_infinity_limits():
    assert basis_eval(1, 0, 0.4, INF) == 0
    assert basis_eval(1, 0, INF, 2) == -0.5
    assert basis_eval(0, 1, 0.25, INF) == -4
    assert basis_eval(1, 1, INF, 0.7) == -1
    # the limit agrees with a large finite value, error O(1/z)
    assert abs(basis_eval(3, 1, 1e8, 0.5) - basis_eval(3, 1, INF, 0.5)) < 1e-6


def test_basis_outside_omega():
    with pytest.raises(DomainError):
        basis_eval(1, 0, 2, 0.5)
    with pytest.raises(ValueError):
        basis_eval(-1, 0, 0, 0)


@given(st.integers(0, 5), st.integers(0, 5), bidisk_coord, bidisk_coord)
def test_basis_scalar_matches_array(p, q, z, w):
    assert abs(basis_eval(p, q, z, w) - basis_eval(p, q, np.array(z), np.array(w))) < 1e-12


# --- series -----------------------------------------------------------------------

def test_series_examples():
    z, w = 0.3 + 0.2j, -0.4j
    assert series_eval(CoeffArray.unit(4, 0, 0), z, w) == 1
    a = np.zeros((3, 3))
    a[0, 0] = a[1, 1] = 1
    assert abs(series_eval(CoeffArray(a), z, w) - 1 / (1 - z * w)) < 1e-15
    zs, ws = np.meshgrid(np.linspace(-0.6, 0.6, 7), 1j * np.linspace(-0.6, 0.6, 7))
    approx = series_eval(exp_diagonal(20), zs, ws)
    assert np.max(np.abs(approx - np.exp(zs * ws / (1 - zs * ws)))) < 1e-12


def test_series_at_infinity():
    S = exp_diagonal(6)
    v = series_eval(S, INF, INF)
    assert abs(v - sum((-1) ** k / math.factorial(k) for k in range(7))) < 1e-15


def test_series_rejects_monomial_tag():
    with pytest.raises(ValueError):
        series_eval(CoeffArray.unit(2, 1, 1, Basis.MONOMIAL), 0, 0)


# --- projections ------------------------------------------------------------------

@given(rng_seeds(), st.integers(0, 8))
def test_projection_algebra(seed, N):
    S = random_array(np.random.default_rng(seed), N)
    fut, past = project_future(S), project_past(S)
    assert np.array_equal(project_future(fut).a, fut.a)
    assert np.array_equal(project_past(past).a, past.a)
    assert not np.any(project_past(fut).a) and not np.any(project_future(past).a)
    assert np.array_equal((fut + past).a, S.a)


def test_projection_examples():
    D = exp_diagonal(5)
    assert np.array_equal(project_future(D).a, D.a)
    assert not np.any(project_past(D).a)
    assert project_past(CoeffArray.unit(3, 1, 2)).a[1, 2] == 1
    assert not np.any(project_future(CoeffArray.unit(3, 1, 2)).a)


def test_phi_retags():
    M = CoeffArray.unit(3, 1, 1, Basis.MONOMIAL)
    S = phi_map(M)
    assert S.basis is Basis.SCHAUDER
    z, w = 0.2, 0.3
    assert abs(series_eval(S, z, w) - z * w / (1 - z * w)) < 1e-15
    assert np.array_equal(phi_inv_map(phi_map(M)).a, M.a)
    with pytest.raises(ValueError):
        phi_map(S)
    with pytest.raises(ValueError):
        phi_inv_map(M)


def test_phi_matches_pullback_evaluation():
    rng = np.random.default_rng(7)
    F = random_array(rng, 5, Basis.MONOMIAL)
    z, w = 0.25 - 0.1j, 0.3 + 0.2j
    u, v = z / (1 - z * w), w / (1 - z * w)
    fut = sum(F.a[p, q] * u**p * w**q for p in range(6) for q in range(6) if p >= q)
    past = sum(F.a[p, q] * z**p * v**q for p in range(6) for q in range(6) if p < q)
    assert abs(series_eval(phi_map(F), z, w) - (fut + past)) < 1e-13


# --- extraction -------------------------------------------------------------------

def test_extract_basis_element():
    S = extract_coeffs(basis_function(2, 1), 4, M=32, r=1.0)
    assert np.max(np.abs(S.a - CoeffArray.unit(4, 2, 1).a)) < 1e-10


@pytest.mark.parametrize("p", range(7))
def test_extract_duality(p):
    for q in range(7):
        S = extract_coeffs(basis_function(p, q), 6)
        assert np.max(np.abs(S.a - CoeffArray.unit(6, p, q).a)) < 1e-10


def test_extract_exp_kernel():
    S = extract_coeffs(lambda z, w: np.exp(z * w / (1 - z * w)), 10)
    assert np.max(np.abs(S.a - exp_diagonal(10).a)) < 1e-10


def test_extract_constant():
    S = extract_coeffs(lambda z, w: np.ones_like(z), 5)
    assert np.max(np.abs(S.a - CoeffArray.unit(5, 0, 0).a)) < 1e-14


def test_extract_sampling_checks():
    with pytest.raises(ValueError):
        extract_coeffs(basis_function(1, 0), 20, M=32)
    with pytest.raises(ValueError):
        extract_coeffs(basis_function(1, 0), 3, r=0)


def test_extract_propagates_non_finite():
    with pytest.raises(FloatingPointError):
        extract_coeffs(lambda z, w: np.where(abs(z) > 0.9, np.nan, z), 3)


@settings(max_examples=15, deadline=None)
@given(rng_seeds(), st.integers(0, 12))
def test_round_trip(seed, N):
    S = random_array(np.random.default_rng(seed), N)
    assert extract_coeffs(series_function(S), N, M=64).max_abs_diff(S) < 1e-9


@settings(max_examples=10, deadline=None)
@given(rng_seeds())
def test_radius_independence(seed):
    S = random_array(np.random.default_rng(seed), 6)
    f = series_function(S)
    ref = extract_coeffs(f, 6, r=1.0)
    for r in (0.8, 1.25):
        assert extract_coeffs(f, 6, r=r).max_abs_diff(ref) < 1e-9


def test_taylor_examples():
    T = taylor_coeffs_entire(lambda u, v: u**2 * v, 4)
    assert np.max(np.abs(T.a - CoeffArray.unit(4, 2, 1).a)) < 1e-14
    assert T.basis is Basis.MONOMIAL
    E = taylor_coeffs_entire(lambda u, v: np.exp(u + v), 8)
    fact = np.array([math.factorial(k) for k in range(9)], dtype=float)
    expected = 1 / np.outer(fact, fact)
    mask = np.add.outer(np.arange(9), np.arange(9)) <= 8
    assert np.max(np.abs(E.a - expected)[mask]) < 1e-9
    assert not np.any(np.abs(taylor_coeffs_entire(lambda u, v: np.zeros_like(u), 3).a) > 0)


@settings(max_examples=10, deadline=None)
@given(rng_seeds())
def test_commutation_with_projections(seed):
    rng = np.random.default_rng(seed)
    N = 5
    F = random_array(rng, N, Basis.MONOMIAL)
    f = series_function(phi_map(F))
    S = extract_coeffs(f, N)
    T = taylor_coeffs_entire(lambda u, v: sum(F.a[p, q] * u**p * v**q for p in range(N + 1) for q in range(N + 1)), N)
    assert np.max(np.abs(project_future(S).a - project_future(T).a)) < 1e-9
    assert np.max(np.abs(project_past(S).a - project_past(T).a)) < 1e-9


# --- Fourier restriction ------------------------------------------------------------

def test_restriction_examples():
    r = 0.5
    R = fourier_restrict(basis_function(2, 1), "disk", r)
    assert abs(R[1] - r**3 / (1 - r**2) ** 2) < 1e-12
    assert max(abs(c) for n, c in zip(R.modes, R.coeffs) if n != 1) < 1e-14
    L = fourier_restrict(basis_function(1, 2), "disk", r)
    assert abs(L[-1]) > 0.1 and max(abs(c) for n, c in zip(L.modes, L.coeffs) if n != -1) < 1e-14
    one = fourier_restrict(lambda z, w: np.ones_like(z), "disk", r)
    assert abs(one[0] - 1) < 1e-15 and one.negative_max() < 1e-15


def test_sphere_restriction():
    # f_{1,0}(r e^{it}, -r e^{-it}) = r e^{it} / (1 + r^2)
    for r in (0.5, 1.0, 3.0):
        R = fourier_restrict(basis_function(1, 0), "sphere", r)
        assert abs(R[1] - r / (1 + r**2)) < 1e-12


def test_restriction_domain_checks():
    with pytest.raises(DomainError):
        fourier_restrict(basis_function(1, 0), "disk", 1.0)
    with pytest.raises(ValueError):
        fourier_restrict(basis_function(1, 0), "annulus", 0.5)
    with pytest.raises(KeyError):
        fourier_restrict(basis_function(1, 0), "disk", 0.5, M=16)[40]


@given(rng_seeds())
def test_future_arrays_have_no_negative_modes(seed):
    S = project_future(random_array(np.random.default_rng(seed), 8))
    assert fourier_restrict(series_function(S), "disk", 0.5).negative_max() < 1e-10


def test_restriction_json():
    obj = fourier_restrict(basis_function(2, 1), "disk", 0.5, M=8).to_json()
    assert obj["modes"] == list(range(-4, 4))
    assert len(obj["coeffs"]) == 8
