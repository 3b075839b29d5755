"""Tests for the radial polynomials, ball basis, projection, and synthesis."""

import math

import hypothesis as h
import hypothesis.strategies as st
import numpy as np
import pytest

from calderon3d.quadrature import BallQuadrature
from calderon3d.specfun import sph_harm
from calderon3d.zernike import (
    CoefficientField,
    ZernikeIndex,
    as_caps,
    basis_gram,
    chi,
    project,
    psi_eval,
    radial_zernike,
    synthesize,
    synthesize_ball_grid,
    synthesize_xyz,
)

QUAD = BallQuadrature()
RNG = np.random.default_rng(414243)


def random_field(kmax, caps, rng, density=1.0, real_sym=False):
    caps = as_caps(kmax, caps)
    entries = {}
    for k in range(kmax + 1):
        for ell in range(caps[k] + 1):
            for m in range(-ell, ell + 1):
                if rng.uniform() > density:
                    continue
                if real_sym and m < 0:
                    continue
                val = complex(rng.normal(), rng.normal())
                if real_sym:
                    if m == 0:
                        val = complex(val.real, 0.0)
                    else:
                        entries[(k, ell, -m)] = (-1) ** m * val.conjugate()
                entries[(k, ell, m)] = val
    return CoefficientField(entries, kmax, caps)


# ------------------------------------------------------------- index type


def test_zernike_index_validation_and_order():
    ZernikeIndex(0, 3, -3)
    with pytest.raises(ValueError):
        ZernikeIndex(0, 2, 3)
    with pytest.raises(ValueError):
        ZernikeIndex(-1, 2, 0)
    assert ZernikeIndex(0, 5, 5) < ZernikeIndex(1, 0, 0)


# ------------------------------------------------------- radial polynomials


def test_radial_zernike_constant_and_pure_power():
    rr = np.linspace(0, 1, 7)
    assert radial_zernike(0, 0, 0.37) == pytest.approx(math.sqrt(3), rel=1e-15)
    for ell in [0, 1, 4, 9]:
        vals = radial_zernike(ell, 0, rr)
        ref = math.sqrt(2 * ell + 3) * rr**ell
        assert np.max(np.abs(vals - ref)) < 1e-13


def test_radial_zernike_frozen_values():
    # symbolic-formula references at 22 digits
    assert radial_zernike(2, 1, 0.6) == pytest.approx(-2.2446916581125346, rel=1e-13)
    assert radial_zernike(3, 2, 0.8) == pytest.approx(-1.0998466718447631, rel=1e-13)
    assert radial_zernike(1, 3, 0.25) == pytest.approx(-4.2867596250780783, rel=1e-13)
    assert radial_zernike(5, 0, 0.9) == pytest.approx(2.1290419726487313, rel=1e-14)


def test_radial_zernike_matches_exact_monomial_form():
    # recurrence evaluation vs the explicit monomial sum carried out in
    # exact rational arithmetic at rational radii
    from fractions import Fraction

    from calderon3d.zernike import _radial_coeff_fractions

    for ell, k in [(0, 0), (2, 1), (3, 2), (12, 8), (7, 5), (30, 7)]:
        fracs = _radial_coeff_fractions(ell, k)
        scale = math.sqrt(2 * ell + 4 * k + 3)
        for j in range(17):
            rq = Fraction(j, 16)
            acc = fracs[0]
            for c in fracs[1:]:
                acc = acc * rq * rq + c
            exact = float(acc * rq**ell) * scale
            got = radial_zernike(ell, k, j / 16)
            assert got == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_radial_zernike_domain_error():
    with pytest.raises(ValueError):
        radial_zernike(2, 1, 1.0001)
    with pytest.raises(ValueError):
        radial_zernike(2, 1, -0.2)


@h.given(
    ell=st.integers(min_value=0, max_value=12),
    k=st.integers(min_value=0, max_value=8),
    kp=st.integers(min_value=0, max_value=8),
)
@h.settings(max_examples=60, deadline=None)
def test_radial_orthonormality(ell, k, kp):
    ip = np.sum(QUAD.r_weights * radial_zernike(ell, k, QUAD.r) * radial_zernike(ell, kp, QUAD.r))
    assert abs(ip - (1.0 if k == kp else 0.0)) <= 1e-10


# ------------------------------------------------------------------- chi


def test_chi_base_case_and_errors():
    for ell in [0, 1, 5, 12]:
        assert chi(ell, 0, 0) == pytest.approx(1 / math.sqrt(2 * ell + 3), rel=1e-15)
    with pytest.raises(ValueError):
        chi(2, 1, 2)
    with pytest.raises(ValueError):
        chi(2, 1, -1)


def test_chi_frozen_values():
    assert chi(2, 3, 1) == pytest.approx(0.1020499935493969, rel=1e-14)
    assert chi(4, 2, 2) == pytest.approx(0.0071973563567235064, rel=1e-14)
    assert chi(1, 5, 3) == pytest.approx(0.0194514786996558, rel=1e-14)
    assert chi(10, 6, 0) == pytest.approx(0.1370237578089348, rel=1e-14)


def test_chi_is_radial_inner_product():
    # chi_l^{p,q} equals <r^{l+2p}, R_l^q> in the weighted radial inner product
    for ell, p, q in [(2, 3, 1), (0, 2, 2), (5, 4, 0), (3, 6, 5)]:
        ip = np.sum(QUAD.r_weights * QUAD.r ** (ell + 2 * p) * radial_zernike(ell, q, QUAD.r))
        assert chi(ell, p, q) == pytest.approx(float(ip), abs=1e-12)


@h.given(ell=st.integers(min_value=0, max_value=10), p=st.integers(min_value=0, max_value=6))
@h.settings(max_examples=40, deadline=None)
def test_monomial_expansion(ell, p):
    rr = np.linspace(0.0, 1.0, 50)
    acc = np.zeros_like(rr)
    for q in range(p + 1):
        acc += chi(ell, p, q) * radial_zernike(ell, q, rr)
    assert np.max(np.abs(acc - rr ** (ell + 2 * p))) <= 1e-11


# ------------------------------------------------------------------- psi


def test_psi_constant_and_solid_harmonic():
    assert psi_eval(0, 0, 0, 0.3, 1.0, 2.0) == pytest.approx(
        math.sqrt(3) / math.sqrt(4 * math.pi), rel=1e-14
    )
    # k = 0 gives the regular solid harmonics sqrt(2l+3) r^l Y_l^m
    for ell, m in [(1, 0), (3, -2), (5, 4)]:
        r, th, ph = 0.77, 1.1, 2.9
        ref = math.sqrt(2 * ell + 3) * r**ell * sph_harm(ell, m, th, ph)
        assert psi_eval(0, ell, m, r, th, ph) == pytest.approx(ref, rel=1e-13)


def test_psi_gram_identity():
    indices, gram = basis_gram(QUAD, 8)
    dev = np.max(np.abs(gram - np.eye(len(indices))))
    assert dev <= 1e-9


def test_psi_gram_matches_direct_evaluation():
    # factored Gram equals brute-force psi products on the quadrature grid
    quad = BallQuadrature(n_r=12, n_theta=16, n_phi=32)
    indices, gram = basis_gram(quad, 3)
    th, ph = quad.sphere.grid()
    r = quad.r[:, None, None]
    w = (
        quad.r_weights[:, None, None]
        * quad.theta_weights[None, :, None]
        * np.full(quad.n_phi, quad.phi_weight)[None, None, :]
    )
    vals = [psi_eval(i.k, i.ell, i.m, r, th[None], ph[None]).ravel() for i in indices]
    vals = np.array(vals)
    direct = (vals * w.ravel()) @ np.conj(vals.T)
    assert np.max(np.abs(direct - gram)) <= 1e-12


# ------------------------------------------------------------ field object


def test_field_bounds_checking():
    CoefficientField({(1, 2, -2): 1.0}, kmax=1, degree_caps=(0, 2))
    with pytest.raises(ValueError):
        CoefficientField({(2, 0, 0): 1.0}, kmax=1, degree_caps=(0, 2))
    with pytest.raises(ValueError):
        CoefficientField({(0, 1, 0): 1.0}, kmax=1, degree_caps=(0, 2))


def test_field_get_and_norms():
    f = CoefficientField({(0, 1, 1): 3 + 4j, (1, 0, 0): 1.0}, 1, (1, 0))
    assert f.get(0, 1, 1) == 3 + 4j
    assert f.get(0, 1, -1) == 0
    assert f.norm() == pytest.approx(math.sqrt(26))
    assert f.norms_per_k() == pytest.approx([5.0, 1.0])


def test_field_conjugate_symmetry_error():
    sym = random_field(1, 3, RNG, real_sym=True)
    assert sym.conjugate_symmetry_error() <= 1e-15
    asym = CoefficientField({(0, 1, 1): 1.0, (0, 1, -1): 1.0}, 0, (1,))
    assert asym.conjugate_symmetry_error() == pytest.approx(2.0)


# -------------------------------------------------------------- projection


def test_project_single_basis_function():
    target = ZernikeIndex(1, 2, 1)

    def eta(x, y, z):
        r = np.sqrt(x * x + y * y + z * z)
        theta = np.arccos(np.where(r > 0, z / np.where(r > 0, r, 1), 1.0))
        phi = np.mod(np.arctan2(y, x), 2 * np.pi)
        return psi_eval(target.k, target.ell, target.m, r, theta, phi)

    field = project(eta, kmax=2, degree_caps=4, quad=QUAD)
    assert not field.certified
    for idx, val in field.entries.items():
        want = 1.0 if idx == target else 0.0
        assert abs(val - want) <= 1e-10


def test_project_zero_field():
    field = project(lambda x, y, z: np.zeros_like(x), 1, 2, QUAD)
    assert all(abs(v) == 0.0 for v in field.entries.values())


def test_project_real_field_has_conjugate_symmetry():
    def eta(x, y, z):
        return np.exp(-3.0 * ((x - 0.2) ** 2 + y**2 + (z + 0.1) ** 2))

    field = project(eta, 2, 6, QUAD)
    assert field.conjugate_symmetry_error() <= 1e-10


def test_project_then_synthesize_polynomial():
    # a low-degree polynomial lies in the span, so the round trip is exact
    def eta(x, y, z):
        return 0.3 + x * y - 0.5 * z**2 + x**2 * (y - 1.0) * z

    field = project(eta, 2, 4, QUAD)
    pts = RNG.uniform(-0.5, 0.5, size=(40, 3))
    vals = synthesize_xyz(field, pts[:, 0], pts[:, 1], pts[:, 2])
    ref = eta(pts[:, 0], pts[:, 1], pts[:, 2])
    assert np.max(np.abs(vals - ref)) <= 1e-9


def test_project_recovers_explicit_expansion():
    src = random_field(2, (4, 3, 2), RNG)

    def eta(x, y, z):
        return synthesize_xyz(src, x, y, z)

    back = project(eta, 2, (4, 3, 2), QUAD)
    for idx, val in src.entries.items():
        assert abs(back.entries[idx] - val) <= 1e-9


# --------------------------------------------------------------- synthesis


def test_synthesize_constant_field():
    f = CoefficientField({(0, 0, 0): 1.0}, 0, (0,))
    v = synthesize(f, 0.5, 1.0, 2.0)
    assert v == pytest.approx(math.sqrt(3) / math.sqrt(4 * math.pi), rel=1e-14)


def test_synthesize_partial_sum_modes():
    f = CoefficientField({(0, 0, 0): 1.0, (2, 1, 0): 2.0}, 2, (0, 0, 1))
    r, th, ph = 0.4, 0.9, 0.1
    full = synthesize(f, r, th, ph)
    k0 = synthesize(f, r, th, ph, mode=0)
    ref0 = psi_eval(0, 0, 0, r, th, ph).real
    assert k0 == pytest.approx(ref0, rel=1e-13)
    k2 = synthesize(f, r, th, ph, mode=2)
    assert k2 == pytest.approx(full.real, rel=1e-13)
    # truncation below every stored k gives the empty sum
    g = CoefficientField({(2, 1, 0): 2.0}, 2, (0, 0, 1))
    assert synthesize(g, r, th, ph, mode=1) == 0.0


def test_synthesize_matches_psi_sum():
    field = random_field(2, 3, RNG, density=0.6)
    for _ in range(5):
        r = float(RNG.uniform(0, 1))
        th = float(RNG.uniform(0.1, math.pi - 0.1))
        ph = float(RNG.uniform(0, 2 * math.pi))
        ref = sum(
            val * psi_eval(idx.k, idx.ell, idx.m, r, th, ph)
            for idx, val in field.entries.items()
        )
        assert synthesize(field, r, th, ph) == pytest.approx(ref, rel=1e-11, abs=1e-13)


def test_synthesize_ball_grid_matches_pointwise():
    field = random_field(2, 3, RNG, density=0.5)
    quad = BallQuadrature(n_r=6, n_theta=8, n_phi=16)
    cube = synthesize_ball_grid(field, quad)
    th, ph = quad.sphere.grid()
    direct = synthesize(
        field,
        quad.r[:, None, None],
        np.broadcast_to(th, (6, 8, 16)),
        np.broadcast_to(ph, (6, 8, 16)),
    )
    assert np.max(np.abs(cube - direct)) <= 1e-12
    # real partial sums agree too
    cube0 = synthesize_ball_grid(field, quad, mode=1)
    direct0 = synthesize(
        field,
        quad.r[:, None, None],
        np.broadcast_to(th, (6, 8, 16)),
        np.broadcast_to(ph, (6, 8, 16)),
        mode=1,
    )
    assert np.max(np.abs(cube0 - direct0)) <= 1e-12


def test_synthesize_mode_validation():
    f = CoefficientField({}, 0, (0,))
    with pytest.raises(ValueError):
        synthesize(f, 0.1, 0.2, 0.3, mode="everything")
