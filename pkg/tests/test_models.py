"""Moduli tensors, body-force potentials, and the non-existence certificate."""

import math
from fractions import Fraction

import numpy as np
import pytest

from elastident import geometry, models


def iso(mu, lam, n=2):
    return models.moduli_from_lame(models.IsotropicModuli(mu, lam), n)


# ------------------------------------------------------------------- moduli

def test_isotropic_symmetries_and_positivity():
    for n in (2, 3):
        C = iso(1, Fraction(1, 2), n)
        ok, where = models.check_symmetries(C)
        assert ok and where is None
        assert models.check_positivity(C)
        strict, worst = models.check_legendre_hadamard(C)
        assert strict and worst > 0


def test_negative_lambda_region():
    # mu=2, lam=-1 keeps mu + lam > 0, so the form stays positive
    C = iso(2, -1, 2)
    assert models.check_positivity(C)
    with pytest.raises(ValueError):
        models.IsotropicModuli(1, -4)
    assert not models.check_positivity(iso(1, 0, 2).negated())


def test_from_entries_round_trip():
    n = 2
    C = iso(1, Fraction(1, 2), n)
    C2 = models.ElasticModuli.from_entries(n, C.entries)
    assert C2.entries == C.entries
    assert models.check_symmetries(C2)[0]


def test_broken_symmetry_detected():
    C = iso(1, 0, 2).perturbed((0, 1, 0, 0), Fraction(1, 5))
    ok, where = models.check_symmetries(C)
    assert not ok and where is not None


def test_contract_matches_quadratic_form():
    rng = np.random.default_rng(3)
    C = iso(1, Fraction(1, 2), 2)
    Q = models.induced_quadratic_form(C)
    for _ in range(10):
        A = rng.standard_normal((2, 2))
        direct = models.contract_energy = float(C.contract(A, A))
        vec = A.reshape(-1)
        assert math.isclose(direct, float(vec @ Q @ vec), rel_tol=1e-12)


def test_acoustic_speed_bound_isotropic():
    # the fastest plane wave of the isotropic system travels at
    # sqrt(2 mu + lam)
    c = models.acoustic_speed_bound(iso(1, Fraction(1, 2), 2))
    assert c >= math.sqrt(2.5) - 1e-9
    assert c <= math.sqrt(2.5) + 0.35  # bound may be mildly conservative


def test_isotropic_pair_equivalent():
    assert models.isotropic_pair_equivalent(1, 0, 2)
    assert models.isotropic_pair_equivalent(1, 1, 3)


# ---------------------------------------------------------------- potentials

def test_power_potential_values_and_grad():
    F = models.BodyForcePotential.power(Fraction(1, 2), 4)
    s = np.array([[3.0], [4.0]])         # |s| = 5
    assert math.isclose(float(F.value(s)[0]), 0.5 * 5.0 ** 4)
    g = F.grad(s)
    # grad = c p |s|^{p-2} s
    assert np.allclose(np.squeeze(g, -1), 0.5 * 4 * 5.0 ** 2 * np.array([3, 4]))


def test_quadratic_potential():
    F = models.BodyForcePotential.quadratic(2.0)
    s = np.array([[1.0], [2.0]])
    assert math.isclose(float(F.value(s)[0]), 5.0)
    assert np.allclose(np.squeeze(F.grad(s), -1), [2.0, 4.0])


def test_polynomial_potential_componentwise_monomials():
    F = models.BodyForcePotential.polynomial(
        [(1, (2, 0)), (Fraction(1, 4), (0, 6))])
    s = np.array([[0.3], [-1.1]])
    expect = 0.3 ** 2 + 0.25 * (-1.1) ** 6
    assert math.isclose(float(F.value(s)[0]), expect)
    g = F.grad(s)
    assert math.isclose(float(g[0, 0]), 2 * 0.3)
    assert math.isclose(float(g[1, 0]), 6 * 0.25 * (-1.1) ** 5)
    # deficit of an even positive monomial sum at n=3 keeps only terms with
    # degree * 1/2 - 3 != 0
    terms = F.deficit_terms(3)
    assert all(c != 0 for c, _ in terms)


def test_gradient_consistent_with_finite_differences():
    F = models.BodyForcePotential.power(-0.25, 4)
    rng = np.random.default_rng(0)
    s = rng.standard_normal((2, 5))
    g = F.grad(s)
    eps = 1e-6
    for i in range(2):
        sp = s.copy()
        sp[i] += eps
        sm = s.copy()
        sm[i] -= eps
        fd = (F.value(sp) - F.value(sm)) / (2 * eps)
        assert np.allclose(g[i], fd, atol=1e-5)


def test_scaling_deficit_power():
    # deficit(s) = (n-2)/2 s.f(s) - n F(s) = c((n-2)p/2 - n) |s|^p
    F = models.BodyForcePotential.power(1, 8)
    assert models.power_deficit_coefficient(F, 3) == 1   # (1/2)*8 - 3
    assert models.power_deficit_coefficient(F, 2) == -2  # 0 - 2
    s = np.array([[1.0], [1.0], [1.0]])
    d = models.scaling_deficit(F, s, 3)
    assert math.isclose(float(d[0]), 3.0 ** 4)


# --------------------------------------------------------------- certificate

def test_certificate_passes_supercritical_power():
    F = models.BodyForcePotential.power(1, 8)
    C = iso(1, 0, 3)
    dom = geometry.DomainSpec.ball(1.0, n_dim=3)
    rep = models.nonexistence_certificate(F, C, dom)
    assert rep.passed
    assert rep.failed_clauses() == []
    assert "PASS" in rep.render()


def test_certificate_fails_quadratic_deficit():
    F = models.BodyForcePotential.power(1, 2)
    C = iso(1, 0, 3)
    dom = geometry.DomainSpec.ball(1.0, n_dim=3)
    rep = models.nonexistence_certificate(F, C, dom)
    assert not rep.passed
    failed = rep.failed_clauses()
    assert any("deficit" in name for name in failed)


def test_certificate_fails_on_annulus():
    F = models.BodyForcePotential.power(1, 8)
    C = iso(1, 0, 3)
    dom = geometry.DomainSpec.annulus(0.5, 1.0, n_dim=3)
    rep = models.nonexistence_certificate(F, C, dom)
    assert not rep.passed
    assert rep.failed_clauses() == ["star-shaped domain"]


def test_certificate_fails_indefinite_moduli():
    F = models.BodyForcePotential.power(1, 8)
    C = iso(1, 0, 3).negated()
    dom = geometry.DomainSpec.ball(1.0, n_dim=3)
    rep = models.nonexistence_certificate(F, C, dom)
    assert "moduli positivity" in rep.failed_clauses()


def test_certificate_nonzero_at_origin_detected():
    F = models.BodyForcePotential.tabulated(
        lambda s: np.full(s.shape[1:], 1.0) + (s * s).sum(axis=0) ** 4,
        lambda s: 8 * (s * s).sum(axis=0) ** 3 * s)
    C = iso(1, 0, 2)
    dom = geometry.DomainSpec.unit_square()
    rep = models.nonexistence_certificate(F, C, dom)
    assert "F(0)=0" in rep.failed_clauses()


def test_certificate_sampled_clause_marks_non_exhaustive():
    F = models.BodyForcePotential.tabulated(
        lambda s: ((s * s).sum(axis=0)) ** 4,
        lambda s: 8 * ((s * s).sum(axis=0)) ** 3 * s)
    C = iso(1, 0, 3)
    dom = geometry.DomainSpec.ball(1.0, n_dim=3)
    rep = models.nonexistence_certificate(F, C, dom)
    assert rep.passed
    assert not rep.exhaustive
    assert "sampled" in rep.render()


# ------------------------------------------------------------------ coupling

def test_bilinear_coupling():
    H = models.CouplingPotential.bilinear(2.0)
    u = np.array([[1.0], [2.0]])
    v = np.array([[3.0], [-1.0]])
    assert math.isclose(float(H.value(u, v)[0]), 2.0 * (3.0 - 2.0))
    assert np.allclose(np.squeeze(H.grad_u(u, v), -1), [6.0, -2.0])
    assert np.allclose(np.squeeze(H.grad_v(u, v), -1), [2.0, 4.0])
