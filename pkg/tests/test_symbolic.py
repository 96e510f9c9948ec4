"""Exact-arithmetic tests for the differential-polynomial kernel."""

import random
from fractions import Fraction

import pytest

from elastident import symbolic as sy
from elastident.models import IsotropicModuli, moduli_from_lame


def iso_entries(mu, lam, n):
    return moduli_from_lame(IsotropicModuli(mu, lam), n).entries


# ---------------------------------------------------------------- arithmetic

def test_zero_and_constants():
    assert sy.DiffExpr().is_zero()
    assert (sy.const(Fraction(2, 3)) - sy.const(Fraction(2, 3))).is_zero()
    assert not sy.u(1).is_zero()


def test_ring_axioms_random():
    rng = random.Random(7)
    for _ in range(30):
        a = sy.random_expr(rng, 2)
        b = sy.random_expr(rng, 2)
        c = sy.random_expr(rng, 2)
        assert (a * (b + c) - a * b - a * c).is_zero()
        assert (a * b - b * a).is_zero()
        assert ((a + b) + c - (a + (b + c))).is_zero()


def test_rational_coefficients_stay_exact():
    e = Fraction(1, 3) * sy.u(1) + Fraction(1, 6) * sy.u(1)
    assert (e - Fraction(1, 2) * sy.u(1)).is_zero()


# ------------------------------------------------------------- derivatives

def test_total_derivative_product_rule():
    rng = random.Random(11)
    for _ in range(25):
        n = rng.choice([2, 3])
        a = sy.random_expr(rng, n, with_time=True)
        b = sy.random_expr(rng, n, with_time=True)
        for ax in range(0, n + 1):
            lhs = sy.total_derivative(a * b, ax, n)
            rhs = (sy.total_derivative(a, ax, n) * b
                   + a * sy.total_derivative(b, ax, n))
            assert (lhs - rhs).is_zero()


def test_total_derivatives_commute():
    # D_a D_b = D_b D_a on zeroth-order expressions (where both orders of
    # application stay within the second-order kernel)
    rng = random.Random(13)
    n = 2
    zero_order = [(sy.X_, 1), (sy.X_, 2), (sy.U_, sy.FU, 1),
                  (sy.U_, sy.FU, 2), (sy.F_,), (sy.T_,)]
    for _ in range(20):
        e = sy.random_expr(rng, n, atoms=zero_order, with_time=True)
        for a in range(0, n + 1):
            for b in range(0, n + 1):
                ab = sy.total_derivative(sy.total_derivative(e, a, n), b, n)
                ba = sy.total_derivative(sy.total_derivative(e, b, n), a, n)
                assert (ab - ba).is_zero()


def test_total_derivative_rejects_second_order_input():
    e = sy.d2u(1, 1, 2)
    with pytest.raises(sy.OrderError):
        sy.total_derivative(e, 1, 2)


def test_explicit_vs_total_on_pure_coordinate():
    e = sy.x(1) * sy.x(2)
    assert (sy.total_derivative(e, 1, 2) - sy.x(2)).is_zero()
    assert (sy.explicit_partial(e, 2) - sy.x(1)).is_zero()


def test_chain_rule_on_potential():
    # D_a F(u) = f_k(u) u^k_a
    n = 2
    for a in range(1, n + 1):
        lhs = sy.total_derivative(sy.Fpot(), a, n)
        rhs = sy.DiffExpr()
        for k in range(1, n + 1):
            rhs = rhs + sy.dF(k) * sy.du(k, a)
        assert (lhs - rhs).is_zero()


# ------------------------------------------------------------ Euler operator

def test_euler_operator_simple_lagrangian():
    # L = (1/2)(u^1_1)^2 -> E_1(L) = -u^1_{11}
    n = 2
    L = Fraction(1, 2) * sy.du(1, 1) * sy.du(1, 1)
    e = sy.euler_operator(L, 1, n)
    assert (e + sy.d2u(1, 1, 1)).is_zero()
    assert sy.euler_operator(L, 2, n).is_zero()


def test_euler_operator_second_order_input():
    # E_1(u^1 u^1_{12}) = 2 u^1_{12}
    n = 2
    L = sy.u(1) * sy.d2u(1, 1, 2)
    e = sy.euler_operator(L, 1, n)
    assert (e - 2 * sy.d2u(1, 1, 2)).is_zero()


def test_euler_annihilates_divergences():
    rng = random.Random(0)
    for trial in range(100):
        n = 2 if trial % 2 == 0 else 3
        with_time = trial % 3 == 0
        axes = list(range(0 if with_time else 1, n + 1))
        flux = {a: sy.random_expr(rng, n, with_time=with_time) for a in axes}
        div = sy.DiffExpr()
        for a, P in flux.items():
            div = div + sy.total_derivative(P, a, n)
        for k in range(1, n + 1):
            assert sy.euler_operator(div, k, n).is_zero()


def test_euler_lagrange_of_static_lagrangian():
    # E_i(L) = -(C u_kl)_i + f_i for the anisotropic static energy
    n = 2
    C = iso_entries(1, Fraction(1, 2), n)
    L = sy.lagrangian_static(C, n)
    for i in range(1, n + 1):
        expect = sy.DiffExpr() - sy.dF(i)
        for k in range(1, n + 1):
            for ll in range(1, n + 1):
                for j in range(1, n + 1):
                    c = C[k - 1][ll - 1][i - 1][j - 1]
                    if c:
                        expect = expect - Fraction(c) * sy.d2u(j, k, ll)
        assert (sy.euler_operator(L, i, n) - expect).is_zero()


# ------------------------------------------------------- prolongation/Noether

def test_translation_flux_is_stress():
    # Noether residual of a translation must vanish identically
    n = 2
    C = iso_entries(2, -1, n)
    L = sy.lagrangian_static(C, n)
    for j in range(1, n + 1):
        assert sy.noether_residual(sy.translation(j, n), L).is_zero()


def test_noether_residual_random_pairs():
    rng = random.Random(42)
    for trial in range(100):
        n = 2 if trial % 2 == 0 else 3
        with_time = trial % 2 == 1
        gen = sy.random_generator(rng, n, has_time=with_time)
        L = sy.random_expr(rng, n, with_time=with_time, with_potential=True)
        assert sy.noether_residual(gen, L).is_zero()


def test_noether_residual_named_pairs():
    for n in (2, 3):
        C = iso_entries(1, Fraction(1, 2), n)
        assert sy.noether_residual(sy.static_dilation(n),
                                   sy.lagrangian_static(C, n)).is_zero()
        assert sy.noether_residual(sy.spacetime_dilation(n),
                                   sy.lagrangian_dynamic(C, n)).is_zero()
    C = iso_entries(1, Fraction(1, 2), 2)
    assert sy.noether_residual(sy.hamiltonian_dilation(2, 1, 1),
                               sy.lagrangian_hamiltonian(C, 2)).is_zero()


# ------------------------------------------------------------- scaling forms

def scaling_interior_static(n):
    out = sy.DiffExpr()
    for k in range(1, n + 1):
        out = out + Fraction(n - 2, 2) * sy.u(k) * sy.dF(k)
    return out - Fraction(n) * sy.Fpot()


def scaling_interior_dynamic(n):
    out = sy.DiffExpr()
    for k in range(1, n + 1):
        out = out + Fraction(n - 1, 2) * sy.u(k) * sy.dF(k)
    return out - Fraction(n + 1) * sy.Fpot()


def scaling_interior_coupled(n, a, b):
    out = sy.DiffExpr()
    for k in range(1, n + 1):
        out = out + Fraction(n - 1, 2) * (
            Fraction(a) * sy.u(k) * sy.dH(sy.FU, k)
            + Fraction(b) * sy.v(k) * sy.dH(sy.FV, k))
    return out - Fraction(n + 1) * sy.Hpot()


@pytest.mark.parametrize("n", [2, 3])
def test_static_dilation_interior(n):
    C = iso_entries(1, Fraction(1, 2), n)
    ident = sy.derive_scaling_identity(sy.static_dilation(n),
                                       sy.lagrangian_static(C, n))
    assert (ident.interior - scaling_interior_static(n)).is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_spacetime_dilation_interior(n):
    C = iso_entries(1, Fraction(1, 2), n)
    ident = sy.derive_scaling_identity(sy.spacetime_dilation(n),
                                       sy.lagrangian_dynamic(C, n))
    assert (ident.interior - scaling_interior_dynamic(n)).is_zero()


@pytest.mark.parametrize("ab", [(1, 1), (Fraction(1, 2), Fraction(3, 2))])
def test_hamiltonian_dilation_interior(ab):
    n = 2
    a, b = ab
    C = iso_entries(1, Fraction(1, 2), n)
    ident = sy.derive_scaling_identity(sy.hamiltonian_dilation(n, a, b),
                                       sy.lagrangian_hamiltonian(C, n))
    assert (ident.interior - scaling_interior_coupled(n, a, b)).is_zero()


def test_hamiltonian_dilation_rejects_bad_weights():
    with pytest.raises(ValueError):
        sy.hamiltonian_dilation(2, 1, 2)


def test_scaling_identity_divergence_on_solutions():
    # interior - Div(flux) must be a multiple of the Euler-Lagrange
    # expressions: substituting them to zero is encoded by the Noether
    # residual, which subtracts Q_k E_k(L) explicitly.
    n = 2
    C = iso_entries(1, 0, n)
    gen = sy.static_dilation(n)
    L = sy.lagrangian_static(C, n)
    ident = sy.derive_scaling_identity(gen, L)
    div = sy.DiffExpr()
    for a, P in ident.flux.items():
        div = div + sy.total_derivative(P, a, n)
    onshell = ident.interior - div
    for k in range(1, n + 1):
        onshell = onshell - sy.characteristic(gen, sy.FU, k) \
            * sy.euler_operator(L, k, n)
    assert onshell.is_zero()


# -------------------------------------------------------- isotropic algebra

@pytest.mark.parametrize("mu,lam", [(1, 0), (1, 1), (2, -1)])
@pytest.mark.parametrize("n", [2, 3])
def test_isotropic_euler_lagrange_equivalence(mu, lam, n):
    # the displacement-gradient quadratic form and the symmetrized strain
    # form induce identical Euler-Lagrange operators
    C = iso_entries(mu, lam, n)
    L0 = sy.isotropic_energy(Fraction(mu), Fraction(lam), n)
    Ls = sy.strain_tensor_energy(C, n)
    for k in range(1, n + 1):
        d = sy.euler_operator(L0, k, n) - sy.euler_operator(Ls, k, n)
        assert d.is_zero()


def test_strain_forms_differ_pointwise_but_not_variationally():
    # the integrands differ by a null Lagrangian (a total divergence)
    n = 2
    C = iso_entries(1, 1, n)
    L0 = sy.isotropic_energy(Fraction(1), Fraction(1), n)
    Ls = sy.strain_tensor_energy(C, n)
    assert not (L0 - Ls).is_zero()
