"""Static equilibrium solver: convergence, eigenpairs, and collapse."""

import math

import numpy as np
import pytest

from elastident import geometry, models, statics


def iso(mu, lam, n=2):
    return models.moduli_from_lame(models.IsotropicModuli(mu, lam), n)


def test_manufactured_source_consistency():
    src = statics.ManufacturedSineSource(1.0, 0.0)
    pts = np.random.default_rng(1).uniform(0.1, 0.9, size=(2, 7))
    eps = 1e-6
    g0 = np.asarray(src.value(np.moveaxis(pts, 0, -1)))
    J = np.asarray(src.jacobian(np.moveaxis(pts, 0, -1)))
    for j in range(2):
        pp = pts.copy()
        pp[j] += eps
        pm = pts.copy()
        pm[j] -= eps
        gm = np.asarray(src.value(np.moveaxis(pm, 0, -1)))
        gp = np.asarray(src.value(np.moveaxis(pp, 0, -1)))
        assert np.allclose((gp - gm) / (2 * eps), J[:, j],
                           rtol=1e-6, atol=1e-4)


def test_solve_manufactured_square_convergence():
    C = iso(1, 0, 2)
    dom = geometry.DomainSpec.unit_square()
    src = statics.ManufacturedSineSource(1.0, 0.0)
    errs = []
    for h in (1 / 8, 1 / 16, 1 / 32):
        p = statics.StaticProblem(dom=dom, C=C,
                                  F=models.BodyForcePotential.zero(),
                                  h=h, g=src)
        sol = statics.solve_static(p)
        assert sol.converged
        pts = np.stack(p.grid.meshgrid(), axis=-1)
        exact = np.asarray(src.exact(pts))
        errs.append(float(np.abs(sol.u.values - exact).max()))
    assert errs[-1] < 5e-3
    order = math.log2(errs[0] / errs[-1]) / 2
    assert order > 1.5


def test_solver_zero_source_returns_zero():
    C = iso(1, 1, 2)
    p = statics.StaticProblem(dom=geometry.DomainSpec.unit_square(), C=C,
                              F=models.BodyForcePotential.zero(), h=1 / 8)
    sol = statics.solve_static(p)
    assert sol.converged
    assert np.abs(sol.u.values).max() == 0.0


def test_smallest_eigenpair_square_oracle():
    # component-decoupled Laplacian moduli: the smallest Dirichlet
    # eigenvalue on the unit square is 2 pi^2
    C = models.ElasticModuli.identity_like(2)
    p = statics.StaticProblem(dom=geometry.DomainSpec.unit_square(), C=C,
                              F=models.BodyForcePotential.zero(), h=1 / 16)
    kappa, field, res = statics.smallest_eigenpair(p)
    assert res < 1e-8
    assert abs(kappa - 2 * math.pi ** 2) < 0.2
    # eigenfield is a product of sines up to sign and normalization
    X, Y = p.grid.meshgrid()
    mode = np.sin(math.pi * X) * np.sin(math.pi * Y)
    v = field.values
    comp = v[int(np.argmax(np.abs(v).reshape(2, -1).max(axis=1)))]
    a = float((comp * mode).sum() / (mode * mode).sum())
    assert np.abs(comp - a * mode).max() < 5e-3 * abs(a)


def test_smallest_eigenpair_disk_refines():
    C = iso(1, 0.5, 2)
    vals = []
    for h in (1 / 16, 1 / 32):
        p = statics.StaticProblem(dom=geometry.DomainSpec.ball(1.0), C=C,
                                  F=models.BodyForcePotential.zero(), h=h)
        kappa, _, res = statics.smallest_eigenpair(p)
        assert res < 1e-8
        vals.append(kappa)
    # eigenvalues settle under refinement
    assert abs(vals[1] - vals[0]) < 0.5
    assert vals[1] > 0


def test_eigenpair_rejects_nonzero_potential():
    C = iso(1, 0, 2)
    p = statics.StaticProblem(dom=geometry.DomainSpec.unit_square(), C=C,
                              F=models.BodyForcePotential.power(1, 4), h=1 / 8)
    with pytest.raises(ValueError):
        statics.smallest_eigenpair(p)


def test_collapse_supercritical_power():
    # no nontrivial equilibrium: random small initial data minimizes to zero
    C = iso(1, 0, 3)
    dom = geometry.DomainSpec.ball(1.0, n_dim=3)
    p = statics.StaticProblem(dom=dom, C=C,
                              F=models.BodyForcePotential.power(1, 8),
                              h=1 / 8)
    rng = np.random.default_rng(0)
    init = geometry.GridField(p.grid,
                              0.01 * rng.standard_normal((3,) + p.grid.shape))
    init.apply_dirichlet()
    sol = statics.solve_static(p, init=init)
    assert sol.converged
    assert np.abs(sol.u.values).max() <= 1e-8


def test_discrete_energy_decreases_from_init():
    C = iso(1, 0, 2)
    src = statics.ManufacturedSineSource(1.0, 0.0)
    p = statics.StaticProblem(dom=geometry.DomainSpec.unit_square(), C=C,
                              F=models.BodyForcePotential.zero(),
                              h=1 / 16, g=src)
    sol = statics.solve_static(p)
    zero = geometry.GridField(p.grid, p.grid.zeros(2))
    assert statics.discrete_energy_value(p, sol.u) \
        < statics.discrete_energy_value(p, zero)
