"""Leapfrog integrator and dilational functionals for the wave systems."""

import math

import numpy as np
import pytest

from elastident import dynamics, geometry, models


def iso(mu, lam, n=2):
    return models.moduli_from_lame(models.IsotropicModuli(mu, lam), n)


def square_model(h=1 / 16, mu=1, lam=0.5, F=None, order=4):
    return dynamics.DynamicModel(dom=geometry.DomainSpec.unit_square(),
                                 C=iso(mu, lam), h=h, F=F, order=order)


def random_state(model, seed=0, dt=None):
    rng = np.random.default_rng(seed)
    grid = model.grid
    u = geometry.GridField(grid, rng.standard_normal((2,) + grid.shape))
    ut = geometry.GridField(grid, rng.standard_normal((2,) + grid.shape))
    u.apply_dirichlet()
    ut.apply_dirichlet()
    if dt is None:
        dt = 0.5 * model.max_dt()
    return dynamics.initial_state(model, u, ut, dt)


# ----------------------------------------------------------------- stability

def test_dt_bound_enforced():
    model = square_model()
    with pytest.raises(ValueError):
        model.check_dt(10 * model.max_dt())
    model.check_dt(0.9 * model.max_dt())


def test_coupled_requires_even_dimension():
    with pytest.raises(ValueError):
        dynamics.DynamicModel(dom=geometry.DomainSpec.ball(1.0, n_dim=3),
                              C=iso(1, 0, 3), h=1 / 8,
                              H=models.CouplingPotential.bilinear(1.0))


def test_potential_and_coupling_exclusive():
    with pytest.raises(ValueError):
        dynamics.DynamicModel(dom=geometry.DomainSpec.unit_square(),
                              C=iso(1, 0), h=1 / 8,
                              F=models.BodyForcePotential.zero(),
                              H=models.CouplingPotential.bilinear(1.0))


# ------------------------------------------------------------------ leapfrog

def test_time_reversal():
    model = square_model()
    st0 = random_state(model, seed=3)
    st = st0
    for _ in range(100):
        st = dynamics.step_leapfrog(st, model)
    st = dynamics.reversed_state(st)
    for _ in range(100):
        st = dynamics.step_leapfrog(st, model)
    scale = max(1.0, float(np.abs(st0.u.values).max()))
    assert np.abs(st.u.values - st0.u.values).max() / scale < 1e-10


def test_standing_mode_linear_wave():
    # decoupled-Laplacian moduli: u = sin(pi x) sin(pi y) cos(sqrt(2) pi t)
    # solves the linear system exactly
    model = dynamics.DynamicModel(dom=geometry.DomainSpec.unit_square(),
                                  C=models.ElasticModuli.identity_like(2),
                                  h=1 / 32, order=4)
    grid = model.grid
    X, Y = grid.meshgrid()
    mode = np.sin(math.pi * X) * np.sin(math.pi * Y)
    u = geometry.GridField(grid, np.stack([mode, 0 * mode]))
    ut = geometry.GridField(grid, np.zeros((2,) + grid.shape))
    dt = 1 / 256
    st = dynamics.initial_state(model, u, ut, dt)
    n_steps = 64                      # t = 1/4
    for _ in range(n_steps):
        st = dynamics.step_leapfrog(st, model)
    omega = math.sqrt(2.0) * math.pi
    exact = mode * math.cos(omega * st.t)
    assert np.abs(st.u.values[0] - exact).max() < 2e-4
    assert np.abs(st.u.values[1]).max() < 1e-12


def test_leapfrog_dt_order():
    model = square_model(h=1 / 8)
    grid = model.grid
    X, Y = grid.meshgrid()
    mode = np.sin(math.pi * X) * np.sin(math.pi * Y)
    sols = []
    for k in (0, 1, 2):
        dt = 1 / 64 / 2 ** k
        u = geometry.GridField(grid, np.stack([mode, -0.5 * mode]))
        ut = geometry.GridField(grid, np.zeros((2,) + grid.shape))
        st = dynamics.initial_state(model, u, ut, dt)
        for _ in range(round(0.5 / dt)):
            st = dynamics.step_leapfrog(st, model)
        sols.append(st.u.values.copy())
    d01 = np.abs(sols[1] - sols[0]).max()
    d12 = np.abs(sols[2] - sols[1]).max()
    # successive differences shrink ~ 4x for a second-order scheme
    assert d01 / d12 > 3.0


def test_stencil_energy_drift_second_order():
    model = square_model(h=1 / 16)
    hn = model.h ** 2

    def stencil_energy(st):
        lap = dynamics.elastic_operator(model, st.u.values)
        return 0.5 * hn * (float((st.u_t.values ** 2).sum())
                           - float((st.u.values * lap).sum()))

    drifts = []
    for k in (0, 1):
        dt = 0.5 * model.max_dt() / 2 ** k
        st = random_state(model, seed=7, dt=dt)
        e0 = stencil_energy(st)
        for _ in range(50 * 2 ** k):
            st = dynamics.step_leapfrog(st, model)
        drifts.append(abs(stencil_energy(st) - e0) / abs(e0))
    assert drifts[1] < 0.5 * drifts[0] or drifts[1] < 1e-12


# ---------------------------------------------------------------- functionals

def test_wave_contact_window_example():
    dom = geometry.DomainSpec.rectangle(((-2.0, 2.0), (-2.0, 2.0)))
    model = dynamics.DynamicModel(dom=dom, C=iso(1, 0.5), h=1 / 16,
                                  free_space=True)
    t_star = dynamics.wave_contact_time(model, 1.0)
    # distance to the wall is 2 - 1 = 1, fastest speed sqrt(2.5)
    assert math.isclose(t_star, 1.0 / math.sqrt(2.5), rel_tol=1e-12)


def test_gaussian_bump_compact_support():
    dom = geometry.DomainSpec.rectangle(((-2.0, 2.0), (-2.0, 2.0)))
    model = dynamics.DynamicModel(dom=dom, C=iso(1, 0.5), h=1 / 16,
                                  free_space=True)
    u, u_t, radius = dynamics.gaussian_bump(model, (0.0, 0.0), 0.25, 1.0)
    assert radius < 2.0
    pts = np.stack(model.grid.meshgrid())
    r = np.hypot(pts[0], pts[1])
    assert np.abs(u.values[:, r > radius]).max() <= 1e-15
    assert np.abs(u_t.values).max() == 0.0


def test_run_samples_and_window():
    dom = geometry.DomainSpec.rectangle(((-2.0, 2.0), (-2.0, 2.0)))
    model = dynamics.DynamicModel(
        dom=dom, C=iso(1, 0.5), h=1 / 16, free_space=True,
        F=models.BodyForcePotential.power(-0.25, 4))
    u, ut, radius = dynamics.gaussian_bump(model, (0.0, 0.0), 0.25, 1.0)
    st = dynamics.initial_state(model, u, ut, 1 / 64)
    traj, _ = dynamics.run(model, st, 8, support_radius=radius)
    assert len(traj.samples) == 9
    assert traj.window_end > 0
    rows = dynamics.time_series_rows(traj)
    assert len(rows) == 7            # centered differences drop endpoints
    # the identity holds on the samples to discretization accuracy
    for row in rows:
        t, M, dmdt, interior, boundary, gap, energy = row
        assert gap <= 1e-2 * max(1.0, abs(energy))


def test_free_space_run_requires_support_radius():
    dom = geometry.DomainSpec.rectangle(((-2.0, 2.0), (-2.0, 2.0)))
    model = dynamics.DynamicModel(dom=dom, C=iso(1, 0.5), h=1 / 16,
                                  free_space=True)
    st = random_state(model, seed=1, dt=1 / 64)
    with pytest.raises(ValueError):
        dynamics.run(model, st, 2)


def test_energy_total_positive():
    model = square_model()
    st = random_state(model, seed=11)
    assert dynamics.energy_total(model, st) > 0


def test_machine_identity_shapes():
    model = square_model()
    ident = dynamics.machine_identity(model)
    assert set(ident.flux.keys()) == {0, 1, 2}
    coupled = dynamics.DynamicModel(dom=geometry.DomainSpec.unit_square(),
                                    C=iso(1, 0.5), h=1 / 8,
                                    H=models.CouplingPotential.bilinear(1.0))
    with pytest.raises(ValueError):
        dynamics.machine_identity(coupled)
    ident = dynamics.machine_identity(coupled, a=1, b=1)
    assert not ident.interior.is_zero()
