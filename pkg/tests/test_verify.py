"""Identity verification reports: plumbing plus small end-to-end checks."""

import csv
import io
import math

import numpy as np
import pytest

from elastident import dynamics, geometry, models, statics, verify


def iso(mu, lam, n=2):
    return models.moduli_from_lame(models.IsotropicModuli(mu, lam), n)


# ----------------------------------------------------------------- plumbing

def test_observed_order():
    assert math.isnan(verify.observed_order([1.0]))
    assert math.isclose(verify.observed_order([4.0, 1.0]), 2.0)
    assert math.isclose(verify.observed_order([8.0, 4.0, 1.0]), 1.5)
    assert verify.observed_order([1.0, 0.0]) == math.inf


def test_attach_refinement_order():
    reps = [verify.IdentityReport(identity="x", lhs=0, rhs=0, gap=0, scale=1,
                                  relative_gap=g, h=h)
            for g, h in [(4e-2, 1 / 16), (1e-2, 1 / 32)]]
    verify.attach_refinement_order(reps)
    assert math.isclose(reps[-1].order, 2.0)
    assert math.isnan(reps[0].order)


def test_report_csv_round_trip(tmp_path):
    rep = verify.IdentityReport(identity="pohozhaev", lhs=1.25, rhs=1.2,
                                gap=0.05, scale=1.25, relative_gap=0.04,
                                h=1 / 32)
    path = tmp_path / "reports.csv"
    verify.write_reports_csv([rep], path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert rows[0]["identity"] == "pohozhaev"
    assert float(rows[0]["lhs"]) == 1.25
    assert float(rows[0]["relative_gap"]) == 0.04
    assert "PASS" not in rep.render()        # render reports values, not verdicts
    assert "pohozhaev" in rep.render()


# ------------------------------------------------------------------- static

def eigen_solution(dom, mu, lam, h):
    C = iso(mu, lam)
    pz = statics.StaticProblem(dom=dom, C=C,
                               F=models.BodyForcePotential.zero(), h=h)
    kappa, field, _ = statics.smallest_eigenpair(pz)
    p = statics.StaticProblem(dom=dom, C=C,
                              F=models.BodyForcePotential.quadratic(kappa),
                              h=h, grid=pz.grid)
    u = field
    energy = statics.discrete_energy_value(p, u)
    sol = statics.StaticSolution(u=u, residual_norm=0.0, energy=energy,
                                 iterations=0, converged=True)
    return sol, p


def test_pohozhaev_eigenmode_disk():
    sol, p = eigen_solution(geometry.DomainSpec.ball(1.0), 1, 0.5, 1 / 32)
    rep = verify.verify_pohozhaev(sol, p, isotropic=(1, 0.5))
    assert rep.identity == "pohozhaev-isotropic"
    assert rep.relative_gap < 1e-2
    assert rep.rhs_sign_ok
    # the specialized isotropic flux agrees with the general boundary flux
    assert abs(rep.extra["rhs_isotropic"] - rep.rhs) < 1e-2 * rep.scale


def test_pohozhaev_rejects_source():
    C = iso(1, 0)
    p = statics.StaticProblem(dom=geometry.DomainSpec.unit_square(), C=C,
                              F=models.BodyForcePotential.zero(), h=1 / 8,
                              g=statics.ManufacturedSineSource(1.0, 0.0))
    sol = statics.StaticSolution(u=geometry.GridField(p.grid, p.grid.zeros(2)),
                                 residual_norm=0.0, energy=0.0, iterations=0,
                                 converged=True)
    with pytest.raises(ValueError):
        verify.verify_pohozhaev(sol, p)


def test_generalized_pohozhaev_manufactured():
    C = iso(1, 0)
    src = statics.ManufacturedSineSource(1.0, 0.0)
    p = statics.StaticProblem(dom=geometry.DomainSpec.unit_square(), C=C,
                              F=models.BodyForcePotential.zero(), h=1 / 32,
                              g=src)
    sol = statics.solve_static(p)
    rep = verify.verify_pohozhaev_generalized(sol, p)
    assert rep.identity == "pohozhaev-generalized"
    assert rep.relative_gap < 1e-3


def test_sign_flag_requires_star_domain():
    sol, p = eigen_solution(geometry.DomainSpec.annulus(0.5, 1.0), 1, 0.5,
                            1 / 32)
    rep = verify.verify_pohozhaev(sol, p)
    assert rep.rhs_sign_ok is None     # no verdict off star-shaped domains


# ------------------------------------------------------------------ dynamic

def small_trajectory(coupled=False):
    dom = geometry.DomainSpec.unit_square()
    if coupled:
        model = dynamics.DynamicModel(
            dom=dom, C=iso(1, 0.5), h=1 / 32,
            H=models.CouplingPotential.bilinear(1.0))
    else:
        model = dynamics.DynamicModel(
            dom=dom, C=iso(1, 0.5), h=1 / 32,
            F=models.BodyForcePotential.power(-0.25, 4))
    grid = model.grid
    X, Y = grid.meshgrid()
    mode = 0.1 * np.sin(math.pi * X) * np.sin(math.pi * Y)
    u = geometry.GridField(grid, np.stack([mode, 0 * mode]))
    ut = geometry.GridField(grid, np.zeros((2,) + grid.shape))
    kw = {}
    if coupled:
        kw = dict(v=u.copy(), v_t=ut.copy())
    st = dynamics.initial_state(model, u, ut, 1 / 128, **kw)
    traj, _ = dynamics.run(model, st, 16, a=1 if coupled else None,
                           b=1 if coupled else None)
    return traj


def test_morawetz_series_report():
    traj = small_trajectory()
    rep = verify.verify_morawetz(traj)
    assert rep.identity == "morawetz"
    assert rep.relative_gap < 1e-2
    assert rep.series is not None and len(rep.series) > 0


def test_hamiltonian_conformal_report_and_rejections():
    traj = small_trajectory(coupled=True)
    rep = verify.verify_hamiltonian_conformal(traj, 1, 1)
    assert rep.identity == "hamiltonian-conformal"
    assert rep.relative_gap < 1e-2
    with pytest.raises(ValueError):
        verify.verify_hamiltonian_conformal(traj, 1, 2)
    with pytest.raises(ValueError):
        verify.verify_morawetz(traj)
    plain = small_trajectory()
    with pytest.raises(ValueError):
        verify.verify_hamiltonian_conformal(plain, 1, 1)
