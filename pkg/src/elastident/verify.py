"""Evaluate both sides of the integral identities on computed fields and
report gaps, convergence orders, and sign properties."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from . import fieldeval
from . import geometry
from . import models
from . import symbolic as sy


@dataclass
class IdentityReport:
    identity: str          # pohozhaev | pohozhaev-isotropic | ... | morawetz
    lhs: float             # scalar, or max-|.| summary for time series
    rhs: float
    gap: float
    scale: float
    relative_gap: float
    h: float
    dt: float = 0.0
    order: float = math.nan      # observed convergence order, if measured
    rhs_sign_ok: bool = None     # static star-shaped runs: RHS <= tol
    series: list = None          # (t, lhs, rhs, gap) rows for dynamic runs
    extra: dict = field(default_factory=dict)

    def render(self):
        lines = ["identity %s  (h=%g%s)" % (
            self.identity, self.h,
            ", dt=%g" % self.dt if self.dt else "")]
        lines.append("  lhs=%.12g rhs=%.12g gap=%.3e relative_gap=%.3e"
                     % (self.lhs, self.rhs, self.gap, self.relative_gap))
        if not math.isnan(self.order):
            lines.append("  observed order: %.3f" % self.order)
        if self.rhs_sign_ok is not None:
            lines.append("  boundary term non-positive: %s"
                         % self.rhs_sign_ok)
        for k, v in self.extra.items():
            lines.append("  %s: %s" % (k, v))
        return "\n".join(lines)

    def csv_row(self):
        return "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g" % (
            self.identity, self.h, self.dt, self.lhs, self.rhs, self.gap,
            self.relative_gap, self.order)


CSV_HEADER = "identity,h,dt,lhs,rhs,gap,relative_gap,order"


def write_reports_csv(reports, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in reports:
            fh.write(r.csv_row() + "\n")


def _relative(lhs, rhs, energy_scale):
    gap = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs), abs(energy_scale))
    if scale == 0.0:
        return gap, 1.0, 0.0
    return gap, scale, gap / scale


def observed_order(gaps):
    """Mean of successive log2 gap ratios; NaN with fewer than 2 levels."""
    gaps = [g for g in gaps]
    if len(gaps) < 2:
        return math.nan
    ratios = []
    for a, b in zip(gaps[:-1], gaps[1:]):
        if b == 0.0:
            ratios.append(math.inf)
        elif a == 0.0:
            ratios.append(-math.inf)
        else:
            ratios.append(math.log2(a / b))
    return float(np.mean(ratios))


def attach_refinement_order(reports):
    """Fill the order field of the finest report from a refinement sweep."""
    gaps = [r.relative_gap for r in reports]
    reports[-1].order = observed_order(gaps)
    return reports


# --------------------------------------------------------------- static

def _static_identity(p, with_source):
    gen = sy.static_dilation(p.n_dim)
    L = sy.lagrangian_static(p.C.entries, p.n_dim)
    if with_source:
        L = L + sy.source_term(p.n_dim)
    return sy.derive_scaling_identity(gen, L)


def _boundary_flux_integral(identity, p, u, mesh, g=None):
    grad_u = geometry.boundary_gradient(u, mesh)
    bctx = fieldeval.dirichlet_boundary_context(mesh, grad_u, F=p.F, g=g)
    flux_nu = np.zeros(len(mesh))
    for i in range(1, p.n_dim + 1):
        flux_nu += fieldeval.evaluate(identity.flux[i], bctx,
                                      shape=(len(mesh),)) * mesh.nu[:, i - 1]
    return geometry.boundary_integral(flux_nu, mesh), flux_nu


def verify_pohozhaev(sol, p, isotropic=None):
    """Volume integral of the scaling deficit of F versus the boundary flux.

    isotropic: optional (mu, lam) pair; adds the specialized flux
    -(1/2) oint [mu |grad u|^2 + (mu+lam)(div u)^2](x, nu) ds to the report.
    """
    if p.g is not None:
        raise ValueError("the problem carries a source term; use "
                         "verify_pohozhaev_generalized")
    identity = _static_identity(p, with_source=False)
    ctx = fieldeval.volume_context(sol.u, F=p.F)
    interior = fieldeval.evaluate(identity.interior, ctx,
                                  shape=p.grid.shape)
    lhs = geometry.volume_integral(interior, p.grid)
    mesh = geometry.build_boundary_mesh(p.dom, p.grid.h)
    rhs, flux_nu = _boundary_flux_integral(identity, p, sol.u, mesh)
    gap, scale, rel = _relative(lhs, rhs, abs(sol.energy))
    xnu = np.sum(mesh.x * mesh.nu, axis=1)
    star = bool(np.min(xnu) >= -geometry.TOL_GEO)
    sign_ok = None
    if star and models.check_positivity(p.C):
        sign_ok = bool(rhs <= 1e-10 * scale)
    report = IdentityReport(identity="pohozhaev", lhs=lhs, rhs=rhs, gap=gap,
                            scale=scale, relative_gap=rel, h=p.grid.h,
                            rhs_sign_ok=sign_ok)
    if isotropic is not None:
        mu, lam = (float(v) for v in isotropic)
        grad_u = geometry.boundary_gradient(sol.u, mesh)
        gsq = np.sum(grad_u ** 2, axis=(0, 1))
        div = np.einsum("ccf->f", grad_u)
        dens = -0.5 * (mu * gsq + (mu + lam) * div ** 2) * xnu
        report.extra["rhs_isotropic"] = geometry.boundary_integral(dens, mesh)
        report.identity = "pohozhaev-isotropic"
    return report


def verify_pohozhaev_generalized(sol, p):
    """Pohozhaev check with an explicit source g(x): the correction terms
    produced by the x-dependence of g come from the symbolic derivation,
    not from an assumed formula."""
    if p.g is None:
        return verify_pohozhaev(sol, p)
    identity = _static_identity(p, with_source=True)
    ctx = fieldeval.volume_context(sol.u, F=p.F, g=p.g)
    interior = fieldeval.evaluate(identity.interior, ctx,
                                  shape=p.grid.shape)
    lhs = geometry.volume_integral(interior, p.grid)
    mesh = geometry.build_boundary_mesh(p.dom, p.grid.h)
    rhs, _ = _boundary_flux_integral(identity, p, sol.u, mesh, g=p.g)
    gap, scale, rel = _relative(lhs, rhs, abs(sol.energy))
    return IdentityReport(identity="pohozhaev-generalized", lhs=lhs, rhs=rhs,
                          gap=gap, scale=scale, relative_gap=rel, h=p.grid.h)


# -------------------------------------------------------------- dynamic

def _series_report(traj, identity_name, enforce_window):
    model = traj.model
    rows = dynamics.time_series_rows(traj)
    if not rows:
        raise ValueError("trajectory too short: need at least 3 samples")
    if enforce_window:
        beyond = [r for r in rows if r[0] > traj.window_end]
        if beyond:
            raise ValueError(
                "free-space run extends past the wave-contact time %g; "
                "the boundary term can no longer be dropped"
                % traj.window_end)
    series = []
    gaps = []
    scale = max(abs(traj.samples[0].energy), 1e-300)
    for t, M, dmdt, interior, boundary, gap, energy in rows:
        rhs = interior - boundary
        series.append((t, dmdt, rhs, gap))
        gaps.append(gap)
        scale = max(scale, abs(dmdt), abs(rhs))
    worst = int(np.argmax(gaps))
    gap = gaps[worst]
    return IdentityReport(
        identity=identity_name, lhs=series[worst][1], rhs=series[worst][2],
        gap=gap, scale=scale, relative_gap=gap / scale, h=model.grid.h,
        dt=traj.samples[1].t - traj.samples[0].t, series=series)


def verify_morawetz(traj):
    """Centered dM/dt against the interior + boundary right-hand side at
    every interior time sample; free-space trajectories drop the boundary
    term and must stay inside the wave-contact window."""
    model = traj.model
    if model.coupled:
        raise ValueError("coupled trajectories are checked by "
                         "verify_hamiltonian_conformal")
    name = "morawetz-freespace" if model.free_space else "morawetz"
    return _series_report(traj, name, enforce_window=model.free_space)


def verify_hamiltonian_conformal(traj, a, b):
    """Conformal identity of the coupled cross-gradient system."""
    from fractions import Fraction
    if Fraction(a) + Fraction(b) != 2:
        raise ValueError("the dilation weights must satisfy a + b = 2 "
                         "exactly")
    model = traj.model
    if model.n_dim % 2 != 0:
        raise ValueError("the coupled system requires an even spatial "
                         "dimension")
    if not model.coupled:
        raise ValueError("trajectory does not carry partner fields")
    return _series_report(traj, "hamiltonian-conformal",
                          enforce_window=model.free_space)
