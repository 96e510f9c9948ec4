"""Time integration of elastic wave systems with nonlinear body forces,
including the coupled cross-gradient (Hamiltonian-type) system, plus energy
and dilational (Morawetz-type) functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fieldeval
from . import geometry
from . import models
from . import symbolic as sy

DEFAULT_CFL = 0.5


@dataclass
class DynamicModel:
    """Wave system u_tt = C u_kl + f(u), or the coupled pair
    u_tt = C u_kl + H_v, v_tt = C v_kl + H_u (n even)."""
    dom: geometry.DomainSpec
    C: models.ElasticModuli
    h: float
    F: models.BodyForcePotential = None
    H: models.CouplingPotential = None
    order: int = 4                  # spatial stencil order (2 or 4)
    cfl: float = DEFAULT_CFL
    free_space: bool = False        # compact data in a large box
    grid: geometry.Grid = None

    def __post_init__(self):
        if self.grid is None:
            self.grid = geometry.build_grid(self.dom, self.h)
        if self.H is not None and self.F is not None:
            raise ValueError("specify a body-force potential or a coupling "
                             "potential, not both")
        if self.H is not None and self.dom.n_dim % 2 != 0:
            raise ValueError("the coupled cross-gradient system requires an "
                             "even spatial dimension")
        if self.order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")
        self.c_max = models.acoustic_speed_bound(self.C)

    @property
    def n_dim(self):
        return self.dom.n_dim

    @property
    def coupled(self):
        return self.H is not None

    def max_dt(self):
        return self.cfl * self.h / self.c_max

    def check_dt(self, dt):
        if dt > self.max_dt() * (1.0 + 1e-12):
            raise ValueError("dt=%g violates the stability bound %g"
                             % (dt, self.max_dt()))


@dataclass
class DynamicState:
    t: float
    u: geometry.GridField
    u_t: geometry.GridField
    dt: float
    v: geometry.GridField = None
    v_t: geometry.GridField = None
    accel: tuple = None             # cached accelerations at time t
    step_index: int = 0

    def copy(self):
        return DynamicState(
            t=self.t, u=self.u.copy(), u_t=self.u_t.copy(), dt=self.dt,
            v=None if self.v is None else self.v.copy(),
            v_t=None if self.v_t is None else self.v_t.copy(),
            accel=self.accel, step_index=self.step_index)


# ------------------------------------------------------- spatial stencils

def _pad_odd(a, k, axis):
    """Pad k ghost layers by odd reflection about the boundary sample
    (homogeneous Dirichlet: u(-s) = -u(s), u(0) = 0)."""
    lead = -np.flip(a.take(np.arange(1, k + 1), axis=axis), axis=axis)
    trail = -np.flip(a.take(np.arange(a.shape[axis] - k - 1,
                                      a.shape[axis] - 1), axis=axis),
                     axis=axis)
    return np.concatenate([lead, a, trail], axis=axis)


def _slice_shift(a, axis, off, k):
    """View of the padded array shifted by off, trimmed back to the core."""
    idx = [slice(None)] * a.ndim
    idx[axis] = slice(k + off, a.shape[axis] - k + off if off < k else None)
    idx[axis] = slice(k + off, a.shape[axis] - k + off)
    return a[tuple(idx)]


def second_derivative_dirichlet(vals, k_ax, l_ax, h, order):
    """d^2/dx_k dx_l of node data with odd-reflection Dirichlet ghosts."""
    if order == 2:
        ghost = 1
        pure = ((1.0, 1), (-2.0, 0), (1.0, -1))
        first = ((0.5, 1), (-0.5, -1))
    else:
        ghost = 2
        pure = ((-1.0 / 12, 2), (4.0 / 3, 1), (-5.0 / 2, 0),
                (4.0 / 3, -1), (-1.0 / 12, -2))
        first = ((-1.0 / 12, 2), (2.0 / 3, 1), (-2.0 / 3, -1), (1.0 / 12, -2))
    if k_ax == l_ax:
        a = _pad_odd(vals, ghost, k_ax)
        out = np.zeros_like(vals)
        for c, off in pure:
            out += c * _slice_shift(a, k_ax, off, ghost)
        return out / (h * h)
    a = _pad_odd(_pad_odd(vals, ghost, k_ax), ghost, l_ax)
    out = np.zeros(vals.shape)
    for c1, o1 in first:
        for c2, o2 in first:
            out += (c1 * c2) * _slice_shift(
                _slice_shift(a, k_ax, o1, ghost), l_ax, o2, ghost)
    return out / (h * h)


def elastic_operator(model, values):
    """C^{kl}_{ij} u^j_{kl} at every node (zeroed on the Dirichlet mask)."""
    n = model.n_dim
    Cf = model.C.float_view
    out = np.zeros_like(values)
    for k in range(n):
        for l in range(n):
            block = Cf[k, l]
            if not block.any():
                continue
            for j in range(n):
                if not block[:, j].any():
                    continue
                d2 = second_derivative_dirichlet(values[j], k, l,
                                                 model.grid.h, model.order)
                for i in range(n):
                    if block[i, j]:
                        out[i] += block[i, j] * d2
    return out


def acceleration(model, state):
    """(a_u, a_v) right-hand sides at the state's current fields."""
    inside = model.grid.inside
    uv = state.u.values
    a_u = elastic_operator(model, uv)
    if model.coupled:
        vv = state.v.values
        a_v = elastic_operator(model, vv)
        a_u += model.H.grad_v(uv, vv)
        a_v += model.H.grad_u(uv, vv)
        a_v[:, ~inside] = 0.0
    else:
        a_v = None
        if model.F is not None:
            a_u += model.F.grad(uv)
    a_u[:, ~inside] = 0.0
    return a_u, a_v


# ------------------------------------------------------------ integration

def step_leapfrog(state, model):
    """One velocity-Verlet step; Dirichlet zeros are preserved exactly."""
    model.check_dt(abs(state.dt))
    dt = state.dt
    if state.accel is None:
        state.accel = acceleration(model, state)
    a_u0, a_v0 = state.accel
    new = state.copy()
    new.u.values += dt * state.u_t.values + 0.5 * dt * dt * a_u0
    new.u.apply_dirichlet()
    if model.coupled:
        new.v.values += dt * state.v_t.values + 0.5 * dt * dt * a_v0
        new.v.apply_dirichlet()
    new.t = state.t + dt
    new.step_index = state.step_index + 1
    a_u1, a_v1 = acceleration(model, new)
    new.u_t.values += 0.5 * dt * (a_u0 + a_u1)
    new.u_t.apply_dirichlet()
    if model.coupled:
        new.v_t.values += 0.5 * dt * (a_v0 + a_v1)
        new.v_t.apply_dirichlet()
    new.accel = (a_u1, a_v1)
    if not np.all(np.isfinite(new.u.values)) or \
            not np.all(np.isfinite(new.u_t.values)):
        raise FloatingPointError("non-finite field values at step %d "
                                 "(t=%g)" % (new.step_index, new.t))
    return new


def reversed_state(state):
    """Velocity-flipped copy; stepping it retraces the trajectory."""
    out = state.copy()
    out.u_t.values *= -1.0
    if out.v_t is not None:
        out.v_t.values *= -1.0
    out.accel = None
    return out


# ----------------------------------------------------- initial conditions

def gaussian_bump(model, center, width, amplitude, component=0):
    """u = amplitude * exp(-|x-c|^2 / width^2) on one component, zero
    velocity.  Effectively compact: the support radius reported to the
    wave-contact computation is where the profile falls to 1e-16."""
    grid = model.grid
    c = np.asarray(center, dtype=float)
    pts = np.stack(grid.meshgrid(), axis=-1)
    r2 = np.sum((pts - c) ** 2, axis=-1)
    prof = amplitude * np.exp(-r2 / (width * width))
    vals = grid.zeros(model.n_dim)
    vals[component] = prof
    u = geometry.GridField(grid, vals).apply_dirichlet()
    u_t = geometry.GridField(grid, grid.zeros(model.n_dim))
    support = float(np.linalg.norm(c)) + width * math.sqrt(math.log(1e16))
    return u, u_t, support


def wave_contact_time(model, support_radius):
    """Conservative time before which compact data cannot reach the box
    boundary."""
    box = model.dom.bounding_box()
    margin = min(min(abs(a), abs(b)) for a, b in box) - support_radius
    return max(margin, 0.0) / model.c_max


def initial_state(model, u, u_t, dt, v=None, v_t=None):
    model.check_dt(dt)
    n = model.n_dim
    grid = model.grid
    if model.coupled and v is None:
        raise ValueError("the coupled system needs partner fields")
    return DynamicState(t=0.0, u=u.copy(), u_t=u_t.copy(), dt=dt,
                        v=None if v is None else v.copy(),
                        v_t=None if v_t is None else v_t.copy())


# ------------------------------------------------- densities & functionals

def machine_identity(model, a=None, b=None):
    """Scaling identity of the space-time dilation for the model's system."""
    n = model.n_dim
    if model.coupled:
        if a is None or b is None:
            raise ValueError("the coupled identity needs dilation weights "
                             "a and b")
        gen = sy.hamiltonian_dilation(n, a, b)
        L = sy.lagrangian_hamiltonian(model.C.entries, n)
    else:
        gen = sy.spacetime_dilation(n)
        L = sy.lagrangian_dynamic(model.C.entries, n)
    return sy.derive_scaling_identity(gen, L)


def _volume_ctx(model, state):
    return fieldeval.volume_context(
        state.u, t=state.t, u_t=state.u_t, v=state.v, v_t=state.v_t,
        F=model.F, H=model.H, order=model.order)


def energy_total(model, state):
    """Quadrature of E(u) = (1/2)(C grad-u grad-u + |u_t|^2) - F(u), or
    E(u,v) = C grad-u grad-v + u_t.v_t - H(u,v)."""
    grid = model.grid
    Cf = model.C.float_view
    gu = geometry.gradient_arrays(state.u.values, grid.h, order=model.order)
    if model.coupled:
        gv = geometry.gradient_arrays(state.v.values, grid.h,
                                      order=model.order)
        dens = np.einsum("klij,ik...,jl...->...", Cf, gu, gv)
        dens += np.sum(state.u_t.values * state.v_t.values, axis=0)
        dens -= model.H.value(state.u.values, state.v.values)
    else:
        dens = 0.5 * np.einsum("klij,ik...,jl...->...", Cf, gu, gu)
        dens += 0.5 * np.sum(state.u_t.values ** 2, axis=0)
        if model.F is not None:
            dens -= model.F.value(state.u.values)
    return geometry.volume_integral(dens, grid)


def morawetz_functional(state, model, identity):
    """M(t): quadrature of the machine-derived time flux P^t."""
    ctx = _volume_ctx(model, state)
    dens = fieldeval.evaluate(identity.flux[sy.TIME], ctx,
                              shape=model.grid.shape)
    return geometry.volume_integral(dens, model.grid)


def morawetz_rhs(state, model, identity):
    """{interior, boundary}: d/dt M = interior - boundary on solutions."""
    ctx = _volume_ctx(model, state)
    interior_dens = fieldeval.evaluate(identity.interior, ctx,
                                       shape=model.grid.shape)
    interior = geometry.volume_integral(interior_dens, model.grid)
    if model.free_space:
        return {"interior": interior, "boundary": 0.0}
    mesh = geometry.build_boundary_mesh(model.dom, model.grid.h)
    grad_u = geometry.boundary_gradient(state.u, mesh)
    grad_v = None
    if model.coupled:
        grad_v = geometry.boundary_gradient(state.v, mesh)
    bctx = fieldeval.dirichlet_boundary_context(
        mesh, grad_u, t=state.t, grad_v=grad_v, F=model.F, H=model.H)
    flux_nu = np.zeros(len(mesh))
    for i in range(1, model.n_dim + 1):
        flux_nu += fieldeval.evaluate(identity.flux[i], bctx,
                                      shape=(len(mesh),)) * mesh.nu[:, i - 1]
    boundary = geometry.boundary_integral(flux_nu, mesh)
    return {"interior": interior, "boundary": boundary}


# ------------------------------------------------------------- trajectories

@dataclass
class TrajectorySample:
    t: float
    M: float
    rhs_interior: float
    rhs_boundary: float
    energy: float
    step_index: int


@dataclass
class Trajectory:
    samples: list
    model: DynamicModel
    identity: object
    window_end: float = math.inf    # wave-contact limit for free-space runs

    def times(self):
        return np.array([s.t for s in self.samples])

    def to_csv(self, path):
        rows = time_series_rows(self)
        header = "t,M,dM_dt_centered,rhs_interior,rhs_boundary,gap,energy"
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join("%.17g" % val for val in row) + "\n")


def time_series_rows(traj):
    """Rows (t, M, dM/dt centered, interior, boundary, gap, energy) at the
    interior time samples."""
    s = traj.samples
    rows = []
    for i in range(1, len(s) - 1):
        dmdt = (s[i + 1].M - s[i - 1].M) / (s[i + 1].t - s[i - 1].t)
        rhs = s[i].rhs_interior - s[i].rhs_boundary
        rows.append((s[i].t, s[i].M, dmdt, s[i].rhs_interior,
                     s[i].rhs_boundary, abs(dmdt - rhs), s[i].energy))
    return rows


def run(model, state, n_steps, identity=None, a=None, b=None,
        sample_every=1, support_radius=None):
    """Integrate n_steps, sampling the dilational functional and its
    right-hand side at every sample_every-th step."""
    if identity is None:
        identity = machine_identity(model, a=a, b=b)
    window = math.inf
    if model.free_space:
        if support_radius is None:
            raise ValueError("free-space runs need the initial support "
                             "radius for the wave-contact window")
        window = wave_contact_time(model, support_radius)
    samples = []

    def sample(st):
        rhs = morawetz_rhs(st, model, identity)
        samples.append(TrajectorySample(
            t=st.t, M=morawetz_functional(st, model, identity),
            rhs_interior=rhs["interior"], rhs_boundary=rhs["boundary"],
            energy=energy_total(model, st), step_index=st.step_index))

    sample(state)
    for k in range(n_steps):
        state = step_leapfrog(state, model)
        if (k + 1) % sample_every == 0:
            sample(state)
    return Trajectory(samples=samples, model=model, identity=identity,
                      window_end=window), state
