"""Discrete equilibrium solver: energy minimization and eigenpair extraction
for linear elasticity with nonlinear body forces under homogeneous Dirichlet
conditions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import geometry
from . import models


@dataclass
class StaticProblem:
    dom: geometry.DomainSpec
    C: models.ElasticModuli
    F: models.BodyForcePotential
    h: float
    g: object = None          # optional source with value(x) -> (ncomp, ...)
    grid: geometry.Grid = None

    def __post_init__(self):
        if self.grid is None:
            self.grid = geometry.build_grid(self.dom, self.h)

    @property
    def n_dim(self):
        return self.dom.n_dim


@dataclass
class StaticSolution:
    u: geometry.GridField
    residual_norm: float
    energy: float
    iterations: int
    converged: bool


@dataclass
class SolverOptions:
    tol_res: float = None          # default 1e-8 * problem scale
    max_iter: int = None           # default 10 * unknowns
    energy_floor: float = -1e12
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4


def _source_values(p):
    if p.g is None:
        return None
    pts = np.stack(p.grid.meshgrid(), axis=-1)
    return np.asarray(p.g.value(pts), dtype=float)


class ManufacturedSineSource:
    """Source forcing the exact solution u* = (sin(pi x) sin(pi y), 0) of the
    isotropic equilibrium system on the unit square (n = 2, zero potential):
    g = -(mu lap(u*) + (mu + lam) grad div u*)."""

    def __init__(self, mu, lam, amplitude=1.0):
        self.mu = float(mu)
        self.lam = float(lam)
        self.amplitude = float(amplitude)

    def _trig(self, pts):
        x, y = np.moveaxis(np.asarray(pts, dtype=float), -1, 0)
        return (np.sin(np.pi * x), np.sin(np.pi * y),
                np.cos(np.pi * x), np.cos(np.pi * y))

    def exact(self, pts):
        sx, sy, _, _ = self._trig(pts)
        return self.amplitude * np.stack([sx * sy, np.zeros_like(sx)])

    def value(self, pts):
        sx, sy, cx, cy = self._trig(pts)
        c1 = (3.0 * self.mu + self.lam) * np.pi ** 2
        c2 = (self.mu + self.lam) * np.pi ** 2
        return self.amplitude * np.stack([c1 * sx * sy, -c2 * cx * cy])

    def jacobian(self, pts):
        sx, sy, cx, cy = self._trig(pts)
        c1 = (3.0 * self.mu + self.lam) * np.pi ** 3
        c2 = (self.mu + self.lam) * np.pi ** 3
        jac = np.empty((2, 2) + sx.shape)
        jac[0, 0] = c1 * cx * sy
        jac[0, 1] = c1 * sx * cy
        jac[1, 0] = c2 * sx * cy
        jac[1, 1] = c2 * cx * sy
        return self.amplitude * jac


# ----------------------------------------------------- independent residual

def _shift(a, axis, off):
    """a shifted by off along axis, zero-filled (Dirichlet extension)."""
    out = np.zeros_like(a)
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if off > 0:
        src[axis] = slice(off, None)
        dst[axis] = slice(None, -off)
    elif off < 0:
        src[axis] = slice(None, off)
        dst[axis] = slice(-off, None)
    else:
        return a.copy()
    out[tuple(dst)] = a[tuple(src)]
    return out


def second_difference(a, k, l, h):
    """Central second difference d^2 a / dx_k dx_l on node data (0-based)."""
    if k == l:
        return (_shift(a, k, 1) - 2.0 * a + _shift(a, k, -1)) / (h * h)
    pp = _shift(_shift(a, k, 1), l, 1)
    pm = _shift(_shift(a, k, 1), l, -1)
    mp = _shift(_shift(a, k, -1), l, 1)
    mm = _shift(_shift(a, k, -1), l, -1)
    return (pp - pm - mp + mm) / (4.0 * h * h)


def assemble_residual(p, u):
    """Node-wise C^{kl}_{ij} u^j_{kl} + f_i(u) + g_i on interior nodes.

    Coded directly from the shift stencils, independent of the assembled
    energy matrices, so optimizer and discretization errors stay separable.
    """
    grid = p.grid
    n = p.n_dim
    vals = np.where(grid.inside, u.values, 0.0)
    res = np.zeros_like(vals)
    Cf = p.C.float_view
    for k, l in itertools.product(range(n), repeat=2):
        block = Cf[k, l]            # block[i, j] = C^{kl}_{ij}
        if not block.any():
            continue
        for j in range(n):
            if not block[:, j].any():
                continue
            d2 = second_difference(vals[j], k, l, grid.h)
            for i in range(n):
                if block[i, j]:
                    res[i] += block[i, j] * d2
    res += p.F.grad(vals)
    gv = _source_values(p)
    if gv is not None:
        res += gv
    res[:, ~grid.inside] = 0.0
    return geometry.GridField(grid, res)


# ----------------------------------------------------------- discrete energy

def _axis_matrix_second(m, h):
    main = np.full(m, -2.0)
    off = np.ones(m - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / (h * h)


def _axis_matrix_first(m, h):
    off = np.ones(m - 1) * 0.5
    return sp.diags([-off, off], [-1, 1], format="csr") / h


def _kron_chain(mats):
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def stencil_operator(p):
    """Full-grid sparse matrix of u -> C^{kl}_{ij} u^j_{kl}.

    DOF layout: component-major, nodes in C order; non-interior values are
    expected to be zero before application.
    """
    grid = p.grid
    n = p.n_dim
    h = grid.h
    eye = [sp.identity(s, format="csr") for s in grid.shape]
    first = [_axis_matrix_first(s, h) for s in grid.shape]

    def axis_op(k, l):
        mats = list(eye)
        if k == l:
            mats[k] = _axis_matrix_second(grid.shape[k], h)
        else:
            mats[k] = first[k]
            mats[l] = first[l]
        return _kron_chain(mats)

    nnode = int(np.prod(grid.shape))
    blocks = [[None] * n for _ in range(n)]
    Cf = p.C.float_view
    for k, l in itertools.product(range(n), repeat=2):
        P = axis_op(k, l)
        for i, j in itertools.product(range(n), repeat=2):
            c = Cf[k, l, i, j]
            if c:
                blocks[i][j] = c * P if blocks[i][j] is None \
                    else blocks[i][j] + c * P
    for i in range(n):
        for j in range(n):
            if blocks[i][j] is None:
                blocks[i][j] = sp.csr_matrix((nnode, nnode))
    return sp.bmat(blocks, format="csr")


class DiscreteEnergy:
    """Quadratic elastic part plus pointwise potential/source terms,
    restricted to interior degrees of freedom.

    The quadratic part is -(h^n) times the masked central-difference
    operator, so critical points of the discrete energy are exactly the
    zeros of the stencil residual at every interior node, on any domain.
    """

    def __init__(self, p):
        grid = p.grid
        n = p.n_dim
        self.p = p
        self.grid = grid
        self.inside_flat = grid.inside.ravel()
        full = stencil_operator(p)              # component-major layout
        mask = np.concatenate([self.inside_flat] * n)
        A = (-(grid.h ** n)) * full[mask][:, mask]
        self.A = ((A + A.T) * 0.5).tocsr()
        self.n = n
        self.nin = int(self.inside_flat.sum())
        self.node_w = np.full(self.nin, grid.h ** n)
        gv = _source_values(p)
        self.g_in = None if gv is None else \
            gv.reshape(n, -1)[:, self.inside_flat]

    # -- packing between GridField and the unknown vector --

    def pack(self, field_values):
        return field_values.reshape(self.n, -1)[:, self.inside_flat].ravel()

    def unpack(self, x):
        out = np.zeros((self.n,) + self.grid.shape)
        flat = out.reshape(self.n, -1)
        flat[:, self.inside_flat] = x.reshape(self.n, self.nin)
        return out

    def _comps(self, x):
        return x.reshape(self.n, self.nin)

    def value(self, x):
        s = self._comps(x)
        e = 0.5 * float(x @ (self.A @ x))
        e -= float(self.node_w @ self.p.F.value(s))
        if self.g_in is not None:
            e -= float(self.node_w @ np.sum(self.g_in * s, axis=0))
        return e

    def gradient(self, x):
        s = self._comps(x)
        gnl = -self.p.F.grad(s)
        if self.g_in is not None:
            gnl = gnl - self.g_in
        return self.A @ x + (gnl * self.node_w).ravel()

    def mass_diagonal(self):
        return np.concatenate([self.node_w] * self.n)


def solve_static(p, init=None, opts=None):
    """Nonlinear conjugate gradient minimization of the discrete energy.

    Exact line search on the quadratic part, Armijo backtracking on the full
    energy; Dirichlet values stay bit-exactly zero throughout.
    """
    opts = opts or SolverOptions()
    if not models.check_positivity(p.C):
        import warnings
        warnings.warn("moduli fail positivity: minimization may be unbounded")
    E = DiscreteEnergy(p)
    if init is None:
        x = np.zeros(E.A.shape[0])
    else:
        x = E.pack(np.where(p.grid.inside, init.values, 0.0))
    scale = max(1.0, float(np.abs(x).max()))
    gv = _source_values(p)
    if gv is not None:
        scale = max(scale, float(np.abs(gv).max()))
    tol = opts.tol_res if opts.tol_res is not None else 1e-8 * scale
    max_iter = opts.max_iter if opts.max_iter is not None \
        else 10 * E.A.shape[0]
    # gradient tolerance equivalent to the residual tolerance: on rectangles
    # grad = -(h^n) * residual exactly
    gtol = tol * float(E.node_w.min())

    g = E.gradient(x)
    d = -g
    e = E.value(x)
    converged = float(np.abs(g).max()) <= gtol
    it = 0
    while not converged and it < max_iter:
        it += 1
        Ad = E.A @ d
        dAd = float(d @ Ad)
        gd = float(g @ d)
        if gd >= 0.0:               # not a descent direction: restart
            d = -g
            Ad = E.A @ d
            dAd = float(d @ Ad)
            gd = float(g @ d)
        alpha = -gd / dAd if dAd > 0 else 1.0
        # Armijo backtracking on the full energy, with a rounding slack so
        # steps whose decrease is below float resolution are still accepted
        slack = 16.0 * np.finfo(float).eps * max(abs(e), 1e-300)
        stalled = False
        while True:
            xn = x + alpha * d
            en = E.value(xn)
            if en <= e + opts.armijo_slope * alpha * gd + slack:
                break
            alpha *= opts.armijo_shrink
            if alpha < 1e-30:
                xn, en = x, e
                stalled = True
                break
        if en < opts.energy_floor:
            raise RuntimeError("energy descended below the floor: "
                               "the discrete functional is unbounded")
        gn = E.gradient(xn)
        beta = max(0.0, float(gn @ (gn - g)) / float(g @ g))  # PR+
        d = -gn + beta * d
        x, g, e = xn, gn, en
        if float(np.abs(g).max()) <= gtol:
            converged = True
        elif stalled:
            break                   # no representable descent remains

    u = geometry.GridField(p.grid, E.unpack(x)).apply_dirichlet()
    res = assemble_residual(p, u)
    res_norm = float(np.abs(res.values).max())
    # report the quadrature energy of the Lagrangian density
    energy = discrete_energy_value(p, u)
    return StaticSolution(u=u, residual_norm=res_norm, energy=energy,
                          iterations=it, converged=converged)


def discrete_energy_value(p, u):
    """Quadrature of (1/2) C grad-u grad-u - F(u) - g.u over the domain."""
    grid = p.grid
    n = p.n_dim
    gu = geometry.gradient_arrays(u.values, grid.h)
    dens = 0.5 * np.einsum("klij,ik...,jl...->...", p.C.float_view, gu, gu)
    dens -= p.F.value(u.values)
    gv = _source_values(p)
    if gv is not None:
        dens -= np.sum(gv * u.values, axis=0)
    return geometry.volume_integral(dens, grid)


def smallest_eigenpair(p, tol=1e-10, max_iter=500, seed=0):
    """Smallest eigenvalue/eigenfield of the Dirichlet elastic operator.

    Inverse power iteration on A u = kappa M u with a sparse LU of A;
    kappa is a Rayleigh quotient and the returned residual is
    ||M^{-1} A u - kappa u|| / ||u||.
    """
    if p.F.kind != "zero" or p.g is not None:
        raise ValueError("eigenpair extraction requires a linear problem "
                         "(zero potential, zero source)")
    E = DiscreteEnergy(p)
    A = E.A.tocsc()
    mdiag = E.mass_diagonal()
    lu = spla.splu(A)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(A.shape[0])
    x /= np.sqrt(float(x @ (mdiag * x)))
    kappa = float(x @ (A @ x))
    res = np.inf
    for it in range(max_iter):
        y = lu.solve(mdiag * x)
        y /= np.sqrt(float(y @ (mdiag * y)))
        x = y
        Ax = A @ x
        kappa = float(x @ Ax) / float(x @ (mdiag * x))
        r = Ax / mdiag - kappa * x
        res = float(np.linalg.norm(r) / np.linalg.norm(x))
        if res <= tol:
            break
    else:
        raise RuntimeError("inverse power iteration stagnated at residual "
                           "%.3e" % res)
    field = geometry.GridField(p.grid, E.unpack(x)).apply_dirichlet()
    # normalize to unit max amplitude with a deterministic sign
    flat = field.values.ravel()
    imax = int(np.argmax(np.abs(flat)))
    field.values /= flat[imax]
    return kappa, field, res
