"""Numeric evaluation of differential-polynomial expressions on grid fields.

An evaluation context maps atom tuples from the symbolic module to numpy
arrays (or scalars) sampled at a common set of points; `evaluate` then
reduces any expression to a pointwise array.
"""

from __future__ import annotations

import numpy as np

from . import geometry
from . import symbolic as sy


def evaluate(expr, ctx, shape=None):
    """Pointwise value of a DiffExpr given atom samples in ctx.

    ctx: dict atom-tuple -> ndarray/scalar.  All arrays must broadcast to a
    common shape; pass `shape` to fix the output shape of constant
    expressions.
    """
    out = None
    for mono, coeff in expr.terms.items():
        term = float(coeff)
        for atom, exp in mono:
            try:
                val = ctx[atom]
            except KeyError:
                raise KeyError("no sample for atom %s" % sy.atom_str(atom))
            term = term * (np.asarray(val, dtype=float) ** exp
                           if exp != 1 else np.asarray(val, dtype=float))
        out = term if out is None else out + term
    if out is None:
        out = 0.0
    out = np.asarray(out, dtype=float)
    if shape is not None and out.shape != tuple(shape):
        out = np.broadcast_to(out, shape).copy()
    return out


def _insert_field(ctx, f, values, grads, vel=None):
    ncomp = values.shape[0]
    for k in range(1, ncomp + 1):
        ctx[(sy.U_, f, k)] = values[k - 1]
        for i in range(1, grads.shape[1] + 1):
            ctx[(sy.D1_, f, k, i)] = grads[k - 1, i - 1]
        if vel is not None:
            ctx[(sy.D1_, f, k, sy.TIME)] = vel[k - 1]


def _insert_potentials(ctx, F=None, H=None, uvals=None, vvals=None):
    if F is not None and uvals is not None:
        n = uvals.shape[0]
        ctx[(sy.F_,)] = F.value(uvals)
        gF = F.grad(uvals)
        for k in range(1, n + 1):
            ctx[(sy.DF_, k)] = gF[k - 1]
    if H is not None and uvals is not None and vvals is not None:
        n = uvals.shape[0]
        ctx[(sy.H_,)] = H.value(uvals, vvals)
        gu = H.grad_u(uvals, vvals)
        gv = H.grad_v(uvals, vvals)
        for k in range(1, n + 1):
            ctx[(sy.DH_, sy.FU, k)] = gu[k - 1]
            ctx[(sy.DH_, sy.FV, k)] = gv[k - 1]


def _insert_source(ctx, g, pts):
    """g: object with value(x)->(n,...) and jacobian(x)->(n,n,...)."""
    if g is None:
        return
    gv = g.value(pts)
    gj = g.jacobian(pts)
    n = gv.shape[0]
    for i in range(1, n + 1):
        ctx[(sy.G_, i)] = gv[i - 1]
        for j in range(1, n + 1):
            ctx[(sy.DG_, i, j)] = gj[i - 1, j - 1]


def volume_context(u, *, t=0.0, u_t=None, v=None, v_t=None,
                   F=None, H=None, g=None, order=2):
    """Samples of all first-order atoms at every grid node.

    u, u_t, v, v_t: GridField (velocities optional); F, H: potentials;
    g: explicit source with value/jacobian callables of node positions.
    """
    grid = u.grid
    h = grid.h
    ctx = {(sy.T_,): float(t)}
    mesh = grid.meshgrid()
    for i in range(1, grid.n_dim + 1):
        ctx[(sy.X_, i)] = mesh[i - 1]
    gu = geometry.gradient_arrays(u.values, h, order=order)
    _insert_field(ctx, sy.FU, u.values, gu,
                  vel=None if u_t is None else u_t.values)
    vvals = None
    if v is not None:
        gvv = geometry.gradient_arrays(v.values, h, order=order)
        _insert_field(ctx, sy.FV, v.values, gvv,
                      vel=None if v_t is None else v_t.values)
        vvals = v.values
    _insert_potentials(ctx, F=F, H=H, uvals=u.values, vvals=vvals)
    if g is not None:
        pts = np.stack(mesh, axis=-1)
        _insert_source(ctx, g, pts)
    return ctx


def dirichlet_boundary_context(mesh, grad_u, *, t=0.0, grad_v=None,
                               F=None, H=None, g=None):
    """Atom samples on a Dirichlet boundary where u (and v) vanish.

    grad_u: (ncomp, ndim, nfacets) boundary gradients, typically from
    geometry.boundary_gradient.  Time derivatives vanish since u = 0 on the
    boundary for all t.
    """
    nf = len(mesh)
    n = mesh.x.shape[1]
    ncomp = grad_u.shape[0]
    zeros = np.zeros(nf)
    ctx = {(sy.T_,): float(t)}
    for i in range(1, n + 1):
        ctx[(sy.X_, i)] = mesh.x[:, i - 1]
    for k in range(1, ncomp + 1):
        ctx[(sy.U_, sy.FU, k)] = zeros
        ctx[(sy.D1_, sy.FU, k, sy.TIME)] = zeros
        for i in range(1, n + 1):
            ctx[(sy.D1_, sy.FU, k, i)] = grad_u[k - 1, i - 1]
        if grad_v is not None:
            ctx[(sy.U_, sy.FV, k)] = zeros
            ctx[(sy.D1_, sy.FV, k, sy.TIME)] = zeros
            for i in range(1, n + 1):
                ctx[(sy.D1_, sy.FV, k, i)] = grad_v[k - 1, i - 1]
    zvec = np.zeros((ncomp, nf))
    _insert_potentials(ctx, F=F, H=H, uvals=zvec,
                       vvals=zvec if grad_v is not None else None)
    if g is not None:
        _insert_source(ctx, g, mesh.x)
    return ctx


def free_boundary_context(mesh, u, *, t=0.0, u_t=None, v=None, v_t=None,
                          F=None, H=None, g=None, order=2):
    """Atom samples on a boundary where fields need not vanish.

    Field values and one-sided gradients are interpolated from the grid to
    the facet points.  Used for free-space (large box) runs where all fields
    are negligible near the boundary anyway.
    """
    grid = u.grid
    nf = len(mesh)
    n = grid.n_dim
    ctx = {(sy.T_,): float(t)}
    for i in range(1, n + 1):
        ctx[(sy.X_, i)] = mesh.x[:, i - 1]

    def sample(field):
        return geometry.interpolate(field.values, grid, mesh.x)

    def sample_grad(field):
        gv = geometry.gradient_arrays(field.values, grid.h, order=order)
        out = np.empty((field.ncomp, n, nf))
        for c in range(field.ncomp):
            out[c] = geometry.interpolate(gv[c], grid, mesh.x)
        return out

    uvals = sample(u)
    gu = sample_grad(u)
    _insert_field(ctx, sy.FU, uvals, gu,
                  vel=None if u_t is None else sample(u_t))
    vvals = None
    if v is not None:
        vvals = sample(v)
        _insert_field(ctx, sy.FV, vvals, sample_grad(v),
                      vel=None if v_t is None else sample(v_t))
    _insert_potentials(ctx, F=F, H=H, uvals=uvals, vvals=vvals)
    if g is not None:
        _insert_source(ctx, g, mesh.x)
    return ctx
