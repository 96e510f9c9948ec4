"""Exact computer algebra for differential polynomials.

Expressions are flat sums of monomials with rational coefficients.  Atoms
range over the independent variables t, x_i, the dependent variables u^k,
v^k, their first and second derivatives, the opaque potentials F(u),
H(u, v) with formal partials, and an opaque x-dependent source g_i(x) with
formal first partials.  Everything is exact: no floats enter this module.

The spatial dimension n is fixed per expression context (2 <= n <= 4).
Derivative indices use 0 for time and 1..n for the spatial directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

# atom kind codes (first entry of every atom tuple)
T_ = 0    # (T_,)                time
X_ = 1    # (X_, i)              x_i
U_ = 2    # (U_, f, k)           dependent variable, f in {FU, FV}
D1_ = 3   # (D1_, f, k, a)       first derivative, a in {0=t, 1..n}
D2_ = 4   # (D2_, f, k, a, b)    second derivative, a <= b
F_ = 5    # (F_,)                opaque potential F(u)
DF_ = 6   # (DF_, k)             F_{u^k}
DF2_ = 7  # (DF2_, k, l)         F_{u^k u^l}, k <= l
H_ = 8    # (H_,)                opaque potential H(u, v)
DH_ = 9   # (DH_, f, k)          H_{u^k} or H_{v^k}
DH2_ = 10 # (DH2_, f, k, g, l)   second formal partial, (f,k) <= (g,l)
G_ = 11   # (G_, i)              opaque source component g_i(x)
DG_ = 12  # (DG_, i, j)          partial g_{i,j} = d g_i / d x_j
NU_ = 13  # (NU_, i)             outward unit normal component nu_i
DN_ = 14  # (DN_, f, k)          normal-derivative amplitude w^k on the boundary
D3_ = 15  # (D3_, f, k, a, b, c) third derivative, a <= b <= c; appears only
          # inside the Euler operator applied to second-order expressions

FU, FV = 0, 1   # dependent-field tags
TIME = 0        # derivative index of t

_ATOM_NAMES = {T_: "t", F_: "F", H_: "H"}
_FIELD_NAMES = {FU: "u", FV: "v"}


class OrderError(ValueError):
    """Raised when an operation would exceed the representable jet order."""


def _idx_name(a):
    return "t" if a == TIME else "x%d" % a


def atom_str(atom):
    k = atom[0]
    if k in (T_, F_, H_):
        return _ATOM_NAMES[k]
    if k == X_:
        return "x%d" % atom[1]
    if k == U_:
        return "%s%d" % (_FIELD_NAMES[atom[1]], atom[2])
    if k == D1_:
        return "%s%d_%s" % (_FIELD_NAMES[atom[1]], atom[2], _idx_name(atom[3]))
    if k == D2_:
        return "%s%d_%s%s" % (_FIELD_NAMES[atom[1]], atom[2],
                              _idx_name(atom[3]), _idx_name(atom[4]))
    if k == DF_:
        return "F_u%d" % atom[1]
    if k == DF2_:
        return "F_u%du%d" % (atom[1], atom[2])
    if k == DH_:
        return "H_%s%d" % (_FIELD_NAMES[atom[1]], atom[2])
    if k == DH2_:
        return "H_%s%d%s%d" % (_FIELD_NAMES[atom[1]], atom[2],
                               _FIELD_NAMES[atom[3]], atom[4])
    if k == G_:
        return "g%d" % atom[1]
    if k == DG_:
        return "g%d_x%d" % (atom[1], atom[2])
    if k == NU_:
        return "nu%d" % atom[1]
    if k == D3_:
        return "%s%d_%s%s%s" % (_FIELD_NAMES[atom[1]], atom[2],
                                _idx_name(atom[3]), _idx_name(atom[4]),
                                _idx_name(atom[5]))
    if k == DN_:
        return "w%s%d" % (_FIELD_NAMES[atom[1]], atom[2])
    raise ValueError("unknown atom %r" % (atom,))


class DiffExpr:
    """Normalized sum of monomials; structural equality is semantic equality."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        # terms: dict monomial -> Fraction, monomial = sorted tuple of (atom, exp)
        self.terms = terms if terms is not None else {}

    # ---- constructors -------------------------------------------------

    @staticmethod
    def const(c):
        c = Fraction(c)
        if c == 0:
            return DiffExpr()
        return DiffExpr({(): c})

    @staticmethod
    def atom(atom, c=1):
        c = Fraction(c)
        if c == 0:
            return DiffExpr()
        return DiffExpr({((atom, 1),): c})

    # ---- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, DiffExpr):
            other = DiffExpr.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return DiffExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffExpr):
            other = DiffExpr.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return DiffExpr.const(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, DiffExpr):
            c = Fraction(other)
            if c == 0:
                return DiffExpr()
            return DiffExpr({m: k * c for m, k in self.terms.items()})
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, Fraction(0)) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return DiffExpr(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")
        out = DiffExpr.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, DiffExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self):
        return not self.terms

    def atoms(self):
        """Set of all atoms appearing in the expression."""
        out = set()
        for m in self.terms:
            for a, _ in m:
                out.add(a)
        return out

    def max_deriv_order(self):
        order = 0
        for a in self.atoms():
            if a[0] == D2_:
                order = max(order, 2)
            elif a[0] == D1_:
                order = max(order, 1)
        return order

    # ---- text dump (deterministic; used by golden-file tests) ----------

    def dump(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            c = self.terms[m]
            factors = [str(c)] if (c != 1 or not m) else []
            if c == -1 and m:
                factors = ["-1"]
            for a, e in m:
                s = atom_str(a)
                factors.append(s if e == 1 else "%s^%d" % (s, e))
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return "DiffExpr(%s)" % self.dump()


def _mono_mul(m1, m2):
    d = dict(m1)
    for a, e in m2:
        d[a] = d.get(a, 0) + e
    return tuple(sorted(d.items()))


# ---- convenient atom constructors ---------------------------------------

def t():
    return DiffExpr.atom((T_,))

def x(i):
    return DiffExpr.atom((X_, i))

def u(k, f=FU):
    return DiffExpr.atom((U_, f, k))

def v(k):
    return u(k, FV)

def du(k, a, f=FU):
    return DiffExpr.atom((D1_, f, k, a))

def dv(k, a):
    return du(k, a, FV)

def d2u(k, a, b, f=FU):
    if a > b:
        a, b = b, a
    return DiffExpr.atom((D2_, f, k, a, b))

def Fpot():
    return DiffExpr.atom((F_,))

def dF(k):
    return DiffExpr.atom((DF_, k))

def Hpot():
    return DiffExpr.atom((H_,))

def dH(f, k):
    return DiffExpr.atom((DH_, f, k))

def gsrc(i):
    return DiffExpr.atom((G_, i))

def dgsrc(i, j):
    return DiffExpr.atom((DG_, i, j))

def nu(i):
    """Outward unit normal component; only appears in boundary-reduced forms."""
    return DiffExpr.atom((NU_, i))

def dn(k, f=FU):
    """Normal-derivative amplitude w^k with grad u^k = w^k nu on the boundary."""
    return DiffExpr.atom((DN_, f, k))

def const(c):
    return DiffExpr.const(c)

ZERO = DiffExpr()
ONE = DiffExpr.const(1)


# ---- partial derivatives -------------------------------------------------

def _mono_without(m, atom):
    """(monomial with one power of `atom` removed, remaining exponent)."""
    d = dict(m)
    e = d[atom]
    if e == 1:
        del d[atom]
    else:
        d[atom] = e - 1
    return tuple(sorted(d.items())), e


def atom_partial(e, atom):
    """Formal partial treating every atom as an independent coordinate."""
    out = {}
    for m, c in e.terms.items():
        d = dict(m)
        if atom not in d:
            continue
        m2, exp = _mono_without(m, atom)
        s = out.get(m2, Fraction(0)) + c * exp
        if s:
            out[m2] = s
        else:
            out.pop(m2, None)
    return DiffExpr(out)


def _chain_partial(e, targets, dep_atom_factor):
    """Shared chain-rule helper: sum over atoms in `targets` of
    atom_partial(e, a) * dep_atom_factor(a)."""
    out = DiffExpr()
    for a in e.atoms():
        fac = dep_atom_factor(a)
        if fac is not None:
            out = out + atom_partial(e, a) * fac
    return out


def dep_partial(e, f, k):
    """Partial with respect to the dependent variable u^k (or v^k),
    chaining through the opaque potentials F and H."""
    def factor(a):
        kind = a[0]
        if kind == U_ and a[1] == f and a[2] == k:
            return ONE
        if f == FU:
            if kind == F_:
                return dF(k)
            if kind == DF_:
                return DiffExpr.atom((DF2_,) + tuple(sorted((a[1], k))))
            if kind == DF2_:
                raise OrderError("third formal partial of F is not representable")
        if kind == H_:
            return dH(f, k)
        if kind == DH_:
            key = tuple(sorted([(a[1], a[2]), (f, k)]))
            return DiffExpr.atom((DH2_, key[0][0], key[0][1], key[1][0], key[1][1]))
        if kind == DH2_:
            raise OrderError("third formal partial of H is not representable")
        return None
    return _chain_partial(e, None, factor)


def explicit_partial(e, a):
    """Partial with respect to the independent variable x_a (a=0 for t),
    chaining through the x-dependence of the opaque source g."""
    def factor(atom):
        kind = atom[0]
        if a == TIME:
            return ONE if kind == T_ else None
        if kind == X_ and atom[1] == a:
            return ONE
        if kind == G_:
            return dgsrc(atom[1], a)
        if kind == DG_:
            raise OrderError("second formal partial of g is not representable")
        return None
    return _chain_partial(e, None, factor)


# ---- total derivative ------------------------------------------------------

def _total_of_atom(atom, a, n):
    kind = atom[0]
    if kind == T_:
        return ONE if a == TIME else ZERO
    if kind == X_:
        return ONE if a == atom[1] else ZERO
    if kind == U_:
        return du(atom[2], a, atom[1])
    if kind == D1_:
        return d2u(atom[2], atom[3], a, atom[1])
    if kind == D2_:
        idx = tuple(sorted((atom[3], atom[4], a)))
        return DiffExpr.atom((D3_, atom[1], atom[2]) + idx)
    if kind == F_:
        out = DiffExpr()
        for k in range(1, n + 1):
            out = out + dF(k) * du(k, a)
        return out
    if kind == DF_:
        out = DiffExpr()
        for l in range(1, n + 1):
            pair = tuple(sorted((atom[1], l)))
            out = out + DiffExpr.atom((DF2_,) + pair) * du(l, a)
        return out
    if kind == H_:
        out = DiffExpr()
        for f in (FU, FV):
            for k in range(1, n + 1):
                out = out + dH(f, k) * du(k, a, f)
        return out
    if kind == DH_:
        out = DiffExpr()
        for f in (FU, FV):
            for l in range(1, n + 1):
                key = tuple(sorted([(atom[1], atom[2]), (f, l)]))
                second = DiffExpr.atom((DH2_, key[0][0], key[0][1],
                                        key[1][0], key[1][1]))
                out = out + second * du(l, a, f)
        return out
    if kind == G_:
        if a == TIME:
            return ZERO
        return dgsrc(atom[1], a)
    if kind == DG_:
        raise OrderError("total derivative of a formal source partial "
                         "exceeds the representable order")
    raise OrderError("total derivative of %s exceeds the representable order"
                     % atom_str(atom))


def _total_derivative_ext(e, a, n):
    """D_a allowing second-order input (third-order atoms in the output).

    Internal to the Euler operator on second-order expressions; everything
    public stays within second order.
    """
    out = DiffExpr()
    for m, c in e.terms.items():
        for atom, exp in m:
            rest, _ = _mono_without(m, atom)
            dfac = _total_of_atom(atom, a, n)
            if dfac.is_zero():
                continue
            out = out + DiffExpr({rest: c * exp}) * dfac
    return out


def total_derivative(e, a, n):
    """Total derivative D_a (a=0 for D_t, 1..n for D_{x_a}).

    Rejects input containing second-derivative atoms: the result would
    exceed second order.
    """
    for atom in e.atoms():
        if atom[0] in (D2_, D3_):
            raise OrderError("total derivative of a second-order expression "
                             "is not representable")
    return _total_derivative_ext(e, a, n)


# ---- Euler operator --------------------------------------------------------

def _require_first_order(L, what):
    for atom in L.atoms():
        if atom[0] in (D2_, D3_):
            raise OrderError("%s requires a first-order expression" % what)


def euler_operator(L, k, n, f=FU):
    """Variational derivative E_k(L) with respect to u^k (or v^k with f=FV).

    First-order input uses E_k = d/du^k - D_a d/du^k_a.  Second-order input
    (total divergences of first-order fluxes, in particular) additionally
    carries + D_a D_b d/du^k_ab over normalized index pairs a <= b.
    """
    for atom in L.atoms():
        if atom[0] == D3_:
            raise OrderError("euler_operator input exceeds second order")
    out = dep_partial(L, f, k)
    for a in range(0, n + 1):
        pL = atom_partial(L, (D1_, f, k, a))
        if not pL.is_zero():
            out = out - _total_derivative_ext(pL, a, n)
    for a in range(0, n + 1):
        for b in range(a, n + 1):
            pL = atom_partial(L, (D2_, f, k, a, b))
            if not pL.is_zero():
                out = out + _total_derivative_ext(
                    _total_derivative_ext(pL, b, n), a, n)
    return out


# ---- generators and prolongation -------------------------------------------

@dataclass(frozen=True)
class VectorFieldGenerator:
    """Infinitesimal generator: xi[a] d/dx_a (+ xi[0] d/dt) + phi_u[k] d/du^k
    (+ phi_v[k] d/dv^k).  Coefficients depend on (t, x, u, v) only."""
    n_dim: int
    has_time: bool
    xi: dict          # index a -> DiffExpr  (a in 1..n, plus 0 if has_time)
    phi_u: dict       # k -> DiffExpr
    phi_v: dict = None

    def __post_init__(self):
        if self.n_dim < 2:
            raise ValueError("spatial dimension must be >= 2")
        coeffs = list(self.xi.values()) + list(self.phi_u.values())
        if self.phi_v:
            coeffs += list(self.phi_v.values())
        for c in coeffs:
            for atom in c.atoms():
                if atom[0] in (D1_, D2_):
                    raise ValueError("generator coefficients must not contain "
                                     "derivative atoms")
        if not self.has_time and TIME in self.xi:
            raise ValueError("xi^t given but has_time is False")

    def indices(self):
        idx = list(range(1, self.n_dim + 1))
        return ([TIME] + idx) if self.has_time else idx

    def fields(self):
        return (FU, FV) if self.phi_v else (FU,)

    def phi(self, f, k):
        return self.phi_u[k] if f == FU else self.phi_v[k]


@dataclass(frozen=True)
class ProlongedField:
    base: VectorFieldGenerator
    phi_d: dict       # (f, k, a) -> DiffExpr


def prolong(gen):
    """First prolongation: phi^{k}_a = D_a phi^k - sum_b (D_a xi^b) u^k_b."""
    n = gen.n_dim
    table = {}
    for f in gen.fields():
        for k in range(1, n + 1):
            for a in gen.indices():
                e = total_derivative(gen.phi(f, k), a, n)
                for b in gen.indices():
                    e = e - total_derivative(gen.xi[b], a, n) * du(k, b, f)
                table[(f, k, a)] = e
    return ProlongedField(gen, table)


def apply_prolonged(pv, L):
    """pr^(1)v (L) for a first-order Lagrangian L."""
    _require_first_order(L, "apply_prolonged")
    gen = pv.base
    n = gen.n_dim
    out = DiffExpr()
    for a in gen.indices():
        out = out + gen.xi[a] * explicit_partial(L, a)
    for f in gen.fields():
        for k in range(1, n + 1):
            out = out + gen.phi(f, k) * dep_partial(L, f, k)
            for a in gen.indices():
                pL = atom_partial(L, (D1_, f, k, a))
                if not pL.is_zero():
                    out = out + pv.phi_d[(f, k, a)] * pL
    return out


def characteristic(gen, f, k):
    """Q^k = phi^k - sum_b xi^b u^k_b."""
    q = gen.phi(f, k)
    for b in gen.indices():
        q = q - gen.xi[b] * du(k, b, f)
    return q


def flux_vector(gen, L):
    """P^a = L xi^a + sum_{f,k} (dL/du^k_a) (phi^k - u^k_b xi^b)."""
    n = gen.n_dim
    flux = {}
    for a in gen.indices():
        p = L * gen.xi[a]
        for f in gen.fields():
            for k in range(1, n + 1):
                pL = atom_partial(L, (D1_, f, k, a))
                if not pL.is_zero():
                    p = p + pL * characteristic(gen, f, k)
        flux[a] = p
    return flux


def noether_residual(gen, L):
    """pr v(L) + L D_a xi^a - E(L).Q - Div P; identically zero."""
    n = gen.n_dim
    pv = prolong(gen)
    lhs = apply_prolonged(pv, L)
    for a in gen.indices():
        lhs = lhs + L * total_derivative(gen.xi[a], a, n)
    rhs = DiffExpr()
    for f in gen.fields():
        for k in range(1, n + 1):
            rhs = rhs + euler_operator(L, k, n, f) * characteristic(gen, f, k)
    for a, p in flux_vector(gen, L).items():
        rhs = rhs + total_derivative(p, a, n)
    return lhs - rhs


@dataclass(frozen=True)
class ScalingIdentity:
    """Machine-derived divergence identity: on solutions E(L)=0,
    interior = D_t flux[0] + sum_i D_i flux[i]."""
    interior: DiffExpr
    flux: dict            # index a -> DiffExpr (a=0 present iff has_time)
    generator: VectorFieldGenerator
    lagrangian: DiffExpr


def derive_scaling_identity(gen, L):
    """Interior density pr v(L) + L D_a xi^a together with the flux vector."""
    _require_first_order(L, "derive_scaling_identity")
    n = gen.n_dim
    pv = prolong(gen)
    interior = apply_prolonged(pv, L)
    for a in gen.indices():
        interior = interior + L * total_derivative(gen.xi[a], a, n)
    return ScalingIdentity(interior=interior, flux=flux_vector(gen, L),
                           generator=gen, lagrangian=L)


# ---- standard generators and Lagrangians ------------------------------------

def translation(j, n, has_time=False):
    xi = {a: ZERO for a in range(1, n + 1)}
    if has_time:
        xi[TIME] = ZERO
    xi[j] = ONE
    return VectorFieldGenerator(n_dim=n, has_time=has_time, xi=xi,
                                phi_u={k: ZERO for k in range(1, n + 1)})


def static_dilation(n):
    """x -> lam x, u -> lam^{(2-n)/2} u."""
    return VectorFieldGenerator(
        n_dim=n, has_time=False,
        xi={i: x(i) for i in range(1, n + 1)},
        phi_u={k: Fraction(2 - n, 2) * u(k) for k in range(1, n + 1)})


def spacetime_dilation(n):
    """(t, x) -> (lam t, lam x), u -> lam^{(1-n)/2} u."""
    xi = {i: x(i) for i in range(1, n + 1)}
    xi[TIME] = t()
    return VectorFieldGenerator(
        n_dim=n, has_time=True, xi=xi,
        phi_u={k: Fraction(1 - n, 2) * u(k) for k in range(1, n + 1)})


def hamiltonian_dilation(n, a, b):
    """(t, x) -> (lam t, lam x), u -> lam^{a(1-n)/2} u, v -> lam^{b(1-n)/2} v."""
    a, b = Fraction(a), Fraction(b)
    if a + b != 2:
        raise ValueError("dilation weights must satisfy a + b = 2")
    xi = {i: x(i) for i in range(1, n + 1)}
    xi[TIME] = t()
    return VectorFieldGenerator(
        n_dim=n, has_time=True, xi=xi,
        phi_u={k: a * Fraction(1 - n, 2) * u(k) for k in range(1, n + 1)},
        phi_v={k: b * Fraction(1 - n, 2) * v(k) for k in range(1, n + 1)})


def strain_energy(C, n, f1=FU, f2=FU):
    """(1/2) C^{kl}_{ij} w1^i_k w2^j_l as a DiffExpr (exact rational C)."""
    out = DiffExpr()
    half = Fraction(1, 2)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    c = C[k - 1][l - 1][i - 1][j - 1]
                    if c:
                        out = out + half * Fraction(c) * du(i, k, f1) * du(j, l, f2)
    return out


def strain_tensor_energy(C, n):
    """(1/2) C^{kl}_{ij} e^i_k e^j_l with e the symmetrized gradient."""
    half = Fraction(1, 2)
    e = {}
    for i in range(1, n + 1):
        for k in range(1, n + 1):
            e[(i, k)] = half * (du(i, k) + du(k, i))
    out = DiffExpr()
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    c = C[k - 1][l - 1][i - 1][j - 1]
                    if c:
                        out = out + half * Fraction(c) * e[(i, k)] * e[(j, l)]
    return out


def isotropic_energy(mu, lam, n):
    """(mu/2)|grad u|^2 + ((mu+lam)/2)(div u)^2 -- the classical Navier form."""
    mu, lam = Fraction(mu), Fraction(lam)
    grad2 = DiffExpr()
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            grad2 = grad2 + du(i, j) * du(i, j)
    divu = DiffExpr()
    for i in range(1, n + 1):
        divu = divu + du(i, i)
    return Fraction(mu, 2) * grad2 + (mu + lam) * Fraction(1, 2) * divu * divu


def kinetic_energy(f=FU, n=2, coeff=Fraction(1, 2)):
    out = DiffExpr()
    for i in range(1, n + 1):
        out = out + du(i, TIME, f) * du(i, TIME, f)
    return coeff * out


def lagrangian_static(C, n, with_potential=True):
    """Anisotropic static Lagrangian: (1/2) C e e - F(u)."""
    L = strain_tensor_energy(C, n)
    if with_potential:
        L = L - Fpot()
    return L


def lagrangian_dynamic(C, n, with_potential=True):
    """(1/2) C u^i_k u^j_l - (1/2)|u_t|^2 - F(u)."""
    L = strain_energy(C, n) - kinetic_energy(FU, n)
    if with_potential:
        L = L - Fpot()
    return L


def lagrangian_hamiltonian(C, n, printed=False):
    """Coupled (u, v) Lagrangian for the cross-gradient hyperbolic system.

    The machine form C u^i_k v^j_l - u_t.v_t - H(u,v) has Euler-Lagrange
    expressions matching the system exactly; printed=True instead builds the
    published variant with a 1/2 on the elastic term, kept for the
    coefficient-adjudication log.
    """
    elastic = DiffExpr()
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    c = C[k - 1][l - 1][i - 1][j - 1]
                    if c:
                        elastic = elastic + Fraction(c) * du(i, k) * dv(j, l)
    if printed:
        elastic = Fraction(1, 2) * elastic
    kin = DiffExpr()
    for i in range(1, n + 1):
        kin = kin + du(i, TIME) * dv(i, TIME)
    return elastic - kin - Hpot()


def source_term(n):
    """-g_i(x) u^i, the forcing addition to a static Lagrangian."""
    out = DiffExpr()
    for i in range(1, n + 1):
        out = out - gsrc(i) * u(i)
    return out


# ---- random instances for property tests ------------------------------------

def random_expr(rng, n, *, max_terms=4, max_degree=2, atoms=None,
                first_order=True, with_time=False, with_v=False,
                with_potential=False):
    """Random differential polynomial with small rational coefficients."""
    if atoms is None:
        atoms = [(X_, i) for i in range(1, n + 1)]
        atoms += [(U_, FU, k) for k in range(1, n + 1)]
        if first_order:
            atoms += [(D1_, FU, k, a) for k in range(1, n + 1)
                      for a in ([0] if with_time else []) + list(range(1, n + 1))]
        if with_time:
            atoms.append((T_,))
        if with_v:
            atoms += [(U_, FV, k) for k in range(1, n + 1)]
            if first_order:
                atoms += [(D1_, FV, k, a) for k in range(1, n + 1)
                          for a in ([0] if with_time else []) + list(range(1, n + 1))]
        if with_potential:
            atoms.append((F_,))
    e = DiffExpr()
    for _ in range(rng.randint(1, max_terms)):
        deg = rng.randint(0, max_degree)
        mono = ONE
        for _ in range(deg):
            mono = mono * DiffExpr.atom(rng.choice(atoms))
        coef = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        e = e + coef * mono
    return e


def random_generator(rng, n, *, has_time=False, with_v=False):
    """Random polynomial generator: coefficients of degree <= 2 in (t, x, u)."""
    base_atoms = [(X_, i) for i in range(1, n + 1)]
    base_atoms += [(U_, FU, k) for k in range(1, n + 1)]
    if has_time:
        base_atoms.append((T_,))
    if with_v:
        base_atoms += [(U_, FV, k) for k in range(1, n + 1)]

    def coeff():
        return random_expr(rng, n, max_terms=2, max_degree=2, atoms=base_atoms)

    xi = {i: coeff() for i in range(1, n + 1)}
    if has_time:
        xi[TIME] = coeff()
    phi_u = {k: coeff() for k in range(1, n + 1)}
    phi_v = {k: coeff() for k in range(1, n + 1)} if with_v else None
    return VectorFieldGenerator(n_dim=n, has_time=has_time, xi=xi,
                                phi_u=phi_u, phi_v=phi_v)
