"""Elastic moduli tensors, body-force potentials, and algebraic certificates."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import geometry
from . import symbolic as sy

TOL_EIG = 1e-12


@dataclass(frozen=True)
class IsotropicModuli:
    mu: Fraction
    lame_lambda: Fraction

    def __post_init__(self):
        mu = Fraction(self.mu)
        lam = Fraction(self.lame_lambda)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lame_lambda", lam)
        if mu <= 0 or mu + lam <= 0:
            raise ValueError("Lame moduli must satisfy mu > 0 and mu + lambda > 0")


class ElasticModuli:
    """Constant rank-4 tensor C^{kl}_{ij}, exact rationals plus a float view.

    entries[k][l][i][j] holds C^{kl}_{ij} with zero-based indices.
    """

    def __init__(self, n_dim, entries):
        self.n_dim = n_dim
        self.entries = entries
        self.float_view = np.empty((n_dim,) * 4)
        for k, l, i, j in itertools.product(range(n_dim), repeat=4):
            self.float_view[k, l, i, j] = float(entries[k][l][i][j])

    @staticmethod
    def zeros(n_dim):
        n = n_dim
        return [[[[Fraction(0) for _ in range(n)] for _ in range(n)]
                 for _ in range(n)] for _ in range(n)]

    @staticmethod
    def from_entries(n_dim, values):
        e = ElasticModuli.zeros(n_dim)
        for k, l, i, j in itertools.product(range(n_dim), repeat=4):
            e[k][l][i][j] = Fraction(values[k][l][i][j])
        return ElasticModuli(n_dim, e)

    @staticmethod
    def identity_like(n_dim):
        """C^{kl}_{ij} = delta_ij delta_kl: component-decoupled Laplacians.

        Test-mode tensor; deliberately skips the full index symmetries.
        """
        e = ElasticModuli.zeros(n_dim)
        for i in range(n_dim):
            for k in range(n_dim):
                e[k][k][i][i] = Fraction(1)
        return ElasticModuli(n_dim, e)

    def perturbed(self, index, delta):
        e = [[[[self.entries[k][l][i][j] for j in range(self.n_dim)]
               for i in range(self.n_dim)] for l in range(self.n_dim)]
             for k in range(self.n_dim)]
        k, l, i, j = index
        e[k][l][i][j] = e[k][l][i][j] + Fraction(delta)
        return ElasticModuli(self.n_dim, e)

    def contract(self, A, B):
        """C^{kl}_{ij} A^i_k B^j_l for float matrices A, B with A[i,k] = a^i_k."""
        return float(np.einsum("klij,ik,jl->", self.float_view, A, B))

    def negated(self):
        e = ElasticModuli.zeros(self.n_dim)
        for k, l, i, j in itertools.product(range(self.n_dim), repeat=4):
            e[k][l][i][j] = -self.entries[k][l][i][j]
        return ElasticModuli(self.n_dim, e)

    def symmetrized(self):
        """Average over the symmetry orbit of the moduli tensor."""
        gens = [lambda k, l, i, j: (i, l, k, j),
                lambda k, l, i, j: (k, j, i, l),
                lambda k, l, i, j: (l, k, j, i)]
        e = ElasticModuli.zeros(self.n_dim)
        for idx in itertools.product(range(self.n_dim), repeat=4):
            orbit = {idx}
            frontier = [idx]
            while frontier:
                cur = frontier.pop()
                for gfun in gens:
                    nxt = gfun(*cur)
                    if nxt not in orbit:
                        orbit.add(nxt)
                        frontier.append(nxt)
            s = sum(self.entries[a][b][c][d] for a, b, c, d in orbit)
            k, l, i, j = idx
            e[k][l][i][j] = s / len(orbit)
        return ElasticModuli(self.n_dim, e)


def moduli_from_lame(iso, n_dim):
    """Isotropic tensor with (1/2) C e e = mu|e|^2 + (lambda/2)(tr e)^2."""
    mu, lam = iso.mu, iso.lame_lambda
    e = ElasticModuli.zeros(n_dim)
    for k, l, i, j in itertools.product(range(n_dim), repeat=4):
        val = lam * (i == k) * (j == l) \
            + mu * ((i == j) * (k == l) + (j == k) * (i == l))
        e[k][l][i][j] = Fraction(val)
    return ElasticModuli(n_dim, e)


def check_symmetries(C):
    """Exact entry-wise check of the moduli symmetries.

    Returns (True, None) or (False, first violating index tuple).
    """
    n = C.n_dim
    e = C.entries
    for k, l, i, j in itertools.product(range(n), repeat=4):
        ref = e[k][l][i][j]
        for a, b, c, d in ((i, l, k, j), (k, j, i, l), (l, k, j, i)):
            if e[a][b][c][d] != ref:
                return False, (k, l, i, j)
    return True, None


def induced_quadratic_form(C):
    """Symmetric matrix Q on n*n-dimensional matrix space with
    a^T Q a = C^{kl}_{ij} a^i_k a^j_l (a flattened as a[i*n+k])."""
    n = C.n_dim
    Q = np.zeros((n * n, n * n))
    for k, l, i, j in itertools.product(range(n), repeat=4):
        Q[i * n + k, j * n + l] += float(C.entries[k][l][i][j])
    return 0.5 * (Q + Q.T)


def check_positivity(C, trials=200, seed=0):
    """C a a >= 0: random matrices plus eigen-decomposition of the form."""
    rng = np.random.default_rng(seed)
    n = C.n_dim
    for _ in range(trials):
        a = rng.standard_normal((n, n))
        if C.contract(a, a) < -TOL_EIG * max(1.0, np.abs(C.float_view).max()):
            return False
    Q = induced_quadratic_form(C)
    ev = np.linalg.eigvalsh(Q)
    return bool(ev.min() >= -TOL_EIG * max(1.0, np.abs(Q).max()))


def check_legendre_hadamard(C, trials=500, grid=24, seed=0):
    """Strict positivity of C on rank-one matrices v (x) w."""
    rng = np.random.default_rng(seed)
    n = C.n_dim
    worst = math.inf
    samples = [rng.standard_normal((2, n)) for _ in range(trials)]
    if n == 2:
        ths = np.linspace(0, math.pi, grid, endpoint=False)
        dirs = np.column_stack([np.cos(ths), np.sin(ths)])
        samples += [np.array([d1, d2]) for d1 in dirs for d2 in dirs]
    for pair in samples:
        vdir = pair[0] / np.linalg.norm(pair[0])
        wdir = pair[1] / np.linalg.norm(pair[1])
        a = np.outer(vdir, wdir)      # a^i_k = v^i w_k
        worst = min(worst, C.contract(a, a))
    return worst > TOL_EIG, worst


def acoustic_speed_bound(C):
    """Max wave speed sqrt(max eigenvalue of the acoustic tensor) over directions."""
    n = C.n_dim
    best = 0.0
    if n == 2:
        dirs = [np.array([math.cos(th), math.sin(th)])
                for th in np.linspace(0, math.pi, 180, endpoint=False)]
    else:
        dirs = []
        for th in np.linspace(0, math.pi, 24):
            for ph in np.linspace(0, 2 * math.pi, 48, endpoint=False):
                dirs.append(np.array([math.sin(th) * math.cos(ph),
                                      math.sin(th) * math.sin(ph),
                                      math.cos(th)]))
    for d in dirs:
        acoustic = np.einsum("klij,k,l->ij", C.float_view, d, d)
        ev = np.linalg.eigvalsh(0.5 * (acoustic + acoustic.T))
        best = max(best, ev.max())
    return math.sqrt(max(best, 0.0))


# ----------------------------------------------------------- potentials

@dataclass
class BodyForcePotential:
    """F(s) with F(0) = 0 and an exact gradient; kinds:
    zero | quadratic (kappa |s|^2 / 2) | power (c |s|^p, p >= 2) |
    polynomial (sum of c * prod s_i^e_i, no constant term) | tabulated.
    """
    kind: str
    kappa: float = 0.0
    c: Fraction = Fraction(0)
    p: Fraction = Fraction(0)
    terms: tuple = ()               # ((coeff, (e1,..,en)), ...) for polynomial
    value_fn: object = None         # tabulated
    grad_fn: object = None

    @staticmethod
    def zero():
        return BodyForcePotential(kind="zero")

    @staticmethod
    def quadratic(kappa):
        return BodyForcePotential(kind="quadratic", kappa=float(kappa))

    @staticmethod
    def power(c, p):
        p = Fraction(p)
        if p < 2:
            raise ValueError("power potentials need p >= 2 for a classical "
                             "gradient at the origin")
        return BodyForcePotential(kind="power", c=Fraction(c), p=p)

    @staticmethod
    def polynomial(terms):
        terms = tuple((Fraction(c), tuple(int(e) for e in es))
                      for c, es in terms)
        for c, es in terms:
            if all(e == 0 for e in es) and c != 0:
                raise ValueError("polynomial potential must satisfy F(0) = 0")
        return BodyForcePotential(kind="polynomial", terms=terms)

    @staticmethod
    def tabulated(value_fn, grad_fn):
        if grad_fn is None:
            raise ValueError("tabulated potentials require a user-supplied "
                             "gradient")
        return BodyForcePotential(kind="tabulated", value_fn=value_fn,
                                  grad_fn=grad_fn)

    # -- numeric evaluation; s has shape (ncomp, ...) --

    def value(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "zero":
            return np.zeros(s.shape[1:])
        if self.kind == "quadratic":
            return 0.5 * self.kappa * np.sum(s * s, axis=0)
        if self.kind == "power":
            r2 = np.sum(s * s, axis=0)
            return float(self.c) * r2 ** (float(self.p) / 2.0)
        if self.kind == "polynomial":
            out = np.zeros(s.shape[1:])
            for c, es in self.terms:
                term = np.full(s.shape[1:], float(c))
                for i, e in enumerate(es):
                    if e:
                        term = term * s[i] ** e
                out += term
            return out
        return np.asarray(self.value_fn(s), dtype=float)

    def grad(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(s)
        if self.kind == "quadratic":
            return self.kappa * s
        if self.kind == "power":
            r2 = np.sum(s * s, axis=0)
            pf = float(self.p)
            # grad of c (|s|^2)^{p/2}: c p |s|^{p-2} s, smooth branch, p >= 2
            with np.errstate(invalid="ignore"):
                fac = np.where(r2 > 0, r2 ** (pf / 2.0 - 1.0), 0.0)
            return float(self.c) * pf * fac * s
        if self.kind == "polynomial":
            out = np.zeros_like(s)
            for c, es in self.terms:
                for i, e in enumerate(es):
                    if e == 0:
                        continue
                    term = np.full(s.shape[1:], float(c) * e)
                    for jdx, ej in enumerate(es):
                        pw = ej - 1 if jdx == i else ej
                        if pw:
                            term = term * s[jdx] ** pw
                    out[i] += term
            return out
        return np.asarray(self.grad_fn(s), dtype=float)

    def is_exact_kind(self):
        return self.kind in ("zero", "quadratic", "power", "polynomial")

    def symbolic_grad(self, k):
        """Formal partial dF/ds^k as a differential expression."""
        return sy.dF(k)

    def deficit_terms(self, n):
        """Exact deficit polynomial for polynomial potentials.

        Returns ((coeff, exponents), ...) for
        ((n-2)/2) s.grad F - n F applied term by term.
        """
        if self.kind != "polynomial":
            raise ValueError("exact deficit terms require a polynomial "
                             "potential")
        out = []
        for c, es in self.terms:
            deg = sum(es)
            coef = c * (Fraction(n - 2, 2) * deg - n)
            if coef != 0:
                out.append((coef, es))
        return tuple(out)


@dataclass
class CouplingPotential:
    """H(u, v) for the coupled Hamiltonian-type system; kinds:
    bilinear (c u.v) | tabulated (user callables for H, H_u, H_v)."""
    kind: str
    c: float = 1.0
    value_fn: object = None
    grad_u_fn: object = None
    grad_v_fn: object = None

    @staticmethod
    def bilinear(c=1.0):
        return CouplingPotential(kind="bilinear", c=float(c))

    @staticmethod
    def tabulated(value_fn, grad_u_fn, grad_v_fn):
        if grad_u_fn is None or grad_v_fn is None:
            raise ValueError("tabulated coupling potentials require both "
                             "gradients")
        return CouplingPotential(kind="tabulated", value_fn=value_fn,
                                 grad_u_fn=grad_u_fn, grad_v_fn=grad_v_fn)

    def value(self, u, v):
        if self.kind == "bilinear":
            return self.c * np.sum(np.asarray(u) * np.asarray(v), axis=0)
        return np.asarray(self.value_fn(u, v), dtype=float)

    def grad_u(self, u, v):
        if self.kind == "bilinear":
            return self.c * np.asarray(v, dtype=float)
        return np.asarray(self.grad_u_fn(u, v), dtype=float)

    def grad_v(self, u, v):
        if self.kind == "bilinear":
            return self.c * np.asarray(u, dtype=float)
        return np.asarray(self.grad_v_fn(u, v), dtype=float)


def scaling_deficit(F, s, n):
    """((n-2)/2) s.grad F(s) - n F(s), evaluated numerically."""
    s = np.asarray(s, dtype=float)
    return 0.5 * (n - 2) * np.sum(s * F.grad(s), axis=0) - n * F.value(s)


def power_deficit_coefficient(F, n):
    """Exact rational coefficient of |s|^p in the deficit of a power potential."""
    if F.kind != "power":
        raise ValueError("exact deficit coefficient requires a power potential")
    return F.c * (Fraction(n - 2, 2) * F.p - n)


# ----------------------------------------------------------- certificates

@dataclass
class CertificateReport:
    clauses: dict            # name -> (passed: bool, detail: str)
    passed: bool
    exhaustive: bool         # False when clause (ii) relied on sampling only

    def failed_clauses(self):
        return [k for k, (ok, _) in self.clauses.items() if not ok]

    def render(self):
        lines = ["non-existence certificate: %s"
                 % ("PASS" if self.passed else "FAIL")]
        for name, (ok, detail) in self.clauses.items():
            lines.append("  [%s] %s: %s" % ("ok" if ok else "XX", name, detail))
        if not self.exhaustive:
            lines.append("  note: deficit positivity sampled, not proven")
        return "\n".join(lines)


def nonexistence_certificate(F, C, dom, samples=2000, seed=0):
    """Checks the four clauses of the star-shaped non-existence criterion."""
    n = dom.n_dim
    clauses = {}
    exhaustive = True

    z = np.zeros((n, 1))
    f0 = float(F.value(z)[0])
    clauses["F(0)=0"] = (abs(f0) <= 1e-14, "F(0) = %.3g" % f0)

    if F.kind == "power":
        coef = power_deficit_coefficient(F, n)
        ok = coef > 0
        detail = "deficit = %s |s|^%s exactly" % (coef, F.p)
        if coef == 0:
            detail += " (identically zero: equality holds at s != 0)"
    elif F.kind == "quadratic":
        # deficit = ((n-2) - n) * (kappa/2) |s|^2 = -kappa |s|^2
        ok = -F.kappa > 0
        detail = "deficit = %.6g |s|^2 exactly" % (-F.kappa)
    elif F.kind == "polynomial" and all(
            c > 0 and all(e % 2 == 0 for e in es) and sum(es) > 0
            for c, es in F.deficit_terms(n)) and F.deficit_terms(n):
        ok = True
        detail = "deficit is a sum of %d positive even monomials" \
            % len(F.deficit_terms(n))
    else:
        rng = np.random.default_rng(seed)
        s = rng.standard_normal((n, samples)) * \
            np.exp(rng.uniform(-3, 3, size=(1, samples)))
        d = scaling_deficit(F, s, n)
        worst = float(d.min())
        ok = worst >= -1e-12 and np.all(d > 1e-14 * np.maximum(
            1.0, np.abs(F.value(s))))
        detail = "sampled deficit min = %.3g over %d points" % (worst, samples)
        if F.kind != "zero":
            exhaustive = False
    clauses["deficit >= 0, equality only at 0"] = (bool(ok), detail)

    pos = check_positivity(C)
    clauses["moduli positivity"] = (pos, "eigen-decomposition of induced form")

    star, mval = geometry.is_star_shaped(dom)
    clauses["star-shaped domain"] = (star, "min (x,nu) = %.6g" % mval)

    passed = all(ok for ok, _ in clauses.values())
    return CertificateReport(clauses=clauses, passed=passed,
                             exhaustive=exhaustive)


# ------------------------------------------------ symbolic interop helpers

def symbolic_moduli(C):
    """Exact entries in the [k][l][i][j] layout used by the symbolic module."""
    return C.entries


def isotropic_pair_equivalent(mu, lam, n):
    """Euler-Lagrange expressions of the Navier form and the strain-tensor
    quadratic form agree symbolically."""
    C = moduli_from_lame(IsotropicModuli(mu, lam), n)
    L1 = sy.isotropic_energy(mu, lam, n)
    L2 = sy.strain_tensor_energy(C.entries, n)
    return all(sy.euler_operator(L1, k, n) == sy.euler_operator(L2, k, n)
               for k in range(1, n + 1))
