"""Batch experiment driver.

Parses a flat key=value config (dotted section prefixes, overridable from the
command line), runs symbolic derivations, solvers, and verifiers, and emits
reports, CSVs, and a reproducibility manifest.

Exit codes: 0 pass, 1 identity/certificate failure, 2 invalid input,
3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import platform
import sys
from fractions import Fraction

import numpy as np

from . import derivation
from . import dynamics
from . import geometry
from . import models
from . import statics
from . import verify

EXIT_PASS = 0
EXIT_IDENTITY_FAIL = 1
EXIT_INPUT_ERROR = 2
EXIT_NO_CONVERGENCE = 3

OUTPUT_DIR_ENV = "ELASTIDENT_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid configuration or physically inadmissible parameters."""


class Config:
    """Flat key=value store with dotted prefixes; values stay strings."""

    def __init__(self, entries=None):
        self.entries = dict(entries or {})

    @staticmethod
    def parse(path):
        entries = {}
        try:
            with open(path) as fh:
                for lineno, raw in enumerate(fh, 1):
                    line = raw.strip()
                    if not line or line.startswith("#"):
                        continue
                    if "=" not in line:
                        raise ConfigError("%s:%d: expected key=value, got %r"
                                          % (path, lineno, line))
                    key, _, val = line.partition("=")
                    entries[key.strip()] = val.strip()
        except OSError as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc))
        return Config(entries)

    def apply_overrides(self, pairs):
        for item in pairs or []:
            if "=" not in item:
                raise ConfigError("override %r is not key=value" % item)
            key, _, val = item.partition("=")
            self.entries[key.strip()] = val.strip()

    def get(self, key, default=None):
        return self.entries.get(key, default)

    def require(self, key):
        if key not in self.entries:
            raise ConfigError("missing required config key %r" % key)
        return self.entries[key]

    def get_int(self, key, default=None):
        val = self.get(key)
        if val is None:
            return default
        try:
            return int(val)
        except ValueError:
            raise ConfigError("config key %s=%r is not an integer"
                              % (key, val))

    def get_fraction(self, key, default=None):
        val = self.get(key)
        if val is None:
            return default
        try:
            return Fraction(val)
        except (ValueError, ZeroDivisionError):
            raise ConfigError("config key %s=%r is not a rational number"
                              % (key, val))

    def get_float(self, key, default=None):
        val = self.get(key)
        if val is None:
            return default
        try:
            return float(Fraction(val))
        except (ValueError, ZeroDivisionError):
            try:
                return float(val)
            except ValueError:
                raise ConfigError("config key %s=%r is not a number"
                                  % (key, val))

    def get_bool(self, key, default=False):
        val = self.get(key)
        if val is None:
            return default
        low = val.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError("config key %s=%r is not a boolean" % (key, val))

    def get_list(self, key, default=None):
        val = self.get(key)
        if val is None:
            return default
        return [item.strip() for item in val.split(",") if item.strip()]

    def echo_lines(self):
        return ["config.%s=%s" % (k, self.entries[k])
                for k in sorted(self.entries)]


# ------------------------------------------------------------ model builders

def build_domain(cfg):
    n = cfg.get_int("n", 2)
    kind = cfg.get("domain.kind", "square")
    if kind in ("square", "unit-square"):
        return geometry.DomainSpec.unit_square()
    if kind in ("rectangle", "box"):
        lo = [float(Fraction(s)) for s in cfg.get_list("domain.lo", [])]
        hi = [float(Fraction(s)) for s in cfg.get_list("domain.hi", [])]
        if not lo or len(lo) != len(hi):
            raise ConfigError("rectangle domains need matching domain.lo "
                              "and domain.hi lists")
        return geometry.DomainSpec.rectangle(tuple(zip(lo, hi)))
    if kind in ("ball", "disk"):
        radius = cfg.get_float("domain.radius", 1.0)
        return geometry.DomainSpec.ball(radius, n_dim=n)
    if kind == "annulus":
        return geometry.DomainSpec.annulus(cfg.get_float("domain.r_in", 0.5),
                                           cfg.get_float("domain.r_out", 1.0),
                                           n_dim=n)
    if kind in ("star-polygon", "polygon"):
        verts = []
        for pair in (cfg.get("domain.vertices", "") or "").split(";"):
            pair = pair.strip()
            if pair:
                px, py = pair.split(",")
                verts.append((float(Fraction(px)), float(Fraction(py))))
        if not verts:
            raise ConfigError("polygon domains need domain.vertices "
                              "as x1,y1;x2,y2;...")
        return geometry.DomainSpec.star_polygon(verts)
    raise ConfigError("unknown domain.kind %r" % kind)


def build_moduli(cfg, n):
    kind = cfg.get("moduli.kind", "isotropic")
    if kind == "isotropic":
        mu = cfg.get_fraction("moduli.mu", Fraction(1))
        lam = cfg.get_fraction("moduli.lambda", Fraction(0))
        try:
            pair = models.IsotropicModuli(mu, lam)
        except ValueError as exc:
            raise ConfigError(str(exc))
        return models.moduli_from_lame(pair, n), (mu, lam)
    if kind == "explicit":
        entries = [[[[Fraction(0) for _ in range(n)] for _ in range(n)]
                    for _ in range(n)] for _ in range(n)]
        found = False
        for key, val in cfg.entries.items():
            if not key.startswith("moduli.c."):
                continue
            idx = key[len("moduli.c."):]
            if len(idx) != 4 or not idx.isdigit():
                raise ConfigError("explicit moduli keys look like "
                                  "moduli.c.KLIJ (1-based indices)")
            k, l, i, j = (int(ch) for ch in idx)
            if not all(1 <= q <= n for q in (k, l, i, j)):
                raise ConfigError("moduli index %s out of range" % idx)
            entries[k - 1][l - 1][i - 1][j - 1] = Fraction(val)
            found = True
        if not found:
            raise ConfigError("explicit moduli need at least one "
                              "moduli.c.KLIJ entry")
        C = models.ElasticModuli.from_entries(n, entries)
        ok, where = models.check_symmetries(C)
        if not ok:
            raise ConfigError("moduli violate the required symmetries "
                              "at index %s" % (where,))
        return C, None
    raise ConfigError("unknown moduli.kind %r" % kind)


def build_potential(cfg, prefix="potential"):
    kind = cfg.get(prefix + ".kind", "zero")
    if kind == "zero":
        return models.BodyForcePotential.zero()
    if kind == "quadratic":
        return models.BodyForcePotential.quadratic(
            cfg.get_float(prefix + ".kappa", 1.0))
    if kind == "power":
        c = cfg.get_float(prefix + ".c", 1.0)
        p = cfg.get_float(prefix + ".p")
        if p is None:
            raise ConfigError("power potentials need %s.p" % prefix)
        return models.BodyForcePotential.power(c, p)
    if kind == "polynomial":
        terms = []
        for pair in (cfg.get(prefix + ".terms", "") or "").split(";"):
            pair = pair.strip()
            if pair:
                c, p = pair.split(",")
                terms.append((Fraction(c), int(p)))
        if not terms:
            raise ConfigError("polynomial potentials need %s.terms as "
                              "c1,p1;c2,p2;..." % prefix)
        return models.BodyForcePotential.polynomial(terms)
    raise ConfigError("unknown %s.kind %r" % (prefix, kind))


def build_coupling(cfg):
    kind = cfg.get("coupling.kind", "none")
    if kind == "none":
        return None
    if kind == "bilinear":
        return models.CouplingPotential.bilinear(
            cfg.get_float("coupling.c", 1.0))
    raise ConfigError("unknown coupling.kind %r" % kind)


def _h_list(cfg):
    items = cfg.get_list("grid.h")
    if not items:
        raise ConfigError("missing config key grid.h (comma-separated list)")
    try:
        return [float(Fraction(s)) for s in items]
    except (ValueError, ZeroDivisionError):
        raise ConfigError("grid.h entries must be rational numbers")


def resolve_output_dir(cfg):
    out = cfg.get("output.dir") or os.environ.get(OUTPUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


# ------------------------------------------------------------------ manifest

def _derivation_log_for(cfg):
    n = cfg.get_int("n", 2)
    mu = cfg.get_fraction("moduli.mu", Fraction(1))
    lam = cfg.get_fraction("moduli.lambda", Fraction(1, 2))
    a = cfg.get_fraction("dynamic.a", Fraction(1))
    b = cfg.get_fraction("dynamic.b", Fraction(1))
    if cfg.get("moduli.kind", "isotropic") != "isotropic" or mu <= 0 \
            or mu + lam <= 0:
        mu, lam = Fraction(1), Fraction(1, 2)
    if a + b != 2:
        a, b = Fraction(1), Fraction(1)
    return derivation.render_derivation_log(n=min(n, 4), mu=mu, lam=lam,
                                            a=a, b=b)


def write_manifest(outdir, command, cfg, log_text=None):
    if log_text is None:
        log_text = _derivation_log_for(cfg)
    digest = hashlib.sha256(log_text.encode()).hexdigest()
    import scipy
    import shapely
    lines = ["# run manifest", "command=%s" % command]
    lines += cfg.echo_lines()
    lines += ["version.python=%s" % platform.python_version(),
              "version.numpy=%s" % np.__version__,
              "version.scipy=%s" % scipy.__version__,
              "version.shapely=%s" % shapely.__version__,
              "derivation_log_sha256=%s" % digest]
    path = os.path.join(outdir, "manifest.txt")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _write_text(outdir, name, text):
    path = os.path.join(outdir, name)
    with open(path, "w", newline="\n") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")
    return path


# ---------------------------------------------------------------- subcommands

def cmd_derive(cfg):
    identity = cfg.get("identity", "all")
    n = cfg.get_int("n", 2)
    if not 2 <= n <= 4:
        raise ConfigError("dimension n must be in 2..4")
    mu = cfg.get_fraction("moduli.mu", Fraction(1))
    lam = cfg.get_fraction("moduli.lambda", Fraction(1, 2))
    if mu <= 0 or mu + lam <= 0:
        raise ConfigError("inadmissible moduli: need mu > 0 and "
                          "mu + lambda > 0")
    a = cfg.get_fraction("dynamic.a", Fraction(1))
    b = cfg.get_fraction("dynamic.b", Fraction(1))
    if a + b != 2:
        raise ConfigError("dilation weights must satisfy a + b = 2 exactly")
    if identity == "all":
        text = derivation.render_derivation_log(n=n, mu=mu, lam=lam, a=a, b=b)
    else:
        try:
            text = derivation.identity_section(identity, n=n, mu=mu, lam=lam,
                                               a=a, b=b)
        except ValueError as exc:
            raise ConfigError(str(exc))
    outdir = resolve_output_dir(cfg)
    _write_text(outdir, "derivation_log.txt", text)
    write_manifest(outdir, "derive", cfg, log_text=text)
    print(text, end="")
    return EXIT_PASS


def _static_reports(cfg, dom, C, iso_pair, seed):
    mode = cfg.get("static.mode", "eigen")
    reports = []
    for h in _h_list(cfg):
        if mode == "eigen":
            base = statics.StaticProblem(dom, C,
                                         models.BodyForcePotential.zero(), h)
            kappa, field, res = statics.smallest_eigenpair(base, seed=seed)
            prob = statics.StaticProblem(
                dom, C, models.BodyForcePotential.quadratic(kappa), h,
                grid=base.grid)
            sol = statics.StaticSolution(
                u=field, residual_norm=res,
                energy=statics.discrete_energy_value(prob, field),
                iterations=0, converged=True)
            rep = verify.verify_pohozhaev(sol, prob, isotropic=iso_pair)
            rep.extra["kappa"] = kappa
        elif mode == "manufactured":
            if dom.kind != "rectangle" or dom.n_dim != 2 or iso_pair is None:
                raise ConfigError("manufactured mode needs an isotropic "
                                  "2-D rectangle problem")
            F = build_potential(cfg)
            if F.kind != "zero":
                raise ConfigError("manufactured mode requires a zero "
                                  "potential")
            src = statics.ManufacturedSineSource(
                iso_pair[0], iso_pair[1],
                amplitude=cfg.get_float("static.amplitude", 1.0))
            prob = statics.StaticProblem(dom, C, F, h, g=src)
            sol = statics.solve_static(prob)
            if not sol.converged:
                raise RuntimeError("static solve stalled at residual %.3e"
                                   % sol.residual_norm)
            rep = verify.verify_pohozhaev_generalized(sol, prob)
        elif mode == "solve":
            prob = statics.StaticProblem(dom, C, build_potential(cfg), h)
            sol = statics.solve_static(prob)
            if not sol.converged:
                raise RuntimeError("static solve stalled at residual %.3e"
                                   % sol.residual_norm)
            rep = verify.verify_pohozhaev(sol, prob, isotropic=iso_pair)
        else:
            raise ConfigError("unknown static.mode %r" % mode)
        reports.append(rep)
    verify.attach_refinement_order(reports)
    return reports


def cmd_verify_static(cfg):
    dom = build_domain(cfg)
    C, iso_pair = build_moduli(cfg, dom.n_dim)
    if not models.check_positivity(C):
        raise ConfigError("moduli fail the positivity requirement")
    if cfg.get_bool("verify.require_star_shaped", False):
        star, worst = geometry.is_star_shaped(dom)
        if not star:
            raise ConfigError("domain is not star-shaped about the origin "
                              "(min (x,nu) = %g)" % worst)
    seed = cfg.get_int("seed", 0)
    tol = cfg.get_float("tolerances.relative_gap", 5e-2)
    reports = _static_reports(cfg, dom, C, iso_pair, seed)

    outdir = resolve_output_dir(cfg)
    verify.write_reports_csv(reports, os.path.join(outdir, "reports.csv"))
    text = "\n".join(r.render() for r in reports)
    _write_text(outdir, "report.txt", text)
    write_manifest(outdir, "verify-static", cfg)
    print(text)

    ok = all(r.relative_gap <= tol for r in reports)
    if len(reports) >= 3:
        gaps = [r.relative_gap for r in reports]
        ok = ok and all(a > b for a, b in zip(gaps, gaps[1:]))
    print("identity %s (tolerance %g)" % ("PASS" if ok else "FAIL", tol))
    return EXIT_PASS if ok else EXIT_IDENTITY_FAIL


def _initial_data(cfg, model, dt, seed):
    kind = cfg.get("dynamic.initial", "gaussian-bump")
    supp = None
    if kind == "gaussian-bump":
        center = [float(Fraction(s))
                  for s in cfg.get_list("dynamic.center",
                                        ["0"] * model.n_dim)]
        u, u_t, supp = dynamics.gaussian_bump(
            model, center, cfg.get_float("dynamic.width", 0.25),
            cfg.get_float("dynamic.amplitude", 1.0),
            component=cfg.get_int("dynamic.component", 0))
        v = u.copy() if model.coupled else None
        v_t = u_t.copy() if model.coupled else None
    elif kind == "eigenmode":
        base = statics.StaticProblem(model.dom, model.C,
                                     models.BodyForcePotential.zero(),
                                     model.h, grid=model.grid)
        _, field, _ = statics.smallest_eigenpair(base, seed=seed)
        field.values *= cfg.get_float("dynamic.amplitude", 1.0)
        u = field
        u_t = geometry.GridField(model.grid,
                                 np.zeros_like(field.values))
        v = u.copy() if model.coupled else None
        v_t = u_t.copy() if model.coupled else None
    elif kind == "file":
        path = cfg.require("dynamic.file.u")
        u = geometry.GridField(model.grid, np.load(path))
        ut_path = cfg.get("dynamic.file.u_t")
        u_t = geometry.GridField(
            model.grid,
            np.load(ut_path) if ut_path else np.zeros_like(u.values))
        v = v_t = None
        if model.coupled:
            v = geometry.GridField(model.grid,
                                   np.load(cfg.require("dynamic.file.v")))
            vt_path = cfg.get("dynamic.file.v_t")
            v_t = geometry.GridField(
                model.grid,
                np.load(vt_path) if vt_path else np.zeros_like(v.values))
        supp = cfg.get_float("dynamic.support_radius")
    else:
        raise ConfigError("unknown dynamic.initial %r" % kind)
    state = dynamics.initial_state(model, u, u_t, dt, v=v, v_t=v_t)
    return state, supp


def cmd_verify_dynamic(cfg):
    dom = build_domain(cfg)
    C, _ = build_moduli(cfg, dom.n_dim)
    if not models.check_positivity(C):
        raise ConfigError("moduli fail the positivity requirement")
    H = build_coupling(cfg)
    identity = cfg.get("identity",
                       "hamiltonian" if H is not None else "morawetz")
    a = b = None
    if identity == "hamiltonian":
        if H is None:
            raise ConfigError("the coupled identity needs coupling.kind")
        if dom.n_dim % 2 != 0:
            raise ConfigError("the coupled system requires an even spatial "
                              "dimension")
        a = cfg.get_fraction("dynamic.a", Fraction(1))
        b = cfg.get_fraction("dynamic.b", Fraction(1))
        if a + b != 2:
            raise ConfigError("dilation weights must satisfy a + b = 2 "
                              "exactly")
    elif identity != "morawetz":
        raise ConfigError("unknown identity %r" % identity)
    F = None
    if H is None:
        F = build_potential(cfg)
        if F.kind == "zero":
            F = None

    h = _h_list(cfg)[0]
    free_space = cfg.get_bool("domain.free_space", False)
    try:
        model = dynamics.DynamicModel(
            dom, C, h, F=F, H=H, order=cfg.get_int("dynamic.order", 4),
            cfl=cfg.get_float("dynamic.cfl", 0.5), free_space=free_space)
    except ValueError as exc:
        raise ConfigError(str(exc))
    dt0 = cfg.get_float("dynamic.dt", 0.25 * h)
    horizon = cfg.get_float("dynamic.horizon")
    if horizon is None:
        raise ConfigError("missing config key dynamic.horizon")
    seed = cfg.get_int("seed", 0)
    levels = cfg.get_int("dynamic.dt_levels", 1)
    sample_every = cfg.get_int("dynamic.sample_every", 1)
    tol = cfg.get_float("tolerances.relative_gap", 1e-2)

    reports = []
    finest_traj = None
    for level in range(levels):
        dt = dt0 / (2 ** level)
        try:
            model.check_dt(dt)
        except ValueError as exc:
            raise ConfigError(str(exc))
        state, supp = _initial_data(cfg, model, dt, seed)
        if free_space and supp is not None:
            window = dynamics.wave_contact_time(model, supp)
            if horizon > window:
                raise ConfigError(
                    "horizon %g exceeds the wave-contact time %g; the "
                    "free-space identity drops the boundary term only "
                    "inside that window" % (horizon, window))
        n_steps = int(round(horizon / dt))
        traj, _ = dynamics.run(model, state, n_steps, a=a, b=b,
                               sample_every=sample_every,
                               support_radius=supp)
        if identity == "hamiltonian":
            rep = verify.verify_hamiltonian_conformal(traj, a, b)
        else:
            rep = verify.verify_morawetz(traj)
        reports.append(rep)
        finest_traj = traj
    verify.attach_refinement_order(reports)

    outdir = resolve_output_dir(cfg)
    finest_traj.to_csv(os.path.join(outdir, "series.csv"))
    verify.write_reports_csv(reports, os.path.join(outdir, "reports.csv"))
    text = "\n".join(r.render() for r in reports)
    _write_text(outdir, "report.txt", text)
    write_manifest(outdir, "verify-dynamic", cfg)
    print(text)

    ok = all(r.relative_gap <= tol for r in reports)
    print("identity %s (tolerance %g)" % ("PASS" if ok else "FAIL", tol))
    return EXIT_PASS if ok else EXIT_IDENTITY_FAIL


def cmd_certify(cfg):
    dom = build_domain(cfg)
    C, _ = build_moduli(cfg, dom.n_dim)
    F = build_potential(cfg)
    seed = cfg.get_int("seed", 0)
    cert = models.nonexistence_certificate(
        F, C, dom, samples=cfg.get_int("certify.samples", 2000), seed=seed)
    text = cert.render()

    lines = [text]
    collapse_ok = True
    runs = cfg.get_int("certify.collapse_runs", 0)
    if cert.passed and runs > 0:
        h = _h_list(cfg)[0]
        tol = cfg.get_float("certify.collapse_tol", 1e-8)
        amp = cfg.get_float("certify.init_amplitude", 0.01)
        prob = statics.StaticProblem(dom, C, F, h)
        for run in range(runs):
            rng = np.random.default_rng(seed + run)
            vals = amp * rng.standard_normal((dom.n_dim,) + prob.grid.shape)
            init = geometry.GridField(prob.grid, vals).apply_dirichlet()
            sol = statics.solve_static(prob, init=init)
            if not sol.converged:
                raise RuntimeError("collapse run %d stalled at residual %.3e"
                                   % (run, sol.residual_norm))
            umax = float(np.abs(sol.u.values).max())
            ok = umax <= tol
            collapse_ok = collapse_ok and ok
            lines.append("collapse run %d (seed %d): |u|_inf = %.3e -> %s"
                         % (run, seed + run, umax, "ok" if ok else "FAIL"))

    text = "\n".join(lines)
    outdir = resolve_output_dir(cfg)
    _write_text(outdir, "certificate.txt", text)
    write_manifest(outdir, "certify", cfg)
    print(text)
    if not cert.passed:
        print("certificate FAIL: clauses %s"
              % ", ".join(cert.failed_clauses()))
        return EXIT_IDENTITY_FAIL
    if not collapse_ok:
        print("certificate FAIL: a collapse run stayed above the threshold")
        return EXIT_IDENTITY_FAIL
    print("certificate PASS")
    return EXIT_PASS


def cmd_selftest(cfg):
    import random
    from . import symbolic as sy

    seed = cfg.get_int("seed", 0)
    failures = []

    # Euler operator annihilates total divergences, exactly.
    rng = random.Random(seed)
    for trial in range(100):
        n = 2 if trial % 2 == 0 else 3
        has_time = trial % 3 == 0
        idx = ([sy.TIME] if has_time else []) + list(range(1, n + 1))
        div = sy.DiffExpr()
        for a in idx:
            flux = sy.random_expr(rng, n, with_time=has_time,
                                  with_potential=True)
            div = div + sy.total_derivative(flux, a, n)
        for k in range(1, n + 1):
            if not sy.euler_operator(div, k, n).is_zero():
                failures.append("euler-divergence trial %d" % trial)
                break
    print("euler annihilates divergences (100 random fluxes): %s"
          % ("ok" if not failures else "FAIL"))

    # Leapfrog time reversal.
    dom = geometry.DomainSpec.unit_square()
    C = models.moduli_from_lame(models.IsotropicModuli(1.0, 0.5), 2)
    model = dynamics.DynamicModel(dom, C, h=1 / 16)
    nprng = np.random.default_rng(seed)
    vals = nprng.standard_normal((2,) + model.grid.shape)
    vals[:, ~model.grid.inside] = 0.0
    u = geometry.GridField(model.grid, vals)
    u_t = geometry.GridField(model.grid, np.zeros_like(vals))
    dt = 0.5 * model.max_dt()
    state = dynamics.initial_state(model, u, u_t, dt)
    fwd = state.copy()
    for _ in range(100):
        fwd = dynamics.step_leapfrog(fwd, model)
    back = dynamics.reversed_state(fwd)
    for _ in range(100):
        back = dynamics.step_leapfrog(back, model)
    scale = max(float(np.abs(u.values).max()), 1e-300)
    rev_err = float(np.abs(back.u.values - u.values).max()) / scale
    print("time reversal after 100 steps: %.3e" % rev_err)
    if rev_err > 1e-10:
        failures.append("time reversal %.3e" % rev_err)

    # Energy drift shrinks like dt^2 on a linear run.  The conserved
    # quantity of the semi-discrete system is the stencil energy
    # (1/2)h^n [|u_t|^2 - u.(C d_k d_l u)], not the continuum quadrature.
    hn = model.grid.h ** model.n_dim

    def stencil_energy(st):
        a = dynamics.elastic_operator(model, st.u.values)
        return 0.5 * hn * float(np.sum(st.u_t.values ** 2)
                                - np.sum(st.u.values * a))

    drifts = []
    for refine in (1, 2):
        st = dynamics.initial_state(model, u, u_t, dt / refine)
        e0 = stencil_energy(st)
        for _ in range(100 * refine):
            st = dynamics.step_leapfrog(st, model)
        drifts.append(abs(stencil_energy(st) - e0) / max(abs(e0), 1e-300))
    print("energy drift at dt, dt/2: %.3e, %.3e" % tuple(drifts))
    if not (drifts[1] <= 0.5 * drifts[0] or drifts[1] < 1e-12):
        failures.append("energy drift did not shrink: %.3e -> %.3e"
                        % (drifts[0], drifts[1]))

    if failures:
        print("selftest FAIL: %s" % "; ".join(failures))
        return EXIT_IDENTITY_FAIL
    print("selftest PASS")
    return EXIT_PASS


# ----------------------------------------------------------------- entrypoint

def _add_common(sub):
    sub.add_argument("config", nargs="?", help="path to a key=value config")
    sub.add_argument("--set", action="append", dest="overrides",
                     metavar="KEY=VALUE", help="override a config key")
    sub.add_argument("--output", help="output directory (overrides "
                     "output.dir and $%s)" % OUTPUT_DIR_ENV)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="elastident",
        description="Derive and numerically verify integral identities for "
                    "elastic systems with nonlinear body forces.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("derive", help="print the machine derivation log")
    _add_common(p)
    p.add_argument("--identity",
                   choices=["pohozhaev", "morawetz", "hamiltonian", "all"])
    p.add_argument("--n", type=int)
    p.add_argument("--a")
    p.add_argument("--b")

    p = subs.add_parser("verify-static", help="equilibrium identity checks")
    _add_common(p)
    p.add_argument("--require-star-shaped", action="store_true")

    p = subs.add_parser("verify-dynamic", help="time-dependent identity "
                        "checks")
    _add_common(p)

    p = subs.add_parser("certify", help="non-existence certificate")
    _add_common(p)

    p = subs.add_parser("selftest", help="solver and kernel self-tests")
    _add_common(p)
    return parser


_COMMANDS = {
    "derive": cmd_derive,
    "verify-static": cmd_verify_static,
    "verify-dynamic": cmd_verify_dynamic,
    "certify": cmd_certify,
    "selftest": cmd_selftest,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = Config.parse(args.config) if args.config else Config()
        cfg.apply_overrides(args.overrides)
        if args.output:
            cfg.entries["output.dir"] = args.output
        if args.command == "derive":
            if args.identity:
                cfg.entries["identity"] = args.identity
            if args.n is not None:
                cfg.entries["n"] = str(args.n)
            if args.a is not None:
                cfg.entries["dynamic.a"] = args.a
            if args.b is not None:
                cfg.entries["dynamic.b"] = args.b
        if args.command == "verify-static" and args.require_star_shaped:
            cfg.entries["verify.require_star_shaped"] = "true"
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT_ERROR
    except RuntimeError as exc:
        print("solver error: %s" % exc, file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
