"""
Full verification suite for a sphere solution, and the JSON solution
document used by the command line.

Every check reduces to one non-negative number compared with a tolerance.
Pointwise checks report the maximum over a Chebyshev grid of the residual
divided by its scale.  Tolerances can be loosened or tightened globally with
the ``QES2_TOL`` environment variable, a positive multiplier.
"""

import math
import os

import numpy as np

from .admissibility import RootPair, admissible_c_range
from .errors import QESError
from .geometry import (
    Pole,
    ResidualReport,
    SphereSolution,
    chebyshev_grid,
    conical_check,
    gauss_bonnet,
    kahler_residual,
    killing_identity_residual,
    qe_residual,
    qe_residual_geodesic,
    x_norm_constraint,
)
from .profile import ModelParams, first_order_residual, first_order_rhs, make_profile, ode_residual
from .prolongation import omega, omega_fd, pqe1_residual, pqe2_residual, step1_residual

SCHEMA_VERSION = 1
DEFAULT_GRID = 512
DOCUMENT_GRID = 513

TOLERANCES = {
    "quasi_einstein": 1e-8,
    "quasi_einstein_geodesic_chart": 1e-6,
    "profile_ode": 1e-8,
    "first_order_identity": 1e-6,
    "kahler_pde": 1e-6,
    "omega_vs_finite_difference": 1e-7,
    "prolongation_nabla_x": 1e-8,
    "prolongation_d_omega": 1e-7,
    "prolongation_scalar_constraint": 1e-6,
    "killing_identity": 1e-12,
    "gauss_bonnet_boundary": 1e-9,
    "gauss_bonnet_quadrature": 1e-6,
    "x_norm_integral": 1e-6,
    "conical_north": 1e-5,
    "conical_south": 1e-5,
}


class DocumentError(ValueError):
    """A solution document is unreadable or malformed."""


def tolerance_factor(environ=None):
    """Multiplier read from QES2_TOL (default 1)."""
    env = os.environ if environ is None else environ
    raw = env.get("QES2_TOL")
    if raw is None or raw == "":
        return 1.0
    try:
        val = float(raw)
    except ValueError:
        raise ValueError(f"QES2_TOL must be a positive number, got {raw!r}") from None
    if not (val > 0 and math.isfinite(val)):
        raise ValueError(f"QES2_TOL must be a positive number, got {raw!r}")
    return val


def _interior(sol, xs):
    r = sol.roots
    margin = 1e-3 * (r.x2 - r.x1)
    return xs[(xs - r.x1 >= margin) & (r.x2 - xs >= margin)]


def verify_solution(sol, grid=DEFAULT_GRID, factor=None):
    """Run every check on ``sol`` and return a ResidualReport."""
    factor = tolerance_factor() if factor is None else factor
    tol = {k: v * factor for k, v in TOLERANCES.items()}
    r = sol.roots
    xs = chebyshev_grid(r.x1, r.x2, grid)
    n = xs.size
    rep = ResidualReport()
    prof = sol.profile

    q = qe_residual(sol, xs)
    rep.add("quasi_einstein", np.max(q.normalized()), n, tol["quasi_einstein"])
    geo = qe_residual_geodesic(sol, xs)
    diff = np.max(np.abs([q.xx - geo[0], q.xp - geo[1], q.pp - geo[2]]) / q.scale)
    rep.add("quasi_einstein_geodesic_chart", diff, n, tol["quasi_einstein_geodesic_chart"])

    B2 = np.asarray(prof.second_derivative(xs))
    ode = max(abs(ode_residual(prof, x)) / (1.0 + abs(b2)) for x, b2 in zip(xs, B2))
    rep.add("profile_ode", ode, n, tol["profile_ode"])

    fo = max(
        abs(first_order_residual(prof, x)) / max(1.0, abs(first_order_rhs(prof, x)))
        for x in xs
        if x != 0.0
    )
    rep.add("first_order_identity", fo, n, tol["first_order_identity"])

    inner = _interior(sol, xs)
    kr, ks = kahler_residual(sol, inner)
    rep.add("kahler_pde", np.max(kr / ks), inner.size, tol["kahler_pde"])

    om = omega(sol, inner)
    om_fd = omega_fd(sol, inner)
    rep.add(
        "omega_vs_finite_difference",
        np.max(np.abs(om - om_fd)) / (1.0 + np.max(np.abs(om))),
        inner.size,
        tol["omega_vs_finite_difference"],
    )

    res1, sc1 = pqe1_residual(sol, xs)
    rep.add("prolongation_nabla_x", np.max(np.max(np.abs(res1), axis=(0, 1)) / sc1), n,
            tol["prolongation_nabla_x"])
    (r2x, r2p), sc2 = pqe2_residual(sol, xs)
    rep.add("prolongation_d_omega", np.max(np.maximum(np.abs(r2x), np.abs(r2p)) / sc2), n,
            tol["prolongation_d_omega"])
    r3, sc3 = step1_residual(sol, xs)
    rep.add("prolongation_scalar_constraint", np.max(np.abs(r3) / sc3), n,
            tol["prolongation_scalar_constraint"])

    kx, kp = killing_identity_residual(sol, xs)
    B = np.asarray(prof.value(xs))
    rep.add("killing_identity", np.max(np.maximum(np.abs(kx), np.abs(kp)) / (1.0 + np.abs(B))), n,
            tol["killing_identity"])

    chi_exact, chi_quad = gauss_bonnet(sol)
    rep.add("gauss_bonnet_boundary", abs(chi_exact - 2.0), 2, tol["gauss_bonnet_boundary"])
    rep.add("gauss_bonnet_quadrature", abs(chi_quad - 2.0), 0, tol["gauss_bonnet_quadrature"])
    rep.add("x_norm_integral", abs(x_norm_constraint(sol) - 8.0 * math.pi), 0, tol["x_norm_integral"])

    rep.add("conical_north", abs(conical_check(sol, Pole.NORTH) - 1.0), 3, tol["conical_north"])
    rep.add("conical_south", abs(conical_check(sol, Pole.SOUTH) - 1.0), 3, tol["conical_south"])
    return rep


# -- solution documents ---------------------------------------------------

def solution_document(sol, grid=DOCUMENT_GRID):
    """JSON-ready description of a sphere solution."""
    p = sol.params
    r = sol.roots
    rows = []
    if grid:
        xs = chebyshev_grid(r.x1, r.x2, grid)
        ev = sol.profile.evaluate(xs)
        Om = omega(sol, xs)
        for x, B, B1, B2, o in zip(xs, ev.B, ev.B1, ev.B2, Om):
            rows.append([float(x), float(B), float(B1), float(B2), float(-B2), float(o)])
    rng = admissible_c_range(p.m, p.lam)
    return {
        "schema_version": SCHEMA_VERSION,
        "params": {"m": p.m, "lambda": p.lam, "c": p.c},
        "roots": {"x1": float(r.x1), "x2": float(r.x2), "dB1": float(r.dB1), "dB2": float(r.dB2)},
        "period": float(sol.period),
        "derived": {
            "c_range": rng.to_dict(),
            "alpha": float(sol.profile.alpha),
            "B0": float(sol.profile.value(0.0)),
        },
        "grid_columns": ["x", "B", "B1", "B2", "R", "Omega"],
        "grid": rows,
    }


def _number(d, key, where):
    try:
        val = d[key]
    except (KeyError, TypeError):
        raise DocumentError(f"missing field {where}.{key}") from None
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise DocumentError(f"field {where}.{key} must be a finite number")
    return float(val)


def solution_from_document(doc):
    """Rebuild a SphereSolution from a document, keeping its roots and period.

    The profile is recomputed from the parameters; the stored roots and period
    are used as given so that the checks test the document itself.
    """
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {doc.get('schema_version')!r}")
    params = doc.get("params")
    roots = doc.get("roots")
    m = _number(params, "m", "params")
    lam = _number(params, "lambda", "params")
    c = _number(params, "c", "params")
    x1 = _number(roots, "x1", "roots")
    x2 = _number(roots, "x2", "roots")
    period = _number(doc, "period", "document")
    if not x1 < x2:
        raise DocumentError("roots must satisfy x1 < x2")
    if not period > 0:
        raise DocumentError("period must be positive")
    try:
        profile = make_profile(ModelParams(m=m, lam=lam, c=c))
        dB1 = float(profile.derivative(x1))
        dB2 = float(profile.derivative(x2))
    except QESError as exc:
        raise DocumentError(str(exc)) from None
    pair = RootPair(x1=x1, x2=x2, dB1=dB1, dB2=dB2, period=4.0 * math.pi / abs(dB2))
    return SphereSolution(params=profile.params, roots=pair, period=period, profile=profile)
