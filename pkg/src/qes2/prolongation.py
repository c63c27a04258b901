"""
The closed prolongation system of the two-dimensional quasi-Einstein
equation, and a torsionful affine connection built from X.

With dX = Omega vol the structure satisfies

    nabla X = XX/m + (lambda - R/2) g + (1/2) Omega vol,
    dOmega  = (3/m) Omega X + *dR + (1/m)(2 lambda - (m+1) R) *X,
    0 = -Lap R + (1 + 4/m) <X, dR> + (3/m) Omega^2
        + (1/m^2)(2 lambda - (m+1) R)(2|X|^2 - 2 lambda m + m R).

Hodge star convention: *alpha(v) = vol(v, alpha#), so *dx = -B dphi and
*dphi = dx / B in the chart.  This is the sign for which the second equation
holds; ``star_sign=-1`` selects the opposite convention.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotApplicableError
from .geometry import (
    _check_inside,
    christoffel,
    christoffel_dx,
    covariant_derivative,
    one_form,
    one_form_dx,
    riemann,
    x_norm_squared,
)


def omega(sol, x):
    """Omega = m d/dx [B / (1 + x^2)], defined by dX = Omega dx ^ dphi."""
    xa = _check_inside(sol, x)
    return _omega(sol.profile, sol.m, xa)


def _omega(profile, m, x):
    B = np.asarray(profile.value(x))
    B1 = np.asarray(profile.derivative(x))
    return one_form_dx(m, x, B, B1)[1]


def omega_fd(sol, x, h=1e-4):
    """Finite-difference oracle for Omega: central difference of X_phi."""
    xa = _check_inside(sol, x)
    h = h * np.maximum(1.0, np.abs(xa))

    def xp(t):
        return one_form(sol.m, t, np.asarray(sol.profile.value(t)))[1]

    return (-xp(xa + 2 * h) + 8 * xp(xa + h) - 8 * xp(xa - h) + xp(xa - 2 * h)) / (12 * h)


def hodge_star(wx, wp, B, star_sign=1.0):
    """Hodge star of the one-form wx dx + wp dphi; returns (dx, dphi) parts."""
    return star_sign * wp / B, -star_sign * B * wx


class ProlongedState(NamedTuple):
    x: np.ndarray
    Xx: np.ndarray
    Xp: np.ndarray
    Omega: np.ndarray
    R: np.ndarray
    dR: np.ndarray


def prolonged_state(sol, x):
    xa = _check_inside(sol, x)
    B, B1, B2, B3, _ = (np.asarray(v) for v in sol.profile.higher_derivatives(xa))
    Xx, Xp = one_form(sol.m, xa, B)
    return ProlongedState(xa, Xx, Xp, one_form_dx(sol.m, xa, B, B1)[1], -B2, -B3)


def pqe1_residual(sol, x):
    """Full nabla X minus XX/m + (lambda - R/2) g + (1/2) Omega vol.

    Returns ``(residual, scale)`` with the residual as a 2 x 2 array of
    orthonormal-frame components (first index = derivative direction).
    """
    xa = _check_inside(sol, x)
    m, lam = sol.m, sol.lam
    B, B1, B2 = (np.asarray(v) for v in sol.profile.evaluate(xa)[1:])
    w = one_form(m, xa, B)
    dw = one_form_dx(m, xa, B, B1)
    nX = covariant_derivative(christoffel(B, B1), w, dw)
    R = -B2
    Om = dw[1]
    zero = 0.0 * xa
    XX = np.array([[w[0] * w[0], w[0] * w[1]], [w[1] * w[0], w[1] * w[1]]]) / m
    g = np.array([[1.0 / B, zero], [zero, B]])
    vol = np.array([[zero, 1.0 + zero], [-1.0 + zero, zero]])
    rhs_terms = (XX, (lam - 0.5 * R) * g, 0.5 * Om * vol)
    res = nX - sum(rhs_terms)
    frame = np.array([[B, 1.0 + zero], [1.0 + zero, 1.0 / B]])
    scale = 1.0 + np.max([np.max(np.abs(t * frame), axis=(0, 1)) for t in (nX,) + rhs_terms], axis=0)
    return res * frame, scale


def pqe2_residual(sol, x, star_sign=1.0):
    """dOmega minus the right side of the Omega equation, as frame components.

    Returns ``((res_1, res_2), scale)``.
    """
    xa = _check_inside(sol, x)
    m, lam = sol.m, sol.lam
    B, B1, B2, B3, _ = (np.asarray(v) for v in sol.profile.higher_derivatives(xa))
    Xx, Xp = one_form(m, xa, B)
    Om = one_form_dx(m, xa, B, B1)[1]
    u = 1.0 + xa * xa
    # Omega' from differentiating m (B' u - 2 x B) / u^2
    dOm = m * ((B2 * u - 2.0 * B) / u**2 - 4.0 * xa * (B1 * u - 2.0 * xa * B) / u**3)
    R, dR = -B2, -B3
    k = (2.0 * lam - (m + 1.0) * R) / m
    sdR = hodge_star(dR, 0.0 * xa, B, star_sign)
    sX = hodge_star(Xx, Xp, B, star_sign)
    terms_x = (dOm, 3.0 / m * Om * Xx, sdR[0], k * sX[0])
    terms_p = (0.0 * xa, 3.0 / m * Om * Xp, sdR[1], k * sX[1])
    res_x = terms_x[0] - sum(terms_x[1:])
    res_p = terms_p[0] - sum(terms_p[1:])
    rb = np.sqrt(B)
    scale = 1.0 + np.maximum(
        np.max(np.abs(terms_x), axis=0) * rb, np.max(np.abs(terms_p), axis=0) / rb
    )
    return (res_x * rb, res_p / rb), scale


def step1_terms(m, lam, x, B, B1, B2, B3, B4, Om):
    R, dR, d2R = -B2, -B3, -B4
    Xx = -m * x / (1.0 + x * x)
    lap = B1 * dR + B * d2R  # (B R')'
    xdr = B * Xx * dR
    nx2 = x_norm_squared(m, x, B)
    return (
        -lap,
        (1.0 + 4.0 / m) * xdr,
        3.0 / m * Om * Om,
        (2.0 * lam - (m + 1.0) * R) * (2.0 * nx2 - 2.0 * lam * m + m * R) / m**2,
    )


def step1_residual(sol, x, lam=None):
    """The scalar constraint from the skew part of the Hessian of Omega.

    ``lam`` overrides lambda in the constraint only.  Returns
    ``(residual, scale)``.
    """
    xa = _check_inside(sol, x)
    lam = sol.lam if lam is None else lam
    B, B1, B2, B3, B4 = (np.asarray(v) for v in sol.profile.higher_derivatives(xa))
    Om = one_form_dx(sol.m, xa, B, B1)[1]
    terms = step1_terms(sol.m, lam, xa, B, B1, B2, B3, B4, Om)
    return sum(terms), 1.0 + np.max(np.abs(terms), axis=0)


# -- the deformed connection ----------------------------------------------

@dataclass(frozen=True)
class AffineConnectionSpec:
    """D = nabla - p X (x) Id - q Id (x) X."""

    p: float
    q: float

    @property
    def torsion(self):
        return self.p - self.q


def connection_coefficients(profile, spec, x):
    """(G, dG) for D, with D_{d_b} d_c = G[a, b, c] d_a."""
    x = np.asarray(x, dtype=float)
    m = profile.params.m
    B, B1, B2 = (np.asarray(v) for v in profile.evaluate(x)[1:])
    G = christoffel(B, B1)
    dG = christoffel_dx(B, B1, B2)
    w = one_form(m, x, B)
    dw = one_form_dx(m, x, B, B1)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                if a == c:
                    G[a, b, c] -= spec.p * w[b]
                    dG[a, b, c] -= spec.p * dw[b]
                if a == b:
                    G[a, b, c] -= spec.q * w[c]
                    dG[a, b, c] -= spec.q * dw[c]
    return G, dG


def connection_ricci(profile, spec, x):
    """Ricci tensor Ric[b, c] = R^a_{b a c} of D at x (chart components).

    This contraction is the transpose of trace(W -> R(W, Y) Z).  It is the one
    under which the skew part equals -(1/2)(2p + q) Omega vol; the two agree
    for the Levi-Civita connection.
    """
    G, dG = connection_coefficients(profile, spec, x)
    return np.einsum("abac...->bc...", riemann(G, dG))


def skew_ricci_residual(profile, spec, x):
    """Ricci tensor of D in the orthonormal frame, with a scale.

    Applies to m = -1, lambda = 0 profiles (not necessarily global), at points
    with B > 0.  For (p, q) = (-1/2, 1) the Ricci tensor vanishes.

    Raises
    ------
    NotApplicableError
        m != -1 or lambda != 0.
    """
    par = profile.params
    if par.m != -1 or par.lam != 0:
        raise NotApplicableError("the flat-connection check needs m = -1 and lambda = 0")
    return _frame_ricci(profile, spec, x)


def _frame_ricci(profile, spec, x):
    x = np.asarray(x, dtype=float)
    B = np.asarray(profile.value(x))
    ric = connection_ricci(profile, spec, x)
    one = 1.0 + 0.0 * x
    frame = np.array([[B, one], [one, 1.0 / B]])
    out = ric * frame
    scale = 1.0 + np.max(np.abs(out), axis=(0, 1)) + np.abs(B)
    return out, scale


def ricci_skew_part(profile, spec, x):
    """Coefficient s of the skew part (1/2)(Ric - Ric^T) = s dx ^ dphi."""
    ric = connection_ricci(profile, spec, x)
    return 0.5 * (ric[0, 1] - ric[1, 0])
