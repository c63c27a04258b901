"""
Metric, one-form and curvature of an axisymmetric sphere solution, and the
residual checks built on them.

Coordinates are (x, phi) with index 0 = x and 1 = phi.  The structure is

    g   = dx^2 / B + B dphi^2,
    X   = -m/u (x dx - B dphi),   u = 1 + x^2,

with volume form vol = dx ^ dphi (sqrt(det g) = 1).  The scalar curvature of
this metric is R = -B''.

Tensor residuals are reported in the orthonormal coframe
(dx / sqrt(B), sqrt(B) dphi), which removes the 1/B growth of coordinate
components near the poles without changing which points pass or fail.
"""

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .admissibility import RootPair, classify, find_roots
from .errors import ChartDomainError, InadmissibleError
from .numerics import quad
from .profile import ModelParams, Profile, make_profile


# -- solution object ---------------------------------------------------

@dataclass(frozen=True)
class SphereSolution:
    """An admissible even profile together with its poles and period.

    ``period`` is stored separately from ``roots.period`` so that a corrupted
    value can be injected and caught by the regularity checks.
    """

    params: ModelParams
    roots: RootPair
    period: float
    profile: Profile = field(repr=False, compare=False)

    @property
    def m(self):
        return self.params.m

    @property
    def lam(self):
        return self.params.lam

    def gamma(self, x):
        """Killing potential Gamma = (1 + x^2)/m."""
        return (1.0 + np.asarray(x, dtype=float) ** 2) / self.m

    def with_period(self, period):
        return replace(self, period=float(period))


def build_solution(m, lam, c):
    """Construct the smooth sphere solution for admissible (m, lambda, c).

    Raises
    ------
    InadmissibleError
        ``classify(m, lam, c, 0)`` is not admissible; the verdict is attached.
    """
    verdict = classify(m, lam, c, 0.0)
    if not verdict.admissible:
        raise InadmissibleError(verdict)
    params = ModelParams(m=float(m), lam=float(lam), c=float(c))
    profile = make_profile(params)
    roots = find_roots(profile)
    return SphereSolution(params=params, roots=roots, period=roots.period, profile=profile)


def chebyshev_grid(x1, x2, n):
    """n Chebyshev-Gauss nodes, strictly inside (x1, x2), in increasing order."""
    k = np.arange(n, 0, -1)
    mid, half = 0.5 * (x1 + x2), 0.5 * (x2 - x1)
    return mid + half * np.cos((2 * k - 1) * np.pi / (2 * n))


def _check_inside(sol, x):
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= sol.roots.x1) or np.any(xa >= sol.roots.x2):
        raise ChartDomainError(
            f"x must lie in the open chart ({sol.roots.x1}, {sol.roots.x2})"
        )
    return xa


# -- pointwise geometry -------------------------------------------------

class MetricPoint(NamedTuple):
    x: float
    g_xx: float
    g_pp: float
    Xx: float
    Xp: float
    R: float


def one_form(m, x, B):
    """Components (X_x, X_phi) of X."""
    u = 1.0 + x * x
    return -m * x / u, m * B / u


def one_form_dx(m, x, B, B1):
    """x-derivatives of (X_x, X_phi); the second one is Omega."""
    u = 1.0 + x * x
    return -m * (1.0 - x * x) / u**2, m * (B1 * u - 2.0 * x * B) / u**2


def metric_point(sol, x):
    x = float(_check_inside(sol, x))
    B, B1, B2 = sol.profile.evaluate(x)[1:]
    Xx, Xp = one_form(sol.m, x, B)
    return MetricPoint(x=x, g_xx=1.0 / B, g_pp=B, Xx=Xx, Xp=Xp, R=-B2)


def christoffel(B, B1):
    """Levi-Civita symbols G[a, b, c] = Gamma^a_{bc} of dx^2/B + B dphi^2."""
    B = np.asarray(B, dtype=float)
    G = np.zeros((2, 2, 2) + B.shape)
    G[0, 0, 0] = -B1 / (2.0 * B)
    G[0, 1, 1] = -B * B1 / 2.0
    G[1, 0, 1] = G[1, 1, 0] = B1 / (2.0 * B)
    return G


def christoffel_dx(B, B1, B2):
    """x-derivative of :func:`christoffel`."""
    B = np.asarray(B, dtype=float)
    dG = np.zeros((2, 2, 2) + B.shape)
    dG[0, 0, 0] = -(B2 * B - B1 * B1) / (2.0 * B * B)
    dG[0, 1, 1] = -(B1 * B1 + B * B2) / 2.0
    dG[1, 0, 1] = dG[1, 1, 0] = (B2 * B - B1 * B1) / (2.0 * B * B)
    return dG


def riemann(G, dG):
    """Rm[a, d, b, c] = R^a_{dbc} for x-only coefficients G[a, b, c].

    Uses R(d_b, d_c) d_d = R^a_{dbc} d_a, which holds with or without torsion:

        R^a_{dbc} = d_b G^a_{cd} - d_c G^a_{bd} + G^a_{be} G^e_{cd} - G^a_{ce} G^e_{bd}.
    """
    shape = G.shape[3:]
    Rm = np.zeros((2, 2, 2, 2) + shape)
    for a in range(2):
        for d in range(2):
            for b in range(2):
                for c in range(2):
                    v = (dG[a, c, d] if b == 0 else 0.0) - (dG[a, b, d] if c == 0 else 0.0)
                    for e in range(2):
                        v = v + G[a, b, e] * G[e, c, d] - G[a, c, e] * G[e, b, d]
                    Rm[a, d, b, c] = v
    return Rm


def ricci(Rm):
    """Ric[b, c] = R^a_{c a b}, i.e. Ric(Y, Z) = trace(W -> R(W, Y) Z)."""
    return np.einsum("acab...->bc...", Rm)


def covariant_derivative(G, w, dw):
    """(nabla w)[a, b] = nabla_a w_b for a one-form with x-derivative dw."""
    shape = np.shape(w[0])
    out = np.zeros((2, 2) + shape)
    for a in range(2):
        for b in range(2):
            partial = dw[b] if a == 0 else 0.0
            out[a, b] = partial - (G[0, a, b] * w[0] + G[1, a, b] * w[1])
    return out


def _to_frame(T, B):
    """Orthonormal-coframe components of a covariant 2-tensor."""
    return np.array([[T[0, 0] * B, T[0, 1]], [T[1, 0], T[1, 1] / B]])


# -- quasi-Einstein residual -------------------------------------------

class QEResidual(NamedTuple):
    """Frame components of Ric - XX/m + sym(nabla X) - lambda g, and a scale."""

    xx: np.ndarray
    xp: np.ndarray
    pp: np.ndarray
    scale: np.ndarray

    def normalized(self):
        return np.max(np.abs([self.xx, self.xp, self.pp]), axis=0) / self.scale


def qe_terms(m, lam, x, B, B1, B2):
    """Frame components of the four terms of the quasi-Einstein equation."""
    x = np.asarray(x, dtype=float)
    G = christoffel(B, B1)
    w = one_form(m, x, B)
    dw = one_form_dx(m, x, B, B1)
    nX = covariant_derivative(G, w, dw)
    R = -B2
    g = np.array([[1.0 / B, 0.0 * x], [0.0 * x, B]])
    ric = 0.5 * R * g
    XX = np.array([[w[0] * w[0], w[0] * w[1]], [w[1] * w[0], w[1] * w[1]]]) / m
    sym = 0.5 * (nX + np.swapaxes(nX, 0, 1))
    return {
        "ricci": _to_frame(ric, B),
        "xx_over_m": _to_frame(XX, B),
        "sym_nabla_x": _to_frame(sym, B),
        "lambda_g": _to_frame(lam * g, B),
    }


def qe_residual(sol, x, lam=None):
    """Residual of Ric = XX/m - (1/2) L_X g + lambda g at interior points.

    ``lam`` overrides lambda in the residual formula only (for sensitivity
    checks); the profile is unchanged.  The scale is 1 + the largest frame
    component of any single term.
    """
    xa = _check_inside(sol, x)
    B, B1, B2 = sol.profile.evaluate(xa)[1:]
    lam = sol.lam if lam is None else lam
    t = qe_terms(sol.m, lam, xa, np.asarray(B), np.asarray(B1), np.asarray(B2))
    res = t["ricci"] - t["xx_over_m"] + t["sym_nabla_x"] - t["lambda_g"]
    scale = 1.0 + np.max([np.max(np.abs(v), axis=(0, 1)) for v in t.values()], axis=0)
    return QEResidual(res[0, 0], res[0, 1], res[1, 1], scale)


def qe_residual_geodesic(sol, x):
    """The quasi-Einstein residual recomputed in geodesic coordinates (s, phi).

    With ds = dx / sqrt(B) the metric is ds^2 + B dphi^2.  All Christoffel
    symbols, one-form components and derivatives are rebuilt in (s, phi);
    the residual is then returned in the same orthonormal frame as
    :func:`qe_residual`, so the two can be compared directly.
    """
    xa = _check_inside(sol, x)
    m, lam = sol.m, sol.lam
    B, B1, B2 = (np.asarray(v) for v in sol.profile.evaluate(xa)[1:])
    rb = np.sqrt(B)
    # d/ds = sqrt(B) d/dx
    G_s = rb * B1  # dG/ds where G = g_phiphi = B
    Xx, Xp = one_form(m, xa, B)
    dXx, dXp = one_form_dx(m, xa, B, B1)
    Xs = Xx * rb
    dXs = rb * (dXx * rb + Xx * B1 / (2.0 * rb))
    dXp_s = rb * dXp
    # Gamma^s_{phi phi} = -G_s/2, Gamma^phi_{s phi} = G_s/(2G)
    n_ss = dXs
    n_sp = dXp_s - G_s / (2.0 * B) * Xp
    n_ps = -G_s / (2.0 * B) * Xp
    n_pp = G_s / 2.0 * Xs
    K = -0.5 * B2  # Gauss curvature
    res_ss = K - Xs * Xs / m + n_ss - lam
    res_sp = -Xs * Xp / m + 0.5 * (n_sp + n_ps)
    res_pp = K * B - Xp * Xp / m + n_pp - lam * B
    return res_ss, res_sp / rb, res_pp / B


# -- global identities ---------------------------------------------------

def scalar_curvature(sol, x):
    return -np.asarray(sol.profile.evaluate(x).B2)


def gauss_bonnet(sol):
    """(chi_exact, chi_quadrature) for (1/4 pi) * integral of R vol.

    chi_exact uses the boundary term -(p / 4 pi) [B']; chi_quadrature
    integrates R = -B'' over the chart.
    """
    r = sol.roots
    p = sol.period
    chi_exact = -p / (4.0 * math.pi) * (r.dB2 - r.dB1)
    integral = quad(lambda t: scalar_curvature(sol, t), r.x1, r.x2,
                    epsabs=1e-13, epsrel=1e-13, initial_panels=8)
    return chi_exact, p / (4.0 * math.pi) * integral


def x_norm_squared(m, x, B):
    """|X|^2 = m^2 B / (1 + x^2)."""
    return m * m * B / (1.0 + x * x)


def x_norm_constraint(sol, zero_x=False):
    """Integral of (|X|^2 / m + 2 lambda) vol over the sphere; equals 8 pi.

    ``zero_x`` drops the |X|^2 term, which must break the identity.
    """
    m, lam = sol.m, sol.lam

    def integrand(t):
        B = np.asarray(sol.profile.value(t))
        xx = 0.0 if zero_x else x_norm_squared(m, t, B) / m
        return xx + 2.0 * lam + 0.0 * t

    r = sol.roots
    return sol.period * quad(integrand, r.x1, r.x2, epsabs=1e-13, epsrel=1e-13, initial_panels=8)


class Pole(enum.Enum):
    NORTH = "North"  # x2
    SOUTH = "South"  # x1


CONICAL_RADII = (1e-2, 1e-3, 1e-4)


POLE_TAYLOR_T2 = 1e-4
RADIUS_RTOL = 1e-11


def _pole_data(sol, pole):
    r = sol.roots
    if pole is Pole.NORTH:
        return r.x2, -1.0
    return r.x1, 1.0


def _pole_quotient(sol, pole):
    """q(t) = B(x0 -/+ t^2) / t^2, with a Taylor form close to the pole."""
    x0, sign = _pole_data(sol, pole)
    _, B1, B2, B3, B4 = sol.profile.higher_derivatives(x0)

    def q(t):
        t = np.asarray(t, dtype=float)
        t2 = t * t
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = np.asarray(sol.profile.value(x0 + sign * t2)) / t2
        taylor = sign * B1 + t2 * (0.5 * B2 + t2 * (sign * B3 / 6.0 + t2 * B4 / 24.0))
        return np.where(t2 < POLE_TAYLOR_T2, taylor, direct)

    return q


def _radius_integrand(sol, pole):
    q = _pole_quotient(sol, pole)
    return lambda t: 2.0 / np.sqrt(q(t))


def _geodesic_radius(sol, pole, v):
    """Distance from the pole to x = pole -/+ v^2, by the substitution x = x0 -/+ t^2.

    The integrand 2 / sqrt(B / t^2) is smooth at t = 0.  For t^2 below
    POLE_TAYLOR_T2 the ratio B / t^2 is taken from the Taylor expansion of B
    at the pole, avoiding the cancellation in B near its zero.
    """
    return quad(_radius_integrand(sol, pole), 0.0, v, epsabs=0.0, epsrel=RADIUS_RTOL)


def conical_ratio(sol, pole, s, period=None):
    """period * sqrt(B) / (2 pi s) at geodesic distance s from the pole."""
    p = sol.period if period is None else period
    x0, _ = _pole_data(sol, pole)
    f = _radius_integrand(sol, pole)
    # Newton on v -> s(v), using ds/dv = integrand(v); v ~ s sqrt|B'| / 2
    v = 0.5 * s * math.sqrt(abs(float(sol.profile.derivative(x0))))
    for _ in range(20):
        step = (quad(f, 0.0, v, epsabs=0.0, epsrel=RADIUS_RTOL) - s) / float(f(v))
        v -= step
        if abs(step) <= 1e-13 * v:
            break
    root_b = v * math.sqrt(float(_pole_quotient(sol, pole)(v)))
    return p * root_b / (2.0 * math.pi * s)


def conical_check(sol, pole, period=None):
    """Circumference-to-radius ratio over 2 pi at a pole, extrapolated to s = 0.

    The ratio is even in s, so the values at s in CONICAL_RADII are fitted by
    a quadratic in s^2 and evaluated at 0.  A smooth pole gives 1.
    """
    pole = Pole(pole) if not isinstance(pole, Pole) else pole
    s = np.array(CONICAL_RADII)
    vals = np.array([conical_ratio(sol, pole, si, period) for si in s])
    coef = np.polyfit(s * s, vals, 2)
    return float(coef[-1])


def killing_identity_residual(sol, x, gamma_scale=1.0):
    """Components (dx, dphi) of Gamma X + (m/2) dGamma - B dphi.

    Gamma = gamma_scale * (1 + x^2) / m; the identity holds for scale 1.
    """
    x = np.asarray(x, dtype=float)
    m = sol.m
    B = np.asarray(sol.profile.value(x))
    gam = gamma_scale * (1.0 + x * x) / m
    dgam = gamma_scale * 2.0 * x / m
    Xx, Xp = one_form(m, x, B)
    return gam * Xx + 0.5 * m * dgam, gam * Xp - B


# -- Kahler potential PDE -------------------------------------------------

def kahler_derivatives(x, B, B1, B2):
    """Reduced holomorphic derivatives of the Kahler potential f = rho(s) - phi.

    Each derivative equals H * zeta^-p * conj(zeta)^-q; only the factor H is
    returned, since every term of the PDE has the same bidegree (5, 5).
    """
    i = 1j
    return {
        "z": (x + i) / 2.0,
        "zb": (x - i) / 2.0,
        "zz": (B / 2.0 - x - i) / 2.0,
        "zbzb": (B / 2.0 - x + i) / 2.0,
        "zzb": B / 4.0 + 0j,
        "zzzb": B * (B1 - 2.0) / 8.0 + 0j,
        "zzbzb": B * (B1 - 2.0) / 8.0 + 0j,
        "zzzbzb": B * (2.0 - 2.0 * B1 + 0.5 * B1 * B1 + 0.5 * B * B2) / 8.0 + 0j,
    }


def kahler_terms(m, lam, x, B, B1, B2):
    """The five terms of the fourth-order Kahler-potential PDE."""
    f = kahler_derivatives(x, B, B1, B2)
    fz, fzb, fzzb = f["z"], f["zb"], f["zzb"]
    return (
        (2.0 / m) * (fz * fzb) ** 2 * (f["zzzbzb"] * fzzb - f["zzzb"] * f["zzbzb"]),
        (4.0 * lam / m) * fzzb**3 * fz**2 * fzb**2,
        -(fzzb**3) * (f["zbzb"] * fz**2 + f["zz"] * fzb**2),
        fzzb**2 * (fz * fzb**2 * f["zzzb"] + fzb * fz**2 * f["zzbzb"]),
        2.0 * fzzb**4 * fz * fzb,
    )


def kahler_residual(sol, x, lam=None):
    """(|sum of PDE terms|, largest |term|) at interior points.

    Points within 1e-3 (x2 - x1) of a pole raise ChartDomainError.
    """
    xa = _check_inside(sol, x)
    r = sol.roots
    margin = 1e-3 * (r.x2 - r.x1)
    if np.any(xa - r.x1 < margin) or np.any(r.x2 - xa < margin):
        raise ChartDomainError("too close to a zero of B for the Kahler check")
    lam = sol.lam if lam is None else lam
    B, B1, B2 = (np.asarray(v) for v in sol.profile.evaluate(xa)[1:])
    terms = kahler_terms(sol.m, lam, xa, B, B1, B2)
    total = sum(terms)
    scale = np.max(np.abs(terms), axis=0)
    return np.abs(total), scale


# -- reports ---------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    max_abs_residual: float
    grid_size: int
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_abs_residual <= self.tolerance)

    def to_dict(self):
        return {
            "max_residual": self.max_abs_residual,
            "grid_size": self.grid_size,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class ResidualReport:
    checks: dict = field(default_factory=dict)

    def add(self, name, residual, grid_size, tolerance):
        self.checks[name] = CheckResult(float(residual), int(grid_size), float(tolerance))

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks.values())

    def failures(self):
        return sorted(k for k, c in self.checks.items() if not c.passed)

    def to_dict(self):
        return {
            "all_pass": self.all_passed,
            "checks": {k: c.to_dict() for k, c in sorted(self.checks.items())},
        }
