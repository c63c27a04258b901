"""
Closed-form axisymmetric profiles B(x).

In the chart (x, phi) every axisymmetric quasi-Einstein structure on a
surface is

    g = dx^2 / B(x) + B(x) dphi^2,
    X = -m / (x^2 + beta^2) * (x dx - beta B dphi),

and B solves the linear ODE

    B'' + m ((beta^2 + x^2) x B' + 2 beta^2 B) / (beta^2 + x^2)^2 + 2 lambda = 0.

With beta = 1 (the non-closed case, where X is not closed) the general
solution is, for m != -1,

    B = b x u^(-m/2) + c u^(-m/2) F(x) - lambda u / (m + 1),   u = 1 + x^2,

and for m = -1

    B = x (b - lambda asinh x) sqrt(u) + c u.

The closed case beta = 0 has elementary solutions and is supported for
local evaluation only.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import AmbiguousBranchError, DomainError, InvalidParameterError, NotApplicableError
from .specfun import hyp_f, hyp_f_and_prime

BRANCH_GUARD = 1e-12
TAYLOR_RADIUS = 1e-4


class Branch(enum.Enum):
    NON_CLOSED = "NonClosed"  # beta = 1
    CLOSED = "Closed"  # beta = 0


@dataclass(frozen=True)
class ModelParams:
    """Parameters (m, lambda, b, c) and the beta branch of a profile."""

    m: float
    lam: float
    c: float
    b: float = 0.0
    branch: Branch = Branch.NON_CLOSED

    def __post_init__(self):
        if self.m == 0:
            raise InvalidParameterError("m must be nonzero")

    @property
    def beta(self):
        return 1.0 if self.branch is Branch.NON_CLOSED else 0.0


class ProfileEval(NamedTuple):
    x: float
    B: float
    B1: float
    B2: float


def alpha(m, lam, c):
    """alpha = B(0) of the even non-closed profile."""
    if m == -1:
        return float(c)
    return c - lam / (m + 1.0)


def _kind(params):
    m = params.m
    for pole in (-1.0, 1.0):
        d = abs(m - pole)
        if 0.0 < d < BRANCH_GUARD:
            raise AmbiguousBranchError(
                f"m = {m!r} is within {BRANCH_GUARD} of the branch point {pole}"
            )
    if params.branch is Branch.NON_CLOSED:
        return "m_minus_one" if m == -1 else "general"
    if m == 1:
        return "closed_log"
    if m == -1:
        return "closed_x2log"
    return "closed_power"


def ode_derivatives(m, lam, x, B, B1, beta=1.0):
    """B'', B''' and B'''' from the linear ODE and its derivatives.

    The ODE is written B'' = P B' + Q B + S with P = -m x / (beta^2 + x^2),
    Q = -2 m beta^2 / (beta^2 + x^2)^2 and S = -2 lambda.
    """
    x = np.asarray(x, dtype=float)
    b2 = beta * beta
    u = b2 + x * x
    P = -m * x / u
    P1 = -m * (b2 - x * x) / u**2
    P2 = 2.0 * m * x * (3.0 * b2 - x * x) / u**3
    Q = -2.0 * m * b2 / u**2
    Q1 = 8.0 * m * b2 * x / u**3
    Q2 = 8.0 * m * b2 * (b2 - 5.0 * x * x) / u**4
    B2 = P * B1 + Q * B - 2.0 * lam
    B3 = P1 * B1 + P * B2 + Q1 * B + Q * B1
    B4 = P2 * B1 + 2.0 * P1 * B2 + P * B3 + Q2 * B + 2.0 * Q1 * B1 + Q * B2
    return B2, B3, B4


def _taylor_coefficients(m, lam, a0, n):
    """Even Taylor coefficients a_j of B = sum a_j x^(2j) for beta = 1, b = 0."""
    a = [a0]
    for j in range(n - 1):
        prev = a[j - 1] if j >= 1 else 0.0
        src = 2.0 * lam * (1.0 if j == 0 else 2.0 if j == 1 else 1.0 if j == 2 else 0.0)
        num = (
            2.0 * (2 * j) * (2 * j - 1) * a[j]
            + (2 * j - 2) * (2 * j - 3) * prev
            + m * (2 * j * a[j] + (2 * j - 2) * prev)
            + 2.0 * m * a[j]
            + src
        )
        a.append(-num / ((2 * j + 2) * (2 * j + 1)))
    return a


@dataclass(frozen=True)
class Profile:
    """A closed-form solution B(x) of the profile ODE.  Immutable."""

    params: ModelParams
    kind: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", _kind(self.params))

    @property
    def m(self):
        return self.params.m

    @property
    def lam(self):
        return self.params.lam

    @property
    def alpha(self):
        return alpha(self.params.m, self.params.lam, self.params.c)

    @property
    def is_even(self):
        return self.params.b == 0 and self.params.branch is Branch.NON_CLOSED

    # -- domain -------------------------------------------------------
    def _check_domain(self, x):
        if self.params.branch is Branch.NON_CLOSED:
            return
        p = self.params
        bad = None
        if self.kind == "closed_log" and p.b != 0:
            bad = x <= 0
        elif self.kind == "closed_x2log" and p.lam != 0:
            bad = x <= 0
        elif self.kind == "closed_power" and p.b != 0:
            e = 1.0 - p.m
            if e != math.floor(e):
                bad = x <= 0
            elif e < 0:
                bad = x == 0
        if bad is not None and np.any(bad):
            raise DomainError(f"x outside the domain of the {self.kind} profile")

    # -- values -------------------------------------------------------
    def value(self, x):
        """B(x) for scalar or array x."""
        xa = np.asarray(x, dtype=float)
        self._check_domain(xa)
        p, m = self.params, self.params.m
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "general":
                u = 1.0 + xa * xa
                w = u ** (-0.5 * m)
                out = p.c * w * hyp_f(m, xa) - p.lam * u / (m + 1.0)
                if p.b:
                    out = out + p.b * xa * w
            elif self.kind == "m_minus_one":
                u = 1.0 + xa * xa
                out = xa * (p.b - p.lam * np.arcsinh(xa)) * np.sqrt(u) + p.c * u
            elif self.kind == "closed_power":
                out = p.c - p.lam * xa * xa / (m + 1.0)
                if p.b:
                    out = out + p.b * _signed_power(xa, 1.0 - m)
            elif self.kind == "closed_log":
                out = p.c - 0.5 * p.lam * xa * xa
                if p.b:
                    out = out + p.b * np.log(xa)
            else:
                out = p.c * xa * xa + p.b
                if p.lam:
                    out = out - p.lam * xa * xa * np.log(xa)
        return _as_output(out, xa)

    def derivative(self, x):
        """B'(x).

        For the even non-closed profile this uses the first-order identity
        B' = (B - alpha - lambda x^2)/x - m x B/(1 + x^2), switching to the
        even Taylor series for |x| < 1e-4.  Other profiles are
        differentiated directly.
        """
        xa = np.asarray(x, dtype=float)
        self._check_domain(xa)
        p, m = self.params, self.params.m
        if self.is_even:
            B = np.asarray(self.value(xa), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = (B - self.alpha - p.lam * xa * xa) / xa - m * xa * B / (1.0 + xa * xa)
            small = np.abs(xa) < TAYLOR_RADIUS
            if np.any(small):
                a = _taylor_coefficients(m, p.lam, self.alpha, 4)
                x2 = xa * xa
                series = xa * (2 * a[1] + x2 * (4 * a[2] + x2 * 6 * a[3]))
                out = np.where(small, series, out)
            return _as_output(out, xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "general":
                u = 1.0 + xa * xa
                w = u ** (-0.5 * m)
                F, F1 = hyp_f_and_prime(m, xa)
                out = p.c * (w * F1 - m * xa * w / u * F) - 2.0 * p.lam * xa / (m + 1.0)
                if p.b:
                    out = out + p.b * w / u * (1.0 + (1.0 - m) * xa * xa)
            elif self.kind == "m_minus_one":
                u = 1.0 + xa * xa
                out = ((p.b - p.lam * np.arcsinh(xa)) * (2.0 * xa * xa + 1.0) / np.sqrt(u)
                       - p.lam * xa + 2.0 * p.c * xa)
            elif self.kind == "closed_power":
                out = -2.0 * p.lam * xa / (m + 1.0)
                if p.b:
                    out = out + p.b * (1.0 - m) * _signed_power(xa, -m)
            elif self.kind == "closed_log":
                out = -p.lam * xa
                if p.b:
                    out = out + p.b / xa
            else:
                out = 2.0 * p.c * xa
                if p.lam:
                    out = out - p.lam * (2.0 * xa * np.log(xa) + xa)
        return _as_output(out, xa)

    def second_derivative(self, x, B=None, B1=None):
        """B''(x) from the profile ODE (not by differentiating B)."""
        xa = np.asarray(x, dtype=float)
        if B is None:
            B = self.value(xa)
        if B1 is None:
            B1 = self.derivative(xa)
        p = self.params
        if p.branch is Branch.NON_CLOSED:
            u = 1.0 + xa * xa
            out = -2.0 * p.lam - p.m * (xa * u * B1 + 2.0 * B) / u**2
            return _as_output(out, xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -2.0 * p.lam - p.m * np.asarray(B1) / xa
        if np.any(xa == 0):
            out = np.where(xa == 0, self._closed_second_at_zero(), out)
        return _as_output(out, xa)

    def _closed_second_at_zero(self):
        p = self.params
        if self.kind == "closed_power":
            return -2.0 * p.lam / (p.m + 1.0)
        if self.kind == "closed_log":
            return -p.lam
        return 2.0 * p.c

    def higher_derivatives(self, x):
        """(B, B', B'', B''', B'''') with the last three from the ODE."""
        xa = np.asarray(x, dtype=float)
        B = np.asarray(self.value(xa), dtype=float)
        B1 = np.asarray(self.derivative(xa), dtype=float)
        B2, B3, B4 = ode_derivatives(self.params.m, self.params.lam, xa, B, B1, self.params.beta)
        return tuple(_as_output(v, xa) for v in (B, B1, B2, B3, B4))

    def evaluate(self, x):
        B = self.value(x)
        B1 = self.derivative(x)
        B2 = self.second_derivative(x, B, B1)
        return ProfileEval(_as_output(np.asarray(x, dtype=float), np.asarray(x)), B, B1, B2)


def _signed_power(x, e):
    if e == math.floor(e):
        return x**e
    return np.power(x, e)


def _as_output(val, like):
    if np.ndim(like) == 0:
        return float(val)
    return np.asarray(val, dtype=float)


def make_profile(params):
    """Build the closed-form profile selected by ``params``.

    Raises
    ------
    InvalidParameterError
        m == 0.
    AmbiguousBranchError
        m within 1e-12 of (but not equal to) -1 or 1.
    """
    if params.m == 0:
        raise InvalidParameterError("m must be nonzero")
    return Profile(params)


def eval_B(profile, x):
    """Evaluate B, B' and B'' (the latter from the ODE) at x."""
    return profile.evaluate(x)


def _fd_first(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h)


def ode_lhs(m, lam, beta, x, B, B1, B2):
    """Left-hand side of the profile ODE."""
    b2 = beta * beta
    u = b2 + x * x
    if beta == 0:
        return B2 + m * B1 / x + 2.0 * lam
    return B2 + m * (u * x * B1 + 2.0 * b2 * B) / u**2 + 2.0 * lam


def ode_residual(profile, x):
    """Residual of the profile ODE at scalar x.

    B'' is taken from a five-point difference of the analytic B', never
    from the ODE itself, so the check is falsifiable.
    """
    x = float(x)
    if profile.params.branch is Branch.CLOSED and x != 0:
        # closed profiles can be singular at x = 0
        h = 1e-3 * min(1.0, abs(x))
    else:
        h = 1e-3 * max(1.0, abs(x))
    B = profile.value(x)
    B1 = profile.derivative(x)
    B2 = _fd_first(profile.derivative, x, h)
    return float(ode_lhs(profile.params.m, profile.params.lam, profile.params.beta, x, B, B1, B2))


def first_order_residual(profile, x):
    """LHS minus RHS of d/dx[B u^(m/2) / x] = -u^(m/2) (alpha + lambda x^2) / x^2.

    The derivative is a five-point central difference.  Only defined for the
    even non-closed profile and x != 0.
    """
    if not profile.is_even:
        raise NotApplicableError("first-order identity holds for the even non-closed profile only")
    x = float(x)
    if x == 0.0:
        raise DomainError("first-order identity is singular at x = 0")
    m = profile.params.m

    def q(t):
        return profile.value(t) * (1.0 + t * t) ** (0.5 * m) / t

    h = 1e-3 * min(abs(x), 1.0)
    return float(_fd_first(q, x, h) - first_order_rhs(profile, x))


def first_order_rhs(profile, x):
    m, lam = profile.params.m, profile.params.lam
    return -((1.0 + x * x) ** (0.5 * m)) * (profile.alpha + lam * x * x) / (x * x)
