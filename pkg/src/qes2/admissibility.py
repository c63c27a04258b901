"""
Global admissibility: which (m, lambda, c, b) give a smooth metric on S^2.

A profile extends to the sphere iff it is even (b = 0) and c lies in the
open interval given by the table below; the interval for m > 0, lambda < 0
involves the constant

    c0(m) = min_{x > x0} (x^2 + 1)^(m/2 + 1) / |F(x)|,

x0 being the positive zero of F.

    m > 0        lambda = 0: c > 0
                 lambda > 0: c > lambda/(m+1)
                 lambda < 0: c > |lambda| c0 / (m+1)
    -1 < m < 0   lambda > 0: c > lambda/(m+1)
    m = -1       lambda > 0: c > 0
    m < -1       lambda > 0: lambda/(m+1) < c < 0

All other sign combinations admit no sphere solution.
"""

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DoubleRootError,
    InvalidParameterError,
    NoPositiveRootError,
    NoRootsError,
    NotApplicableError,
)
from .numerics import brentq, golden_section
from .specfun import f_positive_root, hyp_f, hyp_f_and_prime

X_MAX = 2.0**20
POSITIVITY_SAMPLES = 512


class Reason(enum.Enum):
    OK = "OK"
    NONZERO_B = "NonzeroB"
    C_NOT_IN_RANGE = "CNotInRange"
    LAMBDA_SIGN_FORBIDDEN = "LambdaSignForbidden"
    M_ZERO = "MZero"
    NO_ROOTS = "NoRoots"
    DOUBLE_ROOT = "DoubleRoot"


@dataclass(frozen=True)
class Interval:
    """An interval of c values; ``empty`` marks the empty set."""

    lower: float = -math.inf
    upper: float = math.inf
    lower_closed: bool = False
    upper_closed: bool = False
    empty: bool = False

    @classmethod
    def nothing(cls):
        return cls(0.0, 0.0, empty=True)

    def __contains__(self, c):
        if self.empty:
            return False
        lo_ok = c >= self.lower if self.lower_closed else c > self.lower
        hi_ok = c <= self.upper if self.upper_closed else c < self.upper
        return lo_ok and hi_ok

    def __str__(self):
        if self.empty:
            return "{}"
        lb = "[" if self.lower_closed else "("
        rb = "]" if self.upper_closed else ")"
        return f"{lb}{_fmt(self.lower)}, {_fmt(self.upper)}{rb}"

    def to_dict(self):
        def enc(v):
            return None if math.isinf(v) else v

        return {
            "empty": self.empty,
            "lower": enc(self.lower),
            "upper": enc(self.upper),
            "lower_closed": self.lower_closed,
            "upper_closed": self.upper_closed,
        }

    @classmethod
    def from_dict(cls, d):
        lo = -math.inf if d["lower"] is None else float(d["lower"])
        hi = math.inf if d["upper"] is None else float(d["upper"])
        return cls(lo, hi, bool(d["lower_closed"]), bool(d["upper_closed"]), bool(d["empty"]))


def _fmt(v):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


@dataclass(frozen=True)
class Verdict:
    admissible: bool
    reason: Reason
    c_range: Interval

    def to_dict(self):
        return {
            "admissible": self.admissible,
            "reason": self.reason.value,
            "c_range": self.c_range.to_dict(),
        }


@dataclass(frozen=True)
class C0Result:
    x0: float
    xmin: float
    c0: float


@dataclass(frozen=True)
class RootPair:
    x1: float
    x2: float
    dB1: float
    dB2: float
    period: float


def c0_objective(m, x):
    """C(x) = (x^2 + 1)^(m/2 + 1) / |F(x)|."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return (x * x + 1.0) ** (0.5 * m + 1.0) / np.abs(hyp_f(m, x))


def _log_c0_slope(m, x):
    # d/dx log C on x > x0, where F < 0
    f, df = hyp_f_and_prime(m, x)
    return (m + 2.0) * x / (x * x + 1.0) - df / f


@lru_cache(maxsize=128)
def compute_c0(m):
    """Threshold constant c0(m) for the m > 0, lambda < 0 row of the table.

    A 256-point log-spaced scan of (x0, x0 + 10^3) locates the basin, golden
    section narrows it to 1e-10, and the stationarity condition
    d log C / dx = 0 is then solved by Brent inside the final bracket.

    c0 grows like 1/m^2 as m -> 0+.  When it exceeds the floating-point
    range the result has ``c0 = inf`` (no finite c is admissible).
    """
    m = float(m)
    if not m > 0:
        raise InvalidParameterError(f"c0 is defined for m > 0 only, got m = {m}")
    try:
        x0 = f_positive_root(m)
    except NoPositiveRootError:
        return C0Result(x0=math.inf, xmin=math.inf, c0=math.inf)
    t = np.geomspace(1e-6, 1e3, 256)
    xs = x0 * (1.0 + t)
    with np.errstate(over="ignore"):
        vals = c0_objective(m, xs)
    if not np.isfinite(vals).any():
        return C0Result(x0=float(x0), xmin=math.inf, c0=math.inf)
    i = int(np.argmin(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, xs.size - 1)]
    xg, _, _, _ = golden_section(lambda v: float(c0_objective(m, v)), lo, hi, tol=1e-10)
    xmin = float(xg)
    # C is flat to ~sqrt(eps) near its minimum, so the golden-section bracket
    # can miss the true argmin; widen until the slope changes sign
    width = 1e-7 * xg
    while width < hi - lo:
        a, b = max(xg - width, lo), min(xg + width, hi)
        if _log_c0_slope(m, a) < 0 < _log_c0_slope(m, b):
            xmin = brentq(lambda v: _log_c0_slope(m, v), a, b, xtol=1e-15)
            break
        width *= 10.0
    with np.errstate(over="ignore"):
        c0 = float(c0_objective(m, xmin))
    if not math.isfinite(c0):
        return C0Result(x0=float(x0), xmin=math.inf, c0=math.inf)
    return C0Result(x0=float(x0), xmin=float(xmin), c0=c0)


def admissible_c_range(m, lam):
    """Open interval of c for which the even profile extends to S^2."""
    m, lam = float(m), float(lam)
    if m == 0:
        raise InvalidParameterError("MZero: m must be nonzero")
    if m > 0:
        if lam == 0:
            return Interval(0.0, math.inf)
        if lam > 0:
            return Interval(lam / (m + 1.0), math.inf)
        return Interval(abs(lam) * compute_c0(m).c0 / (m + 1.0), math.inf)
    if lam <= 0:
        return Interval.nothing()
    if m == -1:
        return Interval(0.0, math.inf)
    if m > -1:
        return Interval(lam / (m + 1.0), math.inf)
    return Interval(lam / (m + 1.0), 0.0)


def classify(m, lam, c, b=0.0):
    """Decide whether (m, lambda, c, b) yields a smooth sphere solution."""
    m, lam, c, b = float(m), float(lam), float(c), float(b)
    if m == 0:
        return Verdict(False, Reason.M_ZERO, Interval.nothing())
    rng = admissible_c_range(m, lam)
    if b != 0:
        return Verdict(False, Reason.NONZERO_B, rng)
    if rng.empty:
        return Verdict(False, Reason.LAMBDA_SIGN_FORBIDDEN, rng)
    if c not in rng:
        return Verdict(False, Reason.C_NOT_IN_RANGE, rng)
    return Verdict(True, Reason.OK, rng)


# -- root location ----------------------------------------------------

def _search_grid(x_max, direction=1.0):
    near = np.linspace(0.0, 1.0, 257)[1:]
    far = np.geomspace(1.0, x_max, 2048)[1:]
    return direction * np.concatenate([near, far])


def first_sign_change(profile, direction=1.0, x_max=X_MAX):
    """Bracket the first zero of B moving away from x = 0.

    B is sampled on a dense grid; if no sampled value is non-positive, each
    sampled local minimum is refined by golden section so that narrow dips
    below zero between samples are not missed.  Returns ``(a, b)`` with
    B(a) > 0 >= B(b), or None.
    """
    xs = _search_grid(x_max, direction)
    xs = np.concatenate([[0.0], xs])
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.asarray(profile.value(xs), dtype=float)
    if not vals[0] > 0:
        return None
    nonpos = np.nonzero(~(vals > 0))[0]
    limit = nonpos[0] if nonpos.size else xs.size
    # local minima strictly before the first sampled sign change
    for i in range(1, limit - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]:
            lo, hi = sorted((xs[i - 1], xs[i + 1]))
            xm, fm, _, _ = golden_section(lambda t: float(profile.value(t)), lo, hi,
                                          tol=1e-12 * max(1.0, abs(xs[i])))
            if fm <= 0:
                return xs[i - 1], xm
    if nonpos.size:
        k = nonpos[0]
        return xs[k - 1], xs[k]
    return None


def _refine_root(profile, a, b):
    f = profile.value
    r = brentq(f, min(a, b), max(a, b), xtol=1e-13)
    # Newton polish; keeps the root accurate enough for pole-limit checks
    for _ in range(2):
        d = profile.derivative(r)
        if d == 0:
            break
        step = f(r) / d
        if abs(step) > 1e-10 * max(1.0, abs(r)):
            break
        r -= step
    return r


def _double_root_threshold(profile, x2):
    B2 = profile.second_derivative(x2)
    return 1e-8 * max(1.0, abs(B2) * abs(x2))


def find_roots(profile):
    """Locate the symmetric simple zeros x1 = -x2 of an even profile.

    Raises
    ------
    NotApplicableError
        The profile is not the even non-closed profile.
    NoRootsError
        B(0) <= 0 or no sign change before X_MAX, or B not positive between
        the zeros.
    DoubleRootError
        |B'(x2)| below the simplicity threshold.
    """
    if not profile.is_even:
        raise NotApplicableError("find_roots needs b = 0 and the non-closed branch")
    bracket = first_sign_change(profile, 1.0)
    if bracket is None:
        raise NoRootsError("no sign change of B on (0, X_MAX]")
    x2 = _refine_root(profile, *bracket)
    x1 = -x2
    inner = np.linspace(x1, x2, POSITIVITY_SAMPLES + 2)[1:-1]
    if not np.all(np.asarray(profile.value(inner)) > 0):
        raise NoRootsError("B is not positive between the zeros")
    dB2 = profile.derivative(x2)
    dB1 = profile.derivative(x1)
    if abs(dB2) <= _double_root_threshold(profile, x2):
        raise DoubleRootError(f"B'(x2) = {dB2!r} is numerically zero")
    return RootPair(x1=x1, x2=x2, dB1=dB1, dB2=dB2, period=4.0 * math.pi / abs(dB2))


def locate_zero_pair(profile):
    """Adjacent zeros around x = 0 of any non-closed profile with B(0) > 0.

    Unlike :func:`find_roots` no symmetry is assumed: the left and right zeros
    are searched independently.  Returns a RootPair whose period is taken
    from the right-hand zero.
    """
    right = first_sign_change(profile, 1.0)
    left = first_sign_change(profile, -1.0)
    if right is None or left is None:
        raise NoRootsError("B has no zero on one side of x = 0")
    x2 = _refine_root(profile, *right)
    x1 = _refine_root(profile, *left)
    dB1, dB2 = profile.derivative(x1), profile.derivative(x2)
    return RootPair(x1=x1, x2=x2, dB1=dB1, dB2=dB2, period=4.0 * math.pi / abs(dB2))


def positive_intervals(profile, lo, hi, samples=20001):
    """Maximal sampled intervals of [lo, hi] on which B > 0, with refined ends.

    Intervals touching ``lo`` or ``hi`` are dropped since their zeros are not
    resolved.  Returns a list of ``(x1, x2)``.
    """
    xs = np.linspace(lo, hi, samples)
    pos = np.asarray(profile.value(xs)) > 0
    out = []
    i = 0
    while i < samples:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < samples and pos[j + 1]:
            j += 1
        if i > 0 and j < samples - 1:
            x1 = _refine_root(profile, xs[i - 1], xs[i])
            x2 = _refine_root(profile, xs[j], xs[j + 1])
            out.append((x1, x2))
        i = j + 1
    return out
