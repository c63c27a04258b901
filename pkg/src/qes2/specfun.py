"""
The profile hypergeometric function

    F(x) = 2F1(-1/2, -m/2; 1/2; -x^2)

and the analytic facts about it used elsewhere in the package.

Small arguments (|x| <= 0.5) are summed from the power series in
z = -x^2.  Larger arguments use the integral representation

    F(x) = 1 - x * int_0^x ((1 + y^2)^(m/2) - 1) / y^2 dy,

which is valid for every real x.  Both routes work on |x|, so F is exactly
even.
"""

import math
import threading
from functools import lru_cache

import numpy as np

from .errors import (
    InvalidParameterError,
    NoPositiveRootError,
    UnsupportedAsymptoticBranchError,
)
from .numerics import brentq, gamma, integrate_intervals, integrate_panels

SERIES_RADIUS = 0.5
_QUAD_TOL = 1e-14


def _check_m(m):
    m = float(m)
    if m == 0.0 or not math.isfinite(m):
        raise InvalidParameterError(f"m must be finite and nonzero, got {m!r}")
    return m


@lru_cache(maxsize=256)
def _series_coefficients(m):
    """Coefficients c_k of F = sum c_k z^k, truncated for |z| <= 1/2."""
    a, b, c = -0.5, -0.5 * m, 0.5
    coef = [1.0]
    biggest = 1.0
    for k in range(400):
        nxt = coef[-1] * (a + k) * (b + k) / ((c + k) * (k + 1))
        if nxt == 0.0:
            break
        coef.append(nxt)
        size = abs(nxt) * 0.5 ** (k + 1)
        biggest = max(biggest, size)
        if size < 1e-18 * biggest:
            break
    return tuple(coef)


def _series(m, ax):
    coef = np.array(_series_coefficients(m))
    z = -ax * ax
    f = np.polynomial.polynomial.polyval(z, coef)
    dcoef = coef[1:] * np.arange(1, coef.size)
    if dcoef.size:
        df = -2.0 * ax * np.polynomial.polynomial.polyval(z, dcoef)
    else:
        df = np.zeros_like(ax)
    return f, df


def integrand(m, y):
    """((1 + y^2)^(m/2) - 1) / y^2, with the removable value m/2 at y = 0."""
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        y2 = y * y
        ay = np.abs(y)
        # log(1 + y^2) without overflow for |y| beyond 1e150
        log_u = np.where(ay > 1e150, 2.0 * np.log(np.maximum(ay, 1.0)), np.log1p(y2))
        val = np.expm1(0.5 * m * log_u) / y2
    small = y2 < 1e-16
    if np.any(small):
        # m/2 + m(m-2) y^2 / 8 + O(y^4)
        val = np.where(small, 0.5 * m + m * (m - 2.0) * y2 / 8.0, val)
    return val


class _NodeTable:
    """Per-m cumulative integrals at the nodes 0, 1/2, 1, 2, 4, ...

    Grown on demand and shared between calls; guarded by a lock.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._tables = {}

    def get(self, m, top):
        with self._lock:
            nodes, cum = self._tables.get(m, ([0.0, SERIES_RADIUS], [0.0, None]))
            if cum[1] is None:
                cum = [0.0] + list(
                    integrate_panels(lambda y: integrand(m, y), nodes, 0.0, _QUAD_TOL)
                )
            while nodes[-1] < top:
                lo, hi = nodes[-1], 2.0 * nodes[-1]
                piece = integrate_panels(lambda y: integrand(m, y), [lo, hi], 0.0, _QUAD_TOL)[0]
                nodes = nodes + [hi]
                cum = cum + [cum[-1] + piece]
            self._tables[m] = (nodes, cum)
            return np.array(nodes), np.array(cum)


_NODE_TABLE = _NodeTable()


def _cumulative_integral(m, ax):
    """int_0^v integrand for every v in the 1-d array ``ax`` (all >= 0).

    The integral up to the nearest tabulated node below v comes from the
    cached table; only the remainder is integrated, panel by panel between
    consecutive requested values in the same cell.
    """
    vals, inverse = np.unique(ax, return_inverse=True)
    nodes, cum = _NODE_TABLE.get(m, vals[-1])
    cell = np.searchsorted(nodes, vals, side="right") - 1
    prev = np.concatenate([[-1], cell[:-1]])
    new_cell = cell != prev
    # each value's panel starts at the node of its cell or at the previous value
    lower = np.where(new_cell, nodes[cell], np.concatenate([[0.0], vals[:-1]]))
    pieces = integrate_intervals(lambda y: integrand(m, y), lower, vals, 0.0, _QUAD_TOL)
    out = np.empty_like(vals)
    acc = 0.0
    for i in range(vals.size):
        acc = (cum[cell[i]] if new_cell[i] else acc) + pieces[i]
        out[i] = acc
    return out[inverse]


def _evaluate(m, x, want_derivative):
    xa = np.asarray(x, dtype=float)
    ax = np.abs(xa).ravel()
    f = np.empty_like(ax)
    df = np.empty_like(ax)
    near = ax <= SERIES_RADIUS
    if near.any():
        f[near], df[near] = _series(m, ax[near])
    far = ~near
    if far.any():
        axf = ax[far]
        integral = _cumulative_integral(m, axf)
        f[far] = 1.0 - axf * integral
        if want_derivative:
            df[far] = -integral - axf * integrand(m, axf)
    f = f.reshape(xa.shape)
    df = (np.sign(xa).ravel() * df).reshape(xa.shape)
    if xa.ndim == 0:
        return float(f), float(df)
    return f, df


def hyp_f(m, x):
    """F(x) = 2F1(-1/2, -m/2; 1/2; -x^2) for scalar or array ``x``.

    Examples
    --------
    >>> hyp_f(2, 0.7)
    0.51
    """
    m = _check_m(m)
    return _evaluate(m, x, want_derivative=False)[0]


def hyp_f_prime(m, x):
    """dF/dx.  Odd in x; equals F(x)/x - (1 + x^2)^(m/2)/x away from 0."""
    m = _check_m(m)
    return _evaluate(m, x, want_derivative=True)[1]


def hyp_f_and_prime(m, x):
    """Return ``(F(x), F'(x))`` sharing a single quadrature pass."""
    m = _check_m(m)
    return _evaluate(m, x, want_derivative=True)


@lru_cache(maxsize=256)
def f_positive_root(m):
    """The unique positive zero x0 of F, which exists only for m > 0."""
    m = _check_m(m)
    if m < 0:
        raise NoPositiveRootError(f"F is increasing on x > 0 for m = {m} < 0")
    lo, hi = 0.0, 1.0
    while hyp_f(m, hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 2.0**500:
            raise NoPositiveRootError(f"no sign change of F found for m = {m}")
    return brentq(lambda t: hyp_f(m, t), lo, hi, xtol=1e-14)


def f_asymptotic_slope(m):
    """Coefficient a of the linear growth F(x) ~ a x as x -> infinity.

    Defined for m < 0 (a > 0) and 0 < m < 1 (a < 0).
    """
    m = _check_m(m)
    if m >= 1.0:
        raise UnsupportedAsymptoticBranchError(
            f"F grows faster than linearly for m = {m} >= 1"
        )
    return math.sqrt(math.pi) * gamma(0.5 - 0.5 * m) / gamma(-0.5 * m)
