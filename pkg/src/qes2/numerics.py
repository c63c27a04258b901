"""
Scalar numerical kernels: adaptive Gauss-Kronrod quadrature, Brent's root
finder, golden-section minimisation and the Lanczos Gamma function.

The quadrature routines work on vectorised integrands (callables that
accept and return numpy arrays) and process every active panel in a single
call, which keeps the per-panel Python overhead small.
"""

import math

import numpy as np

# 7-point Gauss / 15-point Kronrod pair (QUADPACK qk15 tables).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod abscissae.
_GAUSS = np.array([
    _WG[(k - 1) // 2] if k % 2 else 0.0
    for k in (j if j <= 7 else 14 - j for j in range(15))
])

EPS = np.finfo(float).eps


def _gk15(f, a, b):
    """Apply the G7-K15 pair to every panel [a_i, b_i] at once."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    kron = half * (fx @ _KRONROD)
    gauss = half * (fx @ _GAUSS)
    return kron, np.abs(kron - gauss)


MAX_ACTIVE_PANELS = 1 << 16


def integrate_panels(f, edges, epsabs=1e-13, epsrel=1e-13, max_depth=60):
    """Integrate ``f`` over each consecutive panel of ``edges``.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    edges : array_like
        Sorted panel boundaries, length n + 1.
    epsabs, epsrel : float
        Per-panel acceptance: ``err <= max(epsabs * w, epsrel * |I|)``
        where ``w`` is the fraction of the total length covered.
    max_depth : int
        Maximum bisection depth; panels still failing at this depth, or when
        more than MAX_ACTIVE_PANELS would be active, are accepted as they are.

    Returns
    -------
    ndarray
        Integral over each of the n panels.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.zeros(0)
    return integrate_intervals(f, edges[:-1], edges[1:], epsabs, epsrel, max_depth)


def integrate_intervals(f, lower, upper, epsabs=1e-13, epsrel=1e-13, max_depth=60):
    """Like :func:`integrate_panels` for independent intervals [lower_i, upper_i]."""
    a = np.array(lower, dtype=float)
    b = np.array(upper, dtype=float)
    n = a.size
    out = np.zeros(n)
    if n == 0:
        return out
    total = float(np.sum(np.abs(b - a))) or 1.0
    owner = np.arange(n)
    depth = 0
    while a.size:
        val, err = _gk15(f, a, b)
        frac = np.abs(b - a) / total
        give_up = depth >= max_depth or 2 * a.size > MAX_ACTIVE_PANELS
        ok = (err <= np.maximum(epsabs * frac, epsrel * np.abs(val))) | give_up
        ok |= ~np.isfinite(err)
        np.add.at(out, owner[ok], val[ok])
        bad = ~ok
        if not bad.any():
            break
        a, b, owner = a[bad], b[bad], owner[bad]
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        owner = np.concatenate([owner, owner])
        depth += 1
    return out


def quad(f, a, b, epsabs=1e-13, epsrel=1e-13, max_depth=60, initial_panels=1):
    """Adaptive Gauss-Kronrod integral of a vectorised ``f`` over [a, b]."""
    if a == b:
        return 0.0
    edges = np.linspace(a, b, int(initial_panels) + 1)
    return float(integrate_panels(f, edges, epsabs, epsrel, max_depth).sum())


def brentq(f, a, b, xtol=1e-14, rtol=4 * EPS, maxiter=200):
    """Find a root of ``f`` in the bracket [a, b] by Brent's method.

    ``f(a)`` and ``f(b)`` must have opposite signs (or one of them is zero).
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError("root is not bracketed")
    c, fc = a, fa
    d = e = b - a
    for _ in range(maxiter):
        if np.sign(fb) == np.sign(fc):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * rtol * abs(b) + 0.5 * xtol
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b += d if abs(d) > tol else math.copysign(tol, m)
        fb = f(b)
    raise RuntimeError("brentq did not converge")


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a, b, tol=1e-10, maxiter=500):
    """Minimise a unimodal ``f`` on [a, b]; returns ``(xmin, fmin, a, b)``.

    The returned ``a, b`` is the final bracket, useful for polishing.
    """
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(maxiter):
        if abs(b - a) <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
    if f1 <= f2:
        return x1, f1, a, b
    return x2, f2, a, b


# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(z):
    """Gamma function of a real argument via the Lanczos approximation.

    Negative arguments use the reflection formula; poles raise ValueError.
    """
    z = float(z)
    if z <= 0.0 and z == math.floor(z):
        raise ValueError(f"gamma has a pole at {z}")
    if z < 0.5:
        return math.pi / (math.sin(math.pi * z) * gamma(1.0 - z))
    z -= 1.0
    acc = _LANCZOS[0]
    for k in range(1, 9):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc
