"""Vectorized panel quadrature for complex integrands.

Two rules are provided:

* adaptive Gauss-Kronrod (7/15) over many panels at once, bisecting panels
  whose Kronrod-Gauss difference exceeds the tolerance;
* tanh-sinh (double exponential) for panels whose endpoints carry an
  integrable algebraic singularity, e.g. p'(x) ~ (x - x_t)^(-1/2) next to a
  turning point.

Integrands are called as ``func(y, idx)`` with ``y`` an array of abscissae
and ``idx`` the (same-shape) index of the original panel each abscissa
belongs to, so callers can attach per-panel data such as a reference phase.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AccuracyError

# Kronrod 15-point nodes on [0, 1); odd entries are the 7-point Gauss nodes.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
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

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_gauss = np.zeros(15)
_gauss[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])
GAUSS_WEIGHTS = _gauss

# Gauss-Legendre rule for smooth sub-integrals (e.g. local action increments).
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def gk15(func, a, b, idx=None):
    """Apply the 7/15 Gauss-Kronrod pair on each panel ``[a_j, b_j]``.

    Returns ``(integral, error, l1)`` arrays where ``l1`` estimates the
    integral of ``|func|`` (used as the scale of relative tolerances).
    Panels may be oriented (``b < a``).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if idx is None:
        idx = np.arange(a.size)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    y = mid[:, None] + half[:, None] * NODES[None, :]
    vals = np.asarray(func(y, np.broadcast_to(idx[:, None], y.shape)), dtype=complex)
    kron = half * (vals @ KRONROD_WEIGHTS)
    gauss = half * (vals @ GAUSS_WEIGHTS)
    l1 = np.abs(half) * (np.abs(vals) @ KRONROD_WEIGHTS)
    return kron, np.abs(kron - gauss), l1


def adaptive_gk(func, a, b, rtol=1e-10, atol=0.0, max_depth=30):
    """Integrate ``func`` over each panel with adaptive bisection.

    A panel is accepted once its error estimate is below
    ``max(atol, rtol * max(|I|, l1))``.  Raises AccuracyError carrying the
    worst achieved estimate when ``max_depth`` bisections are not enough.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    total = np.zeros(a.size, dtype=complex)
    owner = np.arange(a.size)
    lo, hi = a, b
    for _ in range(max_depth):
        val, err, l1 = gk15(func, lo, hi, owner)
        ok = err <= np.maximum(atol, rtol * np.maximum(np.abs(val), l1))
        np.add.at(total, owner[ok], val[ok])
        if ok.all():
            return total
        bad = ~ok
        mid = 0.5 * (lo[bad] + hi[bad])
        owner = np.concatenate([owner[bad], owner[bad]])
        lo, hi = np.concatenate([lo[bad], mid]), np.concatenate([mid, hi[bad]])
    raise AccuracyError(
        f"adaptive Gauss-Kronrod did not converge in {max_depth} bisections",
        estimate=float(np.max(err[~ok])))


def tanh_sinh(func, a, b, rtol=1e-10, max_level=12):
    """Double-exponential quadrature of ``func`` over one panel [a, b].

    Endpoints are never evaluated, so integrable endpoint singularities are
    fine.  Abscissae closer to an endpoint than a few ulps are dropped; for an
    inverse-square-root singularity this truncation costs ~sqrt(eps |x|).
    ``func`` is called as ``func(y, idx)`` with ``idx`` all zeros.
    """
    a, b = float(a), float(b)
    if a == b:
        return 0j
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    floor = 4.0 * np.finfo(float).eps * max(abs(a), abs(b), abs(b - a))
    # same truncation on every level keeps the node sets nested
    tmax = min(4.0, float(np.arcsinh(np.log(2.0 * abs(half) / floor) / np.pi)))
    prev = None
    h = 0.5
    for _ in range(max_level):
        t = np.arange(-math.floor(tmax / h), math.floor(tmax / h) + 1) * h
        u = 0.5 * np.pi * np.sinh(t)
        # distance to the nearer endpoint, computed without cancellation
        gap = np.abs(half) * 2.0 / (np.exp(2.0 * np.abs(u)) + 1.0)
        y = np.where(t < 0, a + np.sign(half) * gap, b - np.sign(half) * gap)
        y = np.where(t == 0, mid, y)
        w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
        vals = np.asarray(func(y, np.zeros(y.size, dtype=int)), dtype=complex)
        est = half * np.sum(w * vals)
        if prev is not None and abs(est - prev) <= rtol * max(abs(est), 1e-300):
            return est
        prev = est
        h *= 0.5
    raise AccuracyError("tanh-sinh quadrature did not converge", estimate=abs(est - prev))


def gauss_legendre(func, a, b):
    """Fixed 20-point Gauss-Legendre rule, vectorized over panels (any shape).

    ``func`` receives an array with one trailing axis of nodes.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    y = mid[..., None] + half[..., None] * GL_NODES
    return half * np.sum(func(y) * GL_WEIGHTS, axis=-1)
