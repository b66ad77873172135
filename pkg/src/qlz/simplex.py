"""Time-simplex integrals of products of free phases.

``simplex_integral(w, t)`` is

    int_{s_j >= 0, sum s_j = t} prod_j exp(-i s_j w_j)

over the ``(n-1)``-dimensional simplex, which equals ``i^(n-1)`` times the
divided difference of ``z -> exp(-i z t)`` at the nodes ``w``.  Both the
closed form and an iterated Chebyshev quadrature are provided; the
quadrature is the independent route used for checks.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as C

_SERIES_TERMS = 48


def _sinc_dd2(a, b, t):
    """First divided difference of exp(-izt), stable for a close to b."""
    m = 0.5 * (a + b)
    h = 0.5 * (a - b) * t
    small = np.abs(h) < 1e-4
    hs = np.where(small, 1.0, h)
    ratio = np.where(small, 1 - h**2 / 6 + h**4 / 120, np.sin(hs) / hs)
    return -1j * t * np.exp(-1j * m * t) * ratio


def _series_dd(x, t):
    """Taylor series of the divided difference around the node mean."""
    n = x.shape[-1]
    c = x.mean(axis=-1)
    y = x - c[..., None]
    # complete homogeneous symmetric polynomials h_j(y) by the standard recursion
    h = [np.ones(x.shape[:-1], dtype=complex)]
    # power sums
    p = [None] + [np.sum(y**k, axis=-1) for k in range(1, _SERIES_TERMS + 1)]
    for j in range(1, _SERIES_TERMS + 1):
        h.append(sum(p[k] * h[j - k] for k in range(1, j + 1)) / j)
    total = np.zeros(x.shape[:-1], dtype=complex)
    coef = (-1j * t) ** (n - 1) / float(np.prod(np.arange(1, n)))
    for j in range(0, _SERIES_TERMS + 1):
        total = total + coef * h[j]
        coef = coef * (-1j * t) / (n + j)
    return np.exp(-1j * c * t) * total


def divided_difference_exp(x, t):
    """Divided difference of ``z -> exp(-i z t)`` at the last-axis nodes of ``x``."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    if n == 1:
        return np.exp(-1j * x[..., 0] * t)
    order = np.argsort(x.real, axis=-1, kind="stable")
    x = np.take_along_axis(x, order, axis=-1)
    if n == 2:
        return _sinc_dd2(x[..., 0], x[..., 1], t)
    spread = np.abs(x[..., -1] - x[..., 0])
    spread = np.maximum(spread, np.max(np.abs(x - x.mean(axis=-1, keepdims=True)), axis=-1) * 2)
    out = np.empty(x.shape[:-1], dtype=complex)
    near = spread * t <= 2.0
    if np.any(near):
        out[near] = _series_dd(x[near], t)
    far = ~near
    if np.any(far):
        xf = x[far]
        hi = divided_difference_exp(xf[..., 1:], t)
        lo = divided_difference_exp(xf[..., :-1], t)
        out[far] = (hi - lo) / (xf[..., -1] - xf[..., 0])
    return out


def simplex_integral(x, t):
    """Closed-form time-simplex integral of ``prod exp(-i s_j x_j)``."""
    x = np.asarray(x, dtype=complex)
    return (1j) ** (x.shape[-1] - 1) * divided_difference_exp(x, t)


def simplex_quadrature(x, t, nodes=None):
    """Independent evaluation of the same simplex integral by iterated integration.

    ``F_1(s) = exp(-i x_1 s)`` and
    ``F_{j+1}(s) = exp(-i x_{j+1} s) int_0^s exp(i x_{j+1} u) F_j(u) du``,
    each integrand represented by a Chebyshev interpolant on ``[0, t]`` of
    degree ``nodes`` and integrated exactly. ``x`` is a 1-d sequence.
    """
    x = np.asarray(x, dtype=complex)
    t = float(t)
    if nodes is None:
        spread = np.max(np.abs(x[:, None] - x[None, :])) if len(x) > 1 else 0.0
        nodes = int(spread * t + np.max(np.abs(x.imag)) * t + 48)
    if t == 0:
        return complex(1.0 if len(x) == 1 else 0.0)

    y = C.chebpts2(nodes + 1)
    tau = (y + 1) * t / 2
    f = np.exp(-1j * x[0] * tau)
    for w in x[1:]:
        coef = C.chebfit(y, np.exp(1j * w * tau) * f, nodes)
        f = np.exp(-1j * w * tau) * C.chebval(y, C.chebint(coef, lbnd=-1, scl=t / 2))
    return complex(f[-1])
