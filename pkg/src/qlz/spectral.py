"""Lattice dispersion, energy-shell averages and the self-energy.

Momenta live on the unit torus ``[-1/2, 1/2)^d``; the nearest-neighbour
dispersion is ``e(p) = sum_i (1 - cos 2 pi p_i)`` with band ``[0, 2d]``.
Stochastic estimates return an :class:`Estimate` triple.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from .errors import EmptyShell, ResolutionTooCoarse

DEFAULT_DIM = 3


class Estimate(NamedTuple):
    value: float
    stderr: float
    n: int


def dispersion(p):
    """Lattice kinetic energy of torus momenta ``p`` with shape ``(..., d)``."""
    p = np.asarray(p, dtype=float)
    return np.sum(1.0 - np.cos(2 * np.pi * p), axis=-1)


def dispersion_gradient(p):
    p = np.asarray(p, dtype=float)
    return 2 * np.pi * np.sin(2 * np.pi * p)


def velocity(p):
    """Group velocity ``grad e / 2 pi``."""
    return np.sin(2 * np.pi * np.asarray(p, dtype=float))


def wrap_torus(p):
    """Map momenta into ``[-1/2, 1/2)``."""
    return (np.asarray(p, dtype=float) + 0.5) % 1.0 - 0.5


def critical_point_distance(w):
    """Torus distance from ``w`` to the nearest critical point of ``e``.

    Critical points are the momenta whose coordinates are all 0 or 1/2.
    """
    r = np.asarray(w, dtype=float) % 0.5
    r = np.minimum(r, 0.5 - r)
    return np.sqrt(np.sum(r**2, axis=-1))


def default_width(d=DEFAULT_DIM):
    return 1e-2 * 2 * d


@dataclass(frozen=True)
class DispersionModel:
    """Nearest-neighbour dispersion with optional self-energy renormalization."""

    dimension: int = DEFAULT_DIM

    @property
    def band_range(self):
        return (0.0, 2.0 * self.dimension)

    def energy(self, p):
        return dispersion(p)

    def gradient(self, p):
        return dispersion_gradient(p)

    def renormalized(self, p, lam, epsilon=1e-2):
        return renormalized_dispersion(p, lam, epsilon, d=self.dimension)


@dataclass(frozen=True)
class ShellSpec:
    """Thin energy shell ``{v : |e(v) - energy| < width / 2}``.

    ``sampler_budget`` is the number of accepted shell points requested.
    """

    energy: float
    width: float = default_width()
    sampler_budget: int = 100_000
    dimension: int = DEFAULT_DIM

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("shell width must be positive")


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_shell(energy, n, seed, width=None, d=DEFAULT_DIM, max_draws=None):
    """Draw ``n`` points uniformly from the thin shell around ``energy``.

    Rejection sampling from the uniform torus measure; in the thin-shell
    limit this is the normalized co-area measure on the level set.
    """
    width = default_width(d) if width is None else width
    rng = _rng(seed)
    if max_draws is None:
        max_draws = max(100 * n, 10_000) * 1000
    lo, hi = energy - width / 2, energy + width / 2
    if hi <= 0 or lo >= 2 * d:
        raise EmptyShell(f"shell at e={energy} lies outside the band [0, {2 * d}]")
    out = []
    have = 0
    drawn = 0
    chunk = 1 << 18
    while have < n:
        if drawn >= max_draws:
            raise EmptyShell(
                f"only {have}/{n} shell samples at e={energy} after {drawn} draws"
            )
        v = rng.random((chunk, d)) - 0.5
        drawn += chunk
        e = dispersion(v)
        keep = v[(e > lo) & (e < hi)]
        if len(keep):
            out.append(keep)
            have += len(keep)
    return np.concatenate(out)[:n]


def shell_average(h: Callable, shell: ShellSpec, seed) -> Estimate:
    """Monte Carlo estimate of the shell average ``<h>_e``."""
    v = sample_shell(shell.energy, shell.sampler_budget, seed, shell.width, shell.dimension)
    vals = np.asarray(h(v), dtype=float)
    n = len(vals)
    return Estimate(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n)), n)


def phi(e, width=None, n_samples=2_000_000, seed=0, d=DEFAULT_DIM) -> Estimate:
    """Thin-shell estimate of the density of states ``Phi(e)``.

    ``vol{|e(v) - e| < width/2} / width`` by uniform sampling of the torus.
    """
    width = default_width(d) if width is None else width
    if e + width / 2 <= 0 or e - width / 2 >= 2 * d:
        return Estimate(0.0, 0.0, n_samples)
    est = phi_curve([e], width, n_samples, seed, d)
    return Estimate(float(est.value[0]), float(est.stderr[0]), n_samples)


class CurveEstimate(NamedTuple):
    energies: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    n: int


def phi_curve(energies, width=None, n_samples=2_000_000, seed=0, d=DEFAULT_DIM):
    """Thin-shell ``Phi`` at many energies from one shared batch of samples."""
    width = default_width(d) if width is None else width
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    rng = _rng(seed)
    counts = np.zeros(len(energies))
    order = np.argsort(energies)
    sorted_e = energies[order]
    done = 0
    chunk = 1 << 20
    while done < n_samples:
        m = min(chunk, n_samples - done)
        ev = np.sort(dispersion(rng.random((m, d)) - 0.5))
        # count samples in the open window around each energy
        upper = np.searchsorted(ev, sorted_e + width / 2, side="left")
        lower = np.searchsorted(ev, sorted_e - width / 2, side="right")
        counts[order] += upper - lower
        done += m
    frac = counts / n_samples
    value = frac / width
    stderr = np.sqrt(frac * (1 - frac) / n_samples) / width
    return CurveEstimate(energies, value, stderr, n_samples)


# ---------------------------------------------------------------------------
# self-energy


class SelfEnergy(NamedTuple):
    alpha: float
    epsilon: float
    value: complex


def _time_window(epsilon, ds):
    # e^{-eps*S} < 1e-13 and energy spacing 2pi/S <= eps/4
    span = max(30.0 / epsilon, 8 * np.pi / epsilon)
    return 1 << int(np.ceil(np.log2(span / ds)))


@lru_cache(maxsize=32)
def _theta_table(epsilon, d, ds, n_time):
    s = np.arange(n_time) * ds
    g = np.exp(-epsilon * s - 1j * d * s) * special.j0(s) ** d
    # trapezoid on the half line: sum_n g_n e^{i s_n a}, endpoint weight 1/2
    g[0] *= 0.5
    spec = np.fft.ifft(g) * n_time
    alpha = np.fft.fftfreq(n_time, d=ds) * 2 * np.pi
    order = np.argsort(alpha)
    alpha, spec = alpha[order], spec[order]
    # Euler-Maclaurin endpoint correction h^2/12 F'(0)
    corr = ds**2 / 12 * (1j * alpha - epsilon - 1j * d)
    values = -1j * (ds * spec + corr)
    keep = (alpha > -6 * d - 20) & (alpha < 8 * d + 20)
    alpha, values = alpha[keep], values[keep]
    return alpha, CubicSpline(alpha, values.real), CubicSpline(alpha, values.imag)


def theta(alpha, epsilon, resolution=None, d=DEFAULT_DIM, ds=0.02):
    """Regularized self-energy ``Theta_eps(alpha) = int dq / (alpha - e(q) + i eps)``.

    The torus integral is evaluated through its exact time representation
    ``-i int_0^inf ds exp(i s alpha - eps s) (exp(-is) J0(s))^d``, summed by
    one FFT over a uniform ``s`` grid. ``resolution`` is the number of time
    nodes; by default it is chosen so the energy spacing is below ``eps/4``.

    Raises
    ------
    ResolutionTooCoarse
        If the supplied ``resolution`` gives an energy spacing above ``eps/4``
        or truncates the time integral before ``exp(-eps s)`` has decayed.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    needed = _time_window(epsilon, ds)
    n_time = needed if resolution is None else int(resolution)
    spacing = 2 * np.pi / (n_time * ds)
    if spacing > epsilon / 4 or np.exp(-epsilon * n_time * ds) > 1e-8:
        raise ResolutionTooCoarse(
            f"{n_time} time nodes give energy spacing {spacing:.3g} for eps={epsilon}"
        )
    grid, re, im = _theta_table(float(epsilon), int(d), float(ds), n_time)
    a = np.asarray(alpha, dtype=float)
    if np.any((a < grid[0]) | (a > grid[-1])):
        raise ValueError("alpha outside tabulated range")
    out = re(a) + 1j * im(a)
    return complex(out) if out.ndim == 0 else out


def renormalized_dispersion(p, lam, epsilon=1e-2, d=None):
    """``omega(p) = e(p) + lam^2 Theta_eps(e(p))``; imaginary part is non-positive."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    p = np.asarray(p, dtype=float)
    e = dispersion(p)
    if lam == 0:
        return e.astype(complex)
    d = p.shape[-1] if d is None else d
    return e + lam**2 * theta(e, epsilon, d=d)


def omega_of_energy(e, lam, epsilon=1e-2, d=DEFAULT_DIM):
    """Renormalized dispersion as a function of the bare energy."""
    e = np.asarray(e, dtype=float)
    if lam == 0:
        return e.astype(complex)
    return e + lam**2 * theta(e, epsilon, d=d)


# ---------------------------------------------------------------------------
# two-propagator integrals


def _midpoint_axis(grid):
    return (np.arange(grid) + 0.5) / grid - 0.5


def default_pair_grid(eta, lam=0.0):
    """Midpoint grid per axis resolving propagators of width ``eta + lam^2`` in energy."""
    return max(16, 2 * int(np.ceil(2 * np.pi / (eta + lam**2))))


def _pair_denominator_mean(alpha, beta, w, lam, eta, grid, sign, epsilon, d):
    """Grid mean of ``1 / (|alpha - conj omega(p) - i eta| |beta - omega(sign p + w) + i eta|)``."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    spacing = 2 * np.pi / grid
    if spacing > 2 * eta:
        raise ResolutionTooCoarse(
            f"grid {grid} has energy spacing {spacing:.3g} > 2*eta = {2 * eta:.3g}"
        )
    w = np.broadcast_to(np.asarray(w, dtype=float), (d,))
    axis = _midpoint_axis(grid)
    x = [1 - np.cos(2 * np.pi * axis) for _ in range(d)]
    y = [1 - np.cos(2 * np.pi * (sign * axis + w[i])) for i in range(d)]
    rest_x = x[1]
    rest_y = y[1]
    for i in range(2, d):
        rest_x = np.add.outer(rest_x, x[i])
        rest_y = np.add.outer(rest_y, y[i])
    total = 0.0
    for i0 in range(grid):
        e1 = x[0][i0] + rest_x
        e2 = y[0][i0] + rest_y
        w1 = omega_of_energy(e1, lam, epsilon, d)
        w2 = omega_of_energy(e2, lam, epsilon, d)
        total += np.sum(1.0 / (np.abs(alpha - np.conj(w1) - 1j * eta) * np.abs(beta - w2 + 1j * eta)))
    return total / grid**d


def ladder_integral(alpha, beta, w, lam, eta, grid=None, sign=1, epsilon=1e-2, d=DEFAULT_DIM):
    """``lam^2 int dp / (|alpha - conj omega(p) - i eta| |beta - omega(sign p + w) + i eta|)``."""
    if grid is None:
        grid = default_pair_grid(eta, lam)
    return lam**2 * _pair_denominator_mean(alpha, beta, w, lam, eta, grid, sign, epsilon, d)


def two_denominator_integral(alpha, beta, w, eta, grid=None, sign=1, lam=0.0,
                             epsilon=1e-2, d=DEFAULT_DIM):
    """Two-propagator integral without the ``lam^2`` prefactor.

    With ``lam = 0`` the propagators use the bare dispersion.
    """
    if grid is None:
        grid = default_pair_grid(eta, lam)
    return _pair_denominator_mean(alpha, beta, w, lam, eta, grid, sign, epsilon, d)
