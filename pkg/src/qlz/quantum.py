"""Anderson-model Schrödinger evolution on a finite torus.

Wavefunctions are complex arrays of shape ``(L,)*d`` indexed by lattice
site.  The Fourier convention is ``psi_hat(p) = sum_x exp(-2 pi i p.x) psi(x)``
on the momentum grid ``p = n / L`` (``numpy.fft`` ordering), and momentum
integrals are normalized means over that grid.  The kinetic symbol of the
Hamiltonian is the lattice dispersion ``e(p)`` itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from . import spectral
from .errors import OrderTooHigh, StepTooLarge

MAX_DUHAMEL_ORDER = 3


@dataclass(frozen=True)
class TorusLattice:
    side: int
    dimension: int = 3

    def __post_init__(self):
        if self.side < 8 or self.side % 2:
            raise ValueError(f"torus side must be even and >= 8, got {self.side}")

    @property
    def shape(self):
        return (self.side,) * self.dimension

    @property
    def sites(self):
        return self.side**self.dimension

    def momenta(self):
        """Momentum grid, shape ``(L,)*d + (d,)`` in fft ordering."""
        k = np.fft.fftfreq(self.side)
        return np.stack(np.meshgrid(*([k] * self.dimension), indexing="ij"), axis=-1)

    def positions(self):
        """Minimal-image site coordinates in ``[-L/2, L/2)``, shape ``(L,)*d + (d,)``."""
        x = np.fft.fftfreq(self.side) * self.side
        return np.stack(np.meshgrid(*([x] * self.dimension), indexing="ij"), axis=-1)

    def kinetic_symbol(self):
        return spectral.dispersion(self.momenta())


@dataclass
class DisorderSample:
    values: np.ndarray
    distribution: str
    seed: int


@dataclass
class WaveFunction:
    amplitudes: np.ndarray
    norm: float = field(default=None)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.norm is None:
            self.norm = float(np.linalg.norm(self.amplitudes))

    @property
    def lattice(self):
        a = self.amplitudes
        return TorusLattice(a.shape[0], a.ndim)

    def fourier(self):
        return np.fft.fftn(self.amplitudes)


def sample_disorder(lattice: TorusLattice, distribution="gaussian", seed=0) -> DisorderSample:
    """I.i.d. on-site potential with mean 0 and variance 1."""
    rng = np.random.default_rng(seed)
    if distribution == "gaussian":
        v = rng.standard_normal(lattice.shape)
    elif distribution == "rademacher":
        v = rng.choice(np.array([-1.0, 1.0]), size=lattice.shape)
    else:
        raise ValueError(f"unknown disorder distribution {distribution!r}")
    return DisorderSample(v, distribution, seed)


def gaussian_packet(lattice: TorusLattice, p0, width, center=None) -> WaveFunction:
    """Normalized Gaussian packet with carrier momentum ``p0`` and position spread ``width``."""
    x = lattice.positions()
    if center is not None:
        x = (x - np.asarray(center) + lattice.side / 2) % lattice.side - lattice.side / 2
    phase = np.exp(2j * np.pi * x @ np.asarray(p0, dtype=float))
    env = np.exp(-np.sum(x**2, axis=-1) / (4 * width**2))
    psi = phase * env
    return WaveFunction(psi / np.linalg.norm(psi))


def plane_wave(lattice: TorusLattice, n) -> WaveFunction:
    """Normalized Fourier mode with momentum ``n / L``."""
    x = lattice.positions()
    p = np.asarray(n, dtype=float) / lattice.side
    psi = np.exp(2j * np.pi * x @ p)
    return WaveFunction(psi / np.sqrt(lattice.sites))


def _fft_axes(d):
    return tuple(range(-d, 0))


def evolve(psi0: WaveFunction, disorder, lam, t, dt) -> WaveFunction:
    """Strang split-step propagation of ``i d/dt psi = (e(p) + lam V) psi``.

    Potential half-steps bracket exact kinetic steps in momentum space. The
    final time is reached with ``ceil(t / dt)`` equal steps.

    Raises
    ------
    StepTooLarge
        If ``dt * (2d + lam * max|V|) > 0.5``.
    """
    if dt <= 0 or t < 0:
        raise ValueError("need dt > 0 and t >= 0")
    psi = psi0.amplitudes
    d = psi.ndim
    v = np.zeros(psi.shape) if disorder is None else np.asarray(getattr(disorder, "values", disorder))
    if dt * (2 * d + lam * np.max(np.abs(v))) > 0.5:
        raise StepTooLarge(f"dt={dt} exceeds the accuracy guard")
    n = int(np.ceil(t / dt - 1e-9)) if t > 0 else 0
    if n == 0:
        return WaveFunction(psi.copy())
    h = t / n
    kin = np.exp(-1j * h * TorusLattice(psi.shape[0], d).kinetic_symbol())
    half = np.exp(-0.5j * h * lam * v)
    full = half * half
    axes = _fft_axes(d)
    psi = half * psi
    for step in range(n):
        psi = np.fft.ifftn(kin * np.fft.fftn(psi, axes=axes), axes=axes)
        psi = (full if step < n - 1 else half) * psi
    return WaveFunction(psi)


class _DuhamelTerms:
    """Batched evaluation of the k-th Duhamel term at arrays of times."""

    def __init__(self, psi0, disorder, lam, nodes, renormalized, epsilon, max_batch=4096):
        self.psi0_hat = np.fft.fftn(psi0.amplitudes)
        self.d = psi0.amplitudes.ndim
        self.axes = _fft_axes(self.d)
        lattice = TorusLattice(psi0.amplitudes.shape[0], self.d)
        e = lattice.kinetic_symbol()
        v = np.asarray(getattr(disorder, "values", disorder), dtype=float)
        self.lv = lam * v
        if renormalized:
            th = spectral.theta(e, epsilon, d=self.d)
            self.symbol = e + lam**2 * th
            self.counter = -(lam**2) * th
        else:
            self.symbol = e.astype(complex)
            self.counter = None
        x, w = roots_legendre(nodes)
        self.gx = 0.5 * (x + 1)
        self.gw = 0.5 * w
        self.max_batch = max(max_batch // nodes, 1)

    def _propagate_hat(self, tau, f_hat):
        return np.exp(-1j * tau.reshape((-1,) + (1,) * self.d) * self.symbol) * f_hat

    def _perturb_hat(self, f_hat):
        g = np.fft.fftn(self.lv * np.fft.ifftn(f_hat, axes=self.axes), axes=self.axes)
        if self.counter is not None:
            g = g + self.counter * f_hat
        return g

    def term_hat(self, k, s):
        s = np.asarray(s, dtype=float).ravel()
        if k == 0:
            return self._propagate_hat(s, self.psi0_hat[None])
        out = np.empty((len(s),) + self.psi0_hat.shape, dtype=complex)
        for start in range(0, len(s), self.max_batch):
            sc = s[start:start + self.max_batch]
            u = sc[:, None] * self.gx[None, :]
            inner = self.term_hat(k - 1, u.ravel())
            inner = self._perturb_hat(inner)
            inner = self._propagate_hat((sc[:, None] - u).ravel(), inner)
            inner = inner.reshape((len(sc), len(self.gx)) + self.psi0_hat.shape)
            wts = (sc[:, None] * self.gw[None, :]).reshape((len(sc), len(self.gx)) + (1,) * self.d)
            out[start:start + len(sc)] = -1j * np.sum(wts * inner, axis=1)
        return out


def duhamel_term(k, t, disorder, lam, psi0: WaveFunction, nodes=24,
                 renormalized=False, epsilon=1e-2) -> WaveFunction:
    """Fully expanded k-th Duhamel term by nested Gauss-Legendre quadrature.

    ``psi_k(t) = (-i)^k int_simplex e^{-i s_{k+1} H0} W ... W e^{-i s_1 H0} psi0``
    with ``H0 = e(p)`` and ``W = lam V``.  With ``renormalized`` the free
    part is ``omega(p)`` and ``W = lam V - lam^2 theta(p)``.
    """
    if k > MAX_DUHAMEL_ORDER:
        raise OrderTooHigh(f"duhamel_term supports k <= {MAX_DUHAMEL_ORDER}, got {k}")
    if k < 0:
        raise ValueError("k must be non-negative")
    terms = _DuhamelTerms(psi0, disorder, lam, nodes, renormalized, epsilon)
    hat = terms.term_hat(k, [t])[0]
    return WaveFunction(np.fft.ifftn(hat))


def duhamel_sum(kmax, t, disorder, lam, psi0, nodes=24):
    """``sum_{k <= kmax} psi_k(t)``."""
    total = np.zeros_like(psi0.amplitudes)
    for k in range(kmax + 1):
        total = total + duhamel_term(k, t, disorder, lam, psi0, nodes).amplitudes
    return WaveFunction(total)


def position_second_moment(psi: WaveFunction):
    """``sum_x |x|^2 |psi(x)|^2`` with minimal-image coordinates."""
    x = psi.lattice.positions()
    return float(np.sum(np.sum(x**2, axis=-1) * np.abs(psi.amplitudes) ** 2))
