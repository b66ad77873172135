"""Linear Boltzmann momentum jump process and its diffusive limit.

On the shell ``e(v) = e`` the collision kernel is uniform, so the process
waits an exponential time with rate ``2 pi Phi(e)`` and then redraws its
momentum from the normalized shell measure, independently of the old one.
Positions move with velocity ``grad e / 2 pi = sin(2 pi v)`` between jumps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from . import spectral
from .errors import CutoffTooShort, EmptyShell, GridMismatch, NotPSD
from .spectral import Estimate, ShellSpec, default_width

PHI_SAMPLES = 4_000_000


def _seeds(seed, n):
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(n)


def jump_rate(v, width=None, n_samples=PHI_SAMPLES, seed=0, d=None) -> Estimate:
    """Total collision rate ``2 pi Phi(e(v))`` at momentum ``v``."""
    v = np.asarray(v, dtype=float)
    d = v.shape[-1] if d is None else d
    est = spectral.phi(float(spectral.dispersion(v)), width, n_samples, seed, d)
    return Estimate(2 * np.pi * est.value, 2 * np.pi * est.stderr, est.n)


@dataclass
class JumpPath:
    """One trajectory: jump epochs (``times[0] = 0``) and the momenta held after each."""

    times: np.ndarray
    momenta: np.ndarray
    energy: float
    width: float

    def position(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ends = np.append(self.times[1:], np.inf)
        dur = np.clip(np.minimum(ends[None, :], t[:, None]) - self.times[None, :], 0, None)
        return dur @ spectral.velocity(self.momenta)


class JumpEnsemble:
    """Padded ensemble of jump paths.

    ``times`` has shape ``(n_paths, m)`` with ``inf`` padding after the last
    epoch; ``momenta`` has shape ``(n_paths, m, d)``.
    """

    def __init__(self, times, momenta, energies, width, rate):
        self.times = times
        self.momenta = momenta
        self.energies = np.asarray(energies, dtype=float)
        self.width = width
        self.rate = rate

    def __len__(self):
        return self.times.shape[0]

    def __getitem__(self, i):
        keep = np.isfinite(self.times[i])
        e = self.energies[i] if self.energies.ndim else float(self.energies)
        return JumpPath(self.times[i][keep], self.momenta[i][keep], e, self.width)

    def _durations(self, T):
        ends = np.concatenate([self.times[:, 1:], np.full((len(self), 1), np.inf)], axis=1)
        return np.clip(np.minimum(ends, T) - self.times, 0, None)

    def displacement(self, T):
        """Displacement ``X(T) - X(0)`` for every path, shape ``(n_paths, d)``."""
        dur = self._durations(T)
        vel = np.nan_to_num(spectral.velocity(self.momenta))
        return np.einsum("nm,nmd->nd", dur, vel)

    def jump_counts(self, T):
        return np.sum((self.times[:, 1:] <= T), axis=1)

    def waiting_times(self):
        """Completed gaps between consecutive epochs (censored at the horizon)."""
        with np.errstate(invalid="ignore"):
            gaps = np.diff(self.times, axis=1)
        return gaps[np.isfinite(gaps)]

    def velocity_integral(self, T):
        """``int_0^T sin(2 pi v(t)) dt`` per path (same as the displacement)."""
        return self.displacement(T)

    def momentum_at(self, T):
        idx = np.sum(self.times <= T, axis=1) - 1
        return self.momenta[np.arange(len(self)), idx]


def _simulate(energies, v0, rates, T_end, rng, draw):
    """Shared engine: ``draw(energies, rng)`` returns one shell momentum per entry."""
    n, d = v0.shape
    times = [np.zeros(n)]
    momenta = [v0]
    now = np.zeros(n)
    alive = rates > 0
    while np.any(alive):
        idx = np.flatnonzero(alive)
        now_a = now[idx] + rng.exponential(1.0 / rates[idx])
        jumped = now_a <= T_end
        t_new = np.full(n, np.inf)
        m_new = np.full((n, d), np.nan)
        hit = idx[jumped]
        t_new[hit] = now_a[jumped]
        if len(hit):
            m_new[hit] = draw(energies[hit], rng)
        now[idx] = now_a
        alive = np.zeros(n, dtype=bool)
        alive[hit] = True
        times.append(t_new)
        momenta.append(m_new)
    return np.stack(times, axis=1), np.stack(momenta, axis=1)


def simulate_jump_process(e, T_end, n_paths, seed, width=None, d=3, rate=None,
                          initial=None) -> JumpEnsemble:
    """Simulate ``n_paths`` jump paths on the shell of energy ``e`` up to ``T_end``.

    Initial momenta default to draws from the stationary shell measure.
    ``rate`` defaults to ``2 pi Phi(e)`` from an independent thin-shell estimate.
    """
    width = default_width(d) if width is None else width
    s_phi, s_init, s_run = _seeds(seed, 3)
    if rate is None:
        rate = 2 * np.pi * spectral.phi(e, width, PHI_SAMPLES, s_phi, d).value
    if rate <= 0:
        raise EmptyShell(f"no density of states at e={e}")
    rng = np.random.default_rng(s_run)
    if initial is None:
        initial = spectral.sample_shell(e, n_paths, s_init, width, d)

    def draw(energies, rng):
        return spectral.sample_shell(e, len(energies), rng, width, d)

    times, momenta = _simulate(np.full(n_paths, e), np.asarray(initial, dtype=float),
                               np.full(n_paths, rate), T_end, rng, draw)
    return JumpEnsemble(times, momenta, e, width, rate)


# ---------------------------------------------------------------------------
# diffusion matrix


@dataclass
class DiffusionMatrix:
    entries: np.ndarray
    stderr: np.ndarray
    energy: float

    @property
    def scalar(self):
        """``D_e``: the mean of the diagonal."""
        return float(np.mean(np.diag(self.entries)))

    @property
    def scalar_stderr(self):
        d = len(self.entries)
        return float(np.sqrt(np.sum(np.diag(self.stderr) ** 2)) / d)


def _sin_products(v):
    s = np.sin(2 * np.pi * v)
    return s[:, :, None] * s[:, None, :]


def diffusion_closed_form(e, width=None, n_samples=200_000, seed=0, d=3,
                          phi_samples=PHI_SAMPLES) -> DiffusionMatrix:
    """``D_ij = <sin(2 pi v_i) sin(2 pi v_j)>_e / (2 pi Phi(e))`` from shell samples."""
    width = default_width(d) if width is None else width
    s_phi, s_shell = _seeds(seed, 2)
    ph = spectral.phi(e, width, phi_samples, s_phi, d)
    if ph.value <= 0:
        raise EmptyShell(f"no density of states at e={e}")
    v = spectral.sample_shell(e, n_samples, s_shell, width, d)
    prod = _sin_products(v)
    mean = prod.mean(axis=0)
    err = prod.std(axis=0, ddof=1) / np.sqrt(n_samples)
    rate = 2 * np.pi * ph.value
    D = mean / rate
    rel_phi = ph.stderr / ph.value
    D_err = np.sqrt((err / rate) ** 2 + (D * rel_phi) ** 2)
    return DiffusionMatrix(D, D_err, e)


def diffusion_autocorrelation(e, T_cut, n_paths, seed, width=None, d=3, rate=None) -> DiffusionMatrix:
    """Time integral of the velocity autocorrelation along simulated paths.

    Raises
    ------
    CutoffTooShort
        If ``T_cut`` is shorter than five mean waiting times.
    """
    width = default_width(d) if width is None else width
    s_phi, s_paths = _seeds(seed, 2)
    if rate is None:
        rate = 2 * np.pi * spectral.phi(e, width, PHI_SAMPLES, s_phi, d).value
    if rate <= 0:
        raise EmptyShell(f"no density of states at e={e}")
    if T_cut * rate < 5:
        raise CutoffTooShort(f"T_cut={T_cut} is below 5 mean waiting times ({5 / rate:.3g})")
    ens = simulate_jump_process(e, T_cut, n_paths, s_paths, width, d, rate=rate)
    integral = ens.velocity_integral(T_cut)
    s0 = np.sin(2 * np.pi * ens.momenta[:, 0])
    samples = integral[:, :, None] * s0[:, None, :]
    return DiffusionMatrix(samples.mean(axis=0),
                           samples.std(axis=0, ddof=1) / np.sqrt(n_paths), e)


# ---------------------------------------------------------------------------
# heat equation


@dataclass
class HeatSolution:
    """Fundamental solution of ``dT f = div(D grad f)`` started from a point mass."""

    diffusion: np.ndarray
    time: float

    def __post_init__(self):
        D = np.asarray(getattr(self.diffusion, "entries", self.diffusion), dtype=float)
        if self.time <= 0:
            raise ValueError("heat kernel needs T > 0")
        if not np.allclose(D, D.T) or np.min(np.linalg.eigvalsh(D)) < -1e-12:
            raise NotPSD("diffusion matrix must be symmetric positive semidefinite")
        self.diffusion = D

    @property
    def covariance(self):
        return 2 * self.diffusion * self.time

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        quad = np.einsum("...i,ij,...j->...", xi, self.diffusion, xi)
        return np.exp(-((2 * np.pi) ** 2) * self.time * quad)

    def density(self, X):
        return stats.multivariate_normal(np.zeros(len(self.diffusion)), self.covariance,
                                         allow_singular=True).pdf(X)


def heat_kernel(D, T, xi=None, X=None):
    """Fourier multiplier at ``xi`` or position density at ``X`` of the heat kernel."""
    sol = HeatSolution(D, T)
    if xi is not None:
        return sol.fourier(xi)
    if X is not None:
        return sol.density(X)
    return sol


class MSDRow(NamedTuple):
    T: float
    msd: float
    stderr: float
    prediction: float
    n: int


@dataclass
class MSDReport:
    rows: list
    slope: float
    slope_stderr: float
    predicted_slope: float
    ks_statistic: float
    ks_pvalue: float
    diffusion: DiffusionMatrix

    @property
    def slope_relative_error(self):
        return abs(self.slope / self.predicted_slope - 1)


def msd_diffusive_check(e, T_list, n_paths, seed, width=None, d=3, diffusion=None) -> MSDReport:
    """Mean-square displacement of the jump process against ``2 tr(D) T``.

    The slope is the path average of per-path least-squares slopes, so its
    standard error accounts for correlations along each path. The KS test
    compares the first coordinate at the largest time with the exact
    variance ``2 D (T - (1 - exp(-r T)) / r)``.
    """
    T_list = np.asarray(sorted(T_list), dtype=float)
    s_diff, s_paths = _seeds(seed, 2)
    if diffusion is None:
        diffusion = diffusion_closed_form(e, width, seed=s_diff, d=d)
    ens = simulate_jump_process(e, T_list[-1], n_paths, s_paths, width, d)
    sq = np.stack([np.sum(ens.displacement(T) ** 2, axis=1) for T in T_list], axis=1)
    trD = float(np.trace(diffusion.entries))
    rows = [MSDRow(float(T), float(sq[:, i].mean()), float(sq[:, i].std(ddof=1) / np.sqrt(n_paths)),
                   2 * trD * float(T), n_paths) for i, T in enumerate(T_list)]
    Tc = T_list - T_list.mean()
    per_path = (sq - sq.mean(axis=1, keepdims=True)) @ Tc / np.sum(Tc**2)
    slope = float(per_path.mean())
    slope_err = float(per_path.std(ddof=1) / np.sqrt(n_paths))
    T = T_list[-1]
    r = ens.rate
    var = 2 * diffusion.scalar * (T - (1 - np.exp(-r * T)) / r)
    x = ens.displacement(T)[:, 0]
    ks = stats.kstest(x / np.sqrt(var), "norm")
    return MSDReport(rows, slope, slope_err, 2 * trD, float(ks.statistic), float(ks.pvalue), diffusion)


# ---------------------------------------------------------------------------
# kinetic-scale comparison with the quantum evolution


class ShellPool:
    """Sorted pool of uniform torus momenta for drawing from many thin shells."""

    def __init__(self, size, seed, width=None, d=3):
        self.d = d
        self.width = default_width(d) if width is None else width
        rng = np.random.default_rng(seed)
        v = rng.random((size, d)) - 0.5
        e = spectral.dispersion(v)
        order = np.argsort(e)
        self.v, self.e = v[order], e[order]
        self.size = size

    def _bounds(self, energies):
        lo = np.searchsorted(self.e, energies - self.width / 2, side="right")
        hi = np.searchsorted(self.e, energies + self.width / 2, side="left")
        return lo, hi

    def phi(self, energies):
        lo, hi = self._bounds(np.asarray(energies, dtype=float))
        return (hi - lo) / self.size / self.width

    def draw(self, energies, rng):
        lo, hi = self._bounds(np.asarray(energies, dtype=float))
        if np.any(hi <= lo):
            raise EmptyShell("shell pool has no point at a requested energy")
        return self.v[lo + (rng.random(len(lo)) * (hi - lo)).astype(int)]


@dataclass
class QuantumRun:
    """Disorder-averaged data of a quantum ensemble at kinetic time ``T``."""

    momentum_weights: np.ndarray   # mean |psi_hat_t(p)|^2 / N on the lattice momentum grid
    momentum_weights_stderr: np.ndarray
    position_msd: float            # mean of sum_x |eps x|^2 |psi_t(x)|^2
    position_msd_stderr: float
    side: int
    dimension: int
    scale: float
    T: float
    n_samples: int


@dataclass
class BoltzmannRun:
    """Jump-process ensemble prepared from the same initial momentum distribution."""

    initial_weights: np.ndarray
    energies: np.ndarray           # conserved energy label per path
    final_momenta: np.ndarray
    position_msd: float
    position_msd_stderr: float
    side: int
    dimension: int
    scale: float
    T: float


def energy_histogram(weights, energies, bins=20, d=3):
    """Normalized histogram of ``energies`` with ``weights`` on 20 bins over the band."""
    h, _ = np.histogram(np.ravel(energies), bins=bins, range=(0, 2 * d), weights=np.ravel(weights))
    return h / h.sum()


def boltzmann_kinetic_run(psi0, T, n_paths, seed, scale=1.0, rate_scale=1.0,
                          width=None, pool_size=4_000_000) -> BoltzmannRun:
    """Jump-process ensemble started from ``|psi0_hat|^2`` and ``|psi0(x)|^2``.

    Time is kinetic time, so path displacements are already macroscopic;
    ``scale`` converts the initial lattice positions to macroscopic ones.
    ``rate_scale = 0`` switches collisions off (then the paths are ballistic).  Each path keeps the energy label of its initial
    momentum and jumps on that shell.
    """
    a = psi0.amplitudes
    d, L = a.ndim, a.shape[0]
    s_pool, s_init, s_run = _seeds(seed, 3)
    w0 = np.abs(np.fft.fftn(a)) ** 2
    w0 = w0 / w0.sum()
    k = np.fft.fftfreq(L)
    grid = np.stack(np.meshgrid(*([k] * d), indexing="ij"), axis=-1).reshape(-1, d)
    rng = np.random.default_rng(s_init)
    idx = rng.choice(len(grid), size=n_paths, p=w0.ravel())
    v0 = grid[idx]
    energies = spectral.dispersion(v0)
    pool = ShellPool(pool_size, s_pool, width, d)
    rates = 2 * np.pi * pool.phi(energies) * rate_scale
    times, momenta = _simulate(energies, v0, rates, T, np.random.default_rng(s_run), pool.draw)
    ens = JumpEnsemble(times, momenta, energies, pool.width, rates)
    disp = ens.displacement(T)
    x = np.stack(np.meshgrid(*([np.fft.fftfreq(L) * L] * d), indexing="ij"), axis=-1)
    dens = np.abs(a) ** 2 / np.sum(np.abs(a) ** 2)
    x2 = float(np.sum(np.sum(x**2, axis=-1) * dens)) * scale**2
    xm = np.tensordot(dens, x, axes=dens.ndim) * scale
    # X(0) ~ |psi0|^2 independent of the flight: E|X0 + D|^2 = E|X0|^2 + 2 <X0>.E D + E|D|^2
    sq = x2 + 2 * disp @ xm + np.sum(disp**2, axis=1)
    return BoltzmannRun(w0, energies, ens.momentum_at(T), float(sq.mean()),
                        float(sq.std(ddof=1) / np.sqrt(n_paths)), L, d, scale, T)


def _quantum_sample(args):
    from .quantum import TorusLattice, evolve, sample_disorder

    psi0, lam, t, dt, seed, scale = args
    lattice = TorusLattice(psi0.amplitudes.shape[0], psi0.amplitudes.ndim)
    V = sample_disorder(lattice, "gaussian", seed)
    psi = evolve(psi0, V, lam, t, dt)
    w = np.abs(np.fft.fftn(psi.amplitudes)) ** 2 / lattice.sites
    x = lattice.positions()
    msd = float(np.sum(np.sum(x**2, axis=-1) * np.abs(psi.amplitudes) ** 2)) * scale**2
    return w, msd


def quantum_kinetic_run(psi0, lam, T, n_samples, seed, dt=0.0625, threads=1) -> QuantumRun:
    """Disorder-averaged quantum data at kinetic time ``T = lam^2 t``.

    The momentum weights are the momentum marginal of the Wigner field,
    ``sum_x W(x, v) = |psi_hat(v)|^2``, read off directly from ``psi_hat``.
    With ``lam = 0`` the microscopic time ``t = T`` and unit scale are used.
    """
    scale = lam**2 if lam > 0 else 1.0
    t = T / scale
    seeds = [int(s.generate_state(1)[0]) for s in _seeds(seed, n_samples)]
    jobs = [(psi0, lam, t, dt, s, scale) for s in seeds]
    if threads > 1 and n_samples > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(threads) as ex:
            results = list(ex.map(_quantum_sample, jobs))
    else:
        results = [_quantum_sample(j) for j in jobs]
    W = np.stack([r[0] for r in results])
    m = np.array([r[1] for r in results])
    n = len(results)
    se = W.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(W[0])
    mse = float(m.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    a = psi0.amplitudes
    return QuantumRun(W.mean(axis=0), se, float(m.mean()), mse, a.shape[0], a.ndim, scale, T, n)


def kinetic_comparison(quantum: QuantumRun, boltzmann: BoltzmannRun, observables=None, bins=20):
    """Relative discrepancies between quantum and jump-process observables.

    ``energy_tv``: total-variation distance of the energy histograms.
    ``position_msd``: relative difference of the mean-square position.
    ``mean_velocity``: difference of the mean velocity along the initial
    mean velocity, relative to its initial magnitude.

    Raises
    ------
    GridMismatch
        If the runs were prepared on different lattices or scales.
    """
    if (quantum.side, quantum.dimension) != (boltzmann.side, boltzmann.dimension) \
            or not np.isclose(quantum.scale, boltzmann.scale) \
            or not np.isclose(quantum.T, boltzmann.T):
        raise GridMismatch("quantum and Boltzmann runs use different grids or scales")
    observables = observables or ("energy_tv", "position_msd", "mean_velocity")
    L, d = quantum.side, quantum.dimension
    k = np.fft.fftfreq(L)
    grid = np.stack(np.meshgrid(*([k] * d), indexing="ij"), axis=-1)
    e_grid = spectral.dispersion(grid)
    report = {}
    if "energy_tv" in observables:
        hq = energy_histogram(quantum.momentum_weights, e_grid, bins, d)
        # energy is conserved by the jump process: its histogram is the initial one
        hb = energy_histogram(boltzmann.initial_weights, e_grid, bins, d)
        report["energy_tv"] = float(0.5 * np.abs(hq - hb).sum())
    if "position_msd" in observables:
        ref = boltzmann.position_msd
        report["position_msd"] = float(abs(quantum.position_msd - ref) / ref) if ref > 0 else 0.0
    if "mean_velocity" in observables:
        u = spectral.velocity(grid)
        u0 = np.tensordot(boltzmann.initial_weights, u, axes=boltzmann.initial_weights.ndim)
        norm0 = np.linalg.norm(u0)
        if norm0 > 0:
            direction = u0 / norm0
            wq = quantum.momentum_weights / quantum.momentum_weights.sum()
            uq = np.tensordot(wq, u, axes=wq.ndim) @ direction
            ub = float(np.mean(spectral.velocity(boltzmann.final_momenta) @ direction))
            report["mean_velocity"] = float(abs(uq - ub) / norm0)
            report["mean_velocity_quantum"] = float(uq / norm0)
            report["mean_velocity_boltzmann"] = float(ub / norm0)
    return report
