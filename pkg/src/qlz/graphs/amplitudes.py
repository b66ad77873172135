"""Graph amplitudes, the contour identity, and a disorder-average oracle.

The value of the graph of a pairing ``sigma`` is

    V(k, sigma) = lam^2k e^{2 t eta} / (2 pi)^2  int dp |psi0_hat(p_1)|^2
                  M_eta(p, M(sigma) p),

where ``M_eta`` is a product of an ``alpha`` and a ``beta`` resolvent
integral. Each of these is a time-simplex integral in disguise (the
contour identity), so

    V(k, sigma) = lam^2k  int dp |psi0_hat(p_1)|^2 conj S(omega(p)) S(omega(M p))

with ``S`` from :mod:`qlz.simplex`; in particular the value does not depend
on ``eta``. The momentum integral over ``(k+1)`` copies of the torus is done
by Monte Carlo with ``p_1`` drawn from ``|psi0_hat|^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import roots_laguerre

from .. import quantum, spectral
from ..errors import KTooLarge, QuadratureDivergence, ResolutionTooCoarse
from ..simplex import simplex_integral, simplex_quadrature
from .permutations import _as_perm, build_M, permutations

MAX_AMPLITUDE_K = 3
MAX_CONTOUR_K = 4
MAX_BOUND_K = 2
MAX_ORACLE_K = 2


# ---------------------------------------------------------------------------
# contour identity


def _resolvent_product(alpha, omegas, eta):
    out = np.ones(np.shape(alpha), dtype=complex)
    for w in omegas:
        out = out / (alpha - w + 1j * eta)
    return out


def _central_integral(omegas, t, eta, A, limit):
    """``int_{-A}^{A} e^{-i alpha t} prod 1/(alpha - w + i eta)`` on panels split near the poles."""
    pts = {-A, A}
    for w in omegas:
        for off in (0.0, 1.0, -1.0, 5.0, -5.0):
            x = w.real + off * (eta + abs(w.imag))
            if -A < x < A:
                pts.add(x)
    pts = sorted(pts)
    value, err = 0j, 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-14:
            continue
        for part, sign in ((np.real, 1.0), (np.imag, 1j)):
            f = lambda x, part=part: part(_resolvent_product(x, omegas, eta))
            c, ec = integrate.quad(f, a, b, weight="cos", wvar=t, limit=limit)
            s, es = integrate.quad(f, a, b, weight="sin", wvar=t, limit=limit)
            # e^{-i x t} = cos - i sin
            value += sign * (c - 1j * s)
            err += ec + es
    return value, err


def _leg_integral(omegas, t, eta, x0, n):
    """``int_0^inf f(x0 - i y) dy`` with ``f = e^{-i alpha t} prod(...)``, by Gauss-Laguerre in ``u = y t``."""
    u, w = roots_laguerre(n)
    y = u / t
    g = _resolvent_product(x0 - 1j * y, omegas, eta)
    return np.exp(-1j * x0 * t) * np.sum(w * g) / t


def contour_identity_check(k, omegas, t, eta=None, nodes=None, tol=1e-6, limit=400):
    """Both sides of the simplex/resolvent identity.

    Returns ``(lhs, rhs)`` where ``lhs`` is the time-simplex integral
    ``int prod_j exp(-i s_j omega_j)`` (iterated Chebyshev quadrature) and ``rhs`` is
    ``(i^(k+1) e^{eta t} / 2 pi) int dalpha e^{-i alpha t} prod_j 1/(alpha - omega_j + i eta)``.
    Closing the contour below gives ``-2 pi i e^{-eta t}`` times the divided
    difference of ``e^{-izt}``, while the simplex integral is ``i^k`` times
    that divided difference; hence the ``i^(k+1)`` prefactor. A bare ``i``
    would be off by the phase ``i^k``, which cancels in every amplitude
    since those pair each resolvent integral with a conjugate.

    The real-line integral is split into ``[-A, A]`` (adaptive Fourier
    quadrature) and two tails closed into the lower half plane.

    Raises
    ------
    QuadratureDivergence
        If the estimated error of the right side exceeds ``tol`` relative.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=complex))
    if len(omegas) != k + 1:
        raise ValueError(f"need k+1 = {k + 1} frequencies, got {len(omegas)}")
    if k > MAX_CONTOUR_K:
        raise KTooLarge(f"contour identity checked for k <= {MAX_CONTOUR_K}")
    if np.any(omegas.imag > 0):
        raise ValueError("frequencies must have non-positive imaginary part")
    eta = 1.0 / t if eta is None else eta
    if eta <= 0:
        raise ValueError("eta must be positive")
    lhs = simplex_quadrature(omegas, t, nodes=nodes)

    A = float(np.max(np.abs(omegas.real))) + 10.0
    central, err = _central_integral(omegas, t, eta, A, limit)
    right = -1j * _leg_integral(omegas, t, eta, A, 80)
    left = 1j * _leg_integral(omegas, t, eta, -A, 80)
    err += abs(right + 1j * _leg_integral(omegas, t, eta, A, 40))
    err += abs(left - 1j * _leg_integral(omegas, t, eta, -A, 40))
    pref = 1j ** (k + 1) * np.exp(eta * t) / (2 * np.pi)
    rhs = pref * (central + right + left)
    err *= abs(pref)
    if err > tol * max(abs(rhs), 1e-300):
        raise QuadratureDivergence(f"alpha-integral error {err:.3g} exceeds tolerance for |rhs|={abs(rhs):.3g}")
    return complex(lhs), complex(rhs)


# ---------------------------------------------------------------------------
# initial states in momentum space


@dataclass(frozen=True)
class MomentumPacket:
    """Wrapped Gaussian ``|psi0_hat|^2`` on the torus, normalized to total mass ``norm2``."""

    center: tuple = (0.25, 0.25, 0.25)
    width: float = 0.02
    norm2: float = 1.0

    @property
    def dimension(self):
        return len(self.center)

    def sample(self, n, rng):
        p = np.asarray(self.center) + self.width * rng.standard_normal((n, self.dimension))
        return spectral.wrap_torus(p), np.full(n, self.norm2)


@dataclass(frozen=True)
class LatticeState:
    """``|psi0_hat|^2`` of a finite-torus wavefunction, sampled on its momentum grid."""

    psi: quantum.WaveFunction

    @property
    def dimension(self):
        return self.psi.amplitudes.ndim

    def sample(self, n, rng):
        w = np.abs(self.psi.fourier().ravel()) ** 2
        mass = w.mean()
        idx = rng.choice(len(w), size=n, p=w / w.sum())
        p = self.psi.lattice.momenta().reshape(-1, self.dimension)[idx]
        return p, np.full(n, mass)


def _as_state(psi0, d):
    if psi0 is None:
        return MomentumPacket(center=(0.25,) * d)
    if isinstance(psi0, quantum.WaveFunction):
        return LatticeState(psi0)
    return psi0


# ---------------------------------------------------------------------------
# amplitudes


@dataclass(frozen=True)
class AmplitudeEstimate:
    value: complex
    eta: float
    lam: float
    t: float
    grid: dict
    error: float

    def __abs__(self):
        return abs(self.value)


def _momentum_draw(state, k, n, rng):
    """``(n, k+1, d)`` momenta with ``p_1`` from the state and the rest uniform."""
    p1, mass = state.sample(n, rng)
    rest = rng.random((n, k, state.dimension))
    return np.concatenate([p1[:, None, :], rest], axis=1), mass


def _omega(p, lam, epsilon):
    return spectral.omega_of_energy(spectral.dispersion(p), lam, epsilon, d=p.shape[-1])


def amplitude(k, sigma, lam, t, eta=None, grid=None, psi0=None, seed=0,
              epsilon=1e-2, chunk=50_000) -> AmplitudeEstimate:
    """Monte Carlo value of the graph amplitude ``V_eta(k, sigma)``.

    ``grid`` is ``{"n_samples": N}``; the reported ``error`` is the standard
    error of the sample mean and shrinks as ``N^-1/2``. The ``alpha`` and
    ``beta`` integrals are done in closed form through the contour identity,
    with the renormalized dispersion at regularization ``epsilon``.

    Raises
    ------
    KTooLarge
        If ``k > 3``.
    ResolutionTooCoarse
        If fewer than 100 samples are requested.
    """
    g = _as_perm(sigma) if k > 0 else None
    if k > MAX_AMPLITUDE_K:
        raise KTooLarge(f"amplitude supports k <= {MAX_AMPLITUDE_K}, got {k}")
    if g is not None and g.k != k:
        raise ValueError("sigma does not match k")
    eta = 1.0 / t if eta is None else eta
    if eta < 1.0 / t - 1e-12:
        raise ValueError("need eta >= 1/t")
    grid = {"n_samples": 200_000} if grid is None else dict(grid)
    n = int(grid["n_samples"])
    if n < 100:
        raise ResolutionTooCoarse("amplitude needs at least 100 momentum samples")
    state = _as_state(psi0, 3)
    M = build_M(g) if k > 0 else np.eye(1, dtype=int)
    rng = np.random.default_rng(seed)
    vals = []
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        p, mass = _momentum_draw(state, k, m, rng)
        pt = spectral.wrap_torus(np.einsum("ij,njd->nid", M, p))
        s = simplex_integral(_omega(p, lam, epsilon), t)
        st = s if g is None or g.is_identity else simplex_integral(_omega(pt, lam, epsilon), t)
        vals.append(mass * np.conj(s) * st)
    vals = lam ** (2 * k) * np.concatenate(vals)
    err = float(np.sqrt((np.var(vals.real) + np.var(vals.imag)) / (n - 1))) if n > 1 else np.inf
    return AmplitudeEstimate(complex(vals.mean()), eta, lam, t, grid, err)


# ---------------------------------------------------------------------------
# absolute-value bound


def _abs_resolvent_integral(omegas, eta, d, h):
    """Midpoint rule for ``int_{-4d}^{4d} dalpha prod_j 1/|alpha - omega_j + i eta|`` per row."""
    n = int(np.ceil(8 * d / h))
    a = -4 * d + (np.arange(n) + 0.5) * (8 * d / n)
    out = np.ones((omegas.shape[0], n))
    for j in range(omegas.shape[1]):
        out /= np.abs(a[None, :] - omegas[:, j, None] + 1j * eta)
    return out.sum(axis=1) * (8 * d / n)


def e_eta_bound(k, sigma, lam, eta, grid=None, psi0=None, seed=0, epsilon=1e-2,
                chunk=4000, weighted=True) -> spectral.Estimate:
    """Small-``k`` value of ``E_eta(M(sigma))``.

    The ``alpha`` and ``beta`` integrals over ``[-4d, 4d]`` use a midpoint
    rule with step ``eta/6`` (the integrand is analytic in a strip of width
    ``eta``). The momentum integral is Monte Carlo. With ``weighted`` the
    ``p_1`` integral carries ``|psi0_hat(p_1)|^2``, which makes the result
    directly comparable with :func:`amplitude`; otherwise ``p_1`` is uniform.
    """
    g = _as_perm(sigma)
    if k > MAX_BOUND_K:
        raise KTooLarge(f"e_eta_bound supports k <= {MAX_BOUND_K}, got {k}")
    grid = {"n_samples": 20_000} if grid is None else dict(grid)
    n = int(grid["n_samples"])
    state = _as_state(psi0, 3)
    d = state.dimension
    M = build_M(g)
    rng = np.random.default_rng(seed)
    h = eta / 6
    vals = []
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        if weighted:
            p, mass = _momentum_draw(state, k, m, rng)
        else:
            p, mass = rng.random((m, k + 1, d)), np.ones(m)
        pt = spectral.wrap_torus(np.einsum("ij,njd->nid", M, p))
        # |alpha - conj(w) - i eta| = |alpha - w + i eta| for real alpha
        a = _abs_resolvent_integral(_omega(p, lam, epsilon), eta, d, h)
        b = _abs_resolvent_integral(_omega(pt, lam, epsilon), eta, d, h)
        vals.append(mass * a * b)
    vals = lam ** (2 * k) * np.concatenate(vals)
    return spectral.Estimate(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n)), n)


# ---------------------------------------------------------------------------
# finite-torus oracle


@dataclass
class GraphSumReport:
    k: int
    lam: float
    t: float
    side: int
    disorder_mean: float
    disorder_stderr: float
    graph_value: float
    per_permutation: dict = field(default_factory=dict)
    same_site: float = 0.0
    n_samples: int = 0

    @property
    def z_score(self):
        return (self.disorder_mean - self.graph_value) / self.disorder_stderr

    @property
    def agrees(self):
        return abs(self.z_score) <= 3.0


def _energy_levels(lattice):
    e = lattice.kinetic_symbol().ravel()
    levels, index = np.unique(np.round(e, 10), return_inverse=True)
    return levels, index


def _simplex_table(levels, k, t):
    mesh = np.meshgrid(*([levels] * (k + 1)), indexing="ij")
    nodes = np.stack(mesh, axis=-1).astype(complex)
    return simplex_integral(nodes, t)


def torus_pairing_sum(k, sigma, t, psi0: quantum.WaveFunction, lam=1.0):
    """Exact finite-torus value of one pairing; see :func:`torus_pairing_sum_direct`.

    The identity pairing reduces to ``sum |S|^2``. For the transposition in
    ``P_2`` the middle momentum of the second history is ``p_1 - p_2 + p_3``,
    so the ``p_2`` sum is a lattice convolution done by FFT for each pair of
    energy levels of ``(p_1, p_3)``.
    """
    g = _as_perm(sigma)
    if g.k != k:
        raise ValueError("sigma does not match k")
    lattice = psi0.lattice
    N = lattice.sites
    levels, lev = _energy_levels(lattice)
    table = _simplex_table(levels, k, t)
    weight = np.abs(psi0.fourier().ravel()) ** 2
    if g.is_identity:
        sq = np.abs(table) ** 2
        # sum over p_2.. p_{k+1} through level multiplicities
        mult = np.bincount(lev, minlength=len(levels)).astype(float)
        for _ in range(k):
            sq = sq @ mult
        # sq is now indexed by the level of p_1
        total = np.sum(weight * sq[lev])
    elif g.sigma == (2, 1):
        shape = lattice.shape
        axes = tuple(range(lattice.dimension))
        lev_grid = lev.reshape(shape)
        used1 = np.unique(lev[weight > 0])
        total = 0.0
        for l1 in used1:
            w1 = np.where(lev == l1, weight, 0.0).reshape(shape)
            for l3 in range(len(levels)):
                a = table[l1, lev_grid, l3]
                conv = np.fft.ifftn(np.fft.fftn(np.conj(a)) * np.fft.fftn(a), axes=axes)
                # c(q) = sum_p2 conj a(p2) a(q - p2); pair with p_1 + p_3 = q
                mask3 = (lev_grid == l3).astype(float)
                corr = np.fft.ifftn(np.fft.fftn(w1) * np.fft.fftn(mask3), axes=axes)
                total += np.sum(corr.real * conv)
    else:
        return torus_pairing_sum_direct(k, g, t, psi0, lam)
    return float(np.real(total)) * lam ** (2 * k) / N ** (k + 1)


def torus_pairing_sum_direct(k, sigma, t, psi0: quantum.WaveFunction, lam=1.0):
    """Exact ``lam^2k N^-(k+1) sum_p |psi0_hat(p_1)|^2 conj S(e(p)) S(e(M p))`` on the torus grid."""
    g = _as_perm(sigma)
    lattice = psi0.lattice
    L, d, N = lattice.side, lattice.dimension, lattice.sites
    levels, lev = _energy_levels(lattice)
    table = _simplex_table(levels, k, t)
    weight = np.abs(psi0.fourier().ravel()) ** 2
    coords = np.stack(np.unravel_index(np.arange(N), lattice.shape), axis=-1)
    M = build_M(g)

    # remaining momenta p_2..p_{k+1} over the full grid; only the p_1 shift varies in the loop
    rest = np.stack(np.meshgrid(*([np.arange(N)] * k), indexing="ij"), axis=-1).reshape(-1, k)
    base = np.einsum("ij,rjd->rid", M[:, 1:], coords[rest])          # (R, k+1, d)
    rest_levels = tuple(lev[rest].T)
    strides = np.array([L ** (d - 1 - a) for a in range(d)])
    total = 0j
    for n1 in np.nonzero(weight > 0)[0]:
        nt = (base + M[:, :1] * coords[n1]) % L
        st = table[tuple((lev[nt @ strides]).T)]
        s = table[(lev[n1],) + rest_levels]
        total += weight[n1] * np.sum(np.conj(s) * st)
    return float(np.real(total)) * lam ** (2 * k) / N ** (k + 1)


def same_site_sum(t, psi0: quantum.WaveFunction, lam=1.0):
    """Second-order Wick term pairing the two collisions of the same history."""
    lattice = psi0.lattice
    N = lattice.sites
    levels, lev = _energy_levels(lattice)
    table = _simplex_table(levels, 2, t)
    weight = np.abs(psi0.fourier().ravel()) ** 2
    inner = table[lev[:, None], lev[None, :], lev[:, None]].mean(axis=1)
    return float(lam**4 * np.mean(weight * np.abs(inner) ** 2))


def graph_sum_vs_disorder(k, lam, t, L=8, n_samples=400, seed=0, psi0=None, nodes=24):
    """Disorder Monte Carlo of ``E ||psi_k(t)||^2`` against the exact pairing sum.

    Gaussian disorder makes Wick's theorem exact, so the average is the sum
    over ``sigma in P_k`` of the torus pairing sums plus, at ``k = 2``, the
    term pairing two collisions of the same history.
    """
    if k not in (1, 2):
        raise KTooLarge(f"graph_sum_vs_disorder supports k in {{1, 2}}, got {k}")
    if L > 8:
        raise ValueError("the exact oracle is limited to L <= 8")
    lattice = quantum.TorusLattice(L)
    if psi0 is None:
        psi0 = quantum.gaussian_packet(lattice, (0.25, 0.125, 0.0), 1.5)
    seqs = np.random.SeedSequence(seed).spawn(n_samples)
    norms = np.empty(n_samples)
    for i, ss in enumerate(seqs):
        v = quantum.sample_disorder(lattice, "gaussian", int(ss.generate_state(1)[0]))
        psi_k = quantum.duhamel_term(k, t, v, lam, psi0, nodes=nodes)
        norms[i] = np.sum(np.abs(psi_k.amplitudes) ** 2)
    per = {g.sigma: torus_pairing_sum(k, g, t, psi0, lam) for g in permutations(k)}
    same = same_site_sum(t, psi0, lam) if k == 2 else 0.0
    return GraphSumReport(k, lam, t, L, float(norms.mean()), float(norms.std(ddof=1) / np.sqrt(n_samples)),
                          sum(per.values()) + same, per, same, n_samples)
