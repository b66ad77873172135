import numpy as np
import pytest
from scipy import stats

from qlz import kinetic, quantum, spectral
from qlz.errors import CutoffTooShort, EmptyShell, GridMismatch, NotPSD

# dense-grid oracles (tests/oracles.py, 2048 points per axis, shell width 1e-2)
PHI_3 = 0.285753
SIN2_AVG_3 = 0.586169
D_3 = 0.326476


@pytest.fixture(scope="module")
def ensemble():
    rate = 2 * np.pi * PHI_3
    return kinetic.simulate_jump_process(3.0, 10 / rate, 20_000, seed=11, rate=rate)


def test_rate_symmetry():
    a = kinetic.jump_rate(np.array([0.2, 0.1, 0.05]), seed=1)
    v = np.array([0.2, 0.1, 0.05]) + 0.5
    b = kinetic.jump_rate(spectral.wrap_torus(v), seed=2)
    assert abs(a.value - b.value) <= 3 * np.hypot(a.stderr, b.stderr)


def test_rate_at_band_centre():
    v = np.array([0.25, 0.25, 0.25])
    est = kinetic.jump_rate(v, seed=3)
    assert abs(est.value - 2 * np.pi * PHI_3) <= 3 * est.stderr + 2 * np.pi * 1e-3


def test_jump_count_mean(ensemble):
    T = 4 / ensemble.rate
    counts = ensemble.jump_counts(T)
    assert abs(counts.mean() - ensemble.rate * T) <= 3 * counts.std(ddof=1) / np.sqrt(len(counts))


def test_waiting_times_are_exponential(ensemble):
    # gaps starting 8 mean waits before the horizon 10/rate are censored with probability e^-8
    start = ensemble.times[:, :-1]
    with np.errstate(invalid="ignore"):
        gaps = np.diff(ensemble.times, axis=1)
    keep = np.isfinite(start) & (start <= 2 / ensemble.rate)
    w = gaps[keep]
    assert np.mean(~np.isfinite(w)) < 1e-3
    w = w[np.isfinite(w)]
    assert len(w) >= 10_000
    assert stats.kstest(w * ensemble.rate, "expon").pvalue >= 0.01


def test_mean_displacement_vanishes(ensemble):
    X = ensemble.displacement(5 / ensemble.rate)
    se = X.std(axis=0, ddof=1) / np.sqrt(len(X))
    assert np.all(np.abs(X.mean(axis=0)) <= 3 * se)


def test_decorrelation_after_first_jump(ensemble):
    has_jump = np.isfinite(ensemble.times[:, 1])
    s0 = np.sin(2 * np.pi * ensemble.momenta[has_jump, 0, 0])
    s1 = np.sin(2 * np.pi * ensemble.momenta[has_jump, 1, 0])
    prod = s0 * s1
    assert abs(prod.mean()) <= 3 * prod.std(ddof=1) / np.sqrt(len(prod))
    has_two = np.isfinite(ensemble.times[:, 2])
    r = np.corrcoef(np.sin(2 * np.pi * ensemble.momenta[has_two, 1, 1]),
                    np.sin(2 * np.pi * ensemble.momenta[has_two, 2, 1]))[0, 1]
    assert abs(r) <= 3 / np.sqrt(has_two.sum())


def test_paths_stay_on_shell(ensemble):
    m = ensemble.momenta[np.isfinite(ensemble.times)]
    assert np.all(np.abs(spectral.dispersion(m) - 3.0) < ensemble.width / 2)


def test_empty_shell():
    with pytest.raises(EmptyShell):
        kinetic.simulate_jump_process(-1.0, 1.0, 10, seed=0)


def test_closed_form_structure_and_oracle():
    D = kinetic.diffusion_closed_form(3.0, seed=12)
    off = ~np.eye(3, dtype=bool)
    assert np.all(np.abs(D.entries[off]) <= 3 * D.stderr[off])
    diag, se = np.diag(D.entries), np.diag(D.stderr)
    for a in range(3):
        for b in range(a + 1, 3):
            assert abs(diag[a] - diag[b]) <= 3 * np.hypot(se[a], se[b])
    assert abs(D.scalar - D_3) <= 3 * D.scalar_stderr


def test_closed_form_ingredients_match_oracle():
    D = kinetic.diffusion_closed_form(3.0, seed=13)
    assert D.scalar * 2 * np.pi * PHI_3 == pytest.approx(SIN2_AVG_3, rel=0.02)


def test_autocorrelation_matches_closed_form():
    rate = 2 * np.pi * PHI_3
    cf = kinetic.diffusion_closed_form(3.0, seed=14)
    ac = kinetic.diffusion_autocorrelation(3.0, 8 / rate, 10_000, seed=15, rate=rate)
    assert abs(cf.scalar - ac.scalar) <= 3 * np.hypot(cf.scalar_stderr, ac.scalar_stderr)
    longer = kinetic.diffusion_autocorrelation(3.0, 16 / rate, 10_000, seed=16, rate=rate)
    assert abs(longer.scalar - ac.scalar) <= 3 * np.hypot(longer.scalar_stderr, ac.scalar_stderr)


def test_autocorrelation_symmetric_energies():
    a = kinetic.diffusion_autocorrelation(1.0, 3.0 * 8 / (2 * np.pi * 0.0967), 10_000, seed=17)
    b = kinetic.diffusion_autocorrelation(5.0, 3.0 * 8 / (2 * np.pi * 0.0967), 10_000, seed=18)
    assert abs(a.scalar - b.scalar) <= 3 * np.hypot(a.scalar_stderr, b.scalar_stderr)


def test_cutoff_guard():
    with pytest.raises(CutoffTooShort):
        kinetic.diffusion_autocorrelation(3.0, 0.5, 100, seed=0, rate=2 * np.pi * PHI_3)


def test_heat_kernel():
    D = np.diag([0.3, 0.2, 0.1])
    assert kinetic.heat_kernel(D, 2.0, xi=np.zeros(3)) == 1.0
    xi = np.array([0.3, -0.1, 0.7])
    np.testing.assert_allclose(kinetic.heat_kernel(D, 1.0, xi=xi) * kinetic.heat_kernel(D, 2.5, xi=xi),
                               kinetic.heat_kernel(D, 3.5, xi=xi), rtol=1e-12)
    # per-axis variance 2 D T from the curvature of the multiplier at xi = 0
    h = 1e-4
    f = [kinetic.heat_kernel(D, 2.0, xi=np.array([s * h, 0, 0])) for s in (-1, 0, 1)]
    var = -(f[0] - 2 * f[1] + f[2]) / h**2 / (2 * np.pi) ** 2
    assert var == pytest.approx(2 * 0.3 * 2.0, rel=1e-4)
    x = np.linspace(-8, 8, 801)
    dens = kinetic.heat_kernel(np.array([[0.3]]), 2.0, X=x[:, None])
    assert np.trapezoid(x**2 * dens, x) == pytest.approx(1.2, rel=1e-6)
    with pytest.raises(NotPSD):
        kinetic.heat_kernel(np.diag([1.0, -1.0, 1.0]), 1.0)


def test_msd_diffusive_limit():
    rate = 2 * np.pi * PHI_3
    rep = kinetic.msd_diffusive_check(3.0, np.linspace(5, 40, 8) / rate, 10_000, seed=3)
    assert rep.slope_relative_error <= 0.05
    assert rep.ks_pvalue >= 0.01
    assert [r.prediction for r in rep.rows] == pytest.approx([6 * rep.diffusion.scalar * r.T for r in rep.rows])


def test_msd_ballistic_before_first_collision():
    rate = 2 * np.pi * PHI_3
    T = 0.1 / rate
    rep = kinetic.msd_diffusive_check(3.0, [T / 2, T], 20_000, seed=19)
    assert rep.rows[-1].msd == pytest.approx(3 * SIN2_AVG_3 * T**2, rel=0.10)


@pytest.fixture(scope="module")
def packet32():
    lat = quantum.TorusLattice(32)
    return quantum.gaussian_packet(lat, (0.25, 0.25, 0.25), 2.0)


def test_comparison_at_time_zero_is_exact(packet32):
    q = kinetic.quantum_kinetic_run(packet32, 0.3, 0.0, 2, seed=1)
    b = kinetic.boltzmann_kinetic_run(packet32, 0.0, 5000, seed=2, scale=q.scale, pool_size=200_000)
    rep = kinetic.kinetic_comparison(q, b)
    assert rep["energy_tv"] == pytest.approx(0.0, abs=1e-12)
    assert rep["position_msd"] == pytest.approx(0.0, abs=1e-12)


def test_collisionless_limit_is_ballistic(packet32):
    q = kinetic.quantum_kinetic_run(packet32, 0.0, 4.0, 1, seed=1)
    b = kinetic.boltzmann_kinetic_run(packet32, 4.0, 40_000, seed=2, scale=q.scale, rate_scale=0.0,
                                      pool_size=200_000)
    rep = kinetic.kinetic_comparison(q, b)
    assert rep["energy_tv"] == pytest.approx(0.0, abs=1e-12)
    assert abs(q.position_msd - b.position_msd) <= 3 * b.position_msd_stderr
    assert rep["mean_velocity"] <= 0.02


def test_comparison_grid_mismatch(packet32):
    q = kinetic.quantum_kinetic_run(packet32, 0.3, 0.0, 1, seed=1)
    b = kinetic.boltzmann_kinetic_run(packet32, 0.0, 100, seed=2, scale=1.0, pool_size=100_000)
    with pytest.raises(GridMismatch):
        kinetic.kinetic_comparison(q, b)
