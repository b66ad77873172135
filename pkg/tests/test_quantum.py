import numpy as np
import pytest

import oracles
from qlz import quantum, spectral
from qlz.errors import OrderTooHigh, StepTooLarge


@pytest.fixture(scope="module")
def small():
    lat = quantum.TorusLattice(8)
    psi0 = quantum.gaussian_packet(lat, (0.2, 0.1, 0.0), 1.5)
    V = quantum.sample_disorder(lat, "gaussian", seed=3)
    return lat, psi0, V


def test_lattice_validation():
    with pytest.raises(ValueError):
        quantum.TorusLattice(7)
    lat = quantum.TorusLattice(8)
    assert lat.shape == (8, 8, 8) and lat.sites == 512


def test_disorder_support_moments_and_determinism():
    lat = quantum.TorusLattice(32)
    r = quantum.sample_disorder(lat, "rademacher", seed=1).values
    assert set(np.unique(r)) == {-1.0, 1.0}
    g = quantum.sample_disorder(lat, "gaussian", seed=2).values
    m3 = g**3
    assert abs(m3.mean()) <= 5 * m3.std() / np.sqrt(m3.size)
    np.testing.assert_array_equal(g, quantum.sample_disorder(lat, "gaussian", seed=2).values)
    with pytest.raises(ValueError):
        quantum.sample_disorder(lat, "cauchy")


def test_free_eigenstate_phase():
    lat = quantum.TorusLattice(16)
    n = (3, 5, 1)
    pw = quantum.plane_wave(lat, n)
    e = spectral.dispersion(np.asarray(n) / lat.side)
    out = quantum.evolve(pw, None, 0.0, 3.7, 0.05)
    assert np.max(np.abs(out.amplitudes - np.exp(-1j * e * 3.7) * pw.amplitudes)) <= 1e-8


def test_unitarity(small):
    _, psi0, V = small
    out = quantum.evolve(psi0, V, 0.7, 5.0, 0.05)
    assert abs(np.linalg.norm(out.amplitudes) - np.linalg.norm(psi0.amplitudes)) <= 1e-10


def test_step_guard(small):
    _, psi0, V = small
    with pytest.raises(StepTooLarge):
        quantum.evolve(psi0, V, 1.0, 1.0, 0.2)


def test_evolve_matches_dense_exponential_at_second_order(small):
    _, psi0, V = small
    exact = oracles.full_evolution(psi0.amplitudes, V.values, 0.3, 1.2)
    errs = [np.linalg.norm(quantum.evolve(psi0, V, 0.3, 1.2, dt).amplitudes - exact) for dt in (0.04, 0.02)]
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


def test_evolve_vs_first_order_expansion():
    lat = quantum.TorusLattice(16)
    psi0 = quantum.gaussian_packet(lat, (0.2, 0.1, 0.0), 2.0)
    V = quantum.sample_disorder(lat, "gaussian", seed=2)
    lam, t = 0.1, 0.5
    ev = quantum.evolve(psi0, V, lam, t, 0.005)
    du = quantum.duhamel_sum(1, t, V, lam, psi0)
    assert np.linalg.norm(ev.amplitudes - du.amplitudes) <= (lam * t) ** 2


@pytest.mark.parametrize("k", [0, 1, 2])
def test_duhamel_terms_match_block_exponential(small, k):
    _, psi0, V = small
    ref = oracles.duhamel_blocks(psi0.amplitudes, V.values, 0.3, 1.2, 2)[k]
    got = quantum.duhamel_term(k, 1.2, V, 0.3, psi0).amplitudes
    assert np.linalg.norm(got - ref) <= 1e-12


def test_duhamel_zeroth_term_is_free_evolution(small):
    lat, psi0, V = small
    got = quantum.duhamel_term(0, 2.3, V, 0.3, psi0).amplitudes
    ref = np.fft.ifftn(np.exp(-2.3j * lat.kinetic_symbol()) * np.fft.fftn(psi0.amplitudes))
    np.testing.assert_allclose(got, ref, atol=1e-14)


def test_duhamel_homogeneity(small):
    _, psi0, V = small
    a = quantum.duhamel_term(2, 1.0, V, 0.2, psi0).amplitudes
    b = quantum.duhamel_term(2, 1.0, V, 0.4, psi0).amplitudes
    np.testing.assert_allclose(b, 4 * a, rtol=1e-12, atol=1e-16)


def test_duhamel_order_guard(small):
    _, psi0, V = small
    with pytest.raises(OrderTooHigh):
        quantum.duhamel_term(4, 1.0, V, 0.1, psi0)


def test_second_order_expansion_vs_evolve(small):
    _, psi0, V = small
    lam, t = 0.05, 1.0
    diff = np.linalg.norm(quantum.duhamel_sum(2, t, V, lam, psi0).amplitudes
                          - quantum.evolve(psi0, V, lam, t, 0.005).amplitudes)
    assert diff <= (lam * t) ** 3


def test_renormalized_terms_sum_to_same_evolution(small):
    # with omega in the free part and the counterterm in W the full series is unchanged
    _, psi0, V = small
    lam, t = 0.05, 1.0
    ren = sum(quantum.duhamel_term(k, t, V, lam, psi0, renormalized=True).amplitudes for k in range(3))
    exact = oracles.full_evolution(psi0.amplitudes, V.values, lam, t)
    assert np.linalg.norm(ren - exact) <= (lam * t) ** 3


def test_position_second_moment_of_point_mass():
    lat = quantum.TorusLattice(8)
    a = np.zeros(lat.shape, complex)
    a[1, -2, 0] = 1
    assert quantum.position_second_moment(quantum.WaveFunction(a)) == 5.0
