"""Property-based checks of structural invariants."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qlz import graphs, spectral

coords = st.floats(-0.5, 0.5, exclude_max=True)
points = st.tuples(coords, coords, coords).map(np.array)


@given(points)
def test_dispersion_band_and_symmetries(p):
    e = spectral.dispersion(p)
    assert -1e-12 <= e <= 6 + 1e-12
    assert abs(spectral.dispersion(-p) - e) < 1e-12
    assert abs(spectral.dispersion(spectral.wrap_torus(p + 0.5)) - (6 - e)) < 1e-12


@given(points)
def test_velocity_is_scaled_gradient(p):
    np.testing.assert_allclose(spectral.velocity(p), spectral.dispersion_gradient(p) / (2 * np.pi), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(lambda k: st.permutations(list(range(1, k + 1)))))
def test_M_matrix_properties(sigma):
    g = graphs.GraphPermutation(tuple(sigma))
    M = graphs.build_M(g)
    assert set(np.unique(M)) <= {-1, 0, 1}
    assert abs(graphs.integer_determinant(M)) == 1
    assert graphs.is_totally_unimodular(M)
    c = graphs.classify(g)
    assert (c.degree == 0) == g.is_identity
    assert len(c.valleys) == len(c.peaks) + 1


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6).flatmap(lambda k: st.permutations(list(range(1, k + 1)))),
       st.lists(st.integers(-1000, 1000), min_size=7, max_size=7))
def test_momentum_residuals_vanish(sigma, p):
    g = graphs.GraphPermutation(tuple(sigma))
    assert np.all(graphs.momentum_residuals(g, np.array(p[: g.k + 1])) == 0)
