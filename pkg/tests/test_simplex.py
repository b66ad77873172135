import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

import oracles
from qlz import simplex


def test_single_node_is_free_phase():
    assert simplex.simplex_integral([2.3], 1.7) == pytest.approx(np.exp(-1j * 2.3 * 1.7), abs=1e-15)


def test_two_nodes_against_scipy_quad():
    w1, w2, t = 0.7, 2.9, 3.0
    f = lambda s: np.exp(-1j * s * w1 - 1j * (t - s) * w2)
    re = integrate.quad(lambda s: f(s).real, 0, t, epsabs=1e-13)[0]
    im = integrate.quad(lambda s: f(s).imag, 0, t, epsabs=1e-13)[0]
    assert simplex.simplex_integral([w1, w2], t) == pytest.approx(re + 1j * im, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_closed_form_matches_recursive_divided_difference(n):
    rng = np.random.default_rng(n)
    x = np.sort(rng.uniform(0, 6, n)) + np.arange(n) * 0.5 - 0.1j * rng.random(n)
    t = 4.0
    ref = 1j ** (n - 1) * oracles.divided_difference_exp(x, t)
    assert simplex.simplex_integral(x, t) == pytest.approx(ref, rel=1e-9)


def test_confluent_limit():
    a, t = 1.3, 2.5
    # the divided difference at a double node is the derivative
    assert simplex.divided_difference_exp([a, a], t) == pytest.approx(-1j * t * np.exp(-1j * a * t), rel=1e-12)
    # the full simplex volume t^(n-1)/(n-1)! at w = 0
    assert simplex.simplex_integral([0.0] * 4, t) == pytest.approx(t**3 / 6, rel=1e-12)
    near = simplex.simplex_integral([a, a + 1e-7, a - 1e-7], t)
    assert near == pytest.approx(simplex.simplex_integral([a, a, a], t), rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-6, 6), min_size=2, max_size=5), st.floats(0.1, 20), st.randoms(use_true_random=False))
def test_quadrature_agrees_with_closed_form(nodes, t, rnd):
    shuffled = list(nodes)
    rnd.shuffle(shuffled)
    a = simplex.simplex_integral(nodes, t)
    assert simplex.simplex_integral(shuffled, t) == pytest.approx(a, abs=1e-10)
    b = simplex.simplex_quadrature(nodes, t)
    scale = t ** (len(nodes) - 1) / np.prod(np.arange(1, len(nodes)))
    assert abs(a - b) <= 1e-9 * max(scale, 1.0)


def test_quadrature_with_complex_nodes():
    x = np.array([1.0 - 0.05j, 2.5 - 0.1j, 3.7 - 0.02j])
    assert simplex.simplex_quadrature(x, 10.0) == pytest.approx(simplex.simplex_integral(x, 10.0), rel=1e-10)
