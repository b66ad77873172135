"""The eight primary acceptance criteria, one test each.

Each test prints the criterion's pass/fail line. Criterion 5 (the L = 64
kinetic-scale comparison with 200 disorder samples) takes about ten minutes
on one core; deselect it with ``-m "not slow"``.
"""
import importlib
import os

import pytest

acc = importlib.import_module("qlz.harness.acceptance")

CRITERIA = [
    acc.criterion_spectral,
    acc.criterion_diffusion,
    acc.criterion_msd,
    acc.criterion_quantum,
    pytest.param(acc.criterion_kinetic, marks=pytest.mark.slow),
    acc.criterion_combinatorics,
    acc.criterion_amplitudes,
    acc.criterion_singular,
]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion, capsys):
    if criterion is acc.criterion_kinetic:
        result = criterion(threads=int(os.environ.get("QLZ_THREADS", "1")))
    else:
        result = criterion()
    with capsys.disabled():
        print(f"\n{result.line()} {result.details}")
    assert result.passed, result.details
