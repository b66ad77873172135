import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from qlz import fieldio, quantum, wigner


def test_wavefunction_round_trip(tmp_path):
    psi = quantum.gaussian_packet(quantum.TorusLattice(8), (0.1, 0.2, 0.3), 1.5)
    path = tmp_path / "psi.qlzf"
    fieldio.write_field(path, psi)
    back = fieldio.read_field(path)
    assert isinstance(back, quantum.WaveFunction)
    np.testing.assert_array_equal(back.amplitudes, psi.amplitudes)


def test_wigner_round_trip_keeps_scale(tmp_path):
    psi = quantum.gaussian_packet(quantum.TorusLattice(8), (0.1, 0.2, 0.3), 1.5)
    W = wigner.rescaled_wigner(psi, 0.09)
    path = tmp_path / "w.qlzf"
    fieldio.write_field(path, W)
    back = fieldio.read_field(path)
    assert (back.side, back.dimension, back.scale) == (8, 3, 0.09)
    np.testing.assert_array_equal(back.values, W.values)


def test_header_layout(tmp_path):
    a = np.arange(6, dtype=float).reshape(2, 3)
    path = tmp_path / "a.qlzf"
    fieldio.write_field(path, a)
    raw = path.read_bytes()
    assert raw[:8] == b"QLZFIELD"
    version, kind, ndim, d, L = struct.unpack("<5I", raw[8:28])
    assert (version, kind, ndim, d, L) == (1, 2, 2, 2, 2)
    assert struct.unpack("<d", raw[28:36])[0] == 1.0
    assert struct.unpack("<2Q", raw[36:52]) == (2, 3)
    np.testing.assert_array_equal(np.frombuffer(raw[52:], "<f8"), np.arange(6.0))


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.qlzf"
    path.write_bytes(b"NOTAFILE" + bytes(40))
    with pytest.raises(ValueError):
        fieldio.read_field(path)


def test_csv_export(tmp_path):
    psi = quantum.plane_wave(quantum.TorusLattice(8), (1, 0, 0))
    path = tmp_path / "psi.csv"
    fieldio.write_field_csv(path, psi)
    lines = path.read_text().splitlines()
    assert lines[0] == "i0,i1,i2,re,im" and len(lines) == 1 + 512
    i0, i1, i2, re, im = lines[2].split(",")
    assert complex(float(re), float(im)) == pytest.approx(psi.amplitudes[int(i0), int(i1), int(i2)])
    with pytest.raises(ValueError):
        fieldio.write_field_csv(tmp_path / "big.csv", np.zeros(fieldio.CSV_MAX_ENTRIES + 1))


@settings(max_examples=30, deadline=None)
@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=1, max_dims=4, max_side=5),
                  elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_array_round_trip_property(tmp_path_factory, arr):
    path = tmp_path_factory.mktemp("f") / "x.qlzf"
    fieldio.write_field(path, arr)
    np.testing.assert_array_equal(fieldio.read_field(path), arr)
