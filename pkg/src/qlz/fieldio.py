"""Flat binary and CSV serialization of wavefunctions and Wigner fields.

Binary layout, all little-endian::

    offset  size  content
    0       8     magic b"QLZFIELD"
    8       4     uint32 format version (1)
    12      4     uint32 kind: 0 wavefunction (complex128), 1 Wigner (float64),
                  2 real array (float64)
    16      4     uint32 ndim of the payload array
    20      4     uint32 lattice dimension d
    24      4     uint32 torus side L
    28      8     float64 scale (epsilon; 1.0 when unscaled)
    36      8*n   uint64 shape, one entry per payload axis
    ...           payload, row-major (C order)

Complex payloads store interleaved real and imaginary parts.
"""
from __future__ import annotations

import csv
import itertools
import struct

import numpy as np

from .quantum import WaveFunction
from .wigner import WignerField

MAGIC = b"QLZFIELD"
VERSION = 1
KIND_WAVEFUNCTION, KIND_WIGNER, KIND_ARRAY = 0, 1, 2
_HEADER = struct.Struct("<8sIIIIId")
_DTYPES = {KIND_WAVEFUNCTION: "<c16", KIND_WIGNER: "<f8", KIND_ARRAY: "<f8"}
CSV_MAX_ENTRIES = 1 << 16


def _describe(obj):
    if isinstance(obj, WaveFunction):
        a = obj.amplitudes
        return KIND_WAVEFUNCTION, a, a.ndim, a.shape[0], 1.0
    if isinstance(obj, WignerField):
        return KIND_WIGNER, obj.values, obj.dimension, obj.side, obj.scale
    a = np.asarray(obj, dtype=float)
    return KIND_ARRAY, a, a.ndim, a.shape[0] if a.ndim else 0, 1.0


def write_field(path, obj):
    """Write a :class:`WaveFunction`, :class:`WignerField` or real array."""
    kind, arr, d, L, scale = _describe(obj)
    arr = np.ascontiguousarray(arr, dtype=_DTYPES[kind])
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, kind, arr.ndim, d, L, float(scale)))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.tobytes(order="C"))


def read_field(path):
    with open(path, "rb") as fh:
        magic, version, kind, ndim, d, L, scale = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != MAGIC:
            raise ValueError(f"{path} is not a qlz field file")
        if version != VERSION:
            raise ValueError(f"unsupported field format version {version}")
        shape = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        arr = np.frombuffer(fh.read(), dtype=_DTYPES[kind]).reshape(shape).copy()
    if kind == KIND_WAVEFUNCTION:
        return WaveFunction(arr)
    if kind == KIND_WIGNER:
        return WignerField(arr, L, d, scale)
    return arr


def write_field_csv(path, obj):
    """One row per grid point: integer indices, then value columns.

    Wavefunctions get ``re, im``; Wigner fields and arrays get ``value``.
    """
    kind, arr, *_ = _describe(obj)
    if arr.size > CSV_MAX_ENTRIES:
        raise ValueError(f"{arr.size} entries is too many for CSV; use write_field")
    names = [f"i{a}" for a in range(arr.ndim)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + (["re", "im"] if kind == KIND_WAVEFUNCTION else ["value"]))
        for idx in itertools.product(*map(range, arr.shape)):
            v = arr[idx]
            w.writerow(list(idx) + ([repr(float(v.real)), repr(float(v.imag))] if kind == KIND_WAVEFUNCTION else [repr(float(v))]))
