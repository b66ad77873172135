"""Permutations of paired collision vertices and their momentum matrices.

A pairing of the ``k`` collisions of the two histories is a permutation
``sigma`` of ``{1..k}``, stored as the 1-based tuple ``(sigma(1), ..., sigma(k))``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import KTooLarge, SizeTooLargeForExhaustive

EXHAUSTIVE_TU_LIMIT = 7
MAX_CENSUS_K = 8


@dataclass(frozen=True)
class GraphPermutation:
    sigma: tuple

    def __post_init__(self):
        s = tuple(int(x) for x in self.sigma)
        if sorted(s) != list(range(1, len(s) + 1)):
            raise ValueError(f"{self.sigma} is not a permutation of 1..{len(s)}")
        object.__setattr__(self, "sigma", s)

    @property
    def k(self):
        return len(self.sigma)

    @property
    def sigma_tilde(self):
        """Extension to ``{0..k+1}`` fixing both endpoints."""
        return (0,) + self.sigma + (self.k + 1,)

    def inverse_tilde(self):
        st = self.sigma_tilde
        inv = [0] * len(st)
        for j, i in enumerate(st):
            inv[i] = j
        return tuple(inv)

    @property
    def is_identity(self):
        return self.sigma == tuple(range(1, self.k + 1))


def _as_perm(sigma):
    return sigma if isinstance(sigma, GraphPermutation) else GraphPermutation(tuple(sigma))


def permutations(k):
    """All of ``P_k`` in lexicographic order."""
    for s in itertools.permutations(range(1, k + 1)):
        yield GraphPermutation(s)


def build_M(sigma):
    """Momentum matrix: row ``i`` gives ``p~_i = sum_j M_ij p_j``.

    ``M_ij = 1`` if ``s(j-1) < i <= s(j)``, ``-1`` if ``s(j) < i <= s(j-1)``,
    else 0, where ``s`` is the extended permutation.
    """
    g = _as_perm(sigma)
    st = g.sigma_tilde
    n = g.k + 1
    M = np.zeros((n, n), dtype=int)
    for j in range(1, n + 1):
        lo, hi = st[j - 1], st[j]
        if lo < hi:
            M[lo:hi, j - 1] = 1
        else:
            M[hi:lo, j - 1] = -1
    return M


def integer_determinant(M):
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    A = [[int(x) for x in row] for row in np.asarray(M)]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for c in range(n - 1):
        if A[c][c] == 0:
            swap = next((r for r in range(c + 1, n) if A[r][c] != 0), None)
            if swap is None:
                return 0
            A[c], A[swap] = A[swap], A[c]
            sign = -sign
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                A[r][j] = (A[r][j] * A[c][c] - A[r][c] * A[c][j]) // prev
        prev = A[c][c]
    return sign * A[-1][-1]


def is_invertible(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("square matrix required")
    return integer_determinant(M) != 0


def _subdeterminants(M, size):
    """All ``size x size`` minors, rounded from batched LU (exact for small entries)."""
    n, m = M.shape
    rows = list(itertools.combinations(range(n), size))
    cols = list(itertools.combinations(range(m), size))
    R = np.array(rows)[:, None, :, None]
    C = np.array(cols)[None, :, None, :]
    sub = M[R, C].astype(float)
    det = np.linalg.det(sub.reshape(-1, size, size))
    rounded = np.rint(det)
    if np.max(np.abs(det - rounded), initial=0.0) > 1e-6:
        raise ArithmeticError("minor not integral to working precision")
    return rounded.astype(int)


def is_totally_unimodular(M, exhaustive=None, n_samples=100_000, seed=0):
    """Whether every square subdeterminant of ``M`` lies in ``{-1, 0, 1}``.

    Matrices up to size 7 are checked exhaustively. Larger ones are checked
    on ``n_samples`` random square submatrices unless ``exhaustive=True``,
    which raises :class:`SizeTooLargeForExhaustive`.
    """
    M = np.asarray(M)
    if np.any(np.abs(M) > 1):
        return False
    size = max(M.shape)
    if exhaustive is None:
        exhaustive = size <= EXHAUSTIVE_TU_LIMIT
    elif exhaustive and size > EXHAUSTIVE_TU_LIMIT:
        raise SizeTooLargeForExhaustive(
            f"{M.shape} exceeds the exhaustive limit {EXHAUSTIVE_TU_LIMIT}; use sampling"
        )
    if exhaustive:
        for s in range(2, min(M.shape) + 1):
            if np.any(np.abs(_subdeterminants(M, s)) > 1):
                return False
        return True
    rng = np.random.default_rng(seed)
    n, m = M.shape
    for _ in range(n_samples):
        s = int(rng.integers(2, min(n, m) + 1))
        r = np.sort(rng.choice(n, s, replace=False))
        c = np.sort(rng.choice(m, s, replace=False))
        if abs(integer_determinant(M[np.ix_(r, c)])) > 1:
            return False
    return True


@dataclass(frozen=True)
class VertexClassification:
    peaks: frozenset
    valleys: frozenset
    slopes: frozenset
    ladder_indices: frozenset
    degree: int


def classify(sigma) -> VertexClassification:
    """Peaks, valleys, slopes and ladder indices of ``sigma``; index sets are values in ``1..k+1``."""
    g = _as_perm(sigma)
    st = g.sigma_tilde
    k = g.k
    peaks, valleys, slopes = set(), set(), set()
    for j in range(1, k + 1):
        here = st[j]
        if st[j - 1] > here < st[j + 1]:
            peaks.add(here)
        elif st[j - 1] < here > st[j + 1]:
            valleys.add(here)
        else:
            slopes.add(here)
    valleys.add(k + 1)
    inv = g.inverse_tilde()
    ladder = {i for i in valleys | slopes if abs(inv[i] - inv[i - 1]) == 1}
    return VertexClassification(frozenset(peaks), frozenset(valleys), frozenset(slopes),
                                frozenset(ladder), k + 1 - len(ladder))


def degree(sigma):
    return classify(sigma).degree


def degree_census(k):
    """Exact number of permutations in ``P_k`` with each degree."""
    if k > MAX_CENSUS_K:
        raise KTooLarge(f"degree_census enumerates k <= {MAX_CENSUS_K}, got {k}")
    counts = {}
    for g in permutations(k):
        dg = classify(g).degree
        counts[dg] = counts.get(dg, 0) + 1
    return dict(sorted(counts.items()))


def census_envelope(censuses):
    """Smallest ``C`` with ``count_d <= (C k)^d`` over the supplied ``{k: census}`` data."""
    best = 0.0
    for k, census in censuses.items():
        for dg, count in census.items():
            if dg > 0:
                best = max(best, count ** (1.0 / dg) / k)
    return best


def momentum_residuals(sigma, p):
    """Residuals of the pairing constraints with ``p~ = M p``; zero for exact integer input.

    ``p`` has shape ``(k+1, ...)``. Returns the ``k`` differences
    ``(p_{i+1} - p_i) - (p~_{s(i)+1} - p~_{s(i)})`` and ``p~_{k+1} - p_{k+1}``.
    """
    g = _as_perm(sigma)
    p = np.asarray(p)
    pt = np.tensordot(build_M(g), p, axes=(1, 0))
    res = [(p[i + 1] - p[i]) - (pt[g.sigma[i]] - pt[g.sigma[i] - 1]) for i in range(g.k)]
    res.append(pt[g.k] - p[g.k])
    return np.stack(res)


def format_matrix(M):
    """Plain integer-grid text, one row per line."""
    M = np.asarray(M, dtype=int)
    width = max(len(str(x)) for x in M.ravel())
    return "\n".join(" ".join(str(x).rjust(width) for x in row) for row in M) + "\n"


def parse_matrix(text):
    return np.array([[int(x) for x in line.split()] for line in text.strip().splitlines()], dtype=int)
