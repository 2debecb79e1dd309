import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from solidangle.lattice import GramMatrix

FCC_ROWS = [[2, 1, 1], [1, 2, 1], [1, 1, 2]]
BCC_ROWS = [[4, 0, 2], [0, 4, 2], [2, 2, 3]]
ID_ROWS = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
# WR, minimal vectors exactly +-e_i, solid angle of its normalized basis ~0.1471
WIDE_ROWS = [[100, 1, 1], [1, 100, -30], [1, -30, 100]]


@pytest.fixture
def fcc():
    return GramMatrix.from_rows(FCC_ROWS)


@pytest.fixture
def bcc():
    return GramMatrix.from_rows(BCC_ROWS)


@pytest.fixture
def ident():
    return GramMatrix.from_rows(ID_ROWS)


def brute_vectors(gram: GramMatrix, box: int):
    """(coeffs, norm^2) for every nonzero coefficient vector with |a_i| <= box."""
    out = []
    for a in product(range(-box, box + 1), repeat=3):
        if any(a):
            out.append((a, gram.norm_sq(a)))
    return out


def _rank(vectors) -> int:
    return int(np.linalg.matrix_rank(np.array(vectors, dtype=float)))


def brute_minima_sq(gram: GramMatrix, box: int):
    """Squared successive minima by greedy selection over a coefficient box."""
    vecs = sorted(brute_vectors(gram, box), key=lambda t: t[1])
    chosen, norms = [], []
    for a, n in vecs:
        if _rank(chosen + [a]) > len(chosen):
            chosen.append(a)
            norms.append(n)
            if len(chosen) == 3:
                break
    return norms


def ambient_minima_sq(basis_rows):
    """Squared successive minima of an integer lattice from points of Z^3.

    Lattice membership of y is decided by an exact solve, so no bound on
    the coefficients of the given basis is needed: every lattice vector of
    norm^2 <= R lies in the ambient cube |y_i| <= sqrt(R).
    """
    b = [[Fraction(x) for x in row] for row in basis_rows]
    m = np.array(basis_rows, dtype=float)
    inv = np.linalg.inv(m)
    radius = max(sum(x * x for x in row) for row in basis_rows)
    r = math.isqrt(int(radius))
    pts = []
    for y in product(range(-r, r + 1), repeat=3):
        n = sum(t * t for t in y)
        if n == 0 or n > radius:
            continue
        a = np.array(y, dtype=float) @ inv
        ai = np.rint(a).astype(int)
        if not np.allclose(a, ai, atol=1e-6):
            continue
        if all(sum(ai[k] * b[k][j] for k in range(3)) == y[j] for j in range(3)):
            pts.append((tuple(int(t) for t in ai), n))
    pts.sort(key=lambda t: t[1])
    chosen, norms = [], []
    for a, n in pts:
        if _rank(chosen + [a]) > len(chosen):
            chosen.append(a)
            norms.append(n)
            if len(chosen) == 3:
                break
    return norms


def random_unimodular(rng, lo=-3, hi=3):
    while True:
        m = rng.integers(lo, hi + 1, size=(3, 3))
        if round(abs(np.linalg.det(m))) == 1:
            return [[int(x) for x in row] for row in m]


def random_spd_gram(rng, cond_max=50.0):
    while True:
        b = rng.standard_normal((3, 3))
        g = b @ b.T
        if np.linalg.cond(g) < cond_max:
            return GramMatrix.from_rows(g.tolist(), exact=False)
