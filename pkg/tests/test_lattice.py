import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BCC_ROWS, FCC_ROWS, ambient_minima_sq, brute_minima_sq, brute_vectors, random_spd_gram, random_unimodular
from solidangle.errors import InputFormatError, SingularBasis
from solidangle.lattice import (
    BasisMatrix,
    GramMatrix,
    enumerate_short_vectors,
    gram_from_basis,
    is_well_rounded,
    minimal_vector_set,
    successive_minima,
)


def test_gram_from_basis_examples():
    ident = BasisMatrix.from_vectors([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert gram_from_basis(ident).entries == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    fcc = BasisMatrix.from_vectors([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert [list(r) for r in gram_from_basis(fcc).entries] == FCC_ROWS
    b = BasisMatrix.from_vectors([[2, 0, 0], [0, 2, 0], [1, 1, 1]])
    assert [list(r) for r in gram_from_basis(b).entries] == BCC_ROWS


def test_gram_in_higher_ambient_dimension():
    b = BasisMatrix.from_vectors([[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 1]])
    assert gram_from_basis(b).entries[0] == (2, 0, 1)


def test_exact_input_stays_exact(fcc):
    assert fcc.exact
    assert all(isinstance(x, Fraction) for row in fcc.entries for x in row)


@pytest.mark.parametrize(
    "vectors",
    [
        [[1, 0, 0], [2, 0, 0], [0, 0, 1]],
        [[1, 0, 0], [0, 1, 0], [1, 1, 0]],
        [[0.1, 0.2, 0.3], [0.2, 0.4, 0.6], [1.0, 0.0, 0.0]],
    ],
)
def test_singular_basis_rejected(vectors):
    with pytest.raises(SingularBasis):
        gram_from_basis(BasisMatrix.from_vectors(vectors))


def test_non_positive_definite_gram_rejected():
    with pytest.raises(SingularBasis):
        GramMatrix.from_rows([[1, 2, 0], [2, 1, 0], [0, 0, 1]])
    with pytest.raises(SingularBasis):
        GramMatrix.from_rows([[1, 0, 0], [1, 1, 0], [0, 0, 1]])


def test_basis_text_round_trip():
    text = "# fcc\n3 3\n1 1 0\n0 1 1\n1 0 1\n"
    b = BasisMatrix.from_text(text)
    assert b.exact
    assert BasisMatrix.from_text(b.to_text()) == b
    f = BasisMatrix.from_text("3 3\n0.5 0 0\n0 1e-1 0\n0 0 1/3\n")
    assert not f.exact
    assert BasisMatrix.from_text(f.to_text()) == f
    r = BasisMatrix.from_text("3 3\n1/2 0 0\n0 1 0\n0 0 1/3\n")
    assert r.exact and r.columns[0][0] == Fraction(1, 2)


@pytest.mark.parametrize(
    "text",
    ["", "3\n1 0 0\n", "3 2\n1 0 0\n0 1 0\n", "3 3\n1 0 0\n0 1 0\n", "3 3\n1 0\n0 1 0\n0 0 1\n", "3 3\n1 x 0\n0 1 0\n0 0 1\n"],
)
def test_basis_text_errors(text):
    with pytest.raises(InputFormatError):
        BasisMatrix.from_text(text)


def test_gram_json_and_inline():
    g = GramMatrix.from_json('{"gram": [[2,1,1],[1,2,1],[1,1,2]]}')
    assert g.exact and [list(r) for r in g.entries] == FCC_ROWS
    h = GramMatrix.from_inline("2,1,1;1,2,1;1,1,2")
    assert h == g
    q = GramMatrix.from_json('{"gram": [["1/2",0,0],[0,1,0],[0,0,1]]}')
    assert q.entries[0][0] == Fraction(1, 2)
    with pytest.raises(InputFormatError):
        GramMatrix.from_json("[1, 2]")


def test_enumerate_identity(ident):
    got = enumerate_short_vectors(ident, 1)
    assert sorted(v for v, _ in got) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    assert all(n == 1 for _, n in got)


def test_enumerate_fcc(fcc):
    got = enumerate_short_vectors(fcc, 2)
    assert len(got) == 6
    assert all(n == 2 for _, n in got)


def test_enumerate_bcc(bcc):
    got = enumerate_short_vectors(bcc, 3)
    assert sorted(v for v, _ in got) == sorted([(0, 0, 1), (1, 0, -1), (0, 1, -1), (1, 1, -1)])
    assert all(n == 3 for _, n in got)


def _canonical(a):
    for x in a:
        if x:
            return x > 0
    return False


@pytest.mark.parametrize("seed", range(40))
def test_enumeration_completeness_against_box(seed):
    rng = np.random.default_rng(seed)
    gram = random_spd_gram(rng, cond_max=20.0)
    radius = 1.5 * min(gram.floats()[i][i] for i in range(3))
    got = {v for v, _ in enumerate_short_vectors(gram, radius)}
    want = {a for a, n in brute_vectors(gram, 6) if n <= radius and _canonical(a)}
    assert got == want


@pytest.mark.parametrize("seed", range(40))
def test_enumeration_completeness_exact(seed):
    rng = np.random.default_rng(1000 + seed)
    b = rng.integers(-2, 3, size=(3, 3))
    if round(np.linalg.det(b)) == 0:
        return
    gram = gram_from_basis(BasisMatrix.from_vectors(b.tolist()))
    radius = max(gram.entries[i][i] for i in range(3))
    got = {(v, n) for v, n in enumerate_short_vectors(gram, radius)}
    want = {(a, n) for a, n in brute_vectors(gram, 6) if n <= radius and _canonical(a)}
    # only meaningful when the box dominates the ellipsoid
    inv = np.linalg.inv(np.array(gram.floats()))
    if all(math.sqrt(float(radius) * inv[i, i]) <= 6 for i in range(3)):
        assert got == want


def test_minima_examples(fcc, ident, bcc):
    assert successive_minima(fcc).lambdas == pytest.approx((math.sqrt(2),) * 3, abs=1e-15)
    assert successive_minima(ident).lambdas == (1.0, 1.0, 1.0)
    m = successive_minima(bcc)
    assert m.norms_sq == (3, 3, 3)
    assert m.lambdas == pytest.approx((math.sqrt(3),) * 3, abs=1e-15)
    assert successive_minima(GramMatrix.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 4]])).lambdas == (1.0, 1.0, 2.0)


def test_minima_witnesses_have_the_minima_norms(bcc):
    m = successive_minima(bcc)
    for w, n in zip(m.witnesses, m.norms_sq):
        assert bcc.norm_sq(w) == n
    assert abs(round(np.linalg.det(np.array(m.witnesses)))) == 1


def test_minimal_vector_sets(fcc, ident, bcc):
    assert len(minimal_vector_set(fcc).vectors) == 12
    assert len(minimal_vector_set(ident).vectors) == 6
    s = minimal_vector_set(bcc)
    assert len(s.vectors) == 8
    assert set(s.vectors) == {tuple(-x for x in v) for v in s.vectors}
    assert len(s.canonical_half()) == 4


def test_well_rounded_examples(fcc, bcc):
    assert is_well_rounded(fcc, 0)
    assert is_well_rounded(bcc, 0)
    assert not is_well_rounded(GramMatrix.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 4]]), 1e-9)


def test_well_rounded_tolerance():
    g = GramMatrix.from_rows([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0 + 1e-12]], exact=False)
    assert is_well_rounded(g, 1e-9)
    assert not is_well_rounded(g, 0)


@pytest.mark.parametrize("seed", range(60))
def test_minima_against_brute_force_on_reduced_grams(seed):
    rng = np.random.default_rng(seed)
    gram = random_spd_gram(rng, cond_max=20.0)
    got = successive_minima(gram)
    want = brute_minima_sq(gram, 6)
    assert [x * x for x in got.lambdas] == pytest.approx(want, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_minima_ordering_and_independence(seed):
    rng = np.random.default_rng(seed)
    gram = random_spd_gram(rng, cond_max=1e4)
    m = successive_minima(gram)
    assert 0 < m.lambdas[0] <= m.lambdas[1] <= m.lambdas[2]
    assert float(gram.transform(m.witnesses).det()) > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_scaling_covariance_exact(seed, t):
    rng = np.random.default_rng(seed)
    b = rng.integers(-3, 4, size=(3, 3))
    if round(np.linalg.det(b)) == 0:
        return
    basis = BasisMatrix.from_vectors(b.tolist())
    scaled = BasisMatrix.from_vectors((t * b).tolist())
    m1 = successive_minima(gram_from_basis(basis))
    m2 = successive_minima(gram_from_basis(scaled))
    assert m2.norms_sq == tuple(t * t * n for n in m1.norms_sq)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_scaling_covariance_float(seed, t):
    rng = np.random.default_rng(seed)
    gram = random_spd_gram(rng, cond_max=1e3)
    m1 = successive_minima(gram)
    m2 = successive_minima(gram.scaled(t * t))
    assert m2.lambdas == pytest.approx(tuple(t * x for x in m1.lambdas), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unimodular_invariance(seed):
    rng = np.random.default_rng(seed)
    b = rng.integers(-3, 4, size=(3, 3))
    if round(np.linalg.det(b)) == 0:
        return
    gram = gram_from_basis(BasisMatrix.from_vectors(b.tolist()))
    u = random_unimodular(rng)
    assert successive_minima(gram.transform(u)).norms_sq == successive_minima(gram).norms_sq


def test_reduced_input_gives_identity_witnesses(ident, fcc):
    assert successive_minima(ident).witnesses == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert successive_minima(fcc).witnesses == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_minima_deterministic(bcc):
    assert successive_minima(bcc) == successive_minima(bcc)


def test_minima_against_ambient_oracle():
    """Integer bases with entries in [-4, 4]: compare with points of Z^3 in the lattice.

    Unlike a coefficient box, this oracle cannot miss short vectors of skewed bases.
    """
    from solidangle.harness import LatticeModel, ModelKind, gen_lattice

    model = LatticeModel(ModelKind.INTEGER_SMALL, entry_range=4)
    for i in range(500):
        basis = gen_lattice(model, 2024, i)
        got = [int(n) for n in successive_minima(gram_from_basis(basis)).norms_sq]
        rows = [[int(x) for x in c] for c in basis.columns]
        assert got == ambient_minima_sq(rows), (i, rows)
