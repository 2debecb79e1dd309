"""Rank-3 lattices given by a basis or a Gram matrix.

Integer and rational input stays exact (``fractions.Fraction``) through
enumeration and successive minima; float input is handled in double
precision with a relative tie tolerance of 1e-9.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, Union

from .errors import InputFormatError, RadiusTooLarge, SingularBasis

Scalar = Union[Fraction, float]
CoefficientVector = tuple[int, int, int]

DEFAULT_REL_TOL = 1e-9
DEFAULT_ENUM_CAP = 10**7


def _is_exact_value(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _coerce(values: Iterable, exact: bool) -> tuple:
    if exact:
        return tuple(Fraction(v) for v in values)
    return tuple(float(v) for v in values)


def _det3(m: Sequence[Sequence]) -> Scalar:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _format_scalar(x: Scalar) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def _parse_scalar(token: str) -> Scalar:
    token = token.strip()
    try:
        if any(ch in token.lower() for ch in ".ein"):
            return float(token)
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputFormatError(f"cannot parse number {token!r}") from exc


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisMatrix:
    """Three basis vectors embedded in R^N.

    ``columns[i]`` is the i-th basis vector x_{i+1}. Entries are ``Fraction``
    when ``exact`` and ``float`` otherwise.
    """

    columns: tuple[tuple[Scalar, ...], ...]
    exact: bool

    def __post_init__(self):
        if len(self.columns) != 3:
            raise SingularBasis(f"expected 3 basis vectors, got {len(self.columns)}")
        n = len(self.columns[0])
        if n < 3 or any(len(c) != n for c in self.columns):
            raise SingularBasis("basis vectors must share one ambient dimension N >= 3")

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence], exact: bool | None = None) -> "BasisMatrix":
        vectors = [list(v) for v in vectors]
        if exact is None:
            exact = all(_is_exact_value(x) for v in vectors for x in v)
        return cls(tuple(_coerce(v, exact) for v in vectors), exact)

    @property
    def ambient_dim(self) -> int:
        return len(self.columns[0])

    @classmethod
    def from_text(cls, text: str) -> "BasisMatrix":
        """Parse the ``N 3`` header followed by three rows of N numbers."""
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise InputFormatError("empty basis file")
        header = lines[0].split()
        if len(header) != 2:
            raise InputFormatError("header must be 'N 3'")
        try:
            n, r = int(header[0]), int(header[1])
        except ValueError as exc:
            raise InputFormatError("header must be 'N 3'") from exc
        if r != 3:
            raise InputFormatError(f"only rank 3 is supported, header says rank {r}")
        if len(lines) != 4:
            raise InputFormatError(f"expected 3 basis rows after the header, got {len(lines) - 1}")
        rows = []
        for ln in lines[1:]:
            tokens = ln.split()
            if len(tokens) != n:
                raise InputFormatError(f"expected {n} entries per row, got {len(tokens)}")
            rows.append([_parse_scalar(t) for t in tokens])
        exact = all(isinstance(x, Fraction) for row in rows for x in row)
        return cls.from_vectors(rows, exact=exact)

    def to_text(self) -> str:
        out = [f"{self.ambient_dim} 3"]
        for col in self.columns:
            out.append(" ".join(_format_scalar(x) for x in col))
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric positive-definite 3x3 matrix of inner products."""

    entries: tuple[tuple[Scalar, ...], ...]
    exact: bool

    def __post_init__(self):
        g = self.entries
        if len(g) != 3 or any(len(row) != 3 for row in g):
            raise SingularBasis("Gram matrix must be 3x3")
        for i in range(3):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise SingularBasis("Gram matrix must be symmetric")
        m1 = g[0][0]
        m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        m3 = _det3(g)
        if self.exact:
            ok = m1 > 0 and m2 > 0 and m3 > 0
        else:
            # relative to the Hadamard bound so the check is scale free
            scale = abs(g[0][0] * g[1][1] * g[2][2])
            ok = m1 > 0 and m2 > 1e-14 * abs(g[0][0] * g[1][1]) and m3 > 1e-14 * scale
        if not ok:
            raise SingularBasis("Gram matrix is not positive definite")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], exact: bool | None = None) -> "GramMatrix":
        rows = [list(r) for r in rows]
        if exact is None:
            exact = all(_is_exact_value(x) for r in rows for x in r)
        return cls(tuple(_coerce(r, exact) for r in rows), exact)

    @classmethod
    def from_json(cls, text: str) -> "GramMatrix":
        try:
            data = json.loads(text)
            rows = data["gram"]
        except (ValueError, KeyError, TypeError) as exc:
            raise InputFormatError('Gram JSON must look like {"gram": [[...],[...],[...]]}') from exc
        parsed = [[_parse_scalar(x) if isinstance(x, str) else x for x in r] for r in rows]
        return cls.from_rows(parsed)

    @classmethod
    def from_inline(cls, text: str) -> "GramMatrix":
        """Parse ``"g11,g12,g13;g21,g22,g23;g31,g32,g33"``."""
        rows = [[_parse_scalar(t) for t in r.split(",")] for r in text.split(";") if r.strip()]
        exact = all(isinstance(x, Fraction) for r in rows for x in r)
        return cls.from_rows(rows, exact=exact)

    def __getitem__(self, ij: tuple[int, int]) -> Scalar:
        return self.entries[ij[0]][ij[1]]

    def floats(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self.entries]

    def det(self) -> Scalar:
        return _det3(self.entries)

    def norm_sq(self, a: Sequence[int]) -> Scalar:
        g = self.entries
        return sum(g[i][j] * a[i] * a[j] for i in range(3) for j in range(3))

    def transform(self, coeffs: Sequence[Sequence[int]]) -> "GramMatrix":
        """Gram of the vectors ``coeffs[k]`` written in the current basis."""
        g = self.entries
        out = [[None] * 3 for _ in range(3)]
        for p in range(3):
            for q in range(p, 3):
                u, v = coeffs[p], coeffs[q]
                s = sum(g[i][j] * u[i] * v[j] for i in range(3) for j in range(3))
                out[p][q] = out[q][p] = s
        return GramMatrix(tuple(tuple(r) for r in out), self.exact)

    def scaled(self, factor: Scalar) -> "GramMatrix":
        return GramMatrix(tuple(tuple(x * factor for x in r) for r in self.entries), self.exact)

    def to_json_obj(self) -> list[list]:
        return [[_json_scalar(x) for x in r] for r in self.entries]


def _json_scalar(x: Scalar):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else float(x)
    return float(x)


@dataclass(frozen=True)
class SuccessiveMinima:
    lambdas: tuple[float, float, float]
    norms_sq: tuple[Scalar, Scalar, Scalar]
    witnesses: tuple[CoefficientVector, CoefficientVector, CoefficientVector]


@dataclass(frozen=True)
class MinimalVectorSet:
    vectors: tuple[CoefficientVector, ...]
    norm_sq: Scalar

    def canonical_half(self) -> list[CoefficientVector]:
        return [v for v in self.vectors if _is_canonical(v)]


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def gram_from_basis(basis: BasisMatrix) -> GramMatrix:
    cols = basis.columns
    rows = [[sum(a * b for a, b in zip(cols[i], cols[j])) for j in range(3)] for i in range(3)]
    return GramMatrix(tuple(tuple(r) for r in rows), basis.exact)


def _is_canonical(v: Sequence[int]) -> bool:
    for x in v:
        if x:
            return x > 0
    return False


def _canonical(v: Sequence[int]) -> CoefficientVector:
    return tuple(v) if _is_canonical(v) else tuple(-x for x in v)


def _tie_key(v: Sequence[int]) -> tuple:
    # Prefer short coefficient vectors, then e1 < e2 < e3, so an already
    # reduced basis is reproduced unchanged.
    return (sum(abs(x) for x in v), tuple(-x for x in v))


def _size_reduce(g: list[list[Scalar]], max_iter: int = 1000):
    """Pairwise Lagrange size reduction of a Gram matrix.

    Returns (U, g') where the columns of ``U`` (stored as rows ``U[k]``) are
    the reduced basis vectors in the input coordinates.
    """
    g = [row[:] for row in g]
    U = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    for _ in range(max_iter):
        changed = False
        for i in range(3):
            for j in range(3):
                if i == j or not 2 * abs(g[i][j]) > g[j][j]:
                    continue
                q = round(g[i][j] / g[j][j])
                if q == 0:
                    continue
                # b_i <- b_i - q b_j
                gii = g[i][i] - 2 * q * g[i][j] + q * q * g[j][j]
                for k in range(3):
                    if k != i:
                        g[i][k] = g[k][i] = g[i][k] - q * g[j][k]
                g[i][i] = gii
                U[i] = [U[i][t] - q * U[j][t] for t in range(3)]
                changed = True
        if not changed:
            break
    return U, g


def _cholesky_upper(g: list[list[float]]):
    r11 = math.sqrt(g[0][0])
    r12 = g[0][1] / r11
    r13 = g[0][2] / r11
    r22 = math.sqrt(max(g[1][1] - r12 * r12, 0.0))
    r23 = (g[1][2] - r12 * r13) / r22
    r33 = math.sqrt(max(g[2][2] - r13 * r13 - r23 * r23, 0.0))
    return r11, r12, r13, r22, r23, r33


def _predicted_count(g: list[list[float]], radius_sq: float) -> float:
    det = _det3(g)
    count = 1.0
    for i in range(3):
        j, k = [t for t in range(3) if t != i]
        cof = g[j][j] * g[k][k] - g[j][k] * g[k][j]
        count *= 2 * math.floor(math.sqrt(radius_sq * cof / det)) + 1
    return count


def _enumerate(gram: GramMatrix, radius_sq: Scalar, cap: float) -> list[tuple[CoefficientVector, Scalar]]:
    U, gr = _size_reduce([list(r) for r in gram.entries])
    gf = [[float(x) for x in row] for row in gr]
    rf = float(radius_sq)
    if _predicted_count(gf, rf) > cap:
        raise RadiusTooLarge(f"enumeration at radius_sq={rf} would exceed {cap:g} candidates")
    r11, r12, r13, r22, r23, r33 = _cholesky_upper(gf)
    slack = rf * (1 + 1e-7) + 1e-300
    eps = 1e-9
    found = []
    b3 = math.floor(math.sqrt(slack) / r33 + eps)
    for a3 in range(-b3, b3 + 1):
        rem3 = slack - (r33 * a3) ** 2
        if rem3 < 0:
            continue
        c2 = -r23 * a3 / r22
        w2 = math.sqrt(rem3) / r22 + eps
        for a2 in range(math.ceil(c2 - w2), math.floor(c2 + w2) + 1):
            rem2 = rem3 - (r22 * a2 + r23 * a3) ** 2
            if rem2 < -1e-9 * slack:
                continue
            c1 = -(r12 * a2 + r13 * a3) / r11
            w1 = math.sqrt(max(rem2, 0.0)) / r11 + eps
            for a1 in range(math.ceil(c1 - w1), math.floor(c1 + w1) + 1):
                if a1 == 0 and a2 == 0 and a3 == 0:
                    continue
                v = tuple(a1 * U[0][t] + a2 * U[1][t] + a3 * U[2][t] for t in range(3))
                if not _is_canonical(v):
                    continue
                n = gram.norm_sq(v)
                if n <= radius_sq:
                    found.append((v, n))
    found.sort(key=lambda item: (item[1], _tie_key(item[0])))
    return found


def enumerate_short_vectors(
    gram: GramMatrix, radius_sq: Scalar, cap: float = DEFAULT_ENUM_CAP
) -> list[tuple[CoefficientVector, Scalar]]:
    """All nonzero lattice vectors with squared norm <= ``radius_sq``.

    One representative per +/- pair is returned (first nonzero coefficient
    positive), sorted by squared norm. Coefficients refer to the basis
    that produced ``gram``.
    """
    if not radius_sq > 0:
        raise ValueError("radius_sq must be positive")
    return _enumerate(gram, radius_sq, cap)


def _tolerance(gram: GramMatrix) -> float:
    return 0.0 if gram.exact else DEFAULT_REL_TOL


def _same_norm(a: Scalar, b: Scalar, tol: float) -> bool:
    if tol == 0:
        return a == b
    return abs(a - b) <= tol * max(abs(a), abs(b))


def _rank_ok_pair(u: Sequence[int], v: Sequence[int]) -> tuple[bool, bool]:
    """(independent, primitive) for the pair u, v of integer vectors."""
    minors = [u[i] * v[j] - u[j] * v[i] for i, j in ((0, 1), (0, 2), (1, 2))]
    g = math.gcd(*minors)
    return g != 0, g == 1


def _pick(candidates: list, tol: float, prefer) -> tuple:
    best = min(n for _, n in candidates)
    tied = [(v, n) for v, n in candidates if _same_norm(n, best, tol)]
    preferred = [item for item in tied if prefer(item[0])]
    pool = preferred or tied
    return min(pool, key=lambda item: _tie_key(item[0]))


def _reduced_diagonal(gram: GramMatrix) -> list[Scalar]:
    _, gr = _size_reduce([list(r) for r in gram.entries])
    return sorted(gr[i][i] for i in range(3))


def successive_minima(gram: GramMatrix, cap: float = DEFAULT_ENUM_CAP) -> SuccessiveMinima:
    """Successive minima with witnesses that form a basis of the lattice.

    Equal-norm witnesses are chosen by the smallest coefficient l1-norm and
    then by preferring earlier basis directions.
    """
    tol = _tolerance(gram)
    radius = _reduced_diagonal(gram)[2]
    if tol:
        radius = radius * (1 + 4 * tol)
    vecs = _enumerate(gram, radius, cap)

    w1, n1 = _pick(vecs, tol, lambda v: True)
    second = [(v, n) for v, n in vecs if _rank_ok_pair(w1, v)[0]]
    w2, n2 = _pick(second, tol, lambda v: _rank_ok_pair(w1, v)[1])
    third = [(v, n) for v, n in vecs if _det3((w1, w2, v)) != 0]
    w3, n3 = _pick(third, tol, lambda v: abs(_det3((w1, w2, v))) == 1)
    if abs(_det3((w1, w2, w3))) != 1:
        raise SingularBasis("minima witnesses do not form a lattice basis")
    norms = (n1, n2, n3)
    lambdas = tuple(math.sqrt(float(n)) for n in norms)
    # float ties may be ordered by noise; keep the reported lengths sorted
    if not (lambdas[0] <= lambdas[1] <= lambdas[2]):
        lambdas = tuple(sorted(lambdas))
    return SuccessiveMinima(lambdas, norms, (w1, w2, w3))


def minimal_vector_set(gram: GramMatrix, cap: float = DEFAULT_ENUM_CAP) -> MinimalVectorSet:
    """All vectors of norm lambda_1, both signs included."""
    tol = _tolerance(gram)
    radius = _reduced_diagonal(gram)[0]
    if tol:
        radius = radius * (1 + 4 * tol)
    vecs = _enumerate(gram, radius, cap)
    best = vecs[0][1]
    half = [v for v, n in vecs if _same_norm(n, best, tol)]
    both = []
    for v in half:
        both.append(v)
        both.append(tuple(-x for x in v))
    return MinimalVectorSet(tuple(both), best)


def is_well_rounded(gram: GramMatrix, rel_tol: float = DEFAULT_REL_TOL) -> bool:
    if rel_tol < 0:
        raise ValueError("rel_tol must be non-negative")
    m = successive_minima(gram)
    if rel_tol == 0:
        return m.norms_sq[2] <= m.norms_sq[0]
    return m.lambdas[2] <= m.lambdas[0] * (1 + rel_tol)


def independent_triples(vectors: Sequence[CoefficientVector]) -> list[tuple[CoefficientVector, ...]]:
    """All 3-subsets of ``vectors`` that are linearly independent."""
    return [t for t in combinations(vectors, 3) if _det3(t) != 0]


def coefficient_det(vectors: Sequence[Sequence[int]]) -> int:
    return _det3(vectors)
