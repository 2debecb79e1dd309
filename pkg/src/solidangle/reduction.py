"""Normalized minimal bases, vertex angles and ratios of successive minima."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

from .errors import NormalizationFailure
from .lattice import (
    CoefficientVector,
    GramMatrix,
    SuccessiveMinima,
    _det3,
    _enumerate,
    _rank_ok_pair,
    _reduced_diagonal,
    _same_norm,
    _tolerance,
    successive_minima,
)

ANGLE_TOL = 1e-9

PI_3 = math.pi / 3
PI_2 = math.pi / 2
TWO_PI_3 = 2 * math.pi / 3


@dataclass(frozen=True)
class VertexAngles:
    theta12: float
    theta13: float
    theta23: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.theta12, self.theta13, self.theta23)

    def to_json_obj(self) -> dict:
        return {"t12": self.theta12, "t13": self.theta13, "t23": self.theta23}


@dataclass(frozen=True)
class MinimaRatios:
    k12: float
    k13: float
    k23: float

    def to_json_obj(self) -> dict:
        return {"k12": self.k12, "k23": self.k23, "k13": self.k13}


@dataclass(frozen=True)
class ReducedBasis:
    gram: GramMatrix
    angles: VertexAngles
    ratios: MinimaRatios
    sign_flips: tuple[int, int]
    witnesses: tuple[CoefficientVector, CoefficientVector, CoefficientVector]

    def to_json_obj(self) -> dict:
        return {
            "gram": self.gram.to_json_obj(),
            "angles": self.angles.to_json_obj(),
            "ratios": self.ratios.to_json_obj(),
            "flips": list(self.sign_flips),
        }


def _angle(gij, gii, gjj) -> float:
    c = float(gij) / math.sqrt(float(gii) * float(gjj))
    return math.acos(max(-1.0, min(1.0, c)))


def vertex_angles(gram: GramMatrix) -> VertexAngles:
    g = gram.entries
    return VertexAngles(
        _angle(g[0][1], g[0][0], g[1][1]),
        _angle(g[0][2], g[0][0], g[2][2]),
        _angle(g[1][2], g[1][1], g[2][2]),
    )


def minima_ratios(minima: SuccessiveMinima) -> MinimaRatios:
    l1, l2, l3 = minima.lambdas
    k12 = l1 / l2
    k23 = l2 / l3
    return MinimaRatios(k12=k12, k13=k12 * k23, k23=k23)


def satisfies_mn31(angles: VertexAngles, tol: float = ANGLE_TOL) -> bool:
    t12, t13, t23 = angles.as_tuple()
    return (
        PI_3 - tol <= t12 <= PI_2 + tol
        and PI_3 - tol <= t13 <= PI_2 + tol
        and PI_3 - tol <= t23 <= TWO_PI_3 + tol
    )


def check_pairwise_angle_bounds(angles: VertexAngles, tol: float = ANGLE_TOL) -> bool:
    return all(PI_3 - tol <= t <= TWO_PI_3 + tol for t in angles.as_tuple())


def _flip(witnesses, s2: int, s3: int):
    w1, w2, w3 = witnesses
    return (w1, tuple(s2 * x for x in w2), tuple(s3 * x for x in w3))


def _normalize_witnesses(gram: GramMatrix, minima: SuccessiveMinima) -> ReducedBasis:
    best = None
    for s2, s3 in product((1, -1), repeat=2):
        ws = _flip(minima.witnesses, s2, s3)
        sub = gram.transform(ws)
        angles = vertex_angles(sub)
        if not satisfies_mn31(angles):
            continue
        key = (
            round(angles.theta23, 12),
            round(angles.theta13, 12),
            round(angles.theta12, 12),
            (s2 < 0) + (s3 < 0),
        )
        if best is None or key < best[0]:
            best = (key, sub, angles, (s2, s3), ws)
    if best is None:
        raise NormalizationFailure(
            f"no sign choice of the minima witnesses {minima.witnesses} satisfies the vertex-angle bounds"
        )
    _, sub, angles, flips, ws = best
    return ReducedBasis(sub, angles, minima_ratios(minima), flips, ws)


def normalize_minimal_basis(gram: GramMatrix) -> ReducedBasis:
    """Minimal basis with pi/3 <= t12, t13 <= pi/2 and t23 as small as possible.

    All four sign choices of (x2, x3) are tried; ties in t23 fall back to
    t13, then t12, then the fewest flips.
    """
    return _normalize_witnesses(gram, successive_minima(gram))


def all_minimal_bases(gram: GramMatrix) -> list[ReducedBasis]:
    """Every minima-attaining ordered basis, each sign-normalized.

    Witnesses with equal norms (up to the tie tolerance) are all tried, so a
    well-rounded lattice yields one entry per admissible ordered triple.
    """
    tol = _tolerance(gram)
    minima = successive_minima(gram)
    n1, n2, n3 = minima.norms_sq
    radius = _reduced_diagonal(gram)[2]
    if tol:
        radius = radius * (1 + 4 * tol)
    vecs = _enumerate(gram, radius, float("inf"))
    c1 = [v for v, n in vecs if _same_norm(n, n1, tol)]
    c2 = [v for v, n in vecs if _same_norm(n, n2, tol)]
    c3 = [v for v, n in vecs if _same_norm(n, n3, tol)]
    out = []
    for w1 in c1:
        for w2 in c2:
            _, primitive = _rank_ok_pair(w1, w2)
            if not primitive:
                continue
            for w3 in c3:
                if abs(_det3((w1, w2, w3))) != 1:
                    continue
                m = SuccessiveMinima(minima.lambdas, minima.norms_sq, (w1, w2, w3))
                out.append(_normalize_witnesses(gram, m))
    return out
