"""Solid angle of the cone spanned by three lattice vectors.

Three independent routes are provided: L'Huilier's formula on the vertex
angles, the tangent half-angle vector formula on the Cholesky embedding,
and Monte Carlo sampling of directions.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriangle
from .lattice import GramMatrix
from .reduction import VertexAngles, vertex_angles

FOUR_PI = 4 * math.pi
MC_BLOCK = 1 << 16


@dataclass(frozen=True)
class SolidAngle:
    """Solid angle as a fraction of the full sphere, plus steradians."""

    normalized: float
    steradians: float

    def __post_init__(self):
        if not 0 < self.normalized < 0.5:
            raise DegenerateTriangle(f"solid angle {self.normalized} outside (0, 1/2)")

    @classmethod
    def from_steradians(cls, sr: float) -> "SolidAngle":
        return cls(sr / FOUR_PI, sr)

    def to_json_obj(self) -> dict:
        return {"normalized": self.normalized, "steradians": self.steradians}


@dataclass(frozen=True)
class HalfAngleParams:
    alpha: float
    beta: float
    c: float


def half_angle_params(angles: VertexAngles) -> HalfAngleParams:
    t12, t13, t23 = angles.as_tuple()
    return HalfAngleParams((t12 + t13) / 4, (t12 - t13) / 4, t23 / 4)


def lhuilier_factors(alpha: float, beta: float, c: float) -> tuple[float, float, float, float]:
    return (
        math.tan(alpha + c),
        math.tan(alpha - c),
        math.tan(c + beta),
        math.tan(c - beta),
    )


def tan_sq_quarter(alpha: float, beta: float, c: float) -> float:
    """tan^2 of a quarter of the solid angle (steradians)."""
    f = lhuilier_factors(alpha, beta, c)
    return f[0] * f[1] * f[2] * f[3]


def lhuilier_solid_angle(angles: VertexAngles) -> SolidAngle:
    """Spherical excess of the triangle whose sides are the vertex angles."""
    p = half_angle_params(angles)
    factors = lhuilier_factors(p.alpha, p.beta, p.c)
    if any(f <= 0 for f in factors):
        raise DegenerateTriangle(f"vertex angles {angles.as_tuple()} do not form a proper spherical triangle")
    sr = 4 * math.atan(math.sqrt(factors[0] * factors[1] * factors[2] * factors[3]))
    return SolidAngle.from_steradians(sr)


def unit_embedding(gram: GramMatrix) -> np.ndarray:
    """Rows are the three unit-normalized basis vectors realized in R^3."""
    g = np.array(gram.floats())
    d = np.sqrt(np.diag(g))
    unit = g / np.outer(d, d)
    return np.linalg.cholesky(unit)


def oosterom_solid_angle(gram: GramMatrix) -> SolidAngle:
    """tan(sr/2) = |a.(b x c)| / (1 + a.b + a.c + b.c) for unit a, b, c."""
    g = gram.floats()
    c12 = g[0][1] / math.sqrt(g[0][0] * g[1][1])
    c13 = g[0][2] / math.sqrt(g[0][0] * g[2][2])
    c23 = g[1][2] / math.sqrt(g[1][1] * g[2][2])
    # Cholesky rows of the normalized Gram; the triple product is r11*r22*r33
    r12 = c12
    r13 = c13
    r22 = math.sqrt(max(1.0 - r12 * r12, 0.0))
    if r22 == 0.0:
        raise DegenerateTriangle("basis vectors are parallel")
    r23 = (c23 - r12 * r13) / r22
    r33sq = 1.0 - r13 * r13 - r23 * r23
    triple = r22 * math.sqrt(max(r33sq, 0.0))
    if abs(triple) <= 1e-14:
        raise DegenerateTriangle("basis vectors are coplanar")
    half = math.atan2(abs(triple), 1.0 + c12 + c13 + c23)
    return SolidAngle.from_steradians(2 * half)


def _mc_block(inverse: np.ndarray, seed: int, block: int, size: int) -> int:
    rng = np.random.default_rng([seed, block])
    u = rng.standard_normal((size, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    coords = u @ inverse
    return int(np.count_nonzero(np.all(coords >= -1e-15, axis=1)))


def monte_carlo_solid_angle(
    gram: GramMatrix, samples: int, seed: int, workers: int = 1
) -> tuple[SolidAngle, float]:
    """Fraction of uniform directions that land in the cone of the basis.

    Samples are drawn in fixed blocks of 2**16, block ``k`` from the
    substream ``default_rng([seed, k])``, so the estimate does not depend
    on ``workers``.
    """
    if samples < 1000:
        raise ValueError("monte carlo needs at least 1000 samples")
    rows = unit_embedding(gram)
    # u = sum_i w_i rows[i]  <=>  w = u @ inv(rows)
    inverse = np.linalg.inv(rows)
    sizes = []
    left = samples
    while left > 0:
        sizes.append(min(MC_BLOCK, left))
        left -= sizes[-1]
    jobs = [(inverse, seed, k, s) for k, s in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda job: _mc_block(*job), jobs))
    else:
        hits = sum(_mc_block(*job) for job in jobs)
    p = hits / samples
    stderr = math.sqrt(p * (1 - p) / samples)
    return SolidAngle(p, p * FOUR_PI), stderr


def spherical_triangle_area(gram: GramMatrix) -> float:
    """Area (steradians) of the spherical triangle on the unit-normalized basis."""
    return lhuilier_solid_angle(vertex_angles(gram)).steradians
