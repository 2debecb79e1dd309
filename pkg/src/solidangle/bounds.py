"""Sharp solid-angle bounds for normalized minimal bases of rank-3 lattices."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

from .errors import BranchMismatch, CrossOracleMismatch, DomainError
from .lattice import GramMatrix
from .reduction import MinimaRatios, ReducedBasis, VertexAngles, normalize_minimal_basis
from .solid import SolidAngle, half_angle_params, lhuilier_solid_angle, oosterom_solid_angle

log = logging.getLogger(__name__)

# Attained by the fcc basis: tan^2(sr/4) = tan^3(pi/12).
FCC_OMEGA = math.atan(math.tan(math.pi / 12) ** 1.5) / math.pi
FCC_STERADIANS = 4 * math.pi * FCC_OMEGA
# Attained by Z^3: one octant.
CUBE_OMEGA = 0.125

BOUND_TOL = 1e-9
WR_COS_TOL = 1e-12
ORACLE_TOL = 1e-8


class Branch(str, enum.Enum):
    WR_CONDITION = "WR_CONDITION"
    NON_WR = "NON_WR"


@dataclass(frozen=True)
class NuParam:
    nu: float


@dataclass(frozen=True)
class BoundReport:
    branch: Branch
    omega: SolidAngle
    lower: float
    upper: float
    within_bounds: bool
    angles: VertexAngles
    ratios: MinimaRatios
    nu: Optional[NuParam]
    # both candidate lower bounds, for auditing which branch fired
    candidates: dict

    def to_json_obj(self) -> dict:
        details = {"angles": self.angles.to_json_obj(), "ratios": self.ratios.to_json_obj()}
        if self.branch is Branch.NON_WR:
            details["nu"] = self.nu.nu
        return {
            "branch": self.branch.value,
            "omega": self.omega.to_json_obj(),
            "lower": self.lower,
            "upper": self.upper,
            "within_bounds": self.within_bounds,
            "details": details,
            "candidates": dict(self.candidates),
        }


def wr_condition(angles: VertexAngles) -> bool:
    """True iff t23 <= arccos(cos t12 + cos t13 - 1), compared in cosine form."""
    t12, t13, t23 = angles.as_tuple()
    return math.cos(t23) >= math.cos(t12) + math.cos(t13) - 1 - WR_COS_TOL


def _nu_argument(ratios: MinimaRatios, angles: VertexAngles) -> float:
    k12, k23 = ratios.k12, ratios.k23
    t12, t13 = angles.theta12, angles.theta13
    return 0.5 * (2 * k12 * k23 * math.cos(t12) + 2 * k12 * math.cos(t13) - k12 * k12 * k23 - k23)


def nu_param(ratios: MinimaRatios, angles: VertexAngles) -> NuParam:
    arg = _nu_argument(ratios, angles)
    clamped = max(-1.0, min(1.0, arg))
    if abs(clamped - arg) > 1e-12:
        log.warning("nu argument %.17g clamped to [-1, 1] by %.3g", arg, abs(clamped - arg))
    return NuParam(math.acos(clamped) / 4)


def theta23_kbound(ratios: MinimaRatios, angles: VertexAngles) -> float:
    """Upper bound 4*nu on t23, valid when the WR condition fails."""
    if wr_condition(angles):
        raise BranchMismatch("the WR condition holds; the ratio bound on theta23 applies only when it fails")
    return 4 * nu_param(ratios, angles).nu


def lower_bound_non_wr(nu: NuParam | float) -> float:
    v = nu.nu if isinstance(nu, NuParam) else float(nu)
    if v > math.pi / 6 + 1e-12:
        raise DomainError(f"nu = {v} exceeds pi/6")
    if v <= 0:
        raise DomainError(f"nu = {v} must be positive")
    t2 = math.tan(v) ** 2
    factor = max(0.0, (1 - 3 * t2) / (3 - t2))
    return math.atan(math.tan(v) * math.sqrt(factor)) / math.pi


def wr_tangent_floor(angles: VertexAngles) -> float:
    """L'Huilier product with c replaced by pi/12; a floor for tan^2(sr/4) in the WR branch."""
    p = half_angle_params(angles)
    c = math.pi / 12
    return math.tan(p.alpha + c) * math.tan(p.alpha - c) * math.tan(c + p.beta) * math.tan(c - p.beta)


def bound_reduced(reduced: ReducedBasis, cross_check: bool = True) -> BoundReport:
    """Classify an already normalized minimal basis and attach its bounds."""
    angles = reduced.angles
    omega = lhuilier_solid_angle(angles)
    if cross_check:
        other = oosterom_solid_angle(reduced.gram)
        if abs(other.normalized - omega.normalized) > ORACLE_TOL:
            raise CrossOracleMismatch(
                f"L'Huilier {omega.normalized!r} vs vector formula {other.normalized!r}"
            )
    nu = nu_param(reduced.ratios, angles)
    try:
        non_wr_lower = lower_bound_non_wr(nu)
    except DomainError:
        non_wr_lower = None
    if wr_condition(angles):
        branch, lower, nu_out = Branch.WR_CONDITION, FCC_OMEGA, None
    else:
        branch, lower, nu_out = Branch.NON_WR, non_wr_lower, nu
        if lower is None:
            raise DomainError(f"nu = {nu.nu} exceeds pi/6 in the non-WR branch")
    within = lower - BOUND_TOL <= omega.normalized <= CUBE_OMEGA + BOUND_TOL
    return BoundReport(
        branch=branch,
        omega=omega,
        lower=lower,
        upper=CUBE_OMEGA,
        within_bounds=within,
        angles=angles,
        ratios=reduced.ratios,
        nu=nu_out,
        candidates={"wr_condition": FCC_OMEGA, "non_wr": non_wr_lower},
    )


def classify_and_bound(gram: GramMatrix) -> BoundReport:
    return bound_reduced(normalize_minimal_basis(gram))
