"""Randomized and grid-based verification of the solid-angle theorems.

Every report is a pure function of its inputs: lattice ``index`` of a
population is generated from ``default_rng([seed, index, kind])`` and
partial reports are merged in index order, so the worker count never
changes the result.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .bounds import (
    BOUND_TOL,
    CUBE_OMEGA,
    FCC_OMEGA,
    FCC_STERADIANS,
    Branch,
    bound_reduced,
    wr_tangent_floor,
)
from .errors import EmptyDomain, RejectionOverflow, SingularBasis, SolidAngleError
from .lattice import (
    BasisMatrix,
    GramMatrix,
    gram_from_basis,
    independent_triples,
    is_well_rounded,
    minimal_vector_set,
    successive_minima,
)
from .reduction import (
    TWO_PI_3,
    all_minimal_bases,
    check_pairwise_angle_bounds,
    normalize_minimal_basis,
    vertex_angles,
)
from .solid import lhuilier_solid_angle, monte_carlo_solid_angle

MAX_RESAMPLES = 10**5
SCAN_TOL = 1e-12
MC_SIGMAS = 4.0
MC_MAX_OUTLIERS = 2

FCC_BASIS = ((1, 1, 0), (0, 1, 1), (1, 0, 1))
CUBIC_BASIS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class ModelKind(str, enum.Enum):
    UNIFORM_BASIS = "UNIFORM_BASIS"
    WR_REJECTION = "WR_REJECTION"
    NEAR_FCC = "NEAR_FCC"
    NEAR_CUBIC = "NEAR_CUBIC"
    INTEGER_SMALL = "INTEGER_SMALL"


_KIND_CODE = {k: i for i, k in enumerate(ModelKind)}


@dataclass(frozen=True)
class LatticeModel:
    """``entry_range`` bounds basis entries (UNIFORM_BASIS, INTEGER_SMALL);
    ``perturbation`` is the noise scale for the perturbed families."""

    kind: ModelKind
    dim: int = 3
    entry_range: float = 1.0
    perturbation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.dim < 3:
            raise ValueError("ambient dimension must be at least 3")
        if self.perturbation < 0:
            raise ValueError("perturbation must be non-negative")


class ScanId(str, enum.Enum):
    A_SOLID3 = "A"
    B_SOLIDOTHER = "B"
    C_SPAREA = "C"
    D_XDECREASE = "D"
    E_YINCREASE = "E"


@dataclass(frozen=True)
class ScanDomain:
    id: ScanId
    grid: int = 64

    def __post_init__(self):
        object.__setattr__(self, "id", ScanId(self.id))
        if self.grid < 16:
            raise ValueError("scan grids need at least 16 points per axis")


@dataclass
class Violation:
    index: int
    invariant: str
    margin: float
    descriptor: str

    def to_json_obj(self) -> dict:
        return {
            "index": self.index,
            "invariant": self.invariant,
            "margin": self.margin,
            "input": self.descriptor,
        }


@dataclass
class VerificationReport:
    name: str
    population: int
    seed: Optional[int]
    violations: list[Violation] = field(default_factory=list)
    extremes: dict = field(default_factory=dict)
    skipped: int = 0
    evaluations: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        out = VerificationReport(
            self.name,
            self.population + other.population,
            self.seed,
            self.violations + other.violations,
            _merge_extremes(self.extremes, other.extremes),
            self.skipped + other.skipped,
            self.evaluations + other.evaluations,
            self.notes + other.notes,
        )
        return out

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "population": self.population,
            "seed": self.seed,
            "evaluations": self.evaluations,
            "skipped": self.skipped,
            "extremes": dict(self.extremes),
            "violations": [v.to_json_obj() for v in self.violations],
            "notes": list(self.notes),
        }

    def to_table(self) -> str:
        rows = [
            ("check", self.name),
            ("population", str(self.population)),
            ("seed", str(self.seed)),
            ("evaluations", str(self.evaluations)),
            ("skipped", str(self.skipped)),
        ]
        rows += [(k, repr(v)) for k, v in self.extremes.items()]
        rows.append(("violations", str(len(self.violations))))
        width = max(len(k) for k, _ in rows)
        lines = [f"{k:<{width}}  {v}" for k, v in rows]
        for v in self.violations:
            lines.append(f"  [{v.index}] {v.invariant} margin={v.margin!r}")
            lines.extend("      " + ln for ln in v.descriptor.splitlines())
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines) + "\n"


# extremes keys are merged by their prefix
def _merge_extremes(a: dict, b: dict) -> dict:
    out = dict(a)
    for key, value in b.items():
        if key not in out or out[key] is None:
            out[key] = value
        elif value is None:
            continue
        elif key.startswith("min_"):
            out[key] = min(out[key], value)
        elif key.startswith("max_"):
            out[key] = max(out[key], value)
        elif key.startswith("n_"):
            out[key] = out[key] + value
        else:
            out[key] = value
    return out


# ---------------------------------------------------------------------------
# Lattice generation
# ---------------------------------------------------------------------------


def _pad(vectors, dim: int):
    return [list(v) + [0] * (dim - len(v)) for v in vectors]


def _random_unimodular(rng: np.random.Generator) -> np.ndarray:
    m = np.eye(3, dtype=np.int64)
    for _ in range(3):
        i, j = rng.choice(3, size=2, replace=False)
        m[i] += int(rng.choice((-1, 1))) * m[j]
    m = m[rng.permutation(3)]
    return m * rng.choice((-1, 1), size=(3, 1))


def _wr_unit_gram(rng: np.random.Generator, noise: float) -> np.ndarray:
    family = int(rng.integers(4))
    if family == 0:
        off = rng.uniform(-0.5, 0.5, size=3)
    else:
        base = {1: (0.5, 0.5, 0.5), 2: (1 / 3, 1 / 3, -1 / 3), 3: (0.0, 0.0, 0.0)}[family]
        off = np.array(base) + noise * rng.standard_normal(3)
    g = np.eye(3)
    g[0, 1] = g[1, 0] = off[0]
    g[0, 2] = g[2, 0] = off[1]
    g[1, 2] = g[2, 1] = off[2]
    return g


def _gen_wr(model: LatticeModel, rng: np.random.Generator) -> BasisMatrix:
    noise = model.perturbation or 0.05
    for _ in range(MAX_RESAMPLES):
        g = _wr_unit_gram(rng, noise)
        try:
            gm = GramMatrix.from_rows(g.tolist(), exact=False)
            if not is_well_rounded(gm, 1e-9):
                continue
        except SingularBasis:
            continue
        rows = np.linalg.cholesky(g) * rng.uniform(0.5, 2.0)
        q, _ = np.linalg.qr(rng.standard_normal((model.dim, 3)))
        vecs = _random_unimodular(rng) @ (rows @ q.T)
        basis = BasisMatrix.from_vectors(vecs.tolist(), exact=False)
        try:
            if is_well_rounded(gram_from_basis(basis), 1e-9):
                return basis
        except SingularBasis:
            continue
    raise RejectionOverflow(f"no well-rounded lattice after {MAX_RESAMPLES} resamples")


def gen_lattice(model: LatticeModel, seed: int, index: int) -> BasisMatrix:
    """Deterministic basis number ``index`` of the population ``(model, seed)``."""
    rng = np.random.default_rng([seed, index, _KIND_CODE[model.kind]])
    kind, n = model.kind, model.dim
    if kind in (ModelKind.NEAR_FCC, ModelKind.NEAR_CUBIC):
        base = _pad(FCC_BASIS if kind is ModelKind.NEAR_FCC else CUBIC_BASIS, n)
        if model.perturbation == 0:
            return BasisMatrix.from_vectors(base, exact=True)
        for _ in range(MAX_RESAMPLES):
            vecs = np.array(base, dtype=float) + model.perturbation * rng.standard_normal((3, n))
            try:
                basis = BasisMatrix.from_vectors(vecs.tolist(), exact=False)
                gram_from_basis(basis)
                return basis
            except SingularBasis:
                continue
        raise RejectionOverflow("perturbed basis kept degenerating")
    if kind is ModelKind.UNIFORM_BASIS:
        r = model.entry_range
        for _ in range(MAX_RESAMPLES):
            vecs = rng.uniform(-r, r, size=(3, n))
            if np.linalg.cond(vecs @ vecs.T) > 1e6:
                continue
            try:
                basis = BasisMatrix.from_vectors(vecs.tolist(), exact=False)
                gram_from_basis(basis)
                return basis
            except SingularBasis:
                continue
        raise RejectionOverflow(f"no well-conditioned basis after {MAX_RESAMPLES} resamples")
    if kind is ModelKind.INTEGER_SMALL:
        r = int(model.entry_range) if model.entry_range >= 1 else 4
        for _ in range(MAX_RESAMPLES):
            vecs = rng.integers(-r, r + 1, size=(3, n)).tolist()
            try:
                basis = BasisMatrix.from_vectors(vecs, exact=True)
                gram_from_basis(basis)
                return basis
            except SingularBasis:
                continue
        raise RejectionOverflow(f"no nonsingular integer basis after {MAX_RESAMPLES} resamples")
    return _gen_wr(model, rng)


# ---------------------------------------------------------------------------
# Population checks
# ---------------------------------------------------------------------------


def _workers(workers: Optional[int]) -> int:
    return max(1, int(workers or 1))


def _run_chunked(fn: Callable, args: tuple, n: int, workers: int) -> list:
    if workers <= 1 or n < 2 * workers:
        return [fn(*args, 0, n)]
    bounds = np.linspace(0, n, workers * 4 + 1).astype(int)
    spans = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args, a, b) for a, b in spans]
        return [f.result() for f in futures]


def _main3_chunk(model: LatticeModel, seed: int, mc_every: int, mc_samples: int, start: int, stop: int):
    rep = VerificationReport("main3", 0, seed, extremes={"n_mc_outliers": 0})
    for index in range(start, stop):
        basis = gen_lattice(model, seed, index)
        rep = rep.merge(check_main3_lattice(basis, index, seed, mc_every, mc_samples))
    return rep


def check_main3_lattice(
    basis: BasisMatrix, index: int = 0, seed: int = 0, mc_every: int = 0, mc_samples: int = 20000
) -> VerificationReport:
    """Run every bound invariant on every normalized minimal basis of one lattice."""
    rep = VerificationReport("main3", 1, seed)
    text = basis.to_text()

    def fail(name: str, margin: float):
        rep.violations.append(Violation(index, name, margin, text))

    gram = gram_from_basis(basis)
    minima = successive_minima(gram)
    wr = minima.lambdas[2] <= minima.lambdas[0] * (1 + 1e-9)
    omegas = []
    branches = set()
    for rb in all_minimal_bases(gram):
        rep.evaluations += 1
        if not check_pairwise_angle_bounds(rb.angles):
            fail("plane_angles", min(t - math.pi / 3 for t in rb.angles.as_tuple()))
        try:
            br = bound_reduced(rb)
        except SolidAngleError as exc:
            fail(f"classify:{type(exc).__name__}", float("nan"))
            continue
        omega = br.omega.normalized
        omegas.append(omega)
        branches.add(br.branch)
        if omega > CUBE_OMEGA + BOUND_TOL:
            fail("upper_bound", CUBE_OMEGA - omega)
        if br.branch is Branch.WR_CONDITION:
            if omega < FCC_OMEGA - BOUND_TOL:
                fail("wr_lower_bound", omega - FCC_OMEGA)
            tsq = math.tan(br.omega.steradians / 4) ** 2
            floor = wr_tangent_floor(rb.angles)
            if tsq < floor - 1e-12 * max(1.0, abs(floor)):
                fail("wr_tangent_floor", tsq - floor)
        else:
            if wr:
                fail("wr_implies_condition", 0.0)
            kbound = 4 * br.nu.nu
            if rb.angles.theta23 > kbound + 1e-9:
                fail("theta23_kbound", kbound - rb.angles.theta23)
            if not kbound < TWO_PI_3:
                fail("kbound_below_2pi3", TWO_PI_3 - kbound)
            if omega < br.lower - BOUND_TOL:
                fail("non_wr_lower_bound", omega - br.lower)
    if len(branches) > 1:
        rep.notes.append(f"[{index}] branch differs across minimal bases: {sorted(b.value for b in branches)}")
    rb = normalize_minimal_basis(gram)
    if omegas:
        # headline extremes follow the canonical basis; *_any spans every minimal basis
        canon = lhuilier_solid_angle(rb.angles).normalized
        rep.extremes = {
            "min_omega": canon,
            "max_omega": canon,
            "min_omega_any": min(omegas),
            "max_omega_any": max(omegas),
        }
        if wr:
            rep.extremes.update({"min_omega_wr": canon, "max_omega_wr": canon})
    rep.extremes["n_mc_outliers"] = 0
    if mc_every and index % mc_every == 0:
        est, stderr = monte_carlo_solid_angle(rb.gram, mc_samples, seed + index)
        exact = lhuilier_solid_angle(rb.angles).normalized
        if abs(est.normalized - exact) > MC_SIGMAS * stderr:
            rep.extremes["n_mc_outliers"] = 1
            rep.notes.append(f"[{index}] monte carlo {est.normalized!r} vs {exact!r} (stderr {stderr!r})")
    return rep


def verify_theorem_main3(
    model: LatticeModel,
    n: int,
    seed: int,
    workers: Optional[int] = 1,
    mc_fraction: float = 0.01,
    mc_samples: int = 20000,
) -> VerificationReport:
    """Population check of the solid-angle bounds for normalized minimal bases."""
    if n < 1:
        raise ValueError("n must be positive")
    mc_every = int(round(1 / mc_fraction)) if mc_fraction > 0 else 0
    parts = _run_chunked(_main3_chunk, (model, seed, mc_every, mc_samples), n, _workers(workers))
    rep = parts[0]
    for part in parts[1:]:
        rep = rep.merge(part)
    rep.name = f"main3:{model.kind.value}"
    rep.seed = seed
    if rep.extremes.get("n_mc_outliers", 0) > MC_MAX_OUTLIERS:
        rep.violations.append(
            Violation(-1, "monte_carlo", float(rep.extremes["n_mc_outliers"]), "population-level")
        )
    if "min_omega_wr" in rep.extremes:
        rep.extremes["gap_to_lower"] = rep.extremes["min_omega_wr"] - FCC_OMEGA
        rep.extremes["gap_to_upper"] = CUBE_OMEGA - rep.extremes["max_omega_wr"]
    return rep


def all_minimal_triples(gram: GramMatrix) -> list[GramMatrix]:
    """Gram matrices of every independent triple of canonical minimal vectors."""
    half = minimal_vector_set(gram).canonical_half()
    return [gram.transform(t) for t in independent_triples(half)]


def _sp_member(seed: int, index: int) -> tuple[BasisMatrix, str]:
    if index == 0:
        return gen_lattice(LatticeModel(ModelKind.NEAR_FCC), seed, index), "fcc"
    if index == 1:
        return gen_lattice(LatticeModel(ModelKind.NEAR_CUBIC), seed, index), "cubic"
    return gen_lattice(LatticeModel(ModelKind.WR_REJECTION), seed, index), "wr"


def check_sp_area_lattice(basis: BasisMatrix, index: int = 0, seed: int = 0, label: str = "") -> VerificationReport:
    rep = VerificationReport("sparea", 1, seed)
    text = basis.to_text()
    gram = gram_from_basis(basis)
    mvs = minimal_vector_set(gram)
    scale = Fraction(1) / mvs.norm_sq if gram.exact else 1.0 / mvs.norm_sq
    unit = gram.scaled(scale)
    areas = []
    for tri in all_minimal_triples(unit):
        rep.evaluations += 1
        angles = vertex_angles(tri)
        if not check_pairwise_angle_bounds(angles):
            rep.violations.append(Violation(index, "plane_angles", 0.0, text))
        try:
            area = lhuilier_solid_angle(angles).steradians
        except SolidAngleError as exc:
            rep.violations.append(Violation(index, f"area:{type(exc).__name__}", float("nan"), text))
            continue
        areas.append(area)
        if area < FCC_STERADIANS - 1e-9:
            rep.violations.append(Violation(index, "sp_area_lower", area - FCC_STERADIANS, text))
    if areas:
        lo = min(areas)
        rep.extremes = {"min_area": lo, "max_area": max(areas), "argmin_index": index, "argmin_label": label}
    return rep


def _sp_chunk(seed: int, start: int, stop: int):
    rep = VerificationReport("sparea", 0, seed)
    for index in range(start, stop):
        basis, label = _sp_member(seed, index)
        part = check_sp_area_lattice(basis, index, seed, label)
        better = "min_area" in part.extremes and (
            "min_area" not in rep.extremes or part.extremes["min_area"] < rep.extremes["min_area"]
        )
        merged = rep.merge(part)
        if not better and "argmin_index" in rep.extremes:
            merged.extremes["argmin_index"] = rep.extremes["argmin_index"]
            merged.extremes["argmin_label"] = rep.extremes["argmin_label"]
        rep = merged
    return rep


def verify_sp_area(n: int, seed: int, workers: Optional[int] = 1) -> VerificationReport:
    """Every spherical triangle on normalized minimal vectors has area >= the fcc value.

    Member 0 is the exact fcc lattice, member 1 exact Z^3, the rest are drawn
    from WR_REJECTION.
    """
    if n < 1:
        raise ValueError("n must be positive")
    parts = _run_chunked(_sp_chunk, (seed,), n, _workers(workers))
    rep = parts[0]
    for part in parts[1:]:
        keep = rep.extremes.get("min_area")
        arg = (rep.extremes.get("argmin_index"), rep.extremes.get("argmin_label"))
        better = "min_area" in part.extremes and (keep is None or part.extremes["min_area"] < keep)
        rep = rep.merge(part)
        if not better:
            rep.extremes["argmin_index"], rep.extremes["argmin_label"] = arg
    rep.name = "sparea"
    rep.seed = seed
    if "min_area" in rep.extremes:
        rep.extremes["gap_to_bound"] = rep.extremes["min_area"] - FCC_STERADIANS
    return rep


# ---------------------------------------------------------------------------
# Monotonicity scans
# ---------------------------------------------------------------------------


def lhuilier_product(x, y, z):
    """tan(a+c) tan(a-c) tan(c+b) tan(c-b) with a=(x+y)/4, b=(x-y)/4, c=z/4."""
    a, b, c = (x + y) / 4, (x - y) / 4, z / 4
    return np.tan(a + c) * np.tan(a - c) * np.tan(c + b) * np.tan(c - b)


def upper_bound_rhs(x, y):
    """Right side of the upper-bound estimate after setting beta = 0."""
    return np.tan(3 * np.pi / 8 - x / 4 + y / 4) * np.tan(np.pi / 8 - x / 4 - y / 4) * np.tan(np.pi / 8 + y / 4) ** 2


def upper_bound_rhs_x0(y):
    """``upper_bound_rhs`` at x = 0."""
    return np.tan(3 * np.pi / 8 + y / 4) * np.tan(np.pi / 8 - y / 4) * np.tan(np.pi / 8 + y / 4) ** 2


def z_interval(domain: ScanId, x: float, y: float) -> tuple[float, float]:
    """The z-range scanned in cell (x, y); raises EmptyDomain when it has no interior."""
    domain = ScanId(domain)
    if domain is ScanId.A_SOLID3:
        lo, hi = math.pi / 3, min(TWO_PI_3, math.acos(max(-1.0, math.cos(x) + math.cos(y) - 1)))
    elif domain is ScanId.B_SOLIDOTHER:
        lo, hi = math.acos(max(-1.0, -1 + math.cos(x) + math.cos(y))), TWO_PI_3
    elif domain is ScanId.C_SPAREA:
        if y > x:
            raise EmptyDomain(f"y={y} > x={x}")
        lo, hi = x, TWO_PI_3
    else:
        raise ValueError(f"domain {domain.value} has no z axis")
    if not hi > lo:
        raise EmptyDomain(f"empty z-interval [{lo}, {hi}] at x={x}, y={y}")
    return lo, hi


def _xy_grid(domain: ScanId, g: int) -> tuple[np.ndarray, np.ndarray]:
    if domain is ScanId.C_SPAREA:
        xs = np.linspace(np.pi / 2, 2 * np.pi / 3, g)
        X = np.repeat(xs[:, None], g, axis=1)
        Y = np.pi / 3 + (X - np.pi / 3) * np.linspace(0, 1, g)[None, :]
        return X, Y
    xs = np.linspace(np.pi / 3, np.pi / 2, g)
    return np.meshgrid(xs, xs, indexing="ij")


def _z_bounds(domain: ScanId, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cx, cy = np.cos(X), np.cos(Y)
    if domain is ScanId.A_SOLID3:
        return np.full_like(X, np.pi / 3), np.minimum(TWO_PI_3, np.arccos(np.maximum(-1.0, cx + cy - 1)))
    if domain is ScanId.B_SOLIDOTHER:
        return np.arccos(np.maximum(-1.0, -1 + cx + cy)), np.full_like(X, TWO_PI_3)
    return X.copy(), np.full_like(X, TWO_PI_3)


def scan_monotonicity(domain: ScanDomain) -> VerificationReport:
    """Check the sign of forward differences of the L'Huilier product on a grid."""
    g = domain.grid
    sid = domain.id
    rep = VerificationReport(f"scan:{sid.value}", 0, None)
    if sid in (ScanId.A_SOLID3, ScanId.B_SOLIDOTHER, ScanId.C_SPAREA):
        X, Y = _xy_grid(sid, g)
        lo, hi = _z_bounds(sid, X, Y)
        valid = hi > lo
        t = np.linspace(0.0, 1.0, g)
        Z = lo[..., None] + (hi - lo)[..., None] * t
        with np.errstate(invalid="ignore", divide="ignore"):
            F = lhuilier_product(X[..., None], Y[..., None], Z)
        d = np.diff(F, axis=-1)
        signed = -d if sid is ScanId.B_SOLIDOTHER else d
        worst = np.where(valid, signed.min(axis=-1), np.inf)
        rep.population = int(valid.size)
        rep.skipped = int((~valid).sum())
        rep.evaluations = int(valid.sum()) * g
        bad = np.argwhere(worst < -SCAN_TOL)
        for i, j in bad:
            rep.violations.append(
                Violation(int(i * g + j), "monotone_in_z", float(worst[i, j]), f"x={X[i, j]!r} y={Y[i, j]!r}")
            )
        finite = worst[valid]
        rep.extremes = {"min_signed_difference": float(finite.min()) if finite.size else None}
        return rep
    if sid is ScanId.D_XDECREASE:
        xs = np.linspace(0.0, np.pi / 3, g)
        ys = np.linspace(-np.pi / 6, np.pi / 6, g)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        F = upper_bound_rhs(X, Y)
        signed = -np.diff(F, axis=0)
        worst = signed.min(axis=0)
        rep.population = g
        rep.evaluations = g * g
        for j in np.argwhere(worst < -SCAN_TOL).ravel():
            rep.violations.append(Violation(int(j), "decreasing_in_x", float(worst[j]), f"y={ys[j]!r}"))
        rep.extremes = {"min_signed_difference": float(worst.min())}
        return rep
    ys = np.linspace(-np.pi / 6, np.pi / 6, g)
    d = np.diff(upper_bound_rhs_x0(ys))
    rep.population = 1
    rep.evaluations = g
    if d.min() < -SCAN_TOL:
        rep.violations.append(Violation(int(np.argmin(d)), "increasing_in_y", float(d.min()), "x=0"))
    rep.extremes = {"min_signed_difference": float(d.min())}
    return rep
