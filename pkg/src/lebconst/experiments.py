"""Polytope families, the Lebesgue-constant pipeline, scaling studies,
asymptotic fits, and Hardy-sum diagnostics.

A study instantiates a family at a list of integer scales, runs the
eliminate -> signed forms -> quadrature pipeline per member, and persists
one CSV row per measurement with a JSON sidecar describing the exact
configuration, so interrupted runs resume and identical reruns reuse rows.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import (
    BudgetExceeded,
    DegeneratePolytope,
    DimensionTooLarge,
    InsufficientData,
    MissingInscribedBox,
)
from .fmelim import eliminate, lower_index, nested_count, to_signed_prefix_forms, upper_index
from .geometry import (
    HalfSpace,
    HRep,
    as_hrep,
    bounding_box,
    lattice_points,
    load_polytope,
    triangulate,
    vrep_from_hrep,
)
from .kernel import FormKernel, eval_direct, eval_forms
from .quadrature import NormEstimate, QuadratureConfig, l2_exact, torus_lp_norm

# enumeration oracle engaged only below this bounding-box cell count
_ENUM_CELL_CAP = 4_000_000
_CROSS_CHECK_CAP = 20_000
_CROSS_CHECK_POINTS = 32
_CROSS_CHECK_SEED = 1729

FAMILY_KINDS = ("box", "simplex", "rhomb", "tpoly", "polygon", "dilation", "custom")

FIT_MODELS = ("oned", "skopina", "kuznetsova", "logprod", "power")


@dataclass(frozen=True)
class FamilyMember:
    hrep: HRep
    scale: int
    pvec: Tuple[int, ...]
    mvec: Optional[Tuple[int, ...]]
    params: str


@dataclass(frozen=True)
class FamilySpec:
    """Parametric polytope family indexed by an integer scale.

    kinds:
      box       [0, a_1 n] x ... x [0, a_d n]
      simplex   xi >= 0, sum xi_j / (a_j n) <= 1
      rhomb     |xi_1 - n_1|/n_1 + |xi_2 - n_2|/n_2 <= 1 with (n_1, n_2) =
                (a_1 n, a_2 n); the diamond is translated into the
                nonnegative orthant, which leaves |D| unchanged
      tpoly     xi >= 0, xi_i/n_i + xi_j/n_j <= 1 for all pairs i < j
      polygon   n-fold dilation of the triangle with vertices (0,0), (2,1),
                (1,2): side slopes 1/2, 2, -1 are rational, no two sides are
                parallel, and the body is an integer translate of a triangle
                holding the origin in its interior, so |D| matches that
                classical dilation family
      dilation  polytope file with bounds dilated by the scale
      custom    polytope file dilated by the scale (conventionally run at 1)

    aspect holds the per-axis multipliers a_j (default all ones; the rhomb
    defaults to (1, 2); the polygon shape is fixed).  Inscribed-box data for
    the lower bound ratio is defined for box (m = n), simplex (m_j = n_j // d)
    and tpoly (m_j = n_j // 2); the other kinds leave it unset.
    """

    kind: str
    dim: int = 2
    aspect: Tuple[int, ...] = ()
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind in ("rhomb", "polygon") and self.dim != 2:
            raise ValueError(f"family {self.kind!r} is two-dimensional")
        if self.kind in ("dilation", "custom") and not self.path:
            raise ValueError(f"family {self.kind!r} needs a polytope file path")
        if self.kind == "polygon" and self.path:
            raise ValueError("the polygon family is built in; use kind 'dilation' for files")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.aspect:
            if self.kind == "polygon":
                raise ValueError("the polygon family has a fixed shape")
            if len(self.aspect) != self.dim:
                raise ValueError("aspect length must equal dim")
            if any(a < 1 for a in self.aspect):
                raise ValueError("aspect entries must be positive integers")
        object.__setattr__(self, "aspect", tuple(int(a) for a in self.aspect))

    def sides(self, scale: int) -> Tuple[int, ...]:
        aspect = self.aspect or ((1, 2) if self.kind == "rhomb" else (1,) * self.dim)
        return tuple(a * scale for a in aspect)

    def instantiate(self, scale: int) -> FamilyMember:
        if scale < 1:
            raise ValueError("scale must be a positive integer")
        if self.kind in ("dilation", "custom"):
            base = as_hrep(load_polytope(self.path))
            rows = tuple(
                HalfSpace(r.coeffs, r.bound * scale, r.strict) for r in base.rows
            )
            h = HRep(base.dim, rows)
            pvec = tuple(int(math.floor(b)) for b in bounding_box(h))
            return FamilyMember(h, scale, pvec, None, _params_string(scale, pvec))
        d = self.dim
        nonneg = [_axis_lower(d, j) for j in range(d)]
        if self.kind == "polygon":
            rows = nonneg + [
                HalfSpace((Fraction(1), Fraction(-2)), Fraction(0)),
                HalfSpace((Fraction(-2), Fraction(1)), Fraction(0)),
                HalfSpace((Fraction(1), Fraction(1)), Fraction(3 * scale)),
            ]
            h = HRep(d, tuple(rows))
            pvec = (scale,)
            return FamilyMember(h, scale, pvec, None, _params_string(scale, pvec))
        n = self.sides(scale)
        if self.kind == "box":
            rows = nonneg + [_axis_upper(d, j, n[j]) for j in range(d)]
            mvec: Optional[Tuple[int, ...]] = n
        elif self.kind == "simplex":
            coeffs = tuple(Fraction(1, n[j]) for j in range(d))
            rows = nonneg + [HalfSpace(coeffs, Fraction(1))]
            mvec = tuple(nj // d for nj in n)
        elif self.kind == "tpoly":
            rows = list(nonneg)
            for i in range(d):
                for j in range(i + 1, d):
                    coeffs = tuple(
                        Fraction(1, n[i]) if t == i else Fraction(1, n[j]) if t == j else Fraction(0)
                        for t in range(d)
                    )
                    rows.append(HalfSpace(coeffs, Fraction(1)))
            mvec = tuple(nj // 2 for nj in n)
        else:  # rhomb
            n1, n2 = n
            rows = nonneg + [
                HalfSpace((Fraction(s1, n1), Fraction(s2, n2)), Fraction(1 + s1 + s2))
                for s1 in (1, -1)
                for s2 in (1, -1)
            ]
            mvec = None
        h = HRep(d, tuple(rows))
        return FamilyMember(h, scale, n, mvec, _params_string(scale, n))

    def label(self) -> str:
        if self.path:
            return f"{self.kind}:{Path(self.path).name}"
        if self.kind == "polygon":
            return "polygon"
        aspect = self.aspect or ((1, 2) if self.kind == "rhomb" else (1,) * self.dim)
        tag = "x".join(str(a) for a in aspect)
        return f"{self.kind}:{tag}"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "aspect": list(self.aspect),
            "path": self.path,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FamilySpec":
        return cls(
            kind=data["kind"],
            dim=int(data.get("dim", 2)),
            aspect=tuple(data.get("aspect") or ()),
            path=data.get("path"),
        )


def _axis_lower(dim: int, j: int) -> HalfSpace:
    coeffs = tuple(Fraction(-1) if t == j else Fraction(0) for t in range(dim))
    return HalfSpace(coeffs, Fraction(0))


def _axis_upper(dim: int, j: int, bound) -> HalfSpace:
    coeffs = tuple(Fraction(1) if t == j else Fraction(0) for t in range(dim))
    return HalfSpace(coeffs, Fraction(bound))


def _params_string(scale: int, pvec: Sequence[int]) -> str:
    parts = [f"scale={scale}"] + [f"n{j + 1}={v}" for j, v in enumerate(pvec)]
    return ";".join(parts)


def _parse_params(params: str) -> Tuple[int, Tuple[int, ...]]:
    scale = 0
    pvec: List[int] = []
    for part in params.split(";"):
        if not part:
            continue
        key, _, val = part.partition("=")
        if key == "scale":
            scale = int(val)
        elif key.startswith("n"):
            pvec.append(int(val))
    return scale, tuple(pvec)


# ---------------------------------------------------------------------------
# measurement pipeline


@dataclass(frozen=True)
class MeasurementRecord:
    family: str
    params: str
    p: float
    value: float
    error: float
    s: int
    nvec: Tuple[int, ...]
    count: int
    seconds: float
    scale: int = 0
    pvec: Tuple[int, ...] = ()
    mvec: Optional[Tuple[int, ...]] = None
    converged: bool = True


def _triangulation_size(h: HRep) -> int:
    try:
        return len(triangulate(vrep_from_hrep(h)))
    except (DegeneratePolytope, DimensionTooLarge):
        return 0


def _cross_check(pts, forms, dim: int) -> None:
    rng = np.random.default_rng(_CROSS_CHECK_SEED)
    xs = rng.uniform(-math.pi, math.pi, size=(_CROSS_CHECK_POINTS, dim))
    for x in xs:
        direct = eval_direct(pts, x)
        nested = eval_forms(forms, tuple(float(c) for c in x))
        if abs(nested - direct) > 1e-9 * max(1.0, abs(direct)):
            raise RuntimeError(
                f"nested evaluation deviates from direct sum by "
                f"{abs(nested - direct):.3e} at x = {tuple(x)}"
            )


def lebesgue_constant(
    h: HRep,
    p: float,
    cfg: Optional[QuadratureConfig] = None,
) -> MeasurementRecord:
    """L_p Lebesgue constant of the exponential sum over h's lattice points.

    Pipeline: eliminate -> signed prefix forms -> tensor-grid quadrature of
    the closed-form kernel.  The lattice count is taken from an independent
    bounding-box enumeration when that is affordable (and checked against
    the nested count), otherwise from exact per-branch counting.  For
    point counts up to 2e4 the closed-form kernel is cross-checked against
    the direct exponential sum at 32 fixed random torus points.  p = 2 is
    returned exactly via Parseval.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    t0 = time.perf_counter()
    cfg = cfg or QuadratureConfig()
    box = bounding_box(h)
    nvec = tuple(int(math.floor(b)) for b in box)
    branches = eliminate(h)
    forms = [f for ns in branches for f in to_signed_prefix_forms(ns)]
    count = sum(nested_count(ns) for ns in branches)
    cells = math.prod(n + 1 for n in nvec)
    pts = None
    if cells <= _ENUM_CELL_CAP:
        pts = lattice_points(h)
        if len(pts) != count:
            raise RuntimeError(
                f"nested count {count} disagrees with enumerated count {len(pts)}"
            )
    if pts is not None and 0 < count <= _CROSS_CHECK_CAP:
        _cross_check(pts, forms, h.dim)
    if p == 2:
        est = NormEstimate(l2_exact(count), 0.0, True, 0, 0, 2.0)
    elif count == 0:
        est = NormEstimate(0.0, 0.0, True, 0, 0, float(p))
    else:
        est = torus_lp_norm(FormKernel(forms, h.dim), nvec, p, cfg)
    return MeasurementRecord(
        family="custom",
        params=_params_string(0, nvec),
        p=float(p),
        value=est.value,
        error=est.error,
        s=_triangulation_size(h),
        nvec=nvec,
        count=count,
        seconds=time.perf_counter() - t0,
        pvec=nvec,
        converged=est.converged,
    )


def _budget_record(h: HRep, p: float, t0: float) -> MeasurementRecord:
    """Metadata-only record for a member whose quadrature ran out of budget."""
    nvec = tuple(int(math.floor(b)) for b in bounding_box(h))
    count = sum(nested_count(ns) for ns in eliminate(h))
    return MeasurementRecord(
        family="custom",
        params=_params_string(0, nvec),
        p=float(p),
        value=math.nan,
        error=math.inf,
        s=_triangulation_size(h),
        nvec=nvec,
        count=count,
        seconds=time.perf_counter() - t0,
        pvec=nvec,
        converged=False,
    )


# ---------------------------------------------------------------------------
# persistence

_CSV_HEAD = ("family", "params", "p", "value", "error", "s")
_CSV_TAIL = ("count", "seconds")


def _csv_header(dim: int) -> List[str]:
    return list(_CSV_HEAD) + [f"n{j + 1}" for j in range(dim)] + list(_CSV_TAIL)


def _record_row(r: MeasurementRecord) -> List[str]:
    return (
        [r.family, r.params, repr(float(r.p)), repr(float(r.value)),
         repr(float(r.error)), str(r.s)]
        + [str(n) for n in r.nvec]
        + [str(r.count), f"{r.seconds:.3f}"]
    )


def write_records(path, records: Sequence[MeasurementRecord]) -> None:
    if not records:
        raise ValueError("nothing to write")
    dim = len(records[0].nvec)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(_csv_header(dim))
        for r in records:
            writer.writerow(_record_row(r))


def read_records(path) -> List[MeasurementRecord]:
    """Read study rows back; scale and parameters are recovered from the
    params column, inscribed-box data is not persisted."""
    records = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        dim = len(header) - len(_CSV_HEAD) - len(_CSV_TAIL)
        if dim < 1 or header != _csv_header(dim):
            raise ValueError(f"unrecognized CSV header in {path}")
        for row in reader:
            family, params = row[0], row[1]
            p, value, error = float(row[2]), float(row[3]), float(row[4])
            s = int(row[5])
            nvec = tuple(int(v) for v in row[6:6 + dim])
            count = int(row[6 + dim])
            seconds = float(row[7 + dim])
            scale, pvec = _parse_params(params)
            records.append(MeasurementRecord(
                family, params, p, value, error, s, nvec, count, seconds,
                scale=scale, pvec=pvec, mvec=None,
                converged=math.isfinite(value),
            ))
    return records


class _Store:
    """Append-only CSV store keyed by the params column, with a JSON
    sidecar freezing the configuration; a sidecar mismatch starts fresh."""

    def __init__(self, path, fam: FamilySpec, p: float, cfg: QuadratureConfig, dim: int):
        self.path = Path(path)
        self.sidecar = self.path.with_suffix(".json")
        self.dim = dim
        # jobs does not affect values (deterministic tile reduction)
        self.config = {
            "version": __version__,
            "family": fam.to_json(),
            "p": float(p),
            "quadrature": {
                "oversample": cfg.oversample,
                "max_levels": cfg.max_levels,
                "tol": cfg.tol,
                "budget": cfg.budget,
                "tile_cells": cfg.tile_cells,
                "grid_offset": cfg.grid_offset,
            },
        }

    def load(self) -> Dict[str, MeasurementRecord]:
        if self.path.exists() and self.sidecar.exists():
            try:
                stored = json.loads(self.sidecar.read_text())
            except json.JSONDecodeError:
                stored = None
            if stored == self.config:
                return {r.params: r for r in read_records(self.path)}
        if self.path.parent and not self.path.parent.exists():
            self.path.parent.mkdir(parents=True)
        with open(self.path, "w", newline="") as f:
            csv.writer(f).writerow(_csv_header(self.dim))
        self.sidecar.write_text(json.dumps(self.config, indent=2, sort_keys=True) + "\n")
        return {}

    def append(self, record: MeasurementRecord) -> None:
        with open(self.path, "a", newline="") as f:
            csv.writer(f).writerow(_record_row(record))
            f.flush()


def scale_study(
    fam: FamilySpec,
    scales: Sequence[int],
    p: float,
    cfg: Optional[QuadratureConfig] = None,
    out_csv=None,
    jobs: int = 1,
) -> List[MeasurementRecord]:
    """One measurement per scale, persisted incrementally when out_csv is
    given.  A member exceeding the quadrature budget yields a NaN-valued
    metadata record rather than aborting the study."""
    scales = [int(n) for n in scales]
    if not scales:
        raise ValueError("empty scale list")
    if scales != sorted(set(scales)) or scales[0] < 1:
        raise ValueError("scales must be distinct positive integers in ascending order")
    cfg = cfg or QuadratureConfig()
    members = [fam.instantiate(n) for n in scales]
    results: Dict[str, MeasurementRecord] = {}
    store = None
    if out_csv is not None:
        store = _Store(out_csv, fam, p, cfg, members[0].hrep.dim)
        cached = store.load()
        # the CSV does not carry the inscribed box; rebuild it from the family
        results = {
            m.params: replace(
                cached[m.params], scale=m.scale, pvec=m.pvec, mvec=m.mvec
            )
            for m in members
            if m.params in cached
        }
    todo = [m for m in members if m.params not in results]

    def run(member: FamilyMember) -> MeasurementRecord:
        t0 = time.perf_counter()
        try:
            rec = lebesgue_constant(member.hrep, p, cfg)
        except BudgetExceeded:
            rec = _budget_record(member.hrep, p, t0)
        return replace(
            rec,
            family=fam.kind,
            params=member.params,
            scale=member.scale,
            pvec=member.pvec,
            mvec=member.mvec,
        )

    if jobs > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            finished = pool.map(run, todo)
            for rec in finished:
                results[rec.params] = rec
                if store:
                    store.append(rec)
    else:
        for member in todo:
            rec = run(member)
            results[rec.params] = rec
            if store:
                store.append(rec)
    return [results[m.params] for m in members]


# ---------------------------------------------------------------------------
# fits and diagnostics


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: Tuple[float, ...]
    residual: float
    window: Tuple[int, int]  # (minimum scale, records used)


def _design_row(model: str, r: MeasurementRecord) -> Optional[List[float]]:
    if model == "oned":
        if r.scale < 1:
            return None
        return [1.0, math.log(r.scale)]
    if model == "skopina":
        if r.scale < 2:
            return None
        return [math.log(r.scale) ** 2]
    if model == "kuznetsova":
        if len(r.pvec) < 2 or min(r.pvec[:2]) < 2:
            return None
        l1, l2 = math.log(r.pvec[0]), math.log(r.pvec[1])
        return [l1 * l2, l1 ** 2]
    if model == "logprod":
        return [math.prod(math.log(n + 1) for n in r.nvec)]
    if model == "power":
        return [math.prod((n + 1) ** (1.0 - 1.0 / r.p) for n in r.nvec)]
    raise ValueError(f"unknown fit model {model!r}")


def fit_log_model(
    records: Sequence[MeasurementRecord],
    model: str,
    min_scale: int = 32,
) -> FitResult:
    """Ordinary least squares of measured values against one growth model.

    Models (natural logarithms throughout):
      oned        a + b log n
      skopina     b log^2 n
      kuznetsova  b log n_1 log n_2 + c log^2 n_1
      logprod     b prod_j log(n_j + 1)
      power       b prod_j (n_j + 1)^(1 - 1/p)

    Scales below min_scale are dropped to reduce lower-order contamination
    of the leading term.
    """
    rows: List[List[float]] = []
    ys: List[float] = []
    for r in records:
        if not math.isfinite(r.value) or r.scale < min_scale:
            continue
        row = _design_row(model, r)
        if row is None:
            continue
        rows.append(row)
        ys.append(r.value)
    ncol = 2 if model in ("oned", "kuznetsova") else 1
    if len(rows) < max(3, ncol):
        raise InsufficientData(
            f"model {model!r} needs at least 3 usable records above scale "
            f"{min_scale}, got {len(rows)}"
        )
    design = np.asarray(rows, dtype=float)
    y = np.asarray(ys, dtype=float)
    coef, _res, _rank, _sv = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.linalg.norm(y - design @ coef))
    return FitResult(model, tuple(float(c) for c in coef), residual, (min_scale, len(rows)))


def hardy_lower_bound(h: HRep, p: float) -> float:
    """Hardy-sum diagnostic sum_{k in P} prod_l (k_l + 1)^(p-2), rooted by
    1/p for p > 1.  Lower-bounds L_p up to an absolute constant; inner sums
    collapse through a cumulative table, so only prefix cells are walked."""
    if p < 1:
        raise ValueError("p must be >= 1")
    q = float(p) - 2.0
    nvec = tuple(int(math.floor(b)) for b in bounding_box(h))
    m = max(nvec) + 1
    table = np.zeros(m + 1)
    table[1:] = np.cumsum((np.arange(m) + 1.0) ** q)
    total = 0.0
    for ns in eliminate(h):
        d = ns.dim

        def rec(s: int, prefix: Tuple[int, ...], weight: float) -> float:
            lo = max(lower_index(ns.lowers[s], prefix), 0)
            hi = upper_index(ns.uppers[s], prefix)
            if hi < lo:
                return 0.0
            if s == d - 1:
                return weight * float(table[hi + 1] - table[lo])
            return math.fsum(
                rec(s + 1, prefix + (k,), weight * float(table[k + 1] - table[k]))
                for k in range(lo, hi + 1)
            )

        total += rec(0, (), 1.0)
    return total if p == 1 else total ** (1.0 / p)


@dataclass(frozen=True)
class RatioRow:
    params: str
    scale: int
    lower: float
    upper: float


@dataclass(frozen=True)
class RatioTable:
    rows: Tuple[RatioRow, ...]
    lower_band: Tuple[float, float]
    upper_band: Tuple[float, float]


def bound_ratios(records: Sequence[MeasurementRecord], s: int) -> RatioTable:
    """Two-sided bound diagnostics: value / prod log(m_j + 1) against the
    inscribed box and value / (s * prod log(n_j + 1)) against the bounding
    box scaled by the triangulation size."""
    if s < 1:
        raise ValueError("triangulation size must be positive")
    rows: List[RatioRow] = []
    for r in records:
        if not math.isfinite(r.value):
            continue
        if r.mvec is None:
            raise MissingInscribedBox(
                f"family {r.family!r} does not define an inscribed box"
            )
        lo_den = math.prod(math.log(mj + 1) for mj in r.mvec)
        hi_den = s * math.prod(math.log(nj + 1) for nj in r.nvec)
        lower = r.value / lo_den if lo_den > 0 else math.inf
        upper = r.value / hi_den if hi_den > 0 else math.inf
        rows.append(RatioRow(r.params, r.scale, lower, upper))
    if not rows:
        raise InsufficientData("no finite records to form ratios")
    lowers = [row.lower for row in rows]
    uppers = [row.upper for row in rows]
    return RatioTable(tuple(rows), (min(lowers), max(lowers)), (min(uppers), max(uppers)))


# ---------------------------------------------------------------------------
# random instances for identity suites


def random_hrep(rng: np.random.Generator, dim: int, max_degree: int = 32) -> HRep:
    """Random bounded rational polytope in R_+^d that is never empty.

    A per-axis box fixes boundedness; up to two extra rational cuts pass on
    the feasible side of a lattice anchor point inside the box, so the
    anchor stays feasible (strictly, for strict rows)."""
    sides = [int(rng.integers(1, max_degree + 1)) for _ in range(dim)]
    anchor = [int(rng.integers(0, n + 1)) for n in sides]
    rows = [_axis_lower(dim, j) for j in range(dim)]
    rows += [_axis_upper(dim, j, sides[j]) for j in range(dim)]
    for _ in range(int(rng.integers(0, 3))):
        coeffs = [int(c) for c in rng.integers(-3, 4, size=dim)]
        if not any(coeffs):
            continue
        slack = Fraction(int(rng.integers(0, 5)), int(rng.integers(1, 4)))
        bound = sum(c * a for c, a in zip(coeffs, anchor)) + slack
        strict = bool(slack > 0 and rng.random() < 0.25)
        rows.append(HalfSpace(tuple(Fraction(c) for c in coeffs), bound, strict))
    return HRep(dim, tuple(rows))
