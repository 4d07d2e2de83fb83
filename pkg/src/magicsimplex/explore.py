"""Slice scans, witness extremization and the multipartite comparison."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .config import ExplorerConfig
from .criteria import SimplexEvaluator, separable_bound
from .mubs import MubSet, build_complete_mub, build_mubs
from .states import (
    FamilyParams,
    family_basis,
    family_coefficient_array,
    family_coefficients,
    family_rho,
    multipartite_family,
    multipartite_vertex,
)

log = logging.getLogger(__name__)

LABEL_MODES = ("max", "identity")


@lru_cache(maxsize=None)
def _evaluator(d: int, m: int | None, labels: str) -> SimplexEvaluator:
    if labels not in LABEL_MODES:
        raise ValueError(f"labeling mode must be one of {LABEL_MODES}, got {labels!r}")
    mubs = build_mubs(d)
    if m is not None:
        mubs = mubs.subset(m)
    return SimplexEvaluator(d, mubs, maximize_labels=(labels == "max"))


def evaluator(d: int, m: int | None = None, labels: str = "max") -> SimplexEvaluator:
    return _evaluator(d, m, labels)


@dataclass
class ScanRecord:
    q1: float
    q2: float
    positive: bool
    ppt: bool
    I: float
    detected: bool

    @property
    def bound_entangled(self) -> bool:
        return self.positive and self.ppt and self.detected

    def to_json(self) -> dict:
        out = asdict(self)
        out["bound_entangled"] = self.bound_entangled
        return out


def evaluate_points(ev: SimplexEvaluator, q, tol: float = linalg.PSD_TOL):
    """Verdicts for parameter rows ``q[N, 4]``: (min coeff, min PT eig, I)."""
    c = family_coefficient_array(ev.d, np.atleast_2d(q))
    return c.min(axis=(-2, -1)), ev.min_pt_eigenvalue(c), ev.witness(c)


# -- positivity polygon of a (q1, q2) slice -------------------------------

def positivity_polygon(d: int, q3: float, q: float) -> np.ndarray:
    """Vertices of ``{(q1, q2): all Bell weights >= 0}`` at fixed ``q3, q``."""
    c0, A = family_basis(d)
    rows = (c0 + A[..., 2] * q3 + A[..., 3] * q).ravel()
    G = np.stack([A[..., 0].ravel(), A[..., 1].ravel()], axis=1)
    # constraint: rows + G @ (q1, q2) >= 0; unique half-planes only
    half = np.unique(np.round(np.column_stack([G, rows]), 14), axis=0)
    verts = []
    for (a1, b1, r1), (a2, b2, r2) in itertools.combinations(half, 2):
        det = a1 * b2 - a2 * b1
        if abs(det) < 1e-14:
            continue
        x = np.linalg.solve([[a1, b1], [a2, b2]], [-r1, -r2])
        if np.all(half[:, :2] @ x + half[:, 2] >= -1e-12):
            verts.append(x)
    if not verts:
        raise ValueError(f"no positive states in the slice q3 = {q3}, q = {q}")
    verts = np.unique(np.round(np.array(verts), 12), axis=0)
    centre = verts.mean(axis=0)
    order = np.argsort(np.arctan2(verts[:, 1] - centre[1], verts[:, 0] - centre[0]))
    return verts[order]


def slice_bounds(d: int, q3: float, q: float, pad: float = 0.05) -> tuple[float, float, float, float]:
    verts = positivity_polygon(d, q3, q)
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - pad * span, hi + pad * span
    return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])


# -- optimizer ------------------------------------------------------------

@dataclass
class OptimizeResult:
    d: int
    params: list[float]
    value: float
    I: float
    min_coefficient: float
    min_pt_eigenvalue: float
    labels: str
    evaluations: int = 0
    coarse_value: float = float("nan")

    def to_json(self) -> dict:
        out = asdict(self)
        out["argmin"] = dict(zip(("q1", "q2", "q3", "q"), self.params))
        return out


def boundary_scale(ev: SimplexEvaluator, directions) -> np.ndarray:
    """Largest ``t`` keeping ``rho(t x)`` positive and PPT, per direction row.

    Along the ray from the maximally mixed state both the Bell weights and
    the partial transpose are affine in ``t`` and equal ``1/d^2`` times the
    identity at ``t = 0``, so the exit point follows from the smallest weight
    change and the smallest eigenvalue of the partial transpose of the change.
    """
    d = ev.d
    X = np.atleast_2d(np.asarray(directions, dtype=float))
    _, A = family_basis(d)
    dc = np.einsum("klj,nj->nkl", A, X)
    base = 1.0 / d**2
    # directions in the null space of the weight map do not move the state
    moving = np.abs(dc).max(axis=(1, 2)) > 1e-12 * np.maximum(np.abs(X).max(axis=1), 1e-300)
    with np.errstate(divide="ignore"):
        worst_c = dc.min(axis=(1, 2))
        t_c = np.where(worst_c < 0, base / -np.minimum(worst_c, -1e-300), np.inf)
        worst_pt = ev.min_pt_eigenvalue(dc)
        t_pt = np.where(worst_pt < 0, base / -np.minimum(worst_pt, -1e-300), np.inf)
    return np.where(moving, np.minimum(t_c, t_pt), np.inf)


def _active_axes(d: int) -> list[int]:
    _, A = family_basis(d)
    return [j for j in range(4) if np.any(np.abs(A[..., j]) > 0)]


def _effective_directions(d: int) -> np.ndarray:
    """Orthonormal ``(4, r)`` basis of parameter directions that move the state."""
    _, A = family_basis(d)
    _, sv, vt = np.linalg.svd(A.reshape(d * d, 4), full_matrices=False)
    return vt[sv > 1e-12 * sv.max()].T


def _coarse_directions(d: int, config: ExplorerConfig) -> np.ndarray:
    axes = _active_axes(d)
    grids = []
    for j in range(4):
        lo, hi = config.search_box[j]
        grids.append(np.linspace(lo, hi, config.coarse_points) if j in axes else np.zeros(1))
    pts = np.array(list(itertools.product(*grids)))
    return pts[np.any(pts != 0, axis=1)]


def optimize_extreme(d: int, labels: str = "max", config: ExplorerConfig | None = None) -> OptimizeResult:
    """Minimize ``bound - I`` over positive PPT members of the family.

    Stage one scores a deterministic grid of directions in parameter space,
    each pushed to the boundary of the feasible set. Stage two runs
    Nelder-Mead over directions from the best distinct grid points, again
    projecting every iterate onto the boundary.
    """
    if d == 6 or d not in (2, 3, 4, 5, 7, 8, 9):
        raise ValueError(f"optimize_extreme needs a complete MUB set; d = {d} is unsupported")
    config = config or ExplorerConfig()
    ev = evaluator(d, None, labels)
    bound = ev.bound
    basis = _effective_directions(d)

    X = _coarse_directions(d, config)
    t = boundary_scale(ev, X)
    finite = np.isfinite(t)
    X, t = X[finite], t[finite]
    # drop components that leave the state unchanged
    Q = (X * t[:, None]) @ basis @ basis.T
    values = np.empty(len(Q))
    step = 20000
    for s in range(0, len(Q), step):
        values[s:s + step] = bound - ev.witness(family_coefficient_array(d, Q[s:s + step]))
    evals = len(Q)
    order = np.lexsort(tuple(Q[:, j] for j in reversed(range(4))) + (np.round(values, 12),))
    starts, seen = [], set()
    for i in order:
        key = tuple(np.round(Q[i], 6))
        if key in seen:
            continue
        seen.add(key)
        starts.append(i)
        if len(starts) == config.refine_starts:
            break
    coarse_best = float(values[order[0]])
    log.info("d=%d coarse stage: %d directions, best %.6f", d, evals, coarse_best)

    def project(y):
        x = basis @ y
        if not np.any(x):
            return None
        tt = boundary_scale(ev, x)[0]
        return None if not np.isfinite(tt) else x * tt

    def objective(y):
        nonlocal evals
        evals += 1
        qq = project(y)
        if qq is None:
            return np.inf
        return float(bound - ev.witness(family_coefficient_array(d, qq)))

    best_q, best_v = Q[order[0]], coarse_best
    for i in starts:
        y = basis.T @ Q[i]
        y = y / np.linalg.norm(y)
        v = values[i]
        for _ in range(3):
            res = minimize(objective, y, method="Nelder-Mead",
                           options={"xatol": config.refine_step_tol, "fatol": 1e-13,
                                    "maxfev": config.refine_max_evals,
                                    "initial_simplex": _simplex_around(y, 0.05)})
            if res.fun >= v - 1e-13:
                break
            y = res.x / np.linalg.norm(res.x)
            v = res.fun
        qq = project(y)
        if qq is not None and v < best_v - 1e-15:
            best_q, best_v = qq, v

    # fresh evaluation at the reported point
    q_final = np.asarray(best_q, dtype=float)
    min_c, min_pt, I = (float(a[0]) for a in evaluate_points(ev, q_final))
    if min_c < -1e-12 or min_pt < -1e-12:
        q_final = q_final * (1 - 1e-9)
        min_c, min_pt, I = (float(a[0]) for a in evaluate_points(ev, q_final))
    return OptimizeResult(d, [float(v) for v in q_final], bound - I, I, min_c, min_pt,
                          labels, evals, coarse_best)


def _simplex_around(y: np.ndarray, size: float) -> np.ndarray:
    n = len(y)
    simplex = np.tile(y, (n + 1, 1))
    for j in range(n):
        simplex[j + 1, j] += size
    return simplex


@lru_cache(maxsize=None)
def _cached_optimum(d: int, labels: str) -> OptimizeResult:
    return optimize_extreme(d, labels)


def default_slice_params(d: int, labels: str = "max") -> tuple[float, float]:
    """(q3, q) of the extremal point, used when a slice is not pinned."""
    r = _cached_optimum(d, labels)
    return r.params[2], r.params[3]


# -- slice scan -----------------------------------------------------------

def scan_slice(d: int, q3: float | None = None, q: float | None = None, grid: int = 200,
               bounds: tuple[float, float, float, float] | None = None,
               labels: str = "max", m: int | None = None,
               tol: float = linalg.PSD_TOL) -> list[ScanRecord]:
    """Classify every point of a ``grid x grid`` (q1, q2) slice, q1 outer."""
    if grid < 2:
        raise ValueError("grid must have at least 2 points per axis")
    if q3 is None or q is None:
        dq3, dq = default_slice_params(d, labels)
        q3 = dq3 if q3 is None else q3
        q = dq if q is None else q
    if bounds is None:
        bounds = slice_bounds(d, q3, q)
    ev = evaluator(d, m, labels)
    q1s = np.linspace(bounds[0], bounds[1], grid)
    q2s = np.linspace(bounds[2], bounds[3], grid)
    Q = np.array([(a, b, q3, q) for a in q1s for b in q2s])
    min_c, min_pt, I = evaluate_points(ev, Q, tol)
    bound = ev.bound
    return [
        ScanRecord(float(Q[i, 0]), float(Q[i, 1]), bool(min_c[i] >= -tol),
                   bool(min_pt[i] >= -tol), float(I[i]), bool(I[i] > bound))
        for i in range(len(Q))
    ]


# -- incomplete MUB sets -------------------------------------------------

@dataclass
class IncompleteReport:
    d: int
    m: int
    bound: float
    grid: int
    settings: list[list[float]]
    points_checked: int
    max_excess: float
    worst_point: list[float] | None
    detected_points: int

    @property
    def detects(self) -> bool:
        return self.detected_points > 0

    def to_json(self) -> dict:
        out = asdict(self)
        out["detects"] = self.detects
        return out


def default_incomplete_settings(d: int) -> list[tuple[float, float]]:
    if d == 6:
        return [(0.0, 0.0), (0.25, 0.05), (0.5, 0.1)]
    q3, q = default_slice_params(d)
    return [(q3, q), (0.5 * q3, 0.5 * q), (0.0, 0.0)]


def incomplete_mub_scan(d: int, m: int, grid: int = 200, settings=None,
                        tol: float = linalg.PSD_TOL, labels: str = "max") -> IncompleteReport:
    """Largest witness excess over positive PPT slice points with ``m`` bases."""
    available = len(build_mubs(d))
    if not 1 <= m <= available:
        raise ValueError(f"d = {d} has {available} bases available, requested m = {m}")
    settings = [tuple(s) for s in (settings or default_incomplete_settings(d))]
    ev = evaluator(d, m, labels)
    bound = separable_bound(m, d)
    checked, detected, max_excess, worst = 0, 0, -np.inf, None
    for q3, q in settings:
        recs = scan_slice(d, q3, q, grid, labels=labels, m=m, tol=tol)
        for r in recs:
            if r.positive and r.ppt:
                checked += 1
                excess = r.I - bound
                detected += excess > 0
                if excess > max_excess:
                    max_excess, worst = excess, [r.q1, r.q2, q3, q]
    return IncompleteReport(d, m, bound, grid, [list(s) for s in settings], checked,
                            float(max_excess), worst, int(detected))


# -- multipartite comparison ---------------------------------------------

def bipartitions(n_factors: int) -> list[tuple[int, ...]]:
    """Every nontrivial bipartition, named by the side not containing factor 0."""
    out = []
    rest = range(1, n_factors)
    for r in range(1, n_factors):
        for side in itertools.combinations(rest, r):
            out.append(tuple(side))
    return out


def default_cut(n: int, site: int = 1) -> tuple[int, ...]:
    """The Weyl-carrying factor on its own, split from the other ``2n - 1``."""
    if not 0 <= site < 2 * n:
        raise ValueError(f"site {site} out of range for {2 * n} factors")
    return (site,)


@dataclass
class MultiReport:
    d: int
    n: int
    samples: int
    cuts: list[list[int]]
    positivity_agreement: float
    ppt_agreement: dict
    disagreements: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def sample_family_params(d: int, samples: int, seed: int) -> np.ndarray:
    """Random parameter rows spread around the feasible boundary.

    Directions are uniform on the sphere of active parameters; the radius is
    uniform in ``[0, 1.5]`` times the distance to the positive-PPT boundary.
    """
    rng = np.random.default_rng(seed)
    ev = evaluator(d)
    axes = _active_axes(d)
    X = np.zeros((samples, 4))
    X[:, axes] = rng.normal(size=(samples, len(axes)))
    t = boundary_scale(ev, X)
    t = np.where(np.isfinite(t), t, 1.0)
    return X * (t * rng.uniform(0.0, 1.5, size=samples))[:, None]


def multi_compare(d: int, n: int = 2, samples: int = 1000, all_cuts: bool = False,
                  seed: int = 7, tol: float = linalg.PSD_TOL, site: int = 1) -> MultiReport:
    """Compare positivity and PPT verdicts of rho[d] and its n-pair lift."""
    if d ** (2 * n) > 100:
        raise ValueError(f"d^(2n) = {d ** (2 * n)} exceeds the dense size guard of 100")
    Q = sample_family_params(d, samples, seed)
    shape = (d,) * (2 * n)
    cuts = bipartitions(2 * n) if all_cuts else [default_cut(n, site)]
    pos_agree = 0
    ppt_agree = {str(list(c)): 0 for c in cuts}
    disagreements = []
    for row in Q:
        p = FamilyParams(d, *row)
        rho = family_rho(p)
        multi = multipartite_family(p, n, site)
        pos_b = linalg.min_eigenvalue(rho)
        pos_m = linalg.min_eigenvalue(multi)
        ok = (pos_b >= -tol) == (pos_m >= -tol)
        pos_agree += ok
        pt_b = linalg.min_eigenvalue(linalg.partial_transpose(rho, (d, d), 1))
        issues = {} if ok else {"positivity": [pos_b, pos_m]}
        for c in cuts:
            pt_m = linalg.min_eigenvalue(linalg.partial_transpose(multi, shape, c))
            if (pt_b >= -tol) == (pt_m >= -tol):
                ppt_agree[str(list(c))] += 1
            else:
                issues[f"ppt{list(c)}"] = [pt_b, pt_m]
        if issues:
            disagreements.append({"params": p.to_json(), **issues})
    return MultiReport(d, n, samples, [list(c) for c in cuts], pos_agree / samples,
                       {k: v / samples for k, v in ppt_agree.items()}, disagreements)


def smolin_cut_spectra(d: int = 2, n: int = 2) -> dict:
    """Smallest partial-transpose eigenvalue of the vertex state over the 2:2 cuts."""
    v = multipartite_vertex(d, n, 0, 0)
    shape = (d,) * (2 * n)
    cuts = [c for c in bipartitions(2 * n) if len(c) == n]
    return {str(list(c)): linalg.min_eigenvalue(linalg.partial_transpose(v, shape, c)) for c in cuts}


# -- output ---------------------------------------------------------------

CSV_FIELDS = ("q1", "q2", "positive", "ppt", "I", "detected", "bound_entangled")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return format(float(v), ".12g")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        row = r.to_json()
        w.writerow([_fmt(row[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def emit(records, fmt: str = "csv", path=None) -> str:
    """Serialize scan records as CSV or JSON; write to ``path`` when given."""
    if fmt == "csv":
        text = records_to_csv(records)
    elif fmt == "json":
        text = json.dumps([r.to_json() for r in records], indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        path = Path(path)
        if not path.parent.exists():
            raise OSError(f"directory {path.parent} does not exist")
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text
