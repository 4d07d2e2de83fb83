"""Acceptance gate.

One test per criterion; the terminal summary lists a PASS/FAIL line for each.
"""
import time

import numpy as np
import pytest

from magicsimplex import linalg
from magicsimplex.criteria import SimplexEvaluator, separable_bound, witness_batch
from magicsimplex.explore import (
    _cached_optimum,
    default_slice_params,
    evaluate_points,
    evaluator,
    incomplete_mub_scan,
    multi_compare,
    positivity_polygon,
    sample_family_params,
    scan_slice,
    slice_bounds,
    smolin_cut_spectra,
)
from magicsimplex.mubs import build_complete_mub, build_mubs, verify_mub
from magicsimplex.states import bell_projector, random_separable_state, simplex_state

PRIME_POWERS = (2, 3, 4, 5, 7, 8, 9)
REFERENCE_MINIMA = {3: -0.15, 4: -0.125, 5: -0.106, 7: -0.081, 8: -0.073, 9: -0.067}


@pytest.fixture
def detail(record_property):
    def add(text):
        record_property("detail", text)
        print(text)
    return add


def test_criterion_1_mub_validity(detail):
    start = time.perf_counter()
    worst = 0.0
    for d in PRIME_POWERS:
        mubs = build_complete_mub(d)
        rep = verify_mub(mubs, tol=1e-10)
        assert len(mubs) == d + 1 and rep.passed, (d, rep)
        worst = max(worst, rep.max_unbiasedness_deviation, rep.max_orthonormality_deviation)
    six = build_mubs(6)
    rep6 = verify_mub(six, tol=1e-10)
    assert len(six) == 3 and rep6.passed
    elapsed = time.perf_counter() - start
    detail(f"worst residual {max(worst, rep6.max_unbiasedness_deviation):.2e}, d=6 has 3 bases, {elapsed:.2f} s")
    assert elapsed < 10


@pytest.mark.slow
def test_criterion_2_extremal_values(detail):
    start = time.perf_counter()
    found = {}
    for d, ref in REFERENCE_MINIMA.items():
        r = _cached_optimum(d, "max")
        found[d] = r.value
        assert r.min_coefficient >= -1e-9 and r.min_pt_eigenvalue >= -1e-9
    elapsed = time.perf_counter() - start
    detail(", ".join(f"d={d}: {v:+.4f}" for d, v in found.items()) + f" ({elapsed:.0f} s)")
    for d, ref in REFERENCE_MINIMA.items():
        assert abs(found[d] - ref) <= 0.005, (d, found[d], ref)
    assert elapsed <= 30 * 60


def test_criterion_3_no_bound_entanglement_d2(detail):
    ev = evaluator(2)
    recs = scan_slice(2, grid=200)
    slice_hits = sum(r.bound_entangled for r in recs)
    # about two thirds of the draws are feasible; keep the first 10^5 of those
    Q = sample_family_params(2, 160_000, seed=11)
    min_c, min_pt, I = evaluate_points(ev, Q)
    feasible = np.flatnonzero((min_c >= -linalg.PSD_TOL) & (min_pt >= -linalg.PSD_TOL))[:100_000]
    assert len(feasible) == 100_000
    hits = int(np.sum(I[feasible] > ev.bound))
    margin = float(np.max(I[feasible]) - ev.bound)
    detail(f"slice hits {slice_hits}/{len(recs)}, sampled hits {hits}/{len(feasible)} "
           f"feasible, max I - 2 = {margin:.1e}")
    assert slice_hits == 0 and hits == 0


def test_criterion_4_d3_witness(detail):
    r = _cached_optimum(3, "max")
    detail(f"min c {r.min_coefficient:.1e}, min PT eig {r.min_pt_eigenvalue:.1e}, I = {r.I:.6f}")
    assert r.min_coefficient >= -1e-9
    assert r.min_pt_eigenvalue >= -1e-9
    assert r.I >= 2.14


def test_criterion_5_separable_bound(detail):
    rng = np.random.default_rng(5)
    worst = {}
    for d in (2, 3, 5):
        mubs = build_complete_mub(d)
        pool = np.concatenate([b.vectors for b in mubs.bases])
        states = []
        for k in range(10_000):
            # mix Haar product states with mixtures tilted towards basis vectors
            if k % 2:
                states.append(random_separable_state(d, rng, terms=int(rng.integers(1, 4))))
            else:
                states.append(random_separable_state(d, rng, terms=int(rng.integers(1, 3)), vectors=pool))
        values = np.concatenate([witness_batch(states[s:s + 1000], mubs) for s in range(0, 10_000, 1000)])
        worst[d] = float(values.max())
    detail(", ".join(f"d={d}: max I - 2 = {v - 2:+.1e}" for d, v in worst.items()))
    for v in worst.values():
        assert v <= 2 + 1e-9


@pytest.mark.slow
def test_criterion_6_incomplete_sets(detail):
    reports = [incomplete_mub_scan(3, 2), incomplete_mub_scan(3, 3), incomplete_mub_scan(6, 3)]
    detail(", ".join(f"d={r.d} m={r.m}: excess {r.max_excess:+.4f} over {r.points_checked} pts"
                     for r in reports))
    for r in reports:
        assert r.grid == 200 and len(r.settings) == 3 and r.points_checked > 0
        assert r.max_excess <= 1e-9, r.to_json()


def test_criterion_7_multipartite(detail):
    parts = []
    for d in (2, 3):
        r = multi_compare(d, 2, samples=1000)
        parts.append(f"d={d}: positivity {r.positivity_agreement:.3f}, PPT {list(r.ppt_agreement.values())[0]:.3f}")
        assert r.positivity_agreement == 1.0, r.disagreements[:5]
        assert all(v == 1.0 for v in r.ppt_agreement.values()), r.disagreements[:5]
    spectra = smolin_cut_spectra()
    parts.append(f"vertex 2:2 cuts min eig {min(spectra.values()):.1e}")
    detail(", ".join(parts))
    assert len(spectra) == 3 and all(v >= -1e-10 for v in spectra.values())


def test_criterion_8_linear_algebra(detail):
    rng = np.random.default_rng(8)
    sizes = np.concatenate([[81, 64, 49], rng.integers(1, 82, size=97)])
    worst = 0.0
    for n in sizes:
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = (a + a.conj().T) / 2
        w, V = linalg.jacobi_eigh(h)
        worst = max(worst, np.linalg.norm(V @ np.diag(w) @ V.conj().T - h) / max(1.0, np.linalg.norm(h)))
    assert worst <= 1e-10
    pt_err = 0.0
    for d in range(2, 10):
        lam = linalg.jacobi_eigh(linalg.partial_transpose(bell_projector(d, 0, 0), (d, d), 1))[0][0]
        pt_err = max(pt_err, abs(lam + 1 / d))
    assert pt_err <= 1e-12
    spec_err = 0.0
    for d in range(2, 8):
        c = rng.dirichlet(np.ones(d * d)).reshape(d, d)
        w = linalg.hermitian_eigenvalues(simplex_state(c), method="jacobi")
        spec_err = max(spec_err, np.max(np.abs(np.sort(w) - np.sort(c.ravel()))))
    detail(f"reconstruction {worst:.1e}, PT vertex {pt_err:.1e}, spectra {spec_err:.1e}")
    assert spec_err <= 1e-10


def _inside_polygon(verts, pts, slack):
    # counter-clockwise vertices; positive cross product means left of edge
    out = np.ones(len(pts), dtype=bool)
    for a, b in zip(verts, np.roll(verts, -1, axis=0)):
        e = b - a
        cross = e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0])
        out &= cross >= -slack * np.linalg.norm(e)
    return out


def test_criterion_9_slice_geometry(detail):
    grid = 200
    q3, q = default_slice_params(3)
    bounds = slice_bounds(3, q3, q)
    recs = scan_slice(3, q3, q, grid=grid, bounds=bounds)
    pts = np.array([(r.q1, r.q2) for r in recs])
    positive = np.array([r.positive for r in recs])
    ppt = np.array([r.ppt for r in recs])
    detected = np.array([r.detected for r in recs]).reshape(grid, grid)
    step = max((bounds[1] - bounds[0]) / (grid - 1), (bounds[3] - bounds[2]) / (grid - 1))

    # positivity region equals the convex polygon of its vertices
    verts = positivity_polygon(3, q3, q)
    e1, e2 = verts[1] - verts[0], verts[2] - verts[0]
    assert e1[0] * e2[1] - e1[1] * e2[0] > 0
    mismatch = positive != _inside_polygon(verts, pts, 1e-9)
    assert not mismatch.any()

    # PPT region: midpoints of random PPT pairs are PPT
    rng = np.random.default_rng(9)
    idx = np.flatnonzero(ppt)
    pairs = rng.choice(idx, size=(5000, 2))
    mids = (pts[pairs[:, 0]] + pts[pairs[:, 1]]) / 2
    Q = np.column_stack([mids, np.full(len(mids), q3), np.full(len(mids), q)])
    _, mid_pt, _ = evaluate_points(evaluator(3), Q)
    assert np.all(mid_pt >= -linalg.PSD_TOL)

    # I = 2 boundary inside the positivity region: collect crossings along q2 lines
    pos = positive.reshape(grid, grid)
    P = pts.reshape(grid, grid, 2)
    cross = []
    for i in range(grid):
        for j in range(grid - 1):
            if pos[i, j] and pos[i, j + 1] and detected[i, j] != detected[i, j + 1]:
                cross.append((P[i, j] + P[i, j + 1]) / 2)
    for j in range(grid):
        for i in range(grid - 1):
            if pos[i, j] and pos[i + 1, j] and detected[i, j] != detected[i + 1, j]:
                cross.append((P[i, j] + P[i + 1, j]) / 2)
    cross = np.array(cross)
    centred = cross - cross.mean(axis=0)
    normal = np.linalg.svd(centred)[2][-1]
    residual = float(np.max(np.abs(centred @ normal)))
    detail(f"polygon {len(verts)} vertices, {len(pairs)} PPT midpoints ok, "
           f"I=2 line fit residual {residual:.2e} over {len(cross)} crossings (grid step {step:.2e})")
    assert len(cross) >= 10
    assert residual <= step
