"""Acceptance criteria, each recorded as one PASS/FAIL line in the terminal summary."""
import math
import time

import numpy as np
import pytest
import sympy
from scipy.spatial import cKDTree

from crystal_riemann import classify
from crystal_riemann.classify import (
    reference_gram,
    classify_all,
    classify_candidates,
    exact_equal,
    load_golden,
    rank_lower_bound,
)
from crystal_riemann.cyclotomic import determinant, matmul, transpose
from crystal_riemann.isometry import Isometry, SurfaceParams, edge_generators, lattice_generators
from crystal_riemann.lattice import (
    determinant_volume,
    gram_closed_form,
    lattice_basis,
    translation_module_rank,
)
from crystal_riemann.scmap import SCMapContext
from crystal_riemann.sections import (
    analytic_section,
    correspondence,
    empirical_density,
    finitely_discrete_bound,
    model_section,
)

from conftest import SURFACES, interior_points
from oracles import continuity_moves, delone_constant, lipschitz_constant, word_oracle

s = sympy.sqrt
R_ = sympy.Rational
TABLE1 = {
    (5, 1, 2): ("d10", "A4", 2, s(2 + 2 / s(5)) / 5, "quasiperiodic"),
    (6, 1, 2): ("d12", "A2xA2", 2, s(R_(1, 27)), "periodic"),
    (8, 1, 3): ("d8", "D4", 2, s(R_(1, 8)), "quasiperiodic"),
    (10, 1, 3): ("d10", "A4", 2, s(2 - 2 / s(5)) / 5, "quasiperiodic"),
    (12, 1, 5): ("d12", "A2xA2", 3, sympy.Integer(1), "quasiperiodic"),
    (12, 2, 3): ("d24", "A2xZ2", 5, sympy.Integer(1), "periodic"),
    (12, 3, 4): ("d24", "A2xZ2", 5, s(R_(4, 3)), "periodic"),
}
VOLUMES = {(6, 1, 2): sympy.Integer(27), (8, 1, 3): sympy.Integer(8), (10, 1, 3): R_(25, 4) * s(5),
           (12, 1, 5): sympy.Integer(3), (12, 2, 3): 6 * s(3)}
REFERENCE = {tuple(e["triple"]): e for e in load_golden()["lattices"]}


def test_criterion_1_classification(criterion):
    classify._classify.cache_clear()
    t0 = time.perf_counter()
    descs = classify_all(check=False)
    elapsed = time.perf_counter() - t0
    got = {d.triple: d for d in descs}
    bad = []
    if sorted(got) != SURFACES:
        bad.append(f"surfaces {sorted(got)}")
    for t, (quot, lat, g, rho, cls) in TABLE1.items():
        d = got.get(t)
        if d is None:
            continue
        row = (d.quotient_tag, d.root_lattice.tag, d.genus, d.periodicity)
        if row != (quot, lat, g, cls) or not exact_equal(d.density, rho):
            bad.append(f"{t}: {row}, rho={d.density}")
    ok = not bad and elapsed < 5.0
    criterion("1", ok, f"7 surfaces, all table columns exact; {elapsed:.2f} s (< 5 s)"
              + (f"; mismatches {bad}" if bad else ""))
    assert ok


def _criterion_2_parts():
    """(consistent checks, transcribed-matrix check) for the reference lattice data."""
    issues = []
    for t, entry in REFERENCE.items():
        M = gram_closed_form(SurfaceParams(*t))
        if M != reference_gram(entry, corrected=True):
            issues.append(f"{t} Gram")
        if entry["S"]:
            S = entry["S"]
            want = [[sympy.Rational(x) for x in r] for r in entry["transformed_gram"]]
            if matmul(matmul(S, M), transpose(S)) != want or abs(determinant(S)) != 1:
                issues.append(f"{t} S M S^T")
        _, vol = determinant_volume(M)
        if sympy.simplify(vol - VOLUMES[t]) != 0:
            issues.append(f"{t} |Lambda| = {vol}")
    transcribed = [t for t, e in REFERENCE.items()
               if gram_closed_form(SurfaceParams(*t)) != reference_gram(e, corrected=False)]
    return issues, transcribed


def test_criterion_2_reference_consistent_data(criterion):
    issues, _ = _criterion_2_parts()
    criterion("2 (Gram, S, volume; corrected (12,2,3) entry)", not issues,
              "closed-form Grams, S M S^T and |Lambda| in {27, 8, 25 sqrt5/4, 3, 6 sqrt3} exact"
              + (f"; issues {issues}" if issues else ""))
    assert not issues


@pytest.mark.xfail(strict=True, reason="transcribed (12,2,3) Gram entries M13 = M24 = -1/2 give det 1683; "
                   "S M S^T and |Lambda| = 6 sqrt 3 need -11/2 (det 108)")
def test_criterion_2_reference_transcribed_entries(criterion):
    _, transcribed = _criterion_2_parts()
    ok = not transcribed
    criterion("2 (transcribed Gram entry-for-entry)", ok,
              "matches all five transcribed matrices" if ok else
              f"closed form differs from the transcribed matrix for {transcribed}: transcribed M13 = M24 = -1/2 "
              "(det 1683) contradicts the transcribed S M S^T and |Lambda| = 6 sqrt3; closed form gives -11/2")
    assert ok


def test_criterion_3_negative_results(criterion):
    reports = {r.triple: r for r in classify_candidates()}
    rank8 = translation_module_rank(lattice_generators(SurfaceParams(10, 1, 4)))
    bounded = [(8, 1, 2), (10, 1, 2), (10, 2, 3), (12, 1, 2), (12, 1, 3), (12, 1, 4)]
    rows = {t: (rank_lower_bound(*t), reports[t].rank) for t in bounded}
    ok = (rank8 == 8 and not reports[(10, 1, 4)].crystallographic
          and all(b is not None and b >= 6 and r >= b and not reports[t].crystallographic
                  for t, (b, r) in rows.items()))
    criterion("3", ok, f"(10,1,4) rank {rank8}; (bound, exact rank) "
              + ", ".join(f"{t}: {b},{r}" for t, (b, r) in rows.items()))
    assert ok


@pytest.mark.parametrize("triple", SURFACES)
def test_criterion_4_sc_map(triple, criterion):
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    ctx = SCMapContext(SurfaceParams(*triple))
    a, b = ctx.params.alpha, ctx.params.beta
    xv = np.array([0, np.cos(a), np.exp(1j * a)])
    yv = np.array([0, np.cos(b), np.exp(1j * b)])
    vert = np.abs(ctx.forward_map(xv) - yv).max()
    x = interior_points(ctx.params, 100, rng, margin=0.02)
    h = 1e-5
    fx = (ctx.forward_map(x + h) - ctx.forward_map(x - h)) / (2 * h)
    fy = (ctx.forward_map(x + 1j * h) - ctx.forward_map(x - 1j * h)) / (2 * h)
    cr = (np.abs(fy - 1j * fx) / np.abs(fx)).max()
    xs = interior_points(ctx.params, 500, rng, margin=0.0)
    trip = np.abs(ctx.g(ctx.invert_g(xs)) - xs).max()
    zz = np.exp(rng.uniform(-4, 4, 200)) * np.exp(1j * rng.uniform(0.01, math.pi - 0.01, 200))
    trip = max(trip, (np.abs(ctx.invert_g(ctx.g(zz)) - zz) / np.abs(zz)).max())
    t = rng.uniform(0, 1, 50)
    edge = max(np.abs(ctx.forward_map(t * np.cos(a)).imag).max(),
               np.abs((ctx.forward_map(t * np.exp(1j * a)) * np.exp(-1j * b)).imag).max(),
               np.abs(ctx.forward_map(np.cos(a) + 1j * t * np.sin(a)).real - np.cos(b)).max())
    elapsed = time.perf_counter() - t0
    ok = vert <= 1e-8 and cr <= 1e-6 and trip <= 1e-8 and edge <= 1e-8 and elapsed < 10
    criterion(f"4 {triple}", ok, f"vertex {vert:.1e}, CR {cr:.1e}, round trip {trip:.1e}, "
              f"edges {edge:.1e}, {elapsed:.2f} s")
    assert ok


def _density_check(triple, R, tol):
    x = complex(*np.random.default_rng(5).uniform(-1, 1, 2))
    rho = float(TABLE1[triple][3])
    emp = empirical_density(analytic_section(triple, x, R))
    return abs(emp / rho - 1), emp, rho


@pytest.mark.parametrize("triple", SURFACES)
def test_criterion_5_density_r50(triple, criterion):
    err, emp, rho = _density_check(triple, 50.0, 0.05)
    ok = err < 0.05
    criterion(f"5 {triple} R=50", ok, f"empirical {emp:.6f} vs {rho:.6f}, rel. error {err:.2%} (< 5%)")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("triple", SURFACES)
def test_criterion_5_density_r150(triple, criterion):
    err, emp, rho = _density_check(triple, 150.0, 0.02)
    ok = err < 0.02
    criterion(f"5 {triple} R=150", ok, f"empirical {emp:.6f} vs {rho:.6f}, rel. error {err:.2%} (< 2%)")
    assert ok


def test_criterion_6_model_set_structure(criterion):
    triple, x, R = (5, 1, 2), 0.23 + 0.11j, 30.0
    M = model_section(triple, x, R)
    y = M.y[M.accepted]
    delone = delone_constant(triple)
    sep = M.min_separation()
    d, _ = cKDTree(np.column_stack([y.real, y.imag])).query(np.column_stack([y.real, y.imag]), k=2)
    distinct = np.unique(np.round(d[:, 1] / 1e-6)).size
    pairs = correspondence(triple, x, R)
    worst = max(p.distance for p in pairs)
    ok = sep >= delone - 1e-9 and sep > 0 and distinct <= 6 and worst <= 1.0
    criterion("6", ok, f"min separation {sep:.4f} (>= {delone:.4f}), {distinct} distinct NN distances (<= 6), "
              f"{len(pairs)} pairs, max distance {worst:.3f} (<= 1)")
    assert ok


def test_criterion_7_near_branch(criterion):
    p = SurfaceParams(5, 1, 2)
    eps = 1e-3
    x = complex(np.exp(1j * p.alpha) + 1e-11 * np.exp(1j * (p.alpha + 2)))
    A = analytic_section((5, 1, 2), x, 3.0)
    tree = cKDTree(np.column_stack([A.y.real, A.y.imag]))
    best = math.inf
    for i, j in tree.query_pairs(eps):
        for k in tree.query_ball_point([A.y[i].real, A.y[i].imag], eps):
            if k not in (i, j):
                best = min(best, max(abs(A.y[i] - A.y[j]), abs(A.y[i] - A.y[k]), abs(A.y[j] - A.y[k])))
    ok = best < eps
    criterion("7", ok, f"x = e^(i alpha) + 1e-11 e^(i(alpha+2)): tightest triple diameter {best:.2e} (< {eps:g})")
    assert ok


def test_criterion_8_word_oracle(criterion):
    rng = np.random.default_rng(8)
    got = []
    for _ in range(5):
        x = complex(*rng.uniform(-1.5, 1.5, 2))
        A = analytic_section((6, 1, 2), x, 10.0)
        got.append((A.total_multiplicity, len(A), len(word_oracle((6, 1, 2), x, 10.0))))
    ok = all(t == o and n == o for t, n, o in got)
    criterion("8", ok, "(tiles, points, oracle) per x: " + ", ".join(f"{t}/{n}/{o}" for t, n, o in got))
    assert ok


def test_criterion_9_properties(criterion):
    rng = np.random.default_rng(9)
    notes = []
    # group axioms on random words
    params = SurfaceParams(5, 1, 2)
    gens = edge_generators(params)
    e = Isometry.identity(params.conductor)

    def word():
        g = e
        for k in rng.integers(0, 3, 6):
            g = gens[k] @ g
        return g

    axioms = True
    for _ in range(30):
        f, g, h = word(), word(), word()
        axioms &= (f @ g) @ h == f @ (g @ h) and f @ f.inverse() == e and f @ e == f
    notes.append(f"group axioms {'ok' if axioms else 'broken'}")
    # lattice equivariance
    cg = lattice_basis(params).complex_generators
    equi = 0.0
    for _ in range(10):
        x = complex(*rng.uniform(-1, 1, 2))
        c = rng.integers(-1, 2, 4)
        lu, lv = c @ cg[:, 0], c @ cg[:, 1]
        B = analytic_section(params, x + lu, 5.0)
        A = analytic_section(params, x, 5.0 + abs(lv) + 1)
        d, _ = cKDTree(np.column_stack([A.y.real, A.y.imag])).query(
            np.column_stack([(B.y - lv).real, (B.y - lv).imag]))
        equi = max(equi, d.max())
    notes.append(f"equivariance {equi:.1e}")
    # finitely-discrete bound
    bound = finitely_discrete_bound(params, 1.0)
    worst = 0
    for _ in range(10):
        A = analytic_section(params, complex(*rng.uniform(-2, 2, 2)), 5.0)
        for _ in range(10):
            y = complex(*rng.uniform(-3, 3, 2))
            worst = max(worst, int(A.multiplicity[np.abs(A.y - y) <= 1].sum()))
    notes.append(f"max tiles in B_1 {worst} <= {bound}")
    # continuity: matched points move by at most C |delta|
    C = lipschitz_constant(params.triple, rng)
    moves = np.concatenate([continuity_moves(params.triple, complex(*rng.uniform(-1, 1, 2)),
                                             1e-4 * np.exp(1j * rng.uniform(0, 2 * math.pi)))
                            for _ in range(5)])
    cont = len(moves) > 0 and moves.max() <= C * 1e-4
    notes.append(f"continuity {moves.max():.1e} <= {C * 1e-4:.1e} over {len(moves)} tiles")
    ok = axioms and equi < 1e-8 and worst <= bound and cont
    criterion("9 (property suites)", ok, "; ".join(notes))
    assert ok
