import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from crystal_riemann.isometry import SurfaceParams, base_rotation
from crystal_riemann.lattice import lattice_basis
from crystal_riemann.sections import (
    SectionPointSet,
    analytic_section,
    angular_fraction,
    correspondence,
    empirical_density,
    finitely_discrete_bound,
    model_blocks,
    model_section,
    window_polygon,
)

from conftest import SURFACES
from oracles import continuity_moves, delone_constant, lipschitz_constant, word_oracle


@pytest.mark.parametrize("seed", range(5))
def test_tile_count_matches_word_oracle(seed):
    rng = np.random.default_rng(seed)
    x = complex(*rng.uniform(-1.5, 1.5, 2))
    R = 10.0
    A = analytic_section((6, 1, 2), x, R)
    want = word_oracle((6, 1, 2), x, R)
    assert len(A) == len(want)
    assert A.total_multiplicity == len(want)
    d, _ = cKDTree(np.column_stack([want.real, want.imag])).query(np.column_stack([A.y.real, A.y.imag]))
    assert d.max() < 1e-8


def test_x_zero_contains_origin():
    for triple in [(5, 1, 2), (6, 1, 2), (12, 2, 3)]:
        A = analytic_section(triple, 0j, 0.5)
        i = np.flatnonzero(np.abs(A.y) < 1e-12)
        assert len(i) == 1
        assert A.multiplicity[i[0]] == triple[1]
        assert "singular_vertex" in A.flags[i[0]]
        assert A.warnings


def test_section_invariants(rng):
    A = analytic_section((8, 1, 3), complex(0.3, 0.2), 12.0)
    assert np.all(np.abs(A.y) <= 12.0)
    assert A.min_separation() > 1e-8
    order = np.lexsort((A.y.imag, A.y.real))
    assert np.array_equal(order, np.arange(len(A)))
    assert np.all(A.multiplicity >= 1)


def test_edge_point_counted_once():
    # x on the real axis lies on edges shared by two tiles
    A = analytic_section((6, 1, 2), 0.4 + 0j, 5.0)
    B = analytic_section((6, 1, 2), 0.4 + 1e-7j, 5.0)
    assert A.total_multiplicity == B.total_multiplicity
    assert any(len(p) == 2 for p in A.provenance)


@pytest.mark.parametrize("triple", [(5, 1, 2), (6, 1, 2), (12, 2, 3)])
def test_lattice_equivariance(triple, rng):
    basis = lattice_basis(SurfaceParams(*triple))
    cg = basis.complex_generators
    R = 6.0
    for _ in range(10):
        x = complex(*rng.uniform(-1, 1, 2))
        c = rng.integers(-2, 3, 4)
        lu, lv = c @ cg[:, 0], c @ cg[:, 1]
        A = analytic_section(triple, x, R + abs(lv) + 1)
        B = analytic_section(triple, x + lu, R)
        # every shifted point of B is in A, and every point of A that lands in B's disk is in B
        tree_a = cKDTree(np.column_stack([A.y.real, A.y.imag]))
        d, _ = tree_a.query(np.column_stack([(B.y - lv).real, (B.y - lv).imag]))
        assert d.max() < 1e-8
        shifted = A.y + lv
        shifted = shifted[np.abs(shifted) <= R - 1e-6]
        tree_b = cKDTree(np.column_stack([B.y.real, B.y.imag]))
        d, _ = tree_b.query(np.column_stack([shifted.real, shifted.imag]))
        assert d.max() < 1e-8


@pytest.mark.parametrize("triple", [(5, 1, 2), (8, 1, 3)])
def test_point_group_equivariance(triple, rng):
    params = SurfaceParams(*triple)
    r = base_rotation(params)
    R = 6.0
    for _ in range(3):
        x = complex(*rng.uniform(-1, 1, 2))
        A = analytic_section(triple, x, R)
        for flip, g in [(False, r), (True, None)]:
            if flip:
                B = analytic_section(triple, np.conj(x), R)
                img = np.conj(A.y)
            else:
                B = analytic_section(triple, complex(g.apply_x(x)), R)
                img = g.apply_y(A.y)
            assert len(B) == len(A)
            d, _ = cKDTree(np.column_stack([B.y.real, B.y.imag])).query(np.column_stack([img.real, img.imag]))
            assert d.max() < 1e-8


@pytest.mark.parametrize("triple", [(5, 1, 2), (6, 1, 2), (12, 1, 5)])
def test_continuity_bound(triple, rng):
    C = lipschitz_constant(triple, rng)
    delta = 1e-4
    for _ in range(5):
        x = complex(*rng.uniform(-1, 1, 2))
        moves = continuity_moves(triple, x, delta * np.exp(1j * rng.uniform(0, 2 * math.pi)))
        assert len(moves) > 0
        assert moves.max() <= C * delta


@pytest.mark.parametrize("triple", [(5, 1, 2), (6, 1, 2)])
def test_finitely_discrete_bound(triple, rng):
    r = 1.0
    bound = finitely_discrete_bound(triple, r)
    worst = 0
    # 10 x values times 10 y values: 100 (x, y) draws
    for _ in range(10):
        x = complex(*rng.uniform(-2, 2, 2))
        A = analytic_section(triple, x, 4 * math.sqrt(2) + r)
        for _ in range(10):
            y = complex(*rng.uniform(-4, 4, 2))
            near = np.abs(A.y - y) <= r
            worst = max(worst, int(A.multiplicity[near].sum()))
    assert worst <= bound


def test_angular_fractions():
    a = math.pi / 5
    x = np.array([0.2 + 0.05j, 0.3 + 0j, 0j, complex(math.cos(a)), np.exp(1j * a), -1 + 0j])
    f = angular_fraction(a, x)
    assert list(f) == [1.0, 0.5, a / (2 * math.pi), 0.25, (math.pi / 2 - a) / (2 * math.pi), 0.0]


def test_window_shapes():
    w = window_polygon((5, 1, 2))
    assert w.n_sides == 5 and w.multiplicity == 1
    assert w.circumradius == pytest.approx(1.0, abs=1e-15)
    sides = [abs(w.vertices[(k + 1) % 5] - w.vertices[k]) for k in range(5)]
    assert max(sides) - min(sides) < 1e-14
    h = window_polygon((12, 2, 3))
    assert h.n_sides == 6 and h.multiplicity == 2
    assert window_polygon((8, 1, 3)).n_sides == 8
    assert h.signed_distance(np.array([0j]))[0] < 0
    assert h.signed_distance(np.array([2 + 0j]))[0] > 0


def test_model_multiplicity_12_2_3(rng):
    M = model_section((12, 2, 3), complex(*rng.uniform(-0.5, 0.5, 2)), 15.0)
    assert len(M) > 0
    assert set(M.multiplicity) == {2}


def test_model_section_contains_origin():
    M = model_section((5, 1, 2), 0.1 + 0.1j, 5.0)
    assert np.min(np.abs(M.y)) < 1e-14


def test_model_blocks():
    assert [b[0] for b in model_blocks((5, 1, 2))] == ["id", "c"]
    assert [b[0] for b in model_blocks((8, 1, 3))] == ["id"]


@pytest.mark.parametrize("triple", SURFACES)
def test_model_sets_uniformly_discrete(triple, rng):
    c = delone_constant(triple)
    assert c > 0.1
    for _ in range(10):
        M = model_section(triple, complex(*rng.uniform(-2, 2, 2)), 12.0)
        assert M.min_separation() >= c - 1e-9


def test_near_branch_triple():
    p = SurfaceParams(5, 1, 2)
    x = np.exp(1j * p.alpha) + 1e-11 * np.exp(1j * (p.alpha + 2))
    A = analytic_section((5, 1, 2), complex(x), 3.0)
    tree = cKDTree(np.column_stack([A.y.real, A.y.imag]))
    found = False
    for i, j in tree.query_pairs(1e-3):
        for k in tree.query_ball_point([A.y[i].real, A.y[i].imag], 1e-3):
            if k not in (i, j) and abs(A.y[k] - A.y[j]) < 1e-3:
                found = True
    assert found
    # a generic x has no such cluster
    B = analytic_section((5, 1, 2), 0.31 + 0.17j, 3.0)
    assert B.min_separation() > 1e-3


@pytest.mark.parametrize("triple", [(6, 1, 2), (8, 1, 3)])
def test_density_r50(triple):
    rho = {(6, 1, 2): math.sqrt(1 / 27), (8, 1, 3): math.sqrt(1 / 8)}[triple]
    x = complex(*np.random.default_rng(11).uniform(-1, 1, 2))
    A = analytic_section(triple, x, 50.0)
    assert abs(empirical_density(A) / rho - 1) < 0.05


def test_empty_density():
    empty = SectionPointSet(0j, 10.0, "analytic", np.zeros(0, complex), np.zeros(0, int))
    assert empirical_density(empty) == 0.0


def test_correspondence_distances():
    pairs = correspondence((5, 1, 2), 0.23 + 0.11j, 15.0)
    assert pairs
    assert max(p.distance for p in pairs) <= 1.0
    tiles = [p.tile for p in pairs]
    assert len(set(tiles)) == len(tiles)


def test_correspondence_multiplicity_two():
    pairs = correspondence((12, 2, 3), 0.23 + 0.11j, 10.0)
    model = model_section((12, 2, 3), 0.23 + 0.11j, 10.0)
    assert len(pairs) == 2 * int(model.accepted.sum())
    assert max(p.distance for p in pairs) <= 1.0
