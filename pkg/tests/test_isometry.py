import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crystal_riemann.cyclotomic import CycNum
from crystal_riemann.isometry import (
    Isometry,
    SurfaceParams,
    base_rotation,
    complementary_transform,
    contains_half_turn,
    coset_representatives,
    derived_point_group,
    edge_generators,
    generate_group,
    half_turn,
    lattice_generators,
    rotation_subgroup_order,
    star,
    star_difference,
    star_seed,
    vertex_group_order,
)

from conftest import SURFACES


def random_element(params, word):
    gens = edge_generators(params)
    g = Isometry.identity(params.conductor)
    for k in word:
        g = gens[k] @ g
    return g


words = st.lists(st.integers(0, 2), max_size=8)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        SurfaceParams(6, 2, 2)
    with pytest.raises(ValueError):
        SurfaceParams(6, 3, 2)
    with pytest.raises(ValueError):
        SurfaceParams(6, 0, 3)


def test_conductor():
    assert SurfaceParams(5, 1, 2).conductor == 20
    assert SurfaceParams(6, 1, 2).conductor == 12
    assert SurfaceParams(8, 1, 3).conductor == 16


@pytest.mark.parametrize("triple", [(6, 1, 2), (5, 1, 2), (12, 2, 3)])
def test_group_axioms(triple):
    params = SurfaceParams(*triple)
    m = params.conductor
    e = Isometry.identity(m)

    @given(words, words, words)
    def check(w1, w2, w3):
        f, g, h = (random_element(params, w) for w in (w1, w2, w3))
        assert (f @ g) @ h == f @ (g @ h)
        assert f @ e == f == e @ f
        assert f @ f.inverse() == e == f.inverse() @ f

    check()


@pytest.mark.parametrize("triple", [(6, 1, 2), (8, 1, 3)])
def test_composition_matches_action_on_points(triple, rng):
    params = SurfaceParams(*triple)
    gens = edge_generators(params)
    pts = rng.normal(size=(50, 2)) + 1j * rng.normal(size=(50, 2))
    for _ in range(10):
        f = random_element(params, rng.integers(0, 3, 5))
        g = random_element(params, rng.integers(0, 3, 5))
        fg = f @ g
        for x, y in pts:
            ex = fg.apply_float(x, y)
            gx, gy = g.apply_float(x, y)
            got = f.apply_float(gx, gy)
            assert abs(ex[0] - got[0]) < 1e-12 and abs(ex[1] - got[1]) < 1e-12
    for s in gens:
        assert s @ s == Isometry.identity(params.conductor)


@pytest.mark.parametrize("triple", SURFACES)
def test_vertex_relations(triple):
    params = SurfaceParams(*triple)
    s12, s13, s23 = edge_generators(params)
    assert s13 @ s12 == base_rotation(params)
    a, b = params.a, params.b
    assert s23.apply((a, b)) == (a, b)
    z = CycNum.zero(params.conductor)
    assert s23.apply((z, z)) == star_seed(params)
    # sigma_12 fixes the real axis pointwise, sigma_13 the line through e^{i alpha}
    e3 = (CycNum.root_of_unity(params.conductor, params.alpha_turn),
          CycNum.root_of_unity(params.conductor, params.beta_turn))
    assert s13.apply(e3) == e3


@pytest.mark.parametrize("triple", SURFACES)
def test_vertex_group_orders(triple):
    params = SurfaceParams(*triple)
    n, p, q = triple
    assert vertex_group_order(params, 1) == 2 * rotation_subgroup_order(params) == 2 * n
    assert vertex_group_order(params, 2) == 4
    # vertex 3 has angles (pi/2 - alpha, pi/2 - beta) in units 2 pi: (n - 2p)/(4n), (n - 2q)/(4n)
    ta = Fraction(n - 2 * p, 2 * n)
    tb = Fraction(n - 2 * q, 2 * n)
    k = 1
    while (k * ta) % 1 or (k * tb) % 1:
        k += 1
    assert vertex_group_order(params, 3) == 2 * k


def test_vertex_group_examples():
    assert [vertex_group_order(SurfaceParams(6, 1, 2), v) for v in (1, 2, 3)] == [12, 4, 12]
    assert [vertex_group_order(SurfaceParams(5, 1, 2), v) for v in (1, 2, 3)] == [10, 4, 20]
    assert [vertex_group_order(SurfaceParams(10, 1, 3), v) for v in (1, 2, 3)] == [20, 4, 10]


@pytest.mark.parametrize("triple", SURFACES)
def test_point_group_order(triple):
    params = SurfaceParams(*triple)
    n = params.n
    order = len(derived_point_group(params))
    assert order == (2 * n if contains_half_turn(params) else 4 * n)
    assert len(coset_representatives(params)) == order


def test_half_turn_membership():
    expect = {(5, 1, 2): False, (6, 1, 2): False, (8, 1, 3): True, (10, 1, 3): True,
              (12, 1, 5): True, (12, 2, 3): False, (12, 3, 4): False}
    for t, v in expect.items():
        assert contains_half_turn(SurfaceParams(*t)) is v


def _orbit_oracle(params):
    """Orbit of the seed under the whole vertex group, applied to the point (2a, 2b)."""
    s12, s13, _ = edge_generators(params)
    group = generate_group([s12, s13])
    seed = star_seed(params)
    return {g.conjugate_translation(seed) for g in group}


@pytest.mark.parametrize("triple", SURFACES)
def test_star_matches_orbit(triple):
    params = SurfaceParams(*triple)
    sig = star(params)
    assert set(sig.elements) == _orbit_oracle(params)
    assert len(sig) == params.n


def test_star_sizes():
    assert len(star(SurfaceParams(6, 1, 2))) == 6
    assert len(star_difference(SurfaceParams(6, 1, 2))) == 31
    assert len(star_difference(SurfaceParams(5, 1, 2))) == 21
    assert len(lattice_generators(SurfaceParams(8, 1, 3))) == 8


def test_star_order_is_rotation_powers():
    params = SurfaceParams(8, 1, 3)
    r = base_rotation(params)
    sig = star(params).elements
    for k in range(len(sig) - 1):
        assert r.conjugate_translation(sig[k]) == sig[k + 1]


def test_star_difference_closed_under_negation():
    d = set(star_difference(SurfaceParams(12, 2, 3)).elements)
    assert all((-u, -v) in d for u, v in d)


@pytest.mark.parametrize("triple", SURFACES)
def test_cosets_distinct_mod_lattice(triple):
    # distinct linear parts means distinct classes modulo translations
    reps = coset_representatives(SurfaceParams(*triple))
    assert len({(g.flip, g.rot) for g in reps}) == len(reps)


def test_complementary_transform_swaps_vertices():
    params = SurfaceParams(10, 1, 3)
    c = complementary_transform(params)
    m = params.conductor
    z = CycNum.zero(m)
    e3 = (CycNum.root_of_unity(m, params.alpha_turn), CycNum.root_of_unity(m, params.beta_turn))
    x0, _ = c.apply((z, z))
    assert abs(x0.embed() - np.exp(1j * (math.pi / 2 - params.alpha))) < 1e-14
    assert c.apply(e3) == (z, z)
    assert complementary_transform(params).inverse() @ c == Isometry.identity(m)


def test_half_turn_is_central():
    params = SurfaceParams(12, 2, 3)
    h = half_turn(params)
    for g in edge_generators(params):
        assert (g @ h @ g.inverse()).linear_part == h
