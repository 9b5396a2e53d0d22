"""Isometries of X x Y = C^2 generated by sigma, rotations r(theta, phi), and translations.

An isometry acts as ``(x, y) -> (e^{i theta} c(x) + u, e^{i phi} c(y) + v)`` where
``c`` is complex conjugation when ``flip`` is set and the identity otherwise.
Rotation angles are exact rational turns; translation parts are exact
elements of Q(zeta_m) with m = lcm(4, 2n) for the surface at hand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable

import numpy as np

from .cyclotomic import CycNum

Turn = Fraction


def _turn(x) -> Fraction:
    return Fraction(x) % 1


@dataclass(frozen=True)
class SurfaceParams:
    """Angles alpha = pi p / n, beta = pi q / n of the right triangles P and Q."""

    n: int
    p: int
    q: int

    def __post_init__(self):
        n, p, q = self.n, self.p, self.q
        if min(n, p, q) < 1:
            raise ValueError(f"(n, p, q) = {self.triple} must be positive")
        if not (2 * p < n and 2 * q < n):
            raise ValueError(f"angles of {self.triple} must lie strictly below pi/2")
        if math.gcd(math.gcd(p, q), n) != 1:
            raise ValueError(f"{self.triple}: gcd(p, q) shares a factor with n")

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.n, self.p, self.q)

    @property
    def conductor(self) -> int:
        return math.lcm(4, 2 * self.n)

    @property
    def alpha_turn(self) -> Fraction:
        return Fraction(self.p, 2 * self.n)

    @property
    def beta_turn(self) -> Fraction:
        return Fraction(self.q, 2 * self.n)

    @property
    def alpha(self) -> float:
        return math.pi * self.p / self.n

    @property
    def beta(self) -> float:
        return math.pi * self.q / self.n

    @cached_property
    def a(self) -> CycNum:
        return CycNum.cos_turn(self.conductor, self.alpha_turn)

    @cached_property
    def b(self) -> CycNum:
        return CycNum.cos_turn(self.conductor, self.beta_turn)

    @property
    def a_float(self) -> float:
        return math.cos(self.alpha)

    @property
    def b_float(self) -> float:
        return math.cos(self.beta)

    def __str__(self) -> str:
        return f"({self.n},{self.p},{self.q})"


@dataclass(frozen=True)
class Isometry:
    flip: bool
    rot: tuple[Fraction, Fraction]
    trans: tuple[CycNum, CycNum]

    def __post_init__(self):
        object.__setattr__(self, "rot", (_turn(self.rot[0]), _turn(self.rot[1])))
        if self.trans[0].conductor != self.trans[1].conductor:
            raise ValueError("translation components must share a conductor")

    @property
    def conductor(self) -> int:
        return self.trans[0].conductor

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls, m: int) -> Isometry:
        z = CycNum.zero(m)
        return cls(False, (Fraction(0), Fraction(0)), (z, z))

    @classmethod
    def sigma(cls, m: int) -> Isometry:
        z = CycNum.zero(m)
        return cls(True, (Fraction(0), Fraction(0)), (z, z))

    @classmethod
    def rotation(cls, m: int, theta: Fraction, phi: Fraction) -> Isometry:
        z = CycNum.zero(m)
        return cls(False, (theta, phi), (z, z))

    @classmethod
    def translation(cls, u: CycNum, v: CycNum) -> Isometry:
        return cls(False, (Fraction(0), Fraction(0)), (u, v))

    # -- group structure ----------------------------------------------------
    def _lin(self, k: int, w: CycNum) -> CycNum:
        """Linear part of component k applied to w."""
        if self.flip:
            w = w.conj()
        return CycNum.root_of_unity(self.conductor, self.rot[k]) * w

    def __matmul__(self, other: Isometry) -> Isometry:
        """Composition: (self @ other)(pt) == self(other(pt))."""
        sign = -1 if self.flip else 1
        return Isometry(
            self.flip ^ other.flip,
            (self.rot[0] + sign * other.rot[0], self.rot[1] + sign * other.rot[1]),
            (
                self._lin(0, other.trans[0]) + self.trans[0],
                self._lin(1, other.trans[1]) + self.trans[1],
            ),
        )

    def inverse(self) -> Isometry:
        if self.flip:
            rot = self.rot
        else:
            rot = (-self.rot[0], -self.rot[1])
        inv_lin = Isometry(self.flip, rot, (CycNum.zero(self.conductor),) * 2)
        return Isometry(
            self.flip,
            rot,
            (-inv_lin._lin(0, self.trans[0]), -inv_lin._lin(1, self.trans[1])),
        )

    @property
    def linear_part(self) -> Isometry:
        return Isometry(self.flip, self.rot, (CycNum.zero(self.conductor),) * 2)

    def is_translation(self) -> bool:
        return not self.flip and self.rot == (0, 0)

    def conjugate_translation(self, w: tuple[CycNum, CycNum]) -> tuple[CycNum, CycNum]:
        """Translation part of g t(w) g^-1, i.e. the linear part applied to w."""
        return (self._lin(0, w[0]), self._lin(1, w[1]))

    # -- action -------------------------------------------------------------
    def apply(self, pt: tuple[CycNum, CycNum]) -> tuple[CycNum, CycNum]:
        return (
            self._lin(0, pt[0]) + self.trans[0],
            self._lin(1, pt[1]) + self.trans[1],
        )

    @cached_property
    def float_view(self) -> tuple[bool, complex, complex, complex, complex]:
        """(flip, rotX, rotY, transX, transY) as complex floats."""
        return (
            self.flip,
            complex(np.exp(2j * np.pi * float(self.rot[0]))),
            complex(np.exp(2j * np.pi * float(self.rot[1]))),
            self.trans[0].embed(),
            self.trans[1].embed(),
        )

    def apply_x(self, x):
        flip, rx, _, tx, _ = self.float_view
        x = np.asarray(x, dtype=complex)
        return rx * (np.conj(x) if flip else x) + tx

    def apply_y(self, y):
        flip, _, ry, _, ty = self.float_view
        y = np.asarray(y, dtype=complex)
        return ry * (np.conj(y) if flip else y) + ty

    def apply_float(self, x, y):
        return self.apply_x(x), self.apply_y(y)

    def __repr__(self) -> str:
        return (
            f"Isometry(flip={self.flip}, rot=({self.rot[0]}, {self.rot[1]}), "
            f"trans=({self.trans[0].embed():.6g}, {self.trans[1].embed():.6g}))"
        )


def generate_group(generators: Iterable[Isometry], limit: int = 10_000) -> list[Isometry]:
    """Breadth-first closure of a finite group; raises if it exceeds ``limit``."""
    gens = list(generators)
    identity = Isometry.identity(gens[0].conductor)
    seen = {identity: None}
    order = [identity]
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = s @ g
                if h not in seen:
                    seen[h] = None
                    order.append(h)
                    nxt.append(h)
                    if len(order) > limit:
                        raise RuntimeError(f"group exceeds {limit} elements")
        frontier = nxt
    return order


# ---------------------------------------------------------------------------
# the edge group of the right-triangle graph


def base_rotation(params: SurfaceParams) -> Isometry:
    """r(2 alpha, 2 beta), the generator of R."""
    return Isometry.rotation(params.conductor, 2 * params.alpha_turn, 2 * params.beta_turn)


def half_turn(params: SurfaceParams) -> Isometry:
    return Isometry.rotation(params.conductor, Fraction(1, 2), Fraction(1, 2))


def star_seed(params: SurfaceParams) -> tuple[CycNum, CycNum]:
    """Translation part (2a, 2b) of t(2a, 2b)."""
    return (params.a * 2, params.b * 2)


def edge_generators(params: SurfaceParams) -> tuple[Isometry, Isometry, Isometry]:
    """The Schwarz reflections (sigma_12, sigma_13, sigma_23) fixing the triangle edges."""
    m = params.conductor
    sigma = Isometry.sigma(m)
    s13 = base_rotation(params) @ sigma
    s23 = Isometry.translation(*star_seed(params)) @ half_turn(params) @ sigma
    return sigma, s13, s23


def rotation_subgroup_order(params: SurfaceParams) -> int:
    """|R|, decided on rational turns."""
    r = base_rotation(params)
    k = 1
    while (k * r.rot[0]) % 1 or (k * r.rot[1]) % 1:
        k += 1
    return k


def contains_half_turn(params: SurfaceParams) -> bool:
    """True iff r(pi, pi) is a power of r(2 alpha, 2 beta)."""
    r = base_rotation(params)
    half = Fraction(1, 2)
    return any(
        (k * r.rot[0]) % 1 == half and (k * r.rot[1]) % 1 == half
        for k in range(rotation_subgroup_order(params))
    )


def vertex_group(params: SurfaceParams, vertex: int) -> list[Isometry]:
    """Exact enumeration of the vertex group G_i generated by the two adjacent reflections."""
    s12, s13, s23 = edge_generators(params)
    gens = {1: (s12, s13), 2: (s12, s23), 3: (s13, s23)}
    if vertex not in gens:
        raise ValueError(f"vertex must be 1, 2 or 3, got {vertex}")
    return generate_group(gens[vertex])


def vertex_group_order(params: SurfaceParams, vertex: int) -> int:
    """|G_1| = 2n, |G_2| = 4, |G_3| = 2n' (counted by enumeration)."""
    return len(vertex_group(params, vertex))


def complementary_transform(params: SurfaceParams) -> Isometry:
    """t(sin a, sin b) r(-pi/2, -pi/2) t(-cos a, -cos b) sigma: swaps the roles of vertices 1 and 3."""
    m = params.conductor
    sa = CycNum.sin_turn(m, params.alpha_turn)
    sb = CycNum.sin_turn(m, params.beta_turn)
    quarter = Fraction(-1, 4)
    return (
        Isometry.translation(sa, sb)
        @ Isometry.rotation(m, quarter, quarter)
        @ Isometry.translation(-params.a, -params.b)
        @ Isometry.sigma(m)
    )


def derived_point_group(params: SurfaceParams) -> list[Isometry]:
    """<sigma, R, r(pi, pi)>, the linear parts of the isometry group."""
    m = params.conductor
    return generate_group([Isometry.sigma(m), base_rotation(params), half_turn(params)])


# ---------------------------------------------------------------------------
# stars


@dataclass(frozen=True)
class Star:
    """A finite set of translation vectors (u, v), deduplicated exactly."""

    elements: tuple[tuple[CycNum, CycNum], ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, w) -> bool:
        return tuple(w) in set(self.elements)

    def as_float(self) -> np.ndarray:
        """Rows (Re u, Im u, Re v, Im v)."""
        out = np.empty((len(self.elements), 4))
        for i, (u, v) in enumerate(self.elements):
            cu, cv = u.embed(), v.embed()
            out[i] = (cu.real, cu.imag, cv.real, cv.imag)
        return out


def star(params: SurfaceParams) -> Star:
    """Sigma = {t(2a, 2b)}_{G_1}.

    Elements are listed as r^k (2a, 2b) for k = 0, ..., n-1 with
    r = r(2 alpha, 2 beta); reflections add nothing since the seed is real.
    """
    r = base_rotation(params)
    w = star_seed(params)
    elems = []
    for _ in range(rotation_subgroup_order(params)):
        elems.append(w)
        w = r.conjugate_translation(w)
    return Star(tuple(dict.fromkeys(elems)))


def star_difference(params: SurfaceParams) -> Star:
    """Sigma Sigma^-1 = {s - s'}, ordered by (index of s, index of s') with repeats dropped."""
    sig = star(params).elements
    diffs = [(s[0] - t[0], s[1] - t[1]) for s in sig for t in sig]
    return Star(tuple(dict.fromkeys(diffs)))


def lattice_generators(params: SurfaceParams) -> Star:
    """Generating set of the lattice group: Sigma if r(pi,pi) in R, else Sigma Sigma^-1."""
    return star(params) if contains_half_turn(params) else star_difference(params)


def coset_representatives(params: SurfaceParams) -> list[Isometry]:
    """Representatives of G / Lambda: the elements of G_1, plus t(2a,2b) r(pi,pi) G_1 if needed.

    The G_1 part is ordered r^k, then r^k sigma, for k = 0..n-1.
    """
    m = params.conductor
    r = base_rotation(params)
    sigma = Isometry.sigma(m)
    rotations = [Isometry.identity(m)]
    for _ in range(rotation_subgroup_order(params) - 1):
        rotations.append(r @ rotations[-1])
    g1 = rotations + [g @ sigma for g in rotations]
    if contains_half_turn(params):
        return g1
    c = Isometry.translation(*star_seed(params)) @ half_turn(params)
    return g1 + [c @ g for g in g1]
