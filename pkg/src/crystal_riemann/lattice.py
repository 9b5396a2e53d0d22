"""Lattice group Lambda: exact rank, HNF + LLL basis, Gram data, root-lattice type."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import sympy

from .cyclotomic import (
    CycNum,
    determinant,
    hermite_normal_form,
    matmul,
    rational_rank,
    solve_left,
    totient,
    transpose,
)
from .isometry import SurfaceParams, Star, contains_half_turn, lattice_generators

Vector = tuple[CycNum, CycNum]
LLL_DELTA = Fraction(99, 100)


class NotCrystallographic(ValueError):
    """Raised when the translation module is not a rank-4 lattice in R^4."""


# ---------------------------------------------------------------------------
# coordinates


def real_coordinates(w: Vector) -> list[Fraction]:
    """Power-basis coordinates of (Re u, Im u, Re v, Im v), 4 phi(m) rationals."""
    u, v = w
    out: list[Fraction] = []
    for part in (u.re(), u.im(), v.re(), v.im()):
        out.extend(part.coeffs)
    return out


def module_coordinates(w: Vector) -> list[Fraction]:
    """Power-basis coordinates of (u, v); an injective Z-linear map to Q^{2 phi(m)}."""
    return list(w[0].coeffs) + list(w[1].coeffs)


def _from_module_coordinates(m: int, coords: Sequence) -> Vector:
    phi = len(coords) // 2
    return (CycNum(m, tuple(coords[:phi])), CycNum(m, tuple(coords[phi:])))


def _as_vectors(star_vectors) -> list[Vector]:
    if isinstance(star_vectors, Star):
        return list(star_vectors.elements)
    return [tuple(w) for w in star_vectors]


def inner(w1: Vector, w2: Vector) -> Fraction:
    """Euclidean inner product in R^4 = X x Y, certified rational."""
    val = (w1[0] * w2[0].conj()).re() + (w1[1] * w2[1].conj()).re()
    if not val.is_rational():
        raise ValueError(f"inner product {val!r} is irrational")
    return val.to_rational()


def exact_gram(vectors: Sequence[Vector]) -> list[list[Fraction]]:
    return [[inner(a, b) for b in vectors] for a in vectors]


def translation_module_rank(star_vectors) -> int:
    """Rank of the subgroup of R^4 generated by the given exact vectors."""
    vecs = _as_vectors(star_vectors)
    if not vecs:
        return 0
    return rational_rank([real_coordinates(w) for w in vecs])


# ---------------------------------------------------------------------------
# LLL on an exact Gram matrix


def _gso(gram: Sequence[Sequence[Fraction]]):
    k = len(gram)
    mu = [[Fraction(0)] * k for _ in range(k)]
    bstar = [Fraction(0)] * k
    for i in range(k):
        for j in range(i):
            s = gram[i][j] - sum(mu[j][t] * mu[i][t] * bstar[t] for t in range(j))
            mu[i][j] = s / bstar[j]
        bstar[i] = gram[i][i] - sum(mu[i][t] ** 2 * bstar[t] for t in range(i))
        if bstar[i] <= 0:
            raise NotCrystallographic("Gram matrix is not positive definite")
    return mu, bstar


def lll_gram(gram: Sequence[Sequence], delta: Fraction = LLL_DELTA, exact: bool = True):
    """LLL reduction driven by a Gram matrix (exact rationals unless ``exact`` is False).

    Returns (reduced_gram, T) with T unimodular and reduced_gram = T G T^T.
    """
    k = len(gram)
    conv = Fraction if exact else float
    g0 = [[conv(x) for x in row] for row in gram]
    if not exact:
        delta = float(delta)
    T = [[int(i == j) for j in range(k)] for i in range(k)]

    def current():
        return [[sum(T[i][a] * g0[a][b] * T[j][b] for a in range(k) for b in range(k))
                 for j in range(k)] for i in range(k)]

    g = current()
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            mu, _ = _gso(g)
            r = round(mu[i][j])
            if r:
                T[i] = [x - r * y for x, y in zip(T[i], T[j])]
                g = current()
        mu, bstar = _gso(g)
        if bstar[i] >= (delta - mu[i][i - 1] ** 2) * bstar[i - 1]:
            i += 1
        else:
            T[i], T[i - 1] = T[i - 1], T[i]
            g = current()
            i = max(i - 1, 1)
    return g, T


# ---------------------------------------------------------------------------
# bounded enumeration


def fincke_pohst(gram: np.ndarray, bound: float, slack: float = 1e-9) -> np.ndarray:
    """All integer c != 0 with c G c^T <= bound (+ slack), as rows of an int array.

    Plain Schnorr-Euchner-free depth-first enumeration from the Cholesky factor.
    """
    gram = np.asarray(gram, dtype=float)
    k = gram.shape[0]
    L = np.linalg.cholesky(gram)  # G = L L^T
    R = L.T  # upper triangular, G = R^T R
    # q_ii and mu_ij in the usual quadratic-form decomposition
    diag = np.diag(R) ** 2
    mu = R / np.diag(R)[:, None]
    out: list[tuple[int, ...]] = []
    x = [0] * k
    lim = bound + slack

    def rec(level: int, remaining: float):
        centre = -sum(mu[level][j] * x[j] for j in range(level + 1, k))
        span = math.sqrt(max(remaining, 0.0) / diag[level])
        for xi in range(math.ceil(centre - span - 1e-12), math.floor(centre + span + 1e-12) + 1):
            rem = remaining - diag[level] * (xi - centre) ** 2
            if rem < -slack:
                continue
            x[level] = xi
            if level == 0:
                out.append(tuple(x))
            else:
                rec(level - 1, rem)
        x[level] = 0

    rec(k - 1, lim)
    arr = np.array([v for v in out if any(v)], dtype=np.int64).reshape(-1, k)
    return arr


def exact_norm(gram: Sequence[Sequence[Fraction]], c: Sequence[int]) -> Fraction:
    k = len(c)
    return sum(c[i] * gram[i][j] * c[j] for i in range(k) for j in range(k) if c[i] and c[j])


def short_vectors(gram: Sequence[Sequence[Fraction]], bound) -> list[tuple[tuple[int, ...], Fraction]]:
    """Nonzero coefficient vectors with exact norm <= bound, sorted by (norm, coefficients)."""
    gf = np.array([[float(x) for x in row] for row in gram])
    bound = Fraction(bound)
    cand = fincke_pohst(gf, float(bound), slack=1e-7 * max(1.0, float(bound)))
    out = []
    for c in cand:
        c = tuple(int(t) for t in c)
        nrm = exact_norm(gram, c)
        if nrm <= bound:
            out.append((c, nrm))
    out.sort(key=lambda t: (t[1], t[0]))
    return out


def norm_counts(gram, levels: int = 3) -> list[tuple[Fraction, int]]:
    """(norm, count) for the ``levels`` smallest nonzero norms."""
    diag = sorted(Fraction(gram[i][i]) for i in range(len(gram)))
    bound = diag[0]
    while True:
        vecs = short_vectors(gram, bound)
        norms = sorted({nrm for _, nrm in vecs})
        if len(norms) >= levels:
            break
        bound *= 2
    counts = []
    for nrm in norms[:levels]:
        counts.append((nrm, sum(1 for _, t in vecs if t == nrm)))
    return counts


# ---------------------------------------------------------------------------
# basis


@dataclass(frozen=True)
class LatticeBasis:
    """A reduced Z-basis of Lambda.

    ``unimodular_history`` expresses the reduced generators in terms of the
    Hermite-normal-form basis of the generating set (rows of integers).
    """

    conductor: int
    exact_generators: tuple[Vector, ...]
    gram: tuple[tuple[Fraction, ...], ...]
    det: Fraction
    unimodular_history: tuple[tuple[int, ...], ...]
    hnf_generators: tuple[Vector, ...] = field(repr=False, default=())

    @property
    def rank(self) -> int:
        return len(self.exact_generators)

    @property
    def generators(self) -> np.ndarray:
        """Rows (Re u, Im u, Re v, Im v) as floats."""
        out = np.empty((self.rank, 4))
        for i, (u, v) in enumerate(self.exact_generators):
            cu, cv = u.embed(), v.embed()
            out[i] = (cu.real, cu.imag, cv.real, cv.imag)
        return out

    @property
    def complex_generators(self) -> np.ndarray:
        """Rows (u, v) as complex floats."""
        return np.array([[u.embed(), v.embed()] for u, v in self.exact_generators])

    def gram_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.gram])

    def combination(self, coeffs: Sequence[int]) -> Vector:
        u = CycNum.zero(self.conductor)
        v = CycNum.zero(self.conductor)
        for c, (gu, gv) in zip(coeffs, self.exact_generators):
            if c:
                u = u + gu * c
                v = v + gv * c
        return (u, v)

    def contains(self, w: Vector) -> bool:
        coeffs = self.coordinates(w)
        return coeffs is not None and all(c.denominator == 1 for c in coeffs)

    def coordinates(self, w: Vector) -> list[Fraction] | None:
        basis = [module_coordinates(g) for g in self.exact_generators]
        return solve_left(basis, module_coordinates(w))

    def swapped(self) -> LatticeBasis:
        """The same basis with the X and Y components interchanged."""
        gens = tuple((v, u) for u, v in self.exact_generators)
        return LatticeBasis(self.conductor, gens, tuple(map(tuple, exact_gram(gens))),
                            self.det, self.unimodular_history, self.hnf_generators)


def hnf_basis(star_vectors) -> list[Vector]:
    """Exact Z-basis of the module generated by ``star_vectors`` (HNF in power-basis coordinates)."""
    vecs = _as_vectors(star_vectors)
    if not vecs:
        return []
    m = vecs[0][0].conductor
    rows = [module_coordinates(w) for w in vecs]
    den = math.lcm(*(c.denominator for row in rows for c in row))
    int_rows = [[int(c * den) for c in row] for row in rows]
    hnf = hermite_normal_form(int_rows)
    return [_from_module_coordinates(m, [Fraction(c, den) for c in row]) for row in hnf]


def reduce_basis(star_vectors) -> LatticeBasis:
    """HNF basis of the generated module followed by exact LLL (delta = 0.99)."""
    vecs = _as_vectors(star_vectors)
    rank = translation_module_rank(vecs)
    if rank != 4:
        raise NotCrystallographic(f"not crystallographic: translation module has rank {rank}")
    basis = hnf_basis(vecs)
    if len(basis) != 4:
        raise NotCrystallographic(f"not crystallographic: HNF produced {len(basis)} generators")
    g0 = exact_gram(basis)
    if determinant(g0) <= 0:
        raise NotCrystallographic("not crystallographic: generators are dependent over R")
    g, T = lll_gram(g0)
    m = basis[0][0].conductor
    reduced = []
    for row in T:
        u, v = CycNum.zero(m), CycNum.zero(m)
        for c, (bu, bv) in zip(row, basis):
            if c:
                u, v = u + bu * c, v + bv * c
        reduced.append((u, v))
    gram = exact_gram(reduced)
    assert gram == g
    return LatticeBasis(
        conductor=m,
        exact_generators=tuple(reduced),
        gram=tuple(tuple(r) for r in gram),
        det=determinant(gram),
        unimodular_history=tuple(tuple(r) for r in T),
        hnf_generators=tuple(basis),
    )


def lattice_basis(params: SurfaceParams) -> LatticeBasis:
    return reduce_basis(lattice_generators(params))


# ---------------------------------------------------------------------------
# closed forms


def closed_form_vectors(params: SurfaceParams, which: str) -> list[Vector]:
    """e_k for k = 1..4: 2(a e^{2ik alpha}, b e^{2ik beta}), times (e^{2i alpha} - 1, e^{2i beta} - 1) for basis2."""
    if which not in ("basis1", "basis2"):
        raise ValueError(f"which must be 'basis1' or 'basis2', got {which!r}")
    m = params.conductor
    za = CycNum.root_of_unity(m, 2 * params.alpha_turn)
    zb = CycNum.root_of_unity(m, 2 * params.beta_turn)
    fa = za - 1 if which == "basis2" else CycNum.one(m)
    fb = zb - 1 if which == "basis2" else CycNum.one(m)
    out = []
    for k in range(1, 5):
        out.append((fa * params.a * 2 * za ** k, fb * params.b * 2 * zb ** k))
    return out


def natural_closed_form(params: SurfaceParams) -> str:
    return "basis1" if contains_half_turn(params) else "basis2"


def gram_closed_form(params: SurfaceParams, which: str | None = None) -> list[list[Fraction]]:
    """Gram matrix of the closed-form basis, computed exactly and certified rational."""
    return exact_gram(closed_form_vectors(params, which or natural_closed_form(params)))


def same_module(basis: LatticeBasis, vectors: Iterable[Vector]) -> bool:
    """Mutual membership: ``vectors`` lie in the lattice and generate all of it."""
    vectors = list(vectors)
    if not all(basis.contains(w) for w in vectors):
        return False
    if rational_rank([module_coordinates(w) for w in vectors]) != basis.rank:
        return False
    other = [module_coordinates(w) for w in hnf_basis(vectors)]
    for g in basis.exact_generators:
        c = solve_left(other, module_coordinates(g))
        if c is None or any(x.denominator != 1 for x in c):
            return False
    return True


# ---------------------------------------------------------------------------
# volume


def determinant_volume(basis_or_gram) -> tuple[Fraction, sympy.Expr]:
    """(det M, |Lambda| = sqrt(det M)) with |Lambda| as an exact sympy number."""
    if isinstance(basis_or_gram, LatticeBasis):
        det = basis_or_gram.det
    else:
        det = determinant(basis_or_gram)
    if det <= 0:
        raise NotCrystallographic("determinant is not positive")
    vol = sympy.sqrt(sympy.Rational(det.numerator, det.denominator))
    return det, vol


# ---------------------------------------------------------------------------
# root lattices


def _cartan_a(k: int) -> list[list[int]]:
    return [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(k)] for i in range(k)]


CANONICAL = {
    "A4": _cartan_a(4),
    "D4": [[2, 0, 0, -1], [0, 2, 0, -1], [0, 0, 2, -1], [-1, -1, -1, 2]],
    "A2": _cartan_a(2),
    "Z2": [[1, 0], [0, 1]],
}
ROOT_LATTICE_BLOCKS = {
    "A4": ("A4",),
    "D4": ("D4",),
    "A2xA2": ("A2", "A2"),
    "A2xZ2": ("A2", "Z2"),
}
DISPLAY = {"A4": "A4", "D4": "D4", "A2xA2": "A2×A2", "A2xZ2": "A2×Z2", "unknown": "unknown"}


def block_gram(blocks: Sequence[str], scales: Sequence[Fraction]) -> list[list[Fraction]]:
    k = sum(len(CANONICAL[b]) for b in blocks)
    out = [[Fraction(0)] * k for _ in range(k)]
    off = 0
    for b, s in zip(blocks, scales):
        s = Fraction(s)
        c = CANONICAL[b]
        for i in range(len(c)):
            for j in range(len(c)):
                out[off + i][off + j] = s * c[i][j]
        off += len(c)
    return out


@dataclass(frozen=True)
class RootLatticeId:
    tag: str
    scales: tuple[Fraction, ...] = ()
    witness: tuple[tuple[int, ...], ...] | None = None
    norm_counts: tuple[tuple[Fraction, int], ...] = ()
    witness_source: str = ""

    @property
    def display(self) -> str:
        return DISPLAY[self.tag]


def _mat(gram) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in gram]


def _congruent(W, gram):
    return matmul(matmul(W, gram), transpose(W))


def _match_blocks(target, blocks) -> tuple[Fraction, ...] | None:
    """Scales s_i with target == block_gram(blocks, s), or None."""
    scales = []
    off = 0
    for b in blocks:
        c = CANONICAL[b]
        s = Fraction(target[off][off]) / c[0][0]
        if s <= 0:
            return None
        scales.append(s)
        off += len(c)
    return tuple(scales) if _mat(target) == block_gram(blocks, scales) else None


def _signed_permutations(k: int):
    for perm in itertools.permutations(range(k)):
        for signs in itertools.product((1, -1), repeat=k):
            yield [[signs[i] if j == perm[i] else 0 for j in range(k)] for i in range(k)]


def _try_witness(gram, S) -> tuple[str, tuple, list[list[int]]] | None:
    """Compose S with signed permutations until S M S^T is a scaled canonical block form."""
    base = _congruent(S, gram)
    for D in _signed_permutations(len(gram)):
        t = _congruent(D, base)
        for tag, blocks in ROOT_LATTICE_BLOCKS.items():
            scales = _match_blocks(t, blocks)
            if scales is not None:
                return tag, scales, matmul(D, S)
    return None


def _search_witness(gram, tag: str) -> tuple[tuple, list[list[int]]] | None:
    """Backtracking search for short vectors whose Gram is a scaled canonical block form."""
    blocks = ROOT_LATTICE_BLOCKS[tag]
    counts = norm_counts(gram, 3)
    norms = [nrm for nrm, _ in counts]
    vecs = short_vectors(gram, norms[-1])
    den = math.lcm(*(x.denominator for row in gram for x in row))
    gi = np.array([[int(x * den) for x in row] for row in gram], dtype=np.int64)
    V = np.array([c for c, _ in vecs], dtype=np.int64)
    ip = V @ gi @ V.T  # exact: den * <v_i, v_j>
    by_norm: dict[int, np.ndarray] = {}
    for nrm in norms:
        by_norm[int(nrm * den)] = np.flatnonzero(np.diag(ip) == int(nrm * den))

    for norm_choice in itertools.product(norms, repeat=len(blocks)):
        scales = tuple(nrm / CANONICAL[b][0][0] for b, nrm in zip(blocks, norm_choice))
        target = [[x * den for x in row] for row in block_gram(blocks, scales)]
        if any(x.denominator != 1 for row in target for x in row):
            continue
        target = [[int(x) for x in row] for row in target]
        chosen: list[int] = []

        def rec(i):
            if i == 4:
                return round(np.linalg.det(V[chosen].astype(float))) in (1, -1)
            for c in by_norm.get(target[i][i], ()):
                if all(ip[c, chosen[j]] == target[i][j] for j in range(i)):
                    chosen.append(c)
                    if rec(i + 1):
                        return True
                    chosen.pop()
            return False

        if rec(0):
            W = [[int(t) for t in V[c]] for c in chosen]
            if determinant(W) in (1, -1):
                return scales, W
    return None


def identify_root_lattice(basis_or_gram, witness=None) -> RootLatticeId:
    """Root-lattice type of a rank-4 Gram matrix.

    A supplied witness S (integer, unimodular) is tried first, composed with
    signed permutations; otherwise a bounded search over short vectors is run.
    The result is cross-checked by vector counts at the three smallest norms.
    """
    gram = _mat(basis_or_gram.gram if isinstance(basis_or_gram, LatticeBasis) else basis_or_gram)
    found = None
    source = ""
    if witness is not None and determinant(witness) in (1, -1):
        found = _try_witness(gram, [list(map(int, r)) for r in witness])
        source = "supplied"
    if found is None:
        for tag in ROOT_LATTICE_BLOCKS:
            res = _search_witness(gram, tag)
            if res is not None:
                found = (tag, res[0], res[1])
                source = "search"
                break
    if found is None:
        return RootLatticeId("unknown", norm_counts=tuple(norm_counts(gram)))
    tag, scales, W = found
    counts = norm_counts(gram)
    canon = norm_counts(block_gram(ROOT_LATTICE_BLOCKS[tag], scales))
    if counts != canon:
        return RootLatticeId("unknown", norm_counts=tuple(counts))
    return RootLatticeId(tag, tuple(scales), tuple(tuple(r) for r in W), tuple(counts), source)


# ---------------------------------------------------------------------------
# periodicity


def lambda_y_rank(basis: LatticeBasis) -> int:
    """Rank of Lambda_Y = Lambda ∩ Y, the kernel of the X projection on Lambda."""
    xs = [list(u.coeffs) for u, _ in basis.exact_generators]
    return basis.rank - rational_rank(xs)


def periodicity_rank(params: SurfaceParams, basis: LatticeBasis) -> tuple[int, str]:
    """(Rk Lambda_Y, 'periodic' | 'quasiperiodic') with Rk Lambda_Y = 4 - phi(n / gcd(n, p))."""
    formula = 4 - totient(params.n // math.gcd(params.n, params.p))
    direct = lambda_y_rank(basis)
    if formula != direct:
        raise RuntimeError(f"{params}: Rk Lambda_Y formula {formula} != kernel rank {direct}")
    if formula == 2:
        return 2, "periodic"
    if formula == 0:
        return 0, "quasiperiodic"
    raise RuntimeError(f"{params}: Rk Lambda_Y = {formula} is neither 0 nor 2")
