"""Classification of the discrete right-triangle Riemann surfaces.

Candidates (n, p, q) are enumerated, pruned by totient rank bounds, decided
by an exact rank computation, and completed by the vertex-interchange
transform.  Each survivor is described by its quotient group, lattice type,
genus, density and periodicity.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import sympy

from .cyclotomic import totient
from .isometry import (
    SurfaceParams,
    contains_half_turn,
    coset_representatives,
    derived_point_group,
    lattice_generators,
    vertex_group_order,
)
from .lattice import (
    LatticeBasis,
    NotCrystallographic,
    RootLatticeId,
    determinant_volume,
    identify_root_lattice,
    reduce_basis,
    translation_module_rank,
    periodicity_rank,
)

__all__ = [
    "totient",
    "admissible_n",
    "enumerate_candidates",
    "rank_lower_bound",
    "complementary_parameters",
    "quotient_group",
    "genus",
    "density_exact",
    "classify_candidates",
    "classify_all",
    "SurfaceDescriptor",
    "CandidateReport",
    "ClassificationMismatch",
    "load_golden",
]


class ClassificationMismatch(RuntimeError):
    def __init__(self, diffs: list[str]):
        self.diffs = diffs
        super().__init__("classification differs from golden data:\n  " + "\n  ".join(diffs))


# ---------------------------------------------------------------------------
# candidate enumeration


def _triples_for(n: int):
    for p in range(1, n // 4 + 1):
        if 4 * p > n:
            break
        for q in range(p + 1, n // 2 - p + 1):
            if 2 * (p + q) > n:
                break
            if math.gcd(math.gcd(p, q), n) == 1:
                yield (n, p, q)


def admissible_n() -> set[int]:
    """n with phi(n) <= 4 that admit at least one triple.

    phi(n) >= sqrt(n / 2), so phi(n) <= 4 already forces n <= 32.
    """
    return {n for n in range(1, 33) if totient(n) <= 4 and any(True for _ in _triples_for(n))}


def enumerate_candidates() -> list[tuple[int, int, int]]:
    """Triples with 0 < p <= n/4, p < q <= n/2 - p and gcd(p, q, n) = 1."""
    return [t for n in sorted(admissible_n()) for t in _triples_for(n)]


def rank_lower_bound(n: int, p: int, q: int) -> int | None:
    """Best bound phi(n/p) + phi(n/gcd(n,q)) for p > 1 dividing n, also with p, q swapped."""
    bounds = []
    for s, t in ((p, q), (q, p)):
        if s > 1 and n % s == 0:
            bounds.append(totient(n // s) + totient(n // math.gcd(n, t)))
    return max(bounds) if bounds else None


def complementary_parameters(n: int, p: int, q: int) -> tuple[int, int, int]:
    """Parameters of the angles at vertex 3: alpha' = pi/2 - alpha, beta' = pi/2 - beta."""
    n2 = Fraction(2 * n, math.gcd(2 * n, n - 2 * p, n - 2 * q))
    p2 = n2 * (Fraction(1, 2) - Fraction(p, n))
    q2 = n2 * (Fraction(1, 2) - Fraction(q, n))
    if any(x.denominator != 1 for x in (n2, p2, q2)):
        raise ArithmeticError(f"complementary parameters of {(n, p, q)} are not integers")
    return int(n2), int(p2), int(q2)


# ---------------------------------------------------------------------------
# per-surface data


def quotient_group(params: SurfaceParams) -> tuple[int, str]:
    """(|G/Lambda|, dihedral tag): 2n and d_n when r(pi,pi) in R, else 4n and d_2n."""
    n, p, q = params.triple
    parity = n % 2 == 0 and p % 2 == 1 and q % 2 == 1
    half = contains_half_turn(params)
    if parity != half:
        raise RuntimeError(f"{params}: parity rule says {parity}, group test says {half}")
    order = len(coset_representatives(params))
    if order != len(derived_point_group(params)):
        raise RuntimeError(f"{params}: coset count {order} != point group order")
    expected = 2 * n if half else 4 * n
    if order != expected:
        raise RuntimeError(f"{params}: |G/Lambda| = {order}, expected {expected}")
    return order, f"d{order // 2}"


def genus(params: SurfaceParams) -> int:
    """g from 2 - 2g = |G/Lambda| (1/|G_1| + 1/|G_2| + 1/|G_3| - 1/2)."""
    order, _ = quotient_group(params)
    orders = [vertex_group_order(params, v) for v in (1, 2, 3)]
    n2 = complementary_parameters(*params.triple)[0]
    if orders != [2 * params.n, 4, 2 * n2]:
        raise RuntimeError(f"{params}: vertex group orders {orders} disagree with 2n, 4, 2n'")
    chi = order * (sum(Fraction(1, k) for k in orders) - Fraction(1, 2))
    g = 1 - chi / 2
    if g.denominator != 1 or g < 0:
        raise ArithmeticError(f"{params}: genus {g} is not a non-negative integer")
    return int(g)


def density_exact(params: SurfaceParams, lattice: LatticeBasis) -> sympy.Expr:
    """rho = |G/Lambda| |P| / |Lambda| with |P| = sin(2 pi p / n) / 4."""
    order, _ = quotient_group(params)
    _, vol = determinant_volume(lattice)
    area = sympy.sin(2 * sympy.pi * sympy.Rational(params.p, params.n)) / 4
    return sympy.radsimp(sympy.nsimplify(order * area / vol))


def exact_equal(a, b) -> bool:
    """Symbolic equality of two real algebraic numbers."""
    diff = sympy.nsimplify(sympy.sympify(a) - sympy.sympify(b))
    if diff == 0:
        return True
    x = sympy.Symbol("x")
    try:
        return sympy.minimal_polynomial(diff, x) == x
    except (NotImplementedError, ValueError):
        return sympy.simplify(diff) == 0


def density_json(rho: sympy.Expr) -> dict:
    """{"sqrt": [num, den]} when rho^2 is rational, else {"expr": str}."""
    sq = sympy.nsimplify(sympy.expand(rho ** 2))
    if sq.is_Rational:
        return {"sqrt": [int(sq.p), int(sq.q)]}
    return {"expr": sympy.sstr(rho)}


@dataclass(frozen=True)
class SurfaceDescriptor:
    params: SurfaceParams
    quotient_order: int
    quotient_tag: str
    lattice: LatticeBasis
    root_lattice: RootLatticeId
    genus: int
    density: sympy.Expr
    periodicity: str
    lambda_y_rank: int
    half_turn_in_R: bool
    provenance: str = "canonical"
    vertex_orders: tuple[int, int, int] = field(default=(0, 0, 0))

    @property
    def triple(self) -> tuple[int, int, int]:
        return self.params.triple

    @property
    def density_float(self) -> float:
        return float(self.density)

    @property
    def volume(self) -> sympy.Expr:
        return determinant_volume(self.lattice)[1]

    def euler_characteristic(self) -> Fraction:
        return self.quotient_order * (sum(Fraction(1, k) for k in self.vertex_orders) - Fraction(1, 2))

    def as_row(self) -> dict:
        n, p, q = self.triple
        return {
            "triple": [n, p, q],
            "quotient": self.quotient_tag,
            "quotient_order": self.quotient_order,
            "lattice": self.root_lattice.tag,
            "genus": self.genus,
            "density": self.density_float,
            "density_exact": density_json(self.density),
            "class": self.periodicity,
            "provenance": self.provenance,
        }


def describe(params: SurfaceParams, provenance: str = "canonical") -> SurfaceDescriptor:
    basis = reduce_basis(lattice_generators(params))
    rank_y, cls = periodicity_rank(params, basis)
    order, tag = quotient_group(params)
    return SurfaceDescriptor(
        params=params,
        quotient_order=order,
        quotient_tag=tag,
        lattice=basis,
        root_lattice=identify_root_lattice(basis),
        genus=genus(params),
        density=density_exact(params, basis),
        periodicity=cls,
        lambda_y_rank=rank_y,
        half_turn_in_R=contains_half_turn(params),
        provenance=provenance,
        vertex_orders=tuple(vertex_group_order(params, v) for v in (1, 2, 3)),
    )


# ---------------------------------------------------------------------------
# full pipeline


@dataclass(frozen=True)
class CandidateReport:
    triple: tuple[int, int, int]
    bound: int | None
    rank: int
    pruned_by_bound: bool
    crystallographic: bool


def classify_candidates() -> list[CandidateReport]:
    """Totient rank bound and exact rank for every candidate; the exact test always runs."""
    out = []
    for t in enumerate_candidates():
        bound = rank_lower_bound(*t)
        params = SurfaceParams(*t)
        gens = lattice_generators(params)
        rank = translation_module_rank(gens)
        ok = False
        if rank == 4:
            try:
                reduce_basis(gens)
                ok = True
            except NotCrystallographic:
                ok = False
        out.append(CandidateReport(t, bound, rank, bound is not None and bound > 4, ok))
    return out


def interchange(triple: tuple[int, int, int]) -> tuple[int, int, int]:
    """Swap the roles of X and Y (p <-> q) and renormalize so that p < q."""
    n, p, q = triple
    n, p, q = n, q, p
    if p > q:
        n, p, q = complementary_parameters(n, p, q)
    return n, p, q


@lru_cache(maxsize=None)
def _classify() -> tuple[SurfaceDescriptor, ...]:
    reports = classify_candidates()
    survivors = [r.triple for r in reports if r.crystallographic]
    triples = {t: "canonical" for t in survivors}
    for t in survivors:
        s = interchange(t)
        if s not in triples:
            triples[s] = "interchange of ({},{},{})".format(*t)
    descs = [describe(SurfaceParams(*t), prov) for t, prov in triples.items()]
    return tuple(sorted(descs, key=lambda d: d.triple))


# ---------------------------------------------------------------------------
# golden data


def load_golden() -> dict:
    with resources.files("crystal_riemann").joinpath("data/golden.json").open() as fh:
        return json.load(fh)


def reference_gram(entry: dict, corrected: bool = True) -> list[list[Fraction]]:
    """Reference Gram matrix from golden data, with any recorded erratum applied."""
    gram = [[Fraction(x) for x in row] for row in entry["gram"]]
    err = entry.get("erratum")
    if corrected and err:
        for i, j in err["entries"]:
            gram[i][j] = Fraction(err["consistent"])
    return gram


def compare_with_golden(descs, golden: dict | None = None) -> list[str]:
    from .lattice import gram_closed_form

    golden = golden or load_golden()
    diffs = []
    rows = {tuple(r["triple"]): r for r in golden["surfaces"]}
    got = {d.triple: d for d in descs}
    for t in sorted(set(rows) - set(got)):
        diffs.append(f"{t}: missing from derivation")
    for t in sorted(set(got) - set(rows)):
        diffs.append(f"{t}: not in golden table")
    for t in sorted(set(rows) & set(got)):
        r, d = rows[t], got[t]
        checks = {
            "quotient": (d.quotient_tag, r["quotient"]),
            "quotient_order": (d.quotient_order, r["quotient_order"]),
            "lattice": (d.root_lattice.tag, r["lattice"]),
            "genus": (d.genus, r["genus"]),
            "class": (d.periodicity, r["class"]),
        }
        for key, (a, b) in checks.items():
            if a != b:
                diffs.append(f"{t}: {key} derived {a!r}, golden {b!r}")
        if not exact_equal(d.density, r["density"]):
            diffs.append(f"{t}: density derived {d.density}, golden {r['density']}")
    for entry in golden.get("lattices", []):
        t = tuple(entry["triple"])
        if t not in got:
            continue
        params = got[t].params
        if gram_closed_form(params) != reference_gram(entry):
            diffs.append(f"{t}: closed-form Gram differs from reference")
        if not exact_equal(got[t].volume, entry["volume"]):
            diffs.append(f"{t}: |Lambda| derived {got[t].volume}, golden {entry['volume']}")
    return diffs


def classify_all(check: bool = True) -> list[SurfaceDescriptor]:
    """The seven discrete surfaces sorted by (n, p, q); raises on golden mismatch when ``check``."""
    descs = list(_classify())
    if check:
        diffs = compare_with_golden(descs)
        if diffs:
            raise ClassificationMismatch(diffs)
    return descs
