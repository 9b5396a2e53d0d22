"""Exact arithmetic in cyclotomic fields Q(zeta_m) and exact rational linear algebra.

Elements are stored as coordinate vectors over the power basis
1, zeta, ..., zeta^(phi(m)-1), reduced modulo the m-th cyclotomic polynomial.
Everything here is immutable and exact; floats only appear through
:meth:`CycNum.embed`.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence


def totient(k: int) -> int:
    """Euler's totient function."""
    if k < 1:
        raise ValueError(f"totient undefined for {k}")
    result, rest, d = k, k, 2
    while d * d <= rest:
        if rest % d == 0:
            while rest % d == 0:
                rest //= d
            result -= result // d
        d += 1
    if rest > 1:
        result -= result // rest
    return result


def _poly_divexact(num: list[int], den: Sequence[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        q, r = divmod(num[i + len(den) - 1], lead)
        if r:
            raise ArithmeticError("inexact polynomial division")
        out[i] = q
        for j, c in enumerate(den):
            num[i + j] -= q * c
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@functools.lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Coefficients (constant term first) of the m-th cyclotomic polynomial.

    Obtained by dividing x^m - 1 by Phi_d for every proper divisor d of m.

    >>> cyclotomic_polynomial(6)
    (1, -1, 1)
    """
    if m < 1:
        raise ValueError("conductor must be positive")
    poly = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_divexact(poly, cyclotomic_polynomial(d))
    return tuple(poly)


class _Field:
    """Reduction tables for one conductor."""

    def __init__(self, m: int):
        self.m = m
        self.phi = totient(m)
        self.modulus = cyclotomic_polynomial(m)
        # rows[k] = coordinates of x^k mod Phi_m, for 0 <= k < max(m, 2*phi - 1)
        n_rows = max(m, 2 * self.phi - 1)
        rows: list[tuple[int, ...]] = []
        cur = [0] * self.phi
        cur[0] = 1
        for _ in range(n_rows):
            rows.append(tuple(cur))
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                for j in range(self.phi):
                    cur[j] -= top * self.modulus[j]
        self.powers = rows
        self.roots = [cmath.exp(2j * math.pi * k / m) for k in range(self.phi)]


@functools.lru_cache(maxsize=None)
def _field(m: int) -> _Field:
    return _Field(m)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class CycNum:
    """An element of Q(zeta_m), zeta_m = exp(2 pi i / m) under :meth:`embed`."""

    conductor: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        phi = _field(self.conductor).phi
        if len(self.coeffs) != phi:
            raise ValueError(
                f"Q(zeta_{self.conductor}) needs {phi} coordinates, got {len(self.coeffs)}"
            )
        object.__setattr__(self, "coeffs", tuple(_as_fraction(c) for c in self.coeffs))

    # -- constructors -------------------------------------------------------
    @classmethod
    def rational(cls, m: int, value=0) -> CycNum:
        phi = _field(m).phi
        return cls(m, (_as_fraction(value),) + (Fraction(0),) * (phi - 1))

    @classmethod
    def zero(cls, m: int) -> CycNum:
        return cls.rational(m, 0)

    @classmethod
    def one(cls, m: int) -> CycNum:
        return cls.rational(m, 1)

    @classmethod
    def zeta(cls, m: int, k: int = 1) -> CycNum:
        """zeta_m ** k for any integer k."""
        f = _field(m)
        return cls(m, tuple(Fraction(c) for c in f.powers[k % m]))

    @classmethod
    def root_of_unity(cls, m: int, turn: Fraction) -> CycNum:
        """exp(2 pi i * turn); the denominator of ``turn`` must divide m."""
        turn = _as_fraction(turn)
        if (turn * m).denominator != 1:
            raise ValueError(f"turn {turn} not representable in Q(zeta_{m})")
        return cls.zeta(m, int(turn * m))

    @classmethod
    def cos_turn(cls, m: int, turn: Fraction) -> CycNum:
        """cos(2 pi * turn) as an exact element."""
        w = cls.root_of_unity(m, turn)
        return (w + w.conj()) * Fraction(1, 2)

    @classmethod
    def sin_turn(cls, m: int, turn: Fraction) -> CycNum:
        w = cls.root_of_unity(m, turn)
        return (w - w.conj()) * cls.imag_unit(m).conj() * Fraction(1, 2)

    @classmethod
    def imag_unit(cls, m: int) -> CycNum:
        if m % 4:
            raise ValueError(f"i is not in the power basis of Q(zeta_{m}) with 4 ∤ {m}")
        return cls.zeta(m, m // 4)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> CycNum:
        if isinstance(other, CycNum):
            if other.conductor != self.conductor:
                raise ValueError(
                    f"conductor mismatch: {self.conductor} vs {other.conductor}; lift first"
                )
            return other
        return CycNum.rational(self.conductor, _as_fraction(other))

    def __add__(self, other) -> CycNum:
        o = self._coerce(other)
        return CycNum(self.conductor, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> CycNum:
        return CycNum(self.conductor, tuple(-a for a in self.coeffs))

    def __sub__(self, other) -> CycNum:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> CycNum:
        return self._coerce(other) - self

    def __mul__(self, other) -> CycNum:
        if not isinstance(other, CycNum):
            c = _as_fraction(other)
            return CycNum(self.conductor, tuple(a * c for a in self.coeffs))
        return cyc_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> CycNum:
        if k < 0:
            raise ValueError("negative powers are not supported")
        result, base = CycNum.one(self.conductor), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> CycNum:
        return cyc_conj(self)

    def re(self) -> CycNum:
        return (self + self.conj()) * Fraction(1, 2)

    def im(self) -> CycNum:
        i = CycNum.imag_unit(self.conductor)
        return (self - self.conj()) * i.conj() * Fraction(1, 2)

    def abs2(self) -> CycNum:
        return self * self.conj()

    # -- views --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    def embed(self) -> complex:
        return cyc_embed(self)

    def lift(self, m: int) -> CycNum:
        """Re-express in Q(zeta_m), m a multiple of the current conductor."""
        if m % self.conductor:
            raise ValueError(f"{self.conductor} does not divide {m}")
        step = m // self.conductor
        out = CycNum.zero(m)
        for k, c in enumerate(self.coeffs):
            if c:
                out = out + CycNum.zeta(m, k * step) * c
        return out

    def __repr__(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*z^{k}")
        return f"CycNum[{self.conductor}]({' + '.join(terms) or '0'})"


def cyc_mul(a: CycNum, b: CycNum) -> CycNum:
    """Exact product reduced modulo Phi_m."""
    if a.conductor != b.conductor:
        raise ValueError(f"conductor mismatch: {a.conductor} vs {b.conductor}")
    f = _field(a.conductor)
    phi = f.phi
    prod = [Fraction(0)] * (2 * phi - 1)
    for i, x in enumerate(a.coeffs):
        if x:
            for j, y in enumerate(b.coeffs):
                if y:
                    prod[i + j] += x * y
    out = prod[:phi]
    for k in range(phi, 2 * phi - 1):
        c = prod[k]
        if c:
            row = f.powers[k]
            for j in range(phi):
                if row[j]:
                    out[j] += c * row[j]
    return CycNum(a.conductor, tuple(out))


def cyc_conj(a: CycNum) -> CycNum:
    """Complex conjugate: zeta -> zeta^(m-1)."""
    m = a.conductor
    f = _field(m)
    out = [Fraction(0)] * f.phi
    for k, c in enumerate(a.coeffs):
        if c:
            row = f.powers[(-k) % m]
            for j in range(f.phi):
                if row[j]:
                    out[j] += c * row[j]
    return CycNum(m, tuple(out))


def cyc_embed(a: CycNum) -> complex:
    """Principal embedding zeta_m -> exp(2 pi i / m)."""
    roots = _field(a.conductor).roots
    return complex(sum(float(c) * r for c, r in zip(a.coeffs, roots) if c))


# ---------------------------------------------------------------------------
# exact rational linear algebra


@dataclass(frozen=True)
class RationalMatrix:
    """Dense matrix of exact rationals."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(_as_fraction(x) for x in row) for row in rows)
        if data and len({len(r) for r in data}) != 1:
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", data)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def rank(self) -> int:
        return rational_rank(self)

    def __iter__(self):
        return iter(self.entries)


def _integer_rows(rows: Iterable[Iterable]) -> list[list[int]]:
    out = []
    for row in rows:
        fr = [_as_fraction(x) for x in row]
        den = 1
        for x in fr:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) for x in fr])
    return out


def rational_rank(matrix) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    rows = _integer_rows(matrix.entries if isinstance(matrix, RationalMatrix) else matrix)
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank, prev = 0, 1
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for i in range(rank + 1, len(rows)):
            ri = rows[i]
            c = ri[col]
            rows[i] = [(p * ri[j] - c * rows[rank][j]) // prev for j in range(ncols)]
        prev = p
        rank += 1
        if rank == len(rows):
            break
    return rank


def hermite_normal_form(rows: Iterable[Iterable[int]]) -> list[list[int]]:
    """Row-style HNF of an integer matrix; returns the nonzero rows.

    The returned rows are a Z-basis of the row lattice: echelon form with
    positive pivots and entries above each pivot reduced into [0, pivot).
    """
    a = [list(map(int, r)) for r in rows]
    if not a:
        return []
    ncols = len(a[0])
    r = 0
    for col in range(ncols):
        # gcd-reduce column ``col`` among rows r.. into row r
        while True:
            nz = [i for i in range(r, len(a)) if a[i][col]]
            if not nz:
                break
            i_min = min(nz, key=lambda i: abs(a[i][col]))
            a[r], a[i_min] = a[i_min], a[r]
            piv = a[r][col]
            done = True
            for i in range(r + 1, len(a)):
                if a[i][col]:
                    q = a[i][col] // piv
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][col]:
                        done = False
            if done:
                break
        if r < len(a) and a[r][col]:
            if a[r][col] < 0:
                a[r] = [-x for x in a[r]]
            piv = a[r][col]
            for i in range(r):
                q = a[i][col] // piv
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
            r += 1
            if r == len(a):
                break
    return [row for row in a[:r]]


def solve_left(basis: Sequence[Sequence], target: Sequence) -> list[Fraction] | None:
    """Rational c with c @ basis == target, or None when no solution exists.

    ``basis`` must have linearly independent rows.
    """
    k = len(basis)
    ncols = len(target)
    # augmented system: columns of basis^T | target
    aug = [[_as_fraction(basis[i][j]) for i in range(k)] + [_as_fraction(target[j])]
           for j in range(ncols)]
    pivots = []
    r = 0
    for col in range(k):
        piv = next((i for i in range(r, ncols) if aug[i][col]), None)
        if piv is None:
            raise ValueError("basis rows are linearly dependent")
        aug[r], aug[piv] = aug[piv], aug[r]
        p = aug[r][col]
        aug[r] = [x / p for x in aug[r]]
        for i in range(ncols):
            if i != r and aug[i][col]:
                c = aug[i][col]
                aug[i] = [x - c * y for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    if any(aug[i][k] for i in range(r, ncols)):
        return None
    return [aug[i][k] for i in range(k)]


def determinant(matrix: Sequence[Sequence]) -> Fraction:
    """Exact determinant by Gaussian elimination over Q."""
    a = [[_as_fraction(x) for x in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for i in range(col + 1, n):
            if a[i][col]:
                c = a[i][col] / p
                a[i] = [x - c * y for x, y in zip(a[i], a[col])]
    return det


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    """Plain matrix product; works for ints, Fractions, or CycNum entries."""
    inner = len(b)
    cols = len(b[0])
    out = []
    for row in a:
        new_row = []
        for j in range(cols):
            acc = row[0] * b[0][j]
            for k in range(1, inner):
                acc = acc + row[k] * b[k][j]
            new_row.append(acc)
        out.append(new_row)
    return out


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*a)]
