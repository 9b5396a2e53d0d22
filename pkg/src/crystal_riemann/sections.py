"""Sections A(x) of the Riemann surface and of its flattened model set.

A tile of the surface is gamma(P|Q) with gamma = t(lambda) h, where h runs
over coset representatives of G / Lambda and lambda over Lambda.  The
point (x, y) lies on that tile when x' = h_X^-1(x - lambda_u) is in the
closed triangle P, and then y = h_Y(f(x')) + lambda_v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .isometry import Isometry, SurfaceParams, contains_half_turn, coset_representatives
from .lattice import LatticeBasis, lattice_basis, lll_gram
from .scmap import SCMapContext, context_for

TOL_MEMBER = 1e-9  # fattening of closed triangles / windows
TOL_FEATURE = 1e-12  # distance at which a point counts as on an edge or vertex
TOL_DEDUP = 1e-8
TOL_SINGULAR = 1e-9
DIAMETER = 1.0  # diam P = diam Q = 1


@dataclass
class SectionPointSet:
    """Points y in Y with multiplicities, provenance and flags.

    Provenance entries are (h index, lambda coefficients) for analytic sets
    and (block, lambda coefficients) for model sets; a merged point keeps
    every contributing tile.
    """

    center: complex
    radius: float
    kind: str
    y: np.ndarray
    multiplicity: np.ndarray
    provenance: list[tuple] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def accepted(self) -> np.ndarray:
        return np.array(["window_boundary" not in f for f in self.flags], dtype=bool)

    @property
    def total_multiplicity(self) -> int:
        return int(self.multiplicity[self.accepted].sum()) if len(self) else 0

    def min_separation(self) -> float:
        y = self.y[self.accepted]
        if len(y) < 2:
            return math.inf
        d, _ = cKDTree(np.column_stack([y.real, y.imag])).query(
            np.column_stack([y.real, y.imag]), k=2)
        return float(d[:, 1].min())


# ---------------------------------------------------------------------------
# geometry helpers


def _features(theta: float, x: np.ndarray):
    """Signed distances to the three edge lines of the standard triangle (positive = outside)."""
    c = math.cos(theta)
    d12 = -x.imag
    d23 = x.real - c
    d13 = (x * np.exp(-1j * theta)).imag
    return d12, d23, d13


def angular_fraction(theta: float, x: np.ndarray, tol: float = TOL_FEATURE) -> np.ndarray:
    """Fraction of a small disk about x covered by the closed triangle: 1, 1/2, vertex angle / 2 pi, or 0."""
    d12, d23, d13 = _features(theta, x)
    outside = np.maximum.reduce([d12, d23, d13]) > tol
    on = [np.abs(d) <= tol for d in (d12, d23, d13)]
    v1 = np.abs(x) <= tol
    v2 = np.abs(x - math.cos(theta)) <= tol
    v3 = np.abs(x - np.exp(1j * theta)) <= tol
    frac = np.ones(x.shape)
    frac[on[0] | on[1] | on[2]] = 0.5
    frac[v1] = theta / (2 * math.pi)
    frac[v2] = 0.25
    frac[v3] = (math.pi / 2 - theta) / (2 * math.pi)
    frac[outside] = 0.0
    return frac


def _snap_vertices(theta: float, x: np.ndarray, tol: float = TOL_FEATURE) -> np.ndarray:
    out = x.copy()
    for v in (0j, complex(math.cos(theta)), complex(np.exp(1j * theta))):
        out[np.abs(out - v) <= tol] = v
    return out


def _inverse_x(h: Isometry, w: np.ndarray) -> np.ndarray:
    """h_X^-1(w) in floats."""
    flip, rx, _, tx, _ = h.float_view
    pre = (w - tx) / rx
    return np.conj(pre) if flip else pre


def _merge(y: np.ndarray, tol: float = TOL_DEDUP) -> list[np.ndarray]:
    """Connected components of points closer than ``tol`` (index arrays)."""
    if len(y) == 0:
        return []
    pts = np.column_stack([y.real, y.imag])
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    parent = np.arange(len(y))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(y))])
    order = np.argsort(roots, kind="stable")
    splits = np.flatnonzero(np.diff(roots[order])) + 1
    return np.split(order, splits)


def _canonical_order(y: np.ndarray) -> np.ndarray:
    key_re = np.round(y.real, 9)
    key_im = np.round(y.imag, 9)
    return np.lexsort((key_im, key_re))


# ---------------------------------------------------------------------------
# lattice enumeration


def _enumerate_ellipsoid(gram: np.ndarray, centre: np.ndarray, bound: float) -> np.ndarray:
    """Integer k with (k - c) G (k - c)^T <= bound, breadth-first and vectorized."""
    k = gram.shape[0]
    R = np.linalg.cholesky(gram).T
    diag = np.diag(R) ** 2
    mu = R / np.diag(R)[:, None]
    K = np.zeros((1, k), dtype=np.int64)
    rem = np.array([bound])
    for level in range(k - 1, -1, -1):
        shift = (K[:, level + 1:] - centre[level + 1:]) @ mu[level, level + 1:]
        ctr = centre[level] - shift
        span = np.sqrt(np.maximum(rem, 0) / diag[level])
        lo = np.ceil(ctr - span - 1e-12).astype(np.int64)
        hi = np.floor(ctr + span + 1e-12).astype(np.int64)
        cnt = np.maximum(hi - lo + 1, 0)
        rep = np.repeat(np.arange(len(K)), cnt)
        start = np.repeat(np.cumsum(cnt) - cnt, cnt)
        vals = lo[rep] + (np.arange(cnt.sum()) - start)
        K = K[rep]
        K[:, level] = vals
        rem = rem[rep] - diag[level] * (vals - ctr[rep]) ** 2
        keep = rem >= -1e-9
        K, rem = K[keep], rem[keep]
    return K


def lattice_points_in_region(basis: LatticeBasis, x_center: complex, x_radius: float,
                             y_center: complex, y_radius: float, slack: float = 1e-9):
    """Coefficients and (u, v) of every lambda with |u - x_center| <= x_radius, |v - y_center| <= y_radius."""
    if basis.rank != 4 or basis.det <= 0:
        raise ValueError("lattice_points_in_region needs a rank-4 basis with positive determinant")
    E = basis.generators  # rows (Re u, Im u, Re v, Im v)
    scale = np.array([1 / x_radius, 1 / x_radius, 1 / y_radius, 1 / y_radius])
    Es = E * scale
    G = Es @ Es.T
    _, T = lll_gram(G.tolist(), exact=False)
    T = np.array(T, dtype=np.int64)
    Er = T @ Es
    c = np.array([x_center.real, x_center.imag, y_center.real, y_center.imag]) * scale
    c_coef = np.linalg.solve(Er.T, c)
    K = _enumerate_ellipsoid(Er @ Er.T, c_coef, 2.0 + 1e-9)
    coeffs = K @ T
    cg = basis.complex_generators
    u = coeffs @ cg[:, 0]
    v = coeffs @ cg[:, 1]
    keep = (np.abs(u - x_center) <= x_radius + slack) & (np.abs(v - y_center) <= y_radius + slack)
    return coeffs[keep], u[keep], v[keep]


# ---------------------------------------------------------------------------
# surface data used by sections


@dataclass(frozen=True)
class SurfaceData:
    params: SurfaceParams
    basis: LatticeBasis
    cosets: tuple[Isometry, ...]
    ctx: SCMapContext

    @property
    def p(self) -> int:
        return self.params.p


@lru_cache(maxsize=None)
def surface_data(n: int, p: int, q: int) -> SurfaceData:
    params = SurfaceParams(n, p, q)
    return SurfaceData(params, lattice_basis(params), tuple(coset_representatives(params)),
                       context_for(n, p, q))


def _as_data(desc) -> SurfaceData:
    if isinstance(desc, SurfaceData):
        return desc
    if isinstance(desc, SurfaceParams):
        return surface_data(*desc.triple)
    if isinstance(desc, tuple):
        return surface_data(*desc)
    return surface_data(*desc.params.triple)


# ---------------------------------------------------------------------------
# analytic sections


def _tiles(data: SurfaceData, x: complex, R: float):
    """Every tile (h index, lambda) whose closed X-triangle contains x (with fattening) and its x'."""
    groups: dict[complex, list[int]] = {}
    for i, h in enumerate(data.cosets):
        groups.setdefault(h.float_view[3], []).append(i)
    out = []
    for tx, idxs in groups.items():
        ty = {data.cosets[i].float_view[4] for i in idxs}
        if len(ty) != 1:
            raise RuntimeError("coset representatives with equal X translation must share Y translation")
        ty = ty.pop()
        coeffs, u, v = lattice_points_in_region(
            data.basis, x - tx, DIAMETER, -ty, R + DIAMETER)
        for i in idxs:
            xp = _inverse_x(data.cosets[i], x - u)
            d = data.ctx.P.distance_outside(xp)
            keep = d <= TOL_MEMBER
            if keep.any():
                out.append((i, coeffs[keep], u[keep], v[keep], xp[keep]))
    return out


def analytic_section(desc, x: complex, R: float, ctx: SCMapContext | None = None,
                     keep_outside: bool = False, dedup_tol: float = TOL_DEDUP) -> SectionPointSet:
    """A(x) inside the disk |y| <= R, with multiplicities from the angular fractions of P at x'."""
    data = _as_data(desc)
    ctx = ctx or data.ctx
    x = complex(x)
    alpha = data.params.alpha
    tiles = _tiles(data, x, R)
    ys, fracs, prov, near = [], [], [], []
    e3 = np.exp(1j * alpha)
    for i, coeffs, u, v, xp in tiles:
        frac = angular_fraction(alpha, xp)
        xin = _snap_vertices(alpha, ctx.P.project(xp))
        fy = np.atleast_1d(ctx.forward_map(xin))
        y = data.cosets[i].apply_y(fy) + v
        ys.append(y)
        fracs.append(frac)
        prov.extend((i, tuple(int(c) for c in row)) for row in coeffs)
        near.append((np.abs(xp) <= TOL_SINGULAR) | (np.abs(xp - e3) <= TOL_SINGULAR))
    if ys:
        y = np.concatenate(ys)
        frac = np.concatenate(fracs)
        near = np.concatenate(near)
    else:
        y = np.zeros(0, complex)
        frac = np.zeros(0)
        near = np.zeros(0, bool)
    out_y, out_m, out_p, out_f = [], [], [], []
    warnings = []
    for grp in _merge(y, dedup_tol):
        total = frac[grp].sum()
        if total <= 0:
            continue
        yy = y[grp[np.argmax(frac[grp])]]
        if abs(yy) > R and not keep_outside:
            continue
        mult = int(round(total))
        flags = []
        if abs(total - mult) > 1e-6:
            flags.append("nonintegral")
            mult = max(mult, 1)
        if near[grp].any():
            flags.append("singular_vertex")
        out_y.append(yy)
        out_m.append(mult)
        out_p.append(tuple(sorted(prov[j] for j in grp if frac[j] > 0)))
        out_f.append(";".join(flags))
    if any("singular_vertex" in f for f in out_f):
        warnings.append(f"x = {x} lies within {TOL_SINGULAR:g} of a singular vertex image")
    return _finish(x, R, "analytic", out_y, out_m, out_p, out_f, warnings)


def _finish(x, R, kind, ys, ms, ps, fs, warnings) -> SectionPointSet:
    y = np.array(ys, dtype=complex)
    m = np.array(ms, dtype=np.int64)
    order = _canonical_order(y) if len(y) else np.zeros(0, dtype=int)
    return SectionPointSet(
        center=x, radius=R, kind=kind, y=y[order], multiplicity=m[order],
        provenance=[ps[i] for i in order], flags=[fs[i] for i in order], warnings=warnings)


# ---------------------------------------------------------------------------
# flattened model sets


@dataclass(frozen=True)
class WindowPolygon:
    """Regular (n/p)-gon with vertices e^{i(2k+1) alpha}, circumradius 1, covered p times."""

    n_sides: int
    multiplicity: int
    vertices: tuple[complex, ...]

    @property
    def circumradius(self) -> float:
        return float(max(abs(v) for v in self.vertices))

    def signed_distance(self, x) -> np.ndarray:
        """Max over edges of the outward distance; negative inside."""
        x = np.asarray(x, dtype=complex)
        vs = np.array(self.vertices)
        nxt = np.roll(vs, -1)
        out = np.full(x.shape, -np.inf)
        for a, b in zip(vs, nxt):
            edge = b - a
            nrm = -1j * edge / abs(edge)  # outward normal for a counter-clockwise polygon
            out = np.maximum(out, ((x - a) * np.conj(nrm)).real)
        return out


def window_polygon(desc) -> WindowPolygon:
    params = _as_data(desc).params
    n, p = params.n, params.p
    if n % p:
        raise ValueError(f"{params}: p does not divide n, the window is a star polygon")
    k = n // p
    verts = tuple(complex(np.exp(1j * (2 * j + 1) * params.alpha)) for j in range(k))
    return WindowPolygon(k, p, verts)


def model_blocks(desc) -> list[tuple[str, complex, complex, int]]:
    """(name, X translation, Y translation, orientation) of the flattened pieces Lambda g (Poly | 0)."""
    params = _as_data(desc).params
    blocks = [("id", 0j, 0j, 1)]
    if not contains_half_turn(params):
        blocks.append(("c", 2 * params.a_float + 0j, 2 * params.b_float + 0j, -1))
    return blocks


def model_section(desc, x: complex, R: float) -> SectionPointSet:
    """Flattened section: y = lambda_v (+ 2b) whenever x - lambda_u lies in the window (strictly)."""
    data = _as_data(desc)
    poly = window_polygon(data)
    x = complex(x)
    ys, ms, ps, fs = [], [], [], []
    for name, tx, ty, orient in model_blocks(data):
        coeffs, u, v = lattice_points_in_region(data.basis, x - tx, poly.circumradius, -ty, R)
        local = orient * (x - u - tx)  # c block: x in lambda_u + 2a - Poly
        sd = poly.signed_distance(local)
        y = v + ty
        for j in np.flatnonzero((sd <= TOL_MEMBER) & (np.abs(y) <= R)):
            ys.append(y[j])
            ms.append(poly.multiplicity)
            ps.append(((name, tuple(int(c) for c in coeffs[j])),))
            fs.append("window_boundary" if sd[j] > -TOL_MEMBER else "")
    warnings = []
    if any(fs):
        warnings.append(f"x = {x} lies within {TOL_MEMBER:g} of a window edge for some lambda")
    return _finish(x, R, "flattened", ys, ms, ps, fs, warnings)


# ---------------------------------------------------------------------------
# densities, correspondence, bounds


def empirical_density(points: SectionPointSet) -> float:
    if len(points) == 0:
        return 0.0
    return points.total_multiplicity / (math.pi * points.radius ** 2)


@dataclass(frozen=True)
class Pair:
    y_analytic: complex
    y_model: complex
    distance: float
    tile: tuple


def correspondence(desc, x: complex, R: float) -> list[Pair]:
    """Pair each model point (with its p covering tiles) with the analytic points of those tiles."""
    data = _as_data(desc)
    model = model_section(data, x, R)
    analytic = analytic_section(data, x, R + DIAMETER, keep_outside=True)
    block_of = {}
    for i, h in enumerate(data.cosets):
        block_of[i] = "c" if abs(h.float_view[3]) > 1e-12 else "id"
    tile_point = {}
    for y, prov in zip(analytic.y, analytic.provenance):
        for tile in prov:
            tile_point[tile] = y
    wanted: dict[tuple, list[tuple]] = {}
    for tile in tile_point:
        i, lam = tile
        wanted.setdefault((block_of[i], lam), []).append(tile)
    pairs = []
    for ym, prov, flag in zip(model.y, model.provenance, model.flags):
        if "window_boundary" in flag:
            continue
        key = prov[0]
        tiles = sorted(wanted.get(key, []))
        if len(tiles) != data.p:
            raise RuntimeError(
                f"model point {ym} ({key}) has {len(tiles)} analytic partners, expected {data.p}")
        for tile in tiles:
            ya = tile_point[tile]
            pairs.append(Pair(complex(ya), complex(ym), float(abs(ya - ym)), tile))
    return pairs


def finitely_discrete_bound(desc, r: float) -> int:
    """Upper bound on the number of tiles meeting {x} x B_r(y), from a packing argument on Lambda."""
    data = _as_data(desc)
    # |lambda|^2 >= smallest Gram eigenvalue for every nonzero lambda
    rho = math.sqrt(np.linalg.eigvalsh(data.basis.gram_float()).min()) / 2
    per_coset = 2 * (DIAMETER + rho) ** 2 * (r + DIAMETER + rho) ** 2 / rho ** 4
    return int(math.ceil(per_coset)) * len(data.cosets)
