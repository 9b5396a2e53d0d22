"""Conformal map f = h o g^-1 between the standard right triangles P and Q.

g(z) = A * int_0^z t^(s-1) (1 - t)^(-1/2) dt with s = alpha / pi maps the
upper half-plane onto P = (0, cos alpha, e^{i alpha}); h is the same with
beta.  The integrand is real and positive on (0, 1); off the real axis the
branches of log t and log(1 - t) are the continuous ones from the upper
half-plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import beta as _beta
from scipy.special import roots_jacobi, roots_legendre

from .isometry import SurfaceParams

N_NODES = 24
N_PANELS = 6
NEAR = 0.5  # radius of the direct expansions around z = 0 and z = 1
FAR = 2.0  # |z| beyond which the expansion at infinity is used
ZETA_MAX = 600.0  # cap on |Re log z| so exp stays finite


class DomainError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def beta_complete(s: float, t: float) -> float:
    """Euler's Beta function B(s, t) = int_0^1 z^(s-1) (1-z)^(t-1) dz."""
    if s <= 0 or t <= 0:
        raise ValueError("beta_complete needs s, t > 0")
    return float(_beta(s, t))


@dataclass(frozen=True)
class Triangle:
    """Standard right triangle (0, cos theta, e^{i theta}), right angle at cos theta."""

    theta: float

    @property
    def vertices(self) -> tuple[complex, complex, complex]:
        return (0j, complex(math.cos(self.theta)), complex(np.exp(1j * self.theta)))

    def distance_outside(self, x) -> np.ndarray:
        """0 inside the closed triangle, else (an upper bound for) the distance to it."""
        x = np.asarray(x, dtype=complex)
        c = math.cos(self.theta)
        rot = x * np.exp(-1j * self.theta)
        return np.maximum.reduce([
            np.zeros(x.shape),
            -x.imag,  # below edge 12
            x.real - c,  # right of edge 23
            rot.imag,  # above edge 13
        ])

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        return self.distance_outside(x) <= tol

    def project(self, x) -> np.ndarray:
        """Nearest point of the closed triangle."""
        x = np.asarray(x, dtype=complex)
        out = x.copy()
        outside = self.distance_outside(x) > 0
        if not outside.any():
            return out
        xo = x[outside]
        best = np.full(xo.shape, np.inf)
        best_pt = xo.copy()
        v = self.vertices
        for a, b in ((v[0], v[1]), (v[1], v[2]), (v[0], v[2])):
            d = b - a
            u = np.clip(((xo - a) * np.conj(d)).real / abs(d) ** 2, 0, 1)
            pt = a + u * d
            dist = np.abs(xo - pt)
            better = dist < best
            best[better] = dist[better]
            best_pt[better] = pt[better]
        out[outside] = best_pt
        return out


# ---------------------------------------------------------------------------
# branches and quadrature rules


def log_t(t):
    """log t with arg in [0, pi] for t in the closed upper half-plane."""
    t = np.asarray(t, dtype=complex)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(t)) + 1j * np.arctan2(np.abs(t.imag), t.real)


def log_1mt(t):
    """log(1 - t) with arg in [-pi, 0] for t in the closed upper half-plane."""
    t = np.asarray(t, dtype=complex)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(1 - t)) + 1j * (np.arctan2(np.abs(t.imag), t.real - 1) - np.pi)


@lru_cache(maxsize=None)
def jacobi_rule(lam: float, n: int = N_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for int_0^1 tau^lam F(tau) d tau."""
    x, w = roots_jacobi(n, 0.0, lam)
    return (1 + x) / 2, w * 2.0 ** (-lam - 1)


@lru_cache(maxsize=None)
def legendre_rule(n: int = N_NODES) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return (1 + x) / 2, w / 2


# ---------------------------------------------------------------------------
# the SC integral I_s(z) = int_0^z t^(s-1) (1-t)^(-1/2) dt


def _integrand(s: float, t):
    return np.exp((s - 1) * log_t(t) - 0.5 * log_1mt(t))


def _near_zero(s: float, z: np.ndarray) -> np.ndarray:
    tau, w = jacobi_rule(s - 1)
    zt = z[:, None] * tau[None, :]
    return np.exp(s * log_t(z)) * (np.exp(-0.5 * np.log(1 - zt)) @ w)


def _near_one(s: float, z: np.ndarray, b: float) -> np.ndarray:
    tau, w = jacobi_rule(-0.5)
    path = 1 + (z[:, None] - 1) * tau[None, :]
    vals = np.exp((s - 1) * log_t(path)) @ w
    return b - np.exp(0.5 * log_1mt(z)) * vals


def _near_infinity(s: float, z: np.ndarray, i_inf: complex) -> np.ndarray:
    tau, wts = jacobi_rule(-s - 0.5)
    w = 1 / z
    vals = np.exp(-0.5 * np.log(1 - w[:, None] * tau[None, :])) @ wts
    return i_inf - 1j * np.exp((s - 0.5) * log_t(z)) * vals


def _segment_distance(c: complex, z: np.ndarray, pt: complex) -> np.ndarray:
    d = z - c
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.clip(((pt - c) * np.conj(d)).real / np.abs(d) ** 2, 0, 1)
    u = np.where(np.abs(d) > 0, u, 0)
    return np.abs(c + u * d - pt)


def _middle(s: float, z: np.ndarray, b: float) -> np.ndarray:
    """Composite rule: expansion at the better anchor for the first panel, Legendre after."""
    clear0 = _segment_distance(0j, z, 1 + 0j)
    clear1 = _segment_distance(1 + 0j, z, 0j)
    use0 = clear0 >= clear1
    out = np.empty(z.shape, dtype=complex)
    tau, w = legendre_rule()
    for mask, anchor in ((use0, 0j), (~use0, 1 + 0j)):
        zz = z[mask]
        if not zz.size:
            continue
        z1 = anchor + (zz - anchor) / N_PANELS
        val = _near_zero(s, z1) if anchor == 0 else _near_one(s, z1, b)
        h = (zz - z1) / (N_PANELS - 1)
        for k in range(N_PANELS - 1):
            start = z1 + k * h
            nodes = start[:, None] + h[:, None] * tau[None, :]
            val = val + h * (_integrand(s, nodes) @ w)
        out[mask] = val
    return out


def sc_integral(s: float, z) -> np.ndarray:
    """I_s(z) for z in the closed upper half-plane (vectorized)."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    b = beta_complete(s, 0.5)
    i_inf = b * (1 + 1j * math.tan(math.pi * s))
    out = np.empty(z.shape, dtype=complex)
    r0, r1 = np.abs(z), np.abs(z - 1)
    zero = r0 == 0
    one = r1 == 0
    inf = np.isinf(r0)
    m0 = (r0 <= NEAR) & ~zero
    m1 = (r1 <= NEAR) & ~one & ~m0
    mi = (r0 >= FAR) & ~inf
    mm = ~(zero | one | inf | m0 | m1 | mi)
    out[zero] = 0
    out[one] = b
    out[inf] = i_inf
    if m0.any():
        out[m0] = _near_zero(s, z[m0])
    if m1.any():
        out[m1] = _near_one(s, z[m1], b)
    if mi.any():
        out[mi] = _near_infinity(s, z[mi], i_inf)
    if mm.any():
        out[mm] = _middle(s, z[mm], b)
    return out.reshape(shape)


def _dlog_integral(s: float, zeta: np.ndarray) -> np.ndarray:
    """d I_s / d zeta at z = e^zeta, i.e. z^s (1 - z)^(-1/2)."""
    z = np.exp(zeta)
    big = zeta.real > 3
    l1 = np.where(big, zeta - 1j * np.pi + np.log(1 - np.exp(-zeta)), log_1mt(z))
    return np.exp(s * zeta - 0.5 * l1)


# ---------------------------------------------------------------------------
# the map context


@dataclass(frozen=True)
class SCMapContext:
    params: SurfaceParams
    tol_map: float = 1e-10
    tol_domain: float = 1e-9
    tol_newton: float = 1e-13
    max_iter: int = 60
    _grid: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._grid is None:
            object.__setattr__(self, "_grid", self._build_grid())

    # constants
    @property
    def s_alpha(self) -> float:
        return self.params.p / self.params.n

    @property
    def s_beta(self) -> float:
        return self.params.q / self.params.n

    @property
    def A(self) -> float:
        return self.params.a_float / beta_complete(self.s_alpha, 0.5)

    @property
    def B(self) -> float:
        return self.params.b_float / beta_complete(self.s_beta, 0.5)

    @property
    def P(self) -> Triangle:
        return Triangle(self.params.alpha)

    @property
    def Q(self) -> Triangle:
        return Triangle(self.params.beta)

    def _build_grid(self):
        re = np.linspace(-8.0, 10.0, 73)
        im = np.linspace(0.0, np.pi, 25)
        zeta = (re[:, None] + 1j * im[None, :]).ravel()
        vals = self.A * sc_integral(self.s_alpha, np.exp(zeta))
        return zeta, cKDTree(np.column_stack([vals.real, vals.imag]))

    # forward maps
    def g(self, z) -> np.ndarray:
        return self.A * sc_integral(self.s_alpha, z)

    def h(self, z) -> np.ndarray:
        return self.B * sc_integral(self.s_beta, z)

    # seeds
    def _seeds(self, x: np.ndarray) -> list[np.ndarray]:
        s, A = self.s_alpha, self.A
        a = self.params.a_float
        e3 = np.exp(1j * self.params.alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            v1 = np.log(x * s / A) / s
            z2 = 1 - ((a - x) / (2 * A)) ** 2
            v2 = log_t(z2)
            c = np.log((e3 - x) * (0.5 - s) / (1j * A))
            # choose k with Im zeta = (arg c + 2 pi k) / (s - 1/2) in [0, pi]
            k = np.ceil((np.pi * (s - 0.5) - c.imag) / (2 * np.pi))
            v3 = (c + 2j * np.pi * k) / (s - 0.5)
        zeta_grid, tree = self._grid
        _, idx = tree.query(np.column_stack([x.real, x.imag]))
        v4 = zeta_grid[idx]
        seeds = []
        for v in (v1, v2, v3, v4):
            v = np.where(np.isfinite(v), v, v4)
            seeds.append(v.real + 1j * np.clip(v.imag, 0, np.pi))
        return seeds

    def _newton(self, x: np.ndarray, zeta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s, A = self.s_alpha, self.A
        res = np.abs(self.g(np.exp(zeta)) - x)
        active = np.ones(x.shape, dtype=bool)
        scale = np.maximum(1.0, np.abs(x))
        for _ in range(self.max_iter):
            active &= res > self.tol_newton * scale
            if not active.any():
                break
            zi, xi = zeta[active], x[active]
            gi = A * sc_integral(s, np.exp(zi))
            step = (gi - xi) / (A * _dlog_integral(s, zi))
            ri = res[active]
            lam = np.ones(zi.shape)
            best_z, best_r = zi.copy(), ri.copy()
            pending = np.ones(zi.shape, dtype=bool)
            for _ in range(30):
                cand = zi - lam * step
                cand = np.clip(cand.real, -ZETA_MAX, ZETA_MAX) + 1j * np.clip(cand.imag, 0, np.pi)
                rc = np.abs(A * sc_integral(s, np.exp(cand[pending])) - xi[pending])
                better = rc < ri[pending]
                idx = np.flatnonzero(pending)
                best_z[idx[better]] = cand[idx[better]]
                best_r[idx[better]] = rc[better]
                pending[idx[better]] = False
                if not pending.any():
                    break
                lam = np.where(pending, lam / 2, lam)
            stalled = pending
            zeta[active] = best_z
            res[active] = best_r
            sub = np.flatnonzero(active)
            active[sub[stalled]] = False
        return zeta, res

    def invert_g(self, x):
        """z in the closed upper half-plane with g(z) = x, for x in the closed triangle P."""
        x = np.asarray(x, dtype=complex)
        shape = x.shape
        x = x.ravel()
        out_d = self.P.distance_outside(x)
        if np.any(out_d > self.tol_domain):
            bad = x[out_d > self.tol_domain][0]
            raise DomainError(f"x = {bad} lies outside the triangle P of {self.params}")
        x = self.P.project(x)
        z = np.empty(x.shape, dtype=complex)
        e3 = np.exp(1j * self.params.alpha)
        at0 = np.abs(x) == 0
        at3 = np.abs(x - e3) == 0
        z[at0] = 0
        z[at3] = np.inf
        rest = ~(at0 | at3)
        if rest.any():
            xr = x[rest]
            seeds = self._seeds(xr)
            resid = np.array([np.abs(self.g(np.exp(v)) - xr) for v in seeds])
            order = np.argsort(resid, axis=0)
            zeta = np.empty(xr.shape, dtype=complex)
            res = np.full(xr.shape, np.inf)
            todo = np.ones(xr.shape, dtype=bool)
            for attempt in range(len(seeds)):
                if not todo.any():
                    break
                pick = order[attempt][todo]
                start = np.array(seeds)[pick, np.flatnonzero(todo)]
                zt, rt = self._newton(xr[todo], start)
                idx = np.flatnonzero(todo)
                improve = rt < res[idx]
                zeta[idx[improve]] = zt[improve]
                res[idx[improve]] = rt[improve]
                todo[idx] = res[idx] > self.tol_map * np.maximum(1.0, np.abs(xr[idx]))
            if todo.any():
                i = np.flatnonzero(todo)[0]
                raise ConvergenceError(
                    f"invert_g did not converge at x = {xr[i]} for {self.params}: "
                    f"residual {res[i]:.3e}, zeta = {zeta[i]}"
                )
            zr = np.exp(zeta)
            z[rest] = zr.real + 1j * np.maximum(zr.imag, 0.0)
        return z.reshape(shape) if shape else z[0]

    def forward_map(self, x):
        """y = f(x) = h(g^-1(x)) in the closed triangle Q."""
        x = np.asarray(x, dtype=complex)
        z = np.asarray(self.invert_g(x), dtype=complex)
        y = self.h(z)
        return y if y.shape else complex(y)

    def forward_derivative(self, x):
        """f'(x) = (B / A) z^(s_beta - s_alpha) at z = g^-1(x)."""
        x = np.asarray(x, dtype=complex)
        z = np.asarray(self.invert_g(x), dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = (self.B / self.A) * np.exp((self.s_beta - self.s_alpha) * log_t(z))
        return d if d.shape else complex(d)


@lru_cache(maxsize=None)
def context_for(n: int, p: int, q: int) -> SCMapContext:
    return SCMapContext(SurfaceParams(n, p, q))


def half_plane_map(ctx: SCMapContext, z, which: str = "g"):
    """g(z) or h(z) for z in the closed upper half-plane."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0):
        raise DomainError("half_plane_map needs Im z >= 0")
    if which == "g":
        out = ctx.g(z)
    elif which == "h":
        out = ctx.h(z)
    else:
        raise ValueError(f"which must be 'g' or 'h', got {which!r}")
    return out if out.shape else complex(out)


def invert_g(ctx: SCMapContext, x):
    return ctx.invert_g(x)


def forward_map(ctx: SCMapContext, x):
    return ctx.forward_map(x)


def forward_derivative(ctx: SCMapContext, x):
    return ctx.forward_derivative(x)
