"""The conformal triangle map f = h o g^-1 for one surface, checked at a few places.

    python demos/sc_map_tour.py [n p q]
"""
import sys

import numpy as np

from crystal_riemann.scmap import context_for


def main(triple=(5, 1, 2)):
    ctx = context_for(*triple)
    a, b = ctx.params.alpha, ctx.params.beta
    print(f"surface {triple}: alpha = {a:.6f}, beta = {b:.6f}")
    print(f"  half-plane constants A = {ctx.A:.12f}, B = {ctx.B:.12f}")

    xv = np.array([0, np.cos(a), np.exp(1j * a)])
    print("\nvertices of P and their images (should be the vertices of Q)")
    for x, y in zip(xv, ctx.forward_map(xv)):
        print(f"  f({x:.6f}) = {y:.12f}")

    print("\nedges map to edges")
    t = np.linspace(0.1, 0.9, 5)
    print("  real edge, Im f:", np.abs(ctx.forward_map(t * np.cos(a)).imag).max())
    print("  vertical edge, Re f - cos beta:",
          np.abs(ctx.forward_map(np.cos(a) + 1j * t * np.sin(a)).real - np.cos(b)).max())

    print("\nbehaviour at vertex 3: f'(x) blows up like |x - e^{i alpha}|^k")
    e3 = np.exp(1j * a)
    inward = np.exp(1j * (a + np.pi + 1.5 * np.pi) / 2)  # bisector of the angle at vertex 3
    radii = np.array([1e-2, 1e-4, 1e-6])
    d = np.abs(ctx.forward_derivative(e3 + radii * inward))
    for r, v in zip(radii, d):
        print(f"  |x - x3| = {r:.0e}: |f'(x)| = {v:.4e}")
    k = (ctx.s_beta - ctx.s_alpha) / (ctx.s_alpha - 0.5)
    fitted = np.log(d[-1] / d[0]) / np.log(radii[-1] / radii[0])
    print(f"  fitted exponent {fitted:.6f}, predicted (s_beta - s_alpha) / (s_alpha - 1/2) = {k:.6f}")

    rng = np.random.default_rng(0)
    w = rng.dirichlet([1, 1, 1], 1000) @ xv
    z = ctx.invert_g(w)
    print(f"\nround trip on 1000 random points: max |g(g^-1(x)) - x| = {np.abs(ctx.g(z) - w).max():.2e}")


if __name__ == "__main__":
    main(tuple(int(v) for v in sys.argv[1:4]) if len(sys.argv) == 4 else (5, 1, 2))
