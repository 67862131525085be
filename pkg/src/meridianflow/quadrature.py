"""Quadrature rules on the unit interval and the reference triangle.

The reference triangle is {(x, y): x, y >= 0, x + y <= 1}; all triangle
rules return weights that sum to its area 1/2, so plain dot products give
integrals directly.
"""

import numpy as np

__all__ = ["leggauss01", "tri_rule", "collapsed_rule"]


def leggauss01(n):
    """Gauss-Legendre nodes and weights on [0, 1] (exact for degree 2n-1)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


# Symmetric 12-point rule of degree 6 (three orbits, barycentric data).
_TRI6_3PERM = (
    (0.116786275726379, 0.501426509658179, 0.249286745170910),
    (0.050844906370207, 0.873821971016996, 0.063089014491502),
)
_TRI6_6PERM = (
    (0.082851075618374, 0.053145049844816, 0.310352451033785, 0.636502499121399),
)


def _from_orbits():
    pts, wts = [], []
    for w, a, b in _TRI6_3PERM:
        for lam in ((a, b, b), (b, a, b), (b, b, a)):
            pts.append((lam[1], lam[2]))
            wts.append(w)
    for w, a, b, c in _TRI6_6PERM:
        for lam in ((a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)):
            pts.append((lam[1], lam[2]))
            wts.append(w)
    return np.array(pts), 0.5 * np.array(wts)


_TRI6_PTS, _TRI6_WTS = _from_orbits()


def tri_rule():
    """12-point degree-6 rule on the reference triangle: (points, weights)."""
    return _TRI6_PTS.copy(), _TRI6_WTS.copy()


def collapsed_rule(n=10):
    """Tensor Gauss rule collapsed onto the triangle, points strictly interior.

    Maps the unit square by (xi, eta) -> (xi (1 - eta), eta) with Jacobian
    (1 - eta).  Exact for x^i y^j with i <= 2n - 1 and i + j + 1 <= 2n - 1,
    and all points avoid the triangle boundary, so integrands with a factor
    r^{-1} that is cancelled analytically (velocity components vanishing on
    the axis) are handled both safely and accurately.
    """
    t, w = leggauss01(n)
    xi, eta = np.meshgrid(t, t, indexing="ij")
    wx, we = np.meshgrid(w, w, indexing="ij")
    pts = np.column_stack([(xi * (1.0 - eta)).ravel(), eta.ravel()])
    wts = (wx * we * (1.0 - eta)).ravel()
    return pts, wts
