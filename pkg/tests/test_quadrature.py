"""Quadrature rules: positivity, exactness, interior points."""

import math

import numpy as np

from meridianflow.quadrature import collapsed_rule, leggauss01, tri_rule


def tri_monomial_exact(i, j):
    """Integral of x^i y^j over the reference triangle (factorial identity)."""
    return math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)


class TestLegGauss01:
    def test_interval_and_weights(self):
        for n in (1, 2, 5, 10):
            t, w = leggauss01(n)
            assert np.all((t > 0) & (t < 1))
            assert np.all(w > 0)
            assert abs(w.sum() - 1.0) < 1e-15

    def test_polynomial_exactness(self):
        for n in (2, 4, 10):
            t, w = leggauss01(n)
            for k in range(2 * n):
                assert abs(w @ t**k - 1.0 / (k + 1)) < 1e-14


class TestTriRule:
    def test_shape_and_weights(self):
        pts, wts = tri_rule()
        assert pts.shape == (12, 2)
        assert np.all(wts > 0)
        assert abs(wts.sum() - 0.5) < 1e-14
        lam0 = 1.0 - pts.sum(axis=1)
        assert np.all(pts > 0) and np.all(lam0 > 0)

    def test_degree_six_exactness(self):
        pts, wts = tri_rule()
        for i in range(7):
            for j in range(7 - i):
                got = wts @ (pts[:, 0] ** i * pts[:, 1] ** j)
                assert abs(got - tri_monomial_exact(i, j)) < 1e-14


class TestCollapsedRule:
    def test_points_strictly_interior(self):
        pts, wts = collapsed_rule(10)
        assert pts.shape == (100, 2)
        assert np.all(wts > 0)
        lam0 = 1.0 - pts.sum(axis=1)
        assert min(pts[:, 0].min(), pts[:, 1].min(), lam0.min()) > 1e-6
        assert abs(wts.sum() - 0.5) < 1e-14

    def test_high_degree_exactness(self):
        pts, wts = collapsed_rule(10)
        for i, j in [(0, 0), (3, 2), (7, 5), (11, 6), (17, 0), (0, 18), (9, 9)]:
            got = wts @ (pts[:, 0] ** i * pts[:, 1] ** j)
            assert abs(got - tri_monomial_exact(i, j)) < 1e-15 + 1e-13 * abs(got)

    def test_matches_tri_rule_on_smooth_integrand(self):
        pts6, wts6 = tri_rule()
        ptsc, wtsc = collapsed_rule(12)

        def f(p):
            return np.exp(p[:, 0] - 0.5 * p[:, 1]) * np.cos(p[:, 0] * p[:, 1])

        assert abs(wts6 @ f(pts6) - wtsc @ f(ptsc)) < 1e-6
