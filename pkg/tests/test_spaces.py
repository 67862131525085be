"""Taylor-Hood layout, shape functions, boundary masks, interpolation."""

import numpy as np
import pytest

from meridianflow.curve import GeneratingCurve
from meridianflow.mesh import build_adaptive_mesh
from meridianflow.spaces import (
    build_layout,
    interpolate_velocity,
    p1_basis,
    p2_basis,
    p2_grads,
)


def semicircle(J=16, radius=0.25, center=(0.0, 0.5)):
    theta = np.linspace(-np.pi / 2, np.pi / 2, J + 1)
    r = radius * np.cos(theta)
    z = center[1] + radius * np.sin(theta)
    r[0] = r[-1] = 0.0
    return GeneratingCurve(np.column_stack([r, z]))


class TestShapeFunctions:
    def test_partition_of_unity(self):
        rng = np.random.default_rng(0)
        lam = rng.random((50, 3))
        lam /= lam.sum(axis=1, keepdims=True)
        pts = lam[:, 1:]
        assert np.allclose(p1_basis(pts).sum(axis=1), 1.0, atol=1e-14)
        assert np.allclose(p2_basis(pts).sum(axis=1), 1.0, atol=1e-13)
        assert np.allclose(p2_grads(pts).sum(axis=1), 0.0, atol=1e-13)

    def test_nodal_delta_property(self):
        nodes = np.array(
            [[0, 0], [1, 0], [0, 1], [0.5, 0], [0.5, 0.5], [0, 0.5]], dtype=float
        )
        assert np.allclose(p2_basis(nodes), np.eye(6), atol=1e-14)
        assert np.allclose(
            p1_basis(nodes[:3]), np.eye(3), atol=1e-14
        )

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(1)
        pts = rng.random((20, 2)) * 0.4 + 0.1
        eps = 1e-6
        for d in range(2):
            shift = np.zeros(2)
            shift[d] = eps
            fd = (p2_basis(pts + shift) - p2_basis(pts - shift)) / (2 * eps)
            assert np.allclose(p2_grads(pts)[:, :, d], fd, atol=1e-8)


class TestLayout:
    def test_two_element_hand_count(self):
        curve = GeneratingCurve(
            np.array([[0.0, 0.4], [0.05, 0.5], [0.0, 0.6]]), validate=True
        )
        mesh = build_adaptive_mesh(curve, 1.0, 1.0, 1, 1)
        lay = build_layout(mesh)
        assert mesh.n_elements == 2
        assert lay.n_vertices == 4 and lay.n_edges == 5
        assert lay.n_scalar == 9 and lay.n_velocity == 18
        assert lay.n_pressure == 4
        # All four walls plus the axis constrain this tiny mesh heavily:
        # only the diagonal midpoint keeps both components free.
        x, y = lay.node_xy[:, 0], lay.node_xy[:, 1]
        interior = (x > 0) & (x < 1) & (y > 0) & (y < 1)
        assert interior.sum() == 1
        free_nodes = ~lay.vel_fixed[0::2] & ~lay.vel_fixed[1::2]
        assert np.array_equal(free_nodes, interior)

    def test_boundary_masks(self):
        mesh = build_adaptive_mesh(semicircle(), 0.5, 2.0, 4, 8)
        lay = build_layout(mesh)
        x, y = lay.node_xy[:, 0], lay.node_xy[:, 1]
        walls = (y == 0.0) | (y == 2.0)
        sides = (x == 0.0) | (x == 0.5)
        assert np.array_equal(lay.vel_fixed[0::2], walls | sides)
        assert np.array_equal(lay.vel_fixed[1::2], walls)
        assert lay.vel_free.size == lay.n_velocity - lay.vel_fixed.sum()

    def test_element_maps_are_affine_inverses(self):
        mesh = build_adaptive_mesh(semicircle(), 0.5, 2.0, 4, 16)
        lay = build_layout(mesh)
        tv = mesh.vertices[mesh.triangles]
        ref = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        for k in (0, mesh.n_elements // 2, mesh.n_elements - 1):
            for v, xi in zip(tv[k], ref):
                got = lay.jinv[k] @ (v - lay.v0[k])
                assert np.allclose(got, xi, atol=1e-12)
        assert np.allclose(lay.detj, 2.0 * mesh.areas, atol=1e-15)


class TestInterpolation:
    @staticmethod
    def quadratic_field(xy):
        r, z = xy[:, 0], xy[:, 1]
        ur = 0.3 + r - 2 * z + 0.7 * r * z - 0.2 * r**2
        uz = -1.0 + 0.5 * z**2 + r - r * z
        out = np.empty(2 * len(xy))
        out[0::2], out[1::2] = ur, uz
        return out

    def test_identity_on_same_mesh(self):
        mesh = build_adaptive_mesh(semicircle(), 0.5, 2.0, 4, 8)
        lay = build_layout(mesh)
        U = self.quadratic_field(lay.node_xy)
        out = interpolate_velocity(lay, U, lay)
        assert np.array_equal(out, U)
        assert out is not U

    def test_reproduces_quadratics_across_meshes(self):
        a = build_adaptive_mesh(semicircle(), 0.5, 2.0, 4, 8)
        b = build_adaptive_mesh(semicircle(24, 0.27, (0.0, 0.62)), 0.5, 2.0, 4, 16)
        la, lb = build_layout(a), build_layout(b)
        U = self.quadratic_field(la.node_xy)
        got = interpolate_velocity(la, U, lb)
        want = self.quadratic_field(lb.node_xy)
        assert np.max(np.abs(got - want)) < 1e-12

    def test_coarse_to_fine_and_back_is_identity(self):
        coarse = build_adaptive_mesh(semicircle(), 0.5, 2.0, 4, 4)
        fine = build_adaptive_mesh(semicircle(), 0.5, 2.0, 4, 16)
        lc, lf = build_layout(coarse), build_layout(fine)
        rng = np.random.default_rng(5)
        U = rng.standard_normal(lc.n_velocity)
        back = interpolate_velocity(lf, interpolate_velocity(lc, U, lf), lc)
        assert np.max(np.abs(back - U)) < 1e-12
