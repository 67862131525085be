"""Taylor-Hood finite element spaces on the meridian rectangle.

Velocity: continuous piecewise quadratics (vector valued, dofs interleaved
as 2*node + component with component 0 the radial one); pressure:
continuous piecewise linears on the vertices.  Essential conditions:
no-slip on the bottom and top walls z = 0 and z = z_max, vanishing radial
component on the axis r = 0 and on the lateral wall r = r_max (corners
keep the stronger no-slip condition).
"""

import numpy as np

from .mesh import locate

__all__ = [
    "p1_basis",
    "p2_basis",
    "p2_grads",
    "DofLayout",
    "build_layout",
    "interpolate_velocity",
]


def p1_basis(pts):
    """Linear shape functions at reference points, shape (n, 3)."""
    x, y = pts[:, 0], pts[:, 1]
    return np.column_stack([1.0 - x - y, x, y])


def p2_basis(pts):
    """Quadratic shape functions at reference points, shape (n, 6).

    Node order: the three vertices, then the midpoints of the local
    edges (0,1), (1,2), (2,0).
    """
    x, y = pts[:, 0], pts[:, 1]
    l0 = 1.0 - x - y
    return np.column_stack(
        [
            l0 * (2.0 * l0 - 1.0),
            x * (2.0 * x - 1.0),
            y * (2.0 * y - 1.0),
            4.0 * l0 * x,
            4.0 * x * y,
            4.0 * y * l0,
        ]
    )


def p2_grads(pts):
    """Reference gradients of the quadratic shape functions, (n, 6, 2)."""
    x, y = pts[:, 0], pts[:, 1]
    l0 = 1.0 - x - y
    g = np.empty((len(pts), 6, 2))
    g[:, 0, 0] = 1.0 - 4.0 * l0
    g[:, 0, 1] = 1.0 - 4.0 * l0
    g[:, 1, 0] = 4.0 * x - 1.0
    g[:, 1, 1] = 0.0
    g[:, 2, 0] = 0.0
    g[:, 2, 1] = 4.0 * y - 1.0
    g[:, 3, 0] = 4.0 * (l0 - x)
    g[:, 3, 1] = -4.0 * x
    g[:, 4, 0] = 4.0 * y
    g[:, 4, 1] = 4.0 * x
    g[:, 5, 0] = -4.0 * y
    g[:, 5, 1] = 4.0 * (l0 - y)
    return g


class DofLayout:
    """Dof numbering, element maps, geometry factors, boundary masks."""

    def __init__(self, mesh):
        self.mesh = mesh
        tris = mesh.triangles
        edge_id = {}
        elem_edges = np.empty((len(tris), 3), dtype=np.int64)
        for k, (a, b, c) in enumerate(tris):
            for loc, (u, v) in enumerate(((a, b), (b, c), (c, a))):
                key = (u, v) if u < v else (v, u)
                e = edge_id.setdefault(key, len(edge_id))
                elem_edges[k, loc] = e
        self.n_vertices = mesh.n_vertices
        self.n_edges = len(edge_id)
        self.n_scalar = self.n_vertices + self.n_edges
        self.edge_nodes = np.empty((self.n_edges, 2), dtype=np.int64)
        for (u, v), e in edge_id.items():
            self.edge_nodes[e] = (u, v)
        self.elem_p2 = np.hstack([tris, self.n_vertices + elem_edges])
        mids = 0.5 * (
            mesh.vertices[self.edge_nodes[:, 0]] + mesh.vertices[self.edge_nodes[:, 1]]
        )
        self.node_xy = np.vstack([mesh.vertices, mids])

        # Affine maps: x = v0 + jac @ xi.
        tv = mesh.vertices[tris]
        self.v0 = tv[:, 0]
        jac = np.stack([tv[:, 1] - tv[:, 0], tv[:, 2] - tv[:, 0]], axis=2)
        self.jac = jac
        self.detj = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        inv = np.empty_like(jac)
        inv[:, 0, 0] = jac[:, 1, 1]
        inv[:, 0, 1] = -jac[:, 0, 1]
        inv[:, 1, 0] = -jac[:, 1, 0]
        inv[:, 1, 1] = jac[:, 0, 0]
        self.jinv = inv / self.detj[:, None, None]

        self._check_boundary_tags(elem_edges)

        x, y = self.node_xy[:, 0], self.node_xy[:, 1]
        noslip = (y == 0.0) | (y == mesh.z_max)
        radial = (x == 0.0) | (x == mesh.r_max)
        self.vel_fixed = np.zeros(2 * self.n_scalar, dtype=bool)
        self.vel_fixed[0::2] = noslip | radial
        self.vel_fixed[1::2] = noslip
        self.vel_free = np.nonzero(~self.vel_fixed)[0]
        self.n_pressure = self.n_vertices

    def _check_boundary_tags(self, elem_edges):
        counts = np.zeros(self.n_edges, dtype=np.int64)
        np.add.at(counts, elem_edges.ravel(), 1)
        boundary = np.nonzero(counts == 1)[0]
        va = self.mesh.vertices[self.edge_nodes[boundary, 0]]
        vb = self.mesh.vertices[self.edge_nodes[boundary, 1]]
        tagged = (
            ((va[:, 0] == 0.0) & (vb[:, 0] == 0.0))
            | ((va[:, 0] == self.mesh.r_max) & (vb[:, 0] == self.mesh.r_max))
            | ((va[:, 1] == 0.0) & (vb[:, 1] == 0.0))
            | ((va[:, 1] == self.mesh.z_max) & (vb[:, 1] == self.mesh.z_max))
        )
        if not tagged.all():
            raise ValueError("untagged boundary edge (not on any wall or the axis)")

    @property
    def n_velocity(self):
        return 2 * self.n_scalar

    def __getstate__(self):
        state = self.__dict__.copy()
        state.pop("_asm_cache", None)
        return state


def build_layout(mesh):
    """Construct the Taylor-Hood dof layout for a mesh."""
    return DofLayout(mesh)


def interpolate_velocity(old_layout, U, new_layout):
    """Nodal interpolation of a velocity field onto another mesh's nodes.

    Identity (bit-exact copy) when both layouts share the same mesh
    object; otherwise the old field is evaluated at the new quadratic
    nodes through the bisection-forest point location.
    """
    U = np.asarray(U, dtype=float)
    if old_layout.mesh is new_layout.mesh:
        return U.copy()
    pts = new_layout.node_xy
    rows = locate(old_layout.mesh, pts)
    xi = np.einsum("pij,pj->pi", old_layout.jinv[rows], pts - old_layout.v0[rows])
    phi = p2_basis(xi)
    nodes = old_layout.elem_p2[rows]
    out = np.empty(2 * new_layout.n_scalar)
    out[0::2] = (phi * U[2 * nodes]).sum(axis=1)
    out[1::2] = (phi * U[2 * nodes + 1]).sum(axis=1)
    return out
