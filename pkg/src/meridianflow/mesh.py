"""Adaptive bisection meshes of the meridian rectangle.

The flow domain is the axial cross-section [0, r_max] x [0, z_max].  A
structured macro grid of squares (side min(r_max, z_max)/n_coarse, each
square split along its diagonal) is refined by newest-vertex bisection
towards the generating curve until every element near the curve has
diameter at most sqrt(2) * min(r_max, z_max)/n_fine.  Refinement-edge
recursion keeps the triangulation conforming at all times, and the
bisection forest provides point location and exact inter-mesh transfer
of piecewise-constant data.

Element classification against the curve:

* ``CUT``    -- the closed element meets the closed polygonal curve
                (within a small metric tolerance; a curve node sitting on
                a mesh edge therefore cuts both incident elements),
* ``MINUS``  -- barycenter inside the region enclosed by the curve and
                the axis r = 0,
* ``PLUS``   -- barycenter outside.
"""

import numpy as np

from .curve import _as_nodes

__all__ = [
    "MINUS",
    "PLUS",
    "CUT",
    "TriMesh",
    "build_adaptive_mesh",
    "classify_elements",
    "material_fields",
    "locate",
    "transfer_p0",
    "meshes_equal",
    "write_vtk",
]

MINUS = -1
CUT = 0
PLUS = 1


class _Forest:
    """Newest-vertex bisection forest over the macro triangulation.

    Triangles are stored as vertex triples (p0, p1, p2) with refinement
    edge (p1, p2); bisection inserts the midpoint m of that edge and
    creates the children (m, p0, p1) and (m, p2, p0), which preserves
    counter-clockwise orientation and the usual child refinement edges.
    """

    def __init__(self, r_max, z_max, n_coarse):
        s = min(r_max, z_max) / n_coarse
        nx = int(round(r_max / s))
        ny = int(round(z_max / s))
        if abs(nx * s - r_max) > 1e-9 * s or abs(ny * s - z_max) > 1e-9 * s:
            raise ValueError(
                "macro squares of side min(r_max, z_max)/n_coarse must tile "
                f"the rectangle; got {r_max} x {z_max} with side {s}"
            )
        self.r_max, self.z_max, self.s = r_max, z_max, s
        self.nx, self.ny, self.n_coarse = nx, ny, n_coarse

        xs = np.linspace(0.0, r_max, nx + 1)
        ys = np.linspace(0.0, z_max, ny + 1)
        self.verts = [(xs[i], ys[j]) for j in range(ny + 1) for i in range(nx + 1)]
        gid = lambda i, j: j * (nx + 1) + i

        self.tri = []        # (p0, p1, p2) per forest node
        self.children = []   # None or (c1, c2)
        self.path = []       # (macro_id, depth, bits)
        self.edge_map = {}   # sorted vertex pair -> set of leaf node ids
        self.mid = {}        # sorted vertex pair -> midpoint vertex id
        for j in range(ny):
            for i in range(nx):
                macro = 2 * (j * nx + i)
                v00, v10 = gid(i, j), gid(i + 1, j)
                v11, v01 = gid(i + 1, j + 1), gid(i, j + 1)
                # Diagonal v00-v11 is the refinement edge of both halves.
                self._add((v10, v11, v00), (macro, 0, 0))
                self._add((v01, v00, v11), (macro + 1, 0, 0))

    def _add(self, tri, path):
        t = len(self.tri)
        self.tri.append(tri)
        self.children.append(None)
        self.path.append(path)
        for e in self._edges(tri):
            self.edge_map.setdefault(e, set()).add(t)
        return t

    @staticmethod
    def _edges(tri):
        a, b, c = tri
        return (
            (a, b) if a < b else (b, a),
            (b, c) if b < c else (c, b),
            (a, c) if a < c else (c, a),
        )

    def _refedge(self, t):
        _, b, c = self.tri[t]
        return (b, c) if b < c else (c, b)

    def _midpoint(self, a, b):
        key = (a, b) if a < b else (b, a)
        m = self.mid.get(key)
        if m is None:
            pa, pb = self.verts[a], self.verts[b]
            m = len(self.verts)
            self.verts.append((0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])))
            self.mid[key] = m
        return m

    def _bisect(self, t):
        v0, v1, v2 = self.tri[t]
        m = self._midpoint(v1, v2)
        macro, depth, bits = self.path[t]
        c1 = self._add((m, v0, v1), (macro, depth + 1, bits << 1))
        c2 = self._add((m, v2, v0), (macro, depth + 1, (bits << 1) | 1))
        self.children[t] = (c1, c2)
        for e in self._edges((v0, v1, v2)):
            self.edge_map[e].discard(t)

    def refine(self, t):
        """Bisect leaf t, recursively pre-refining incompatible neighbours."""
        stack = [t]
        while stack:
            cur = stack[-1]
            if self.children[cur] is not None:
                stack.pop()
                continue
            e = self._refedge(cur)
            others = self.edge_map[e] - {cur}
            nb = next(iter(others)) if others else None
            if nb is not None and self._refedge(nb) != e:
                stack.append(nb)
                continue
            self._bisect(cur)
            if nb is not None:
                self._bisect(nb)
            stack.pop()

    def leaf_ids(self):
        return [t for t in range(len(self.tri)) if self.children[t] is None]


class TriMesh:
    """Conforming triangulation extracted from a bisection forest.

    Exposes vertex coordinates, element connectivity (counter-clockwise),
    areas, diameters, and the macro-grid metadata used for location and
    transfer.  Instances are immutable once built.
    """

    def __init__(self, forest):
        self._forest = forest
        leaves = forest.leaf_ids()
        self.leaf_nodes = np.asarray(leaves, dtype=np.int64)
        self._row = {t: k for k, t in enumerate(leaves)}
        self.vertices = np.asarray(forest.verts, dtype=float)
        self.triangles = np.asarray([forest.tri[t] for t in leaves], dtype=np.int64)
        tv = self.vertices[self.triangles]
        d1 = tv[:, 1] - tv[:, 0]
        d2 = tv[:, 2] - tv[:, 0]
        self.areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        e0 = tv[:, 1] - tv[:, 0]
        e1 = tv[:, 2] - tv[:, 1]
        e2 = tv[:, 0] - tv[:, 2]
        self.diameters = np.sqrt(
            np.maximum.reduce(
                [(e0 * e0).sum(1), (e1 * e1).sum(1), (e2 * e2).sum(1)]
            )
        )
        self.r_max, self.z_max = forest.r_max, forest.z_max
        self.n_coarse = forest.n_coarse

    @property
    def n_elements(self):
        return len(self.triangles)

    @property
    def n_vertices(self):
        return len(self.vertices)

    def __repr__(self):
        return (
            f"TriMesh({self.n_elements} elements, {self.n_vertices} vertices, "
            f"[0, {self.r_max}] x [0, {self.z_max}])"
        )


def _point_polyline_distance(points, nodes):
    """Distance from each point to the polygonal curve (min over segments)."""
    a = nodes[:-1]
    d = nodes[1:] - a
    ap = points[:, None, :] - a[None, :, :]
    L2 = (d * d).sum(axis=1)
    t = np.clip((ap * d).sum(axis=2) / L2, 0.0, 1.0)
    diff = ap - t[:, :, None] * d
    return np.sqrt((diff * diff).sum(axis=2)).min(axis=1)


def build_adaptive_mesh(curve, r_max, z_max, n_coarse, n_fine):
    """Mesh the rectangle, graded towards the curve.

    Elements whose closest vertex is within one local diameter of the
    curve are bisected until their diameter drops to the fine scale
    sqrt(2) * min(r_max, z_max)/n_fine; everything else stays at the
    coarse macro scale.  Deterministic for given inputs.
    """
    nodes = _as_nodes(curve)
    forest = _Forest(r_max, z_max, n_coarse)
    target = np.sqrt(2.0) * min(r_max, z_max) / n_fine * (1.0 + 1e-9)
    verts_np = None
    while True:
        leaves = forest.leaf_ids()
        verts_np = np.asarray(forest.verts)
        tri = np.asarray([forest.tri[t] for t in leaves])
        tv = verts_np[tri]
        e = tv - np.roll(tv, 1, axis=1)
        diam = np.sqrt((e * e).sum(axis=2).max(axis=1))
        dist = _point_polyline_distance(tv.reshape(-1, 2), nodes).reshape(-1, 3)
        marked = [
            t
            for t, dd, dv in zip(leaves, diam, dist.min(axis=1))
            if dd > target and dv <= dd
        ]
        if not marked:
            break
        for t in marked:
            if forest.children[t] is None:
                forest.refine(t)
    return TriMesh(forest)


def meshes_equal(a, b):
    """True when the two meshes are the same triangulation (bitwise)."""
    if a is b:
        return True
    return (
        a.vertices.shape == b.vertices.shape
        and a.triangles.shape == b.triangles.shape
        and np.array_equal(a.vertices, b.vertices)
        and np.array_equal(a.triangles, b.triangles)
    )


def locate(mesh, points):
    """Element index containing each point (deterministic tie-breaks).

    Walks the bisection forest from the macro square down to a leaf;
    points on shared edges resolve to the first-created child, points
    outside the rectangle are clamped to the nearest macro cell.
    """
    f = mesh._forest
    verts = f.verts
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts), dtype=np.int64)
    for k, (x, y) in enumerate(pts):
        i = min(max(int(x / f.s), 0), f.nx - 1)
        j = min(max(int(y / f.s), 0), f.ny - 1)
        macro = 2 * (j * f.nx + i)
        t = macro if (x - i * f.s) - (y - j * f.s) > 0.0 else macro + 1
        while f.children[t] is not None:
            c1, c2 = f.children[t]
            m = verts[f.tri[c1][0]]
            p0 = verts[f.tri[t][0]]
            side = (p0[0] - m[0]) * (y - m[1]) - (p0[1] - m[1]) * (x - m[0])
            t = c1 if side >= 0.0 else c2
        out[k] = mesh._row[t]
    return out


def transfer_p0(old_mesh, values, new_mesh):
    """Exact L2 projection of element-wise constants between two meshes.

    Requires both meshes to come from the same macro grid.  Uses the
    bisection hierarchy: a new element either lies inside an old one
    (value copied) or is a union of old ones (equal-area averages,
    aggregated bottom-up).
    """
    values = np.asarray(values, dtype=float)
    if old_mesh is new_mesh:
        return values.copy()
    of, nf = old_mesh._forest, new_mesh._forest
    if (of.nx, of.ny, of.s) != (nf.nx, nf.ny, nf.s):
        raise ValueError("transfer requires meshes over the same macro grid")
    agg = {}
    for t in range(len(of.tri) - 1, -1, -1):
        macro, depth, bits = of.path[t]
        ch = of.children[t]
        if ch is None:
            agg[(macro, depth, bits)] = values[old_mesh._row[t]]
        else:
            agg[(macro, depth, bits)] = 0.5 * (
                agg[(macro, depth + 1, bits << 1)]
                + agg[(macro, depth + 1, (bits << 1) | 1)]
            )
    out = np.empty(new_mesh.n_elements, dtype=float)
    for t in nf.leaf_ids():
        macro, depth, bits = nf.path[t]
        while (macro, depth, bits) not in agg:
            depth -= 1
            bits >>= 1
        out[new_mesh._row[t]] = agg[(macro, depth, bits)]
    return out


def _points_in_triangle(pts, tv, eps):
    """Closed-triangle membership with a metric tolerance (tv is CCW)."""
    ok = np.ones(len(pts), dtype=bool)
    for i in range(3):
        a, b = tv[i], tv[(i + 1) % 3]
        e = b - a
        en = np.hypot(e[0], e[1])
        cr = e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0])
        ok &= cr >= -eps * en
    return ok


def _point_segment_distance(p, a, b):
    d = b - a
    L2 = d @ d
    t = np.clip(((p - a) @ d) / L2, 0.0, 1.0) if L2 > 0 else 0.0
    diff = p - (a + t * d)
    return np.hypot(diff[0], diff[1])


def _segments_distance(p, q, a, b):
    d1, d2 = q - p, b - a
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    w = a - p
    if denom != 0.0:
        s = (w[0] * d2[1] - w[1] * d2[0]) / denom
        t = (w[0] * d1[1] - w[1] * d1[0]) / denom
        if 0.0 <= s <= 1.0 and 0.0 <= t <= 1.0:
            return 0.0
    return min(
        _point_segment_distance(p, a, b),
        _point_segment_distance(q, a, b),
        _point_segment_distance(a, p, q),
        _point_segment_distance(b, p, q),
    )


def _segment_cuts_triangle(p, q, tv, eps):
    if _points_in_triangle(np.array([p, q]), tv, eps).any():
        return True
    for i in range(3):
        if _segments_distance(p, q, tv[i], tv[(i + 1) % 3]) <= eps:
            return True
    return False


def _even_odd_inside(pts, poly):
    """Even-odd ray cast against the closed polygon (last edge wraps)."""
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(poly)
    j = n - 1
    for i in range(n):
        xi, yi = poly[i]
        xj, yj = poly[j]
        straddle = (yi > y) != (yj > y)
        dy = yj - yi
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = xi + (y - yi) * (xj - xi) / np.where(dy == 0.0, 1.0, dy)
        inside ^= straddle & (x < xcross)
        j = i
    return inside


def classify_elements(mesh, curve, eps=1e-12):
    """Classify every element as MINUS, CUT, or PLUS against the curve.

    CUT means the closed element intersects the closed curve within the
    metric tolerance eps; the remaining elements are classified by an
    even-odd test of their barycenter against the polygon formed by the
    curve plus its closure along the axis.
    """
    nodes = _as_nodes(curve)
    tv = mesh.vertices[mesh.triangles]
    tmin, tmax = tv.min(axis=1), tv.max(axis=1)
    cut = np.zeros(mesh.n_elements, dtype=bool)
    a, b = nodes[:-1], nodes[1:]
    smin = np.minimum(a, b) - eps
    smax = np.maximum(a, b) + eps
    for s in range(len(a)):
        cand = np.nonzero(
            ~cut
            & (tmin[:, 0] <= smax[s, 0])
            & (tmax[:, 0] >= smin[s, 0])
            & (tmin[:, 1] <= smax[s, 1])
            & (tmax[:, 1] >= smin[s, 1])
        )[0]
        for t in cand:
            if _segment_cuts_triangle(a[s], b[s], tv[t], eps):
                cut[t] = True
    cls = np.empty(mesh.n_elements, dtype=np.int64)
    cls[cut] = CUT
    rest = ~cut
    inside = _even_odd_inside(tv[rest].mean(axis=1), nodes)
    cls[rest] = np.where(inside, MINUS, PLUS)
    return cls


def material_fields(classes, rho_minus, rho_plus, mu_minus, mu_plus):
    """Element-wise density and viscosity; cut elements take the mean."""
    rho = np.where(
        classes == MINUS,
        rho_minus,
        np.where(classes == PLUS, rho_plus, 0.5 * (rho_minus + rho_plus)),
    )
    mu = np.where(
        classes == MINUS,
        mu_minus,
        np.where(classes == PLUS, mu_plus, 0.5 * (mu_minus + mu_plus)),
    )
    return rho.astype(float), mu.astype(float)


def write_vtk(path, mesh, cell_data=None):
    """Write the mesh and element fields as a legacy ASCII VTK file."""
    lines = [
        "# vtk DataFile Version 3.0",
        "meridian mesh",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_vertices} double",
    ]
    lines += [f"{v[0]:.17g} {v[1]:.17g} 0" for v in mesh.vertices]
    lines.append(f"CELLS {mesh.n_elements} {4 * mesh.n_elements}")
    lines += [f"3 {t[0]} {t[1]} {t[2]}" for t in mesh.triangles]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += ["5"] * mesh.n_elements
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_elements}")
        for name, field in cell_data.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines += [f"{v:.17g}" for v in np.asarray(field, dtype=float)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
