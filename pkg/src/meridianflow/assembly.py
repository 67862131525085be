"""Assembly of the r-weighted axisymmetric bilinear forms.

Bulk forms use the degree-6 triangle rule, which integrates every
polynomial integrand that occurs exactly (r-weighted P2 x P2 mass is
degree 5, the advection form degree 6, the pressure-divergence form
degree 3).  The azimuthal 1/r viscous term uses the interior-point
collapsed rule so axis-touching elements stay finite and the assembled
block is positive semidefinite.  Curve-side forms are integrated exactly
per segment.  The bulk/curve coupling integrates over the sub-segments
cut out of each curve segment by the element edges with 4-point Gauss;
the same array serves the momentum surface-tension block and, transposed,
the normal-motion equation of the curve, which is what makes the discrete
energy and volume identities hold to roundoff.

Velocity dofs are interleaved (2*node + component); curve position dofs
likewise; curvature dofs are the curve nodes.
"""

import numpy as np
from scipy import sparse

from .curve import _as_nodes, segment_frames
from .mesh import locate
from .quadrature import collapsed_rule, leggauss01, tri_rule
from .spaces import p1_basis, p2_basis, p2_grads

__all__ = [
    "mass_matrix",
    "vector_mass",
    "viscous_matrix",
    "hoop_matrix",
    "diamond_inner",
    "advection_matrix",
    "divergence_matrix",
    "pressure_mean_vector",
    "load_vector",
    "InterfaceCoupling",
    "interface_coupling",
    "curve_nu_mass",
    "curve_f_mass",
    "curve_stiffness",
    "curve_lumped_normal",
    "curve_length_vector",
    "curve_dof_mask",
]

_VOL_PTS, _VOL_WTS = tri_rule()
_PHI1 = p1_basis(_VOL_PTS)
_PHI2 = p2_basis(_VOL_PTS)
_GREF = p2_grads(_VOL_PTS)
_COL_PTS, _COL_WTS = collapsed_rule(10)
_CPHI2 = p2_basis(_COL_PTS)
_G4_T, _G4_W = leggauss01(4)


def _geom(layout):
    """Per-layout cached geometry factors at the quadrature points."""
    cache = getattr(layout, "_asm_cache", None)
    if cache is None:
        r = layout.v0[:, None, 0] + np.einsum("ej,qj->eq", layout.jac[:, 0, :], _VOL_PTS)
        scale = _VOL_WTS[None, :] * layout.detj[:, None]
        gphys = np.einsum("eji,qkj->eqki", layout.jinv, _GREF)
        r_col = layout.v0[:, None, 0] + np.einsum(
            "ej,qj->eq", layout.jac[:, 0, :], _COL_PTS
        )
        scale_col = _COL_WTS[None, :] * layout.detj[:, None]
        vdofs = np.empty((layout.mesh.n_elements, 12), dtype=np.int64)
        vdofs[:, 0::2] = 2 * layout.elem_p2
        vdofs[:, 1::2] = 2 * layout.elem_p2 + 1
        cache = (r, scale, gphys, r_col, scale_col, vdofs)
        layout._asm_cache = cache
    return cache


def _csr(data, rows, cols, shape):
    rows = np.broadcast_to(rows, data.shape)
    cols = np.broadcast_to(cols, data.shape)
    return sparse.coo_matrix(
        (data.ravel(), (rows.ravel(), cols.ravel())), shape=shape
    ).tocsr()


def mass_matrix(layout, weight):
    """Scalar r-weighted P2 mass with an element-wise coefficient."""
    r, scale, _, _, _, _ = _geom(layout)
    s = scale * r * np.asarray(weight, dtype=float)[:, None]
    data = np.einsum("eq,qj,qk->ejk", s, _PHI2, _PHI2)
    n = layout.n_scalar
    return _csr(
        data, layout.elem_p2[:, :, None], layout.elem_p2[:, None, :], (n, n)
    )


def vector_mass(layout, weight):
    """Vector version of :func:`mass_matrix` on interleaved dofs."""
    return sparse.kron(mass_matrix(layout, weight), sparse.identity(2), format="csr")


def viscous_matrix(layout, mu):
    """2 (mu D(u) : D(chi)) r with the in-plane rate-of-strain tensor."""
    r, scale, gphys, _, _, vdofs = _geom(layout)
    s = scale * r * np.asarray(mu, dtype=float)[:, None]
    dot = np.einsum("eq,eqki,eqji->ekj", s, gphys, gphys)
    cross = np.einsum("eq,eqjc,eqkd->ekcjd", s, gphys, gphys)
    data = cross
    data[:, :, 0, :, 0] += dot
    data[:, :, 1, :, 1] += dot
    data = data.reshape(-1, 12, 12)
    n = layout.n_velocity
    return _csr(data, vdofs[:, :, None], vdofs[:, None, :], (n, n))


def hoop_matrix(layout, mu):
    """2 (mu r^{-1} u.e1, chi.e1) on the radial components.

    Assembled with the interior-point collapsed rule; on elements with an
    edge on the axis the admissible (masked) basis products contain a
    factor r^2, so the integrand is polynomial and the rule is exact.
    """
    _, _, _, r_col, scale_col, _ = _geom(layout)
    s = 2.0 * scale_col / r_col * np.asarray(mu, dtype=float)[:, None]
    data = np.einsum("eq,qj,qk->ejk", s, _CPHI2, _CPHI2)
    n = layout.n_velocity
    rows = 2 * layout.elem_p2[:, :, None]
    cols = 2 * layout.elem_p2[:, None, :]
    return _csr(data, rows, cols, (n, n))


def diamond_inner(layout, u, chi, mu):
    """(mu r^{-1} u.e1, chi.e1) under the interior-point collapsed rule."""
    H = hoop_matrix(layout, mu)
    return 0.5 * float(np.asarray(u) @ (H @ np.asarray(chi)))


def advection_matrix(layout, rho, v):
    """Unsymmetrized transport block W; use (W - W^T)/2 in the system.

    W[(k,c),(j,c)] = (rho r (v . grad) phi_j, phi_k) with the element-wise
    density and a P2 transport field v (interleaved coefficients).
    """
    r, scale, gphys, _, _, _ = _geom(layout)
    v = np.asarray(v, dtype=float)
    vq = np.empty((layout.mesh.n_elements, len(_VOL_PTS), 2))
    vq[:, :, 0] = np.einsum("qj,ej->eq", _PHI2, v[2 * layout.elem_p2])
    vq[:, :, 1] = np.einsum("qj,ej->eq", _PHI2, v[2 * layout.elem_p2 + 1])
    s = scale * r * np.asarray(rho, dtype=float)[:, None]
    vdotg = np.einsum("eqi,eqji->eqj", vq, gphys)
    data = np.einsum("eq,eqj,qk->ekj", s, vdotg, _PHI2)
    n = layout.n_scalar
    W = _csr(
        data, layout.elem_p2[:, :, None], layout.elem_p2[:, None, :], (n, n)
    )
    return sparse.kron(W, sparse.identity(2), format="csr")


def divergence_matrix(layout):
    """B[p, (k,c)] = (psi_p, d/dc of [r u]) pairing P1 against P2 velocity.

    The weak divergence of the r-weighted field: component c = 0
    contributes phi_k + r dphi_k/dr, component c = 1 contributes
    r dphi_k/dz.  Exact under the volume rule (degree 3).
    """
    r, scale, gphys, _, _, vdofs = _geom(layout)
    data = np.empty((layout.mesh.n_elements, 3, 6, 2))
    data[:, :, :, 0] = np.einsum(
        "eq,qp,eqk->epk", scale, _PHI1, _PHI2[None, :, :] + r[:, :, None] * gphys[:, :, :, 0]
    )
    data[:, :, :, 1] = np.einsum(
        "eq,qp,eqk->epk", scale * r, _PHI1, gphys[:, :, :, 1]
    )
    data = data.reshape(-1, 3, 12)
    return _csr(
        data,
        layout.mesh.triangles[:, :, None],
        vdofs[:, None, :],
        (layout.n_pressure, layout.n_velocity),
    )


def pressure_mean_vector(layout):
    """c[p] = (psi_p, r): the r-weighted mean used by the zero-mean row."""
    r, scale, _, _, _, _ = _geom(layout)
    data = np.einsum("eq,qp->ep", scale * r, _PHI1)
    out = np.zeros(layout.n_pressure)
    np.add.at(out, layout.mesh.triangles.ravel(), data.ravel())
    return out


def load_vector(layout, weight, g):
    """(w g, chi r) for a constant vector g and element-wise weight w."""
    r, scale, _, _, _, _ = _geom(layout)
    s = scale * r * np.asarray(weight, dtype=float)[:, None]
    data = np.einsum("eq,qk->ek", s, _PHI2)
    nodal = np.zeros(layout.n_scalar)
    np.add.at(nodal, layout.elem_p2.ravel(), data.ravel())
    out = np.empty(layout.n_velocity)
    out[0::2] = g[0] * nodal
    out[1::2] = g[1] * nodal
    return out


class InterfaceCoupling:
    """Cross blocks between the bulk velocity and the curve fields.

    Attributes
    ----------
    kcross : (n_velocity, J+1) dense
        <(X.e1) phi_i nu, Phi |X_alpha|> pairing curve hats with bulk
        test functions; used as -gamma * kcross in the momentum block and
        transposed in the curve normal-motion equation.
    l_vec : (n_velocity,)
        Row sums of kcross = <(X.e1) Phi . nu, |X_alpha|>, the exact
        boundary flux of the enclosed region (enrichment column source).
    q_equid : (n_velocity,)
        <nu.e1, nu.Phi |X_alpha|>, the constant part of the plane-curvature
        surface-tension variant.
    pieces : list of (segment, t0, t1, element)
        The sub-segmentation, exposed for reuse and testing.
    """

    def __init__(self, kcross, q_equid, pieces):
        self.kcross = kcross
        self.l_vec = kcross.sum(axis=1)
        self.q_equid = q_equid
        self.pieces = pieces


def _segment_breaks(mesh, a, b, cand, eps=1e-12):
    """Parameters in [0, 1] where segment a->b crosses candidate element edges."""
    d1 = b - a
    ts = [0.0, 1.0]
    tv = mesh.vertices[mesh.triangles[cand]]
    for k in range(len(cand)):
        for i in range(3):
            u, v = tv[k, i], tv[k, (i + 1) % 3]
            d2 = v - u
            denom = d1[0] * d2[1] - d1[1] * d2[0]
            if denom == 0.0:
                continue
            w = u - a
            t = (w[0] * d2[1] - w[1] * d2[0]) / denom
            s = (w[0] * d1[1] - w[1] * d1[0]) / denom
            if -eps <= t <= 1.0 + eps and -eps <= s <= 1.0 + eps:
                ts.append(min(max(t, 0.0), 1.0))
    ts = np.array(sorted(ts))
    keep = np.concatenate([[True], np.diff(ts) > eps])
    return ts[keep]


def interface_coupling(layout, curve, extra_breaks=None):
    """Sub-segment the curve by the mesh and integrate the cross forms.

    ``extra_breaks`` (list of (segment, t) pairs) forces additional piece
    boundaries; the integrals are invariant under such splits, which the
    tests exercise.
    """
    mesh = layout.mesh
    nodes = _as_nodes(curve)
    frames = segment_frames(curve)
    tv = mesh.vertices[mesh.triangles]
    tmin, tmax = tv.min(axis=1), tv.max(axis=1)
    J = nodes.shape[0] - 1
    kcross = np.zeros((layout.n_velocity, J + 1))
    q_equid = np.zeros(layout.n_velocity)
    pieces = []
    eps = 1e-12
    for s in range(J):
        a, b = nodes[s], nodes[s + 1]
        lo, hi = np.minimum(a, b) - eps, np.maximum(a, b) + eps
        cand = np.nonzero(
            (tmin[:, 0] <= hi[0])
            & (tmax[:, 0] >= lo[0])
            & (tmin[:, 1] <= hi[1])
            & (tmax[:, 1] >= lo[1])
        )[0]
        ts = _segment_breaks(mesh, a, b, cand)
        if extra_breaks is not None:
            forced = [t for seg, t in extra_breaks if seg == s]
            if forced:
                ts = np.unique(np.concatenate([ts, np.asarray(forced, dtype=float)]))
        mids = a + 0.5 * (ts[:-1] + ts[1:])[:, None] * (b - a)
        elems = locate(mesh, mids)
        for (t0, t1, e) in zip(ts[:-1], ts[1:], elems):
            pieces.append((s, float(t0), float(t1), int(e)))
            tg = t0 + (t1 - t0) * _G4_T
            xg = a[None, :] + tg[:, None] * (b - a)[None, :]
            xi = np.einsum("ij,gj->gi", layout.jinv[e], xg - layout.v0[e])
            phi = p2_basis(xi)
            wbase = _G4_W * (t1 - t0) * frames.lengths[s]
            wr = wbase * xg[:, 0]
            nds = layout.elem_p2[e]
            for c in (0, 1):
                nu_c = frames.nu[s, c]
                kcross[2 * nds + c, s] += np.einsum("g,gk->k", wr * (1 - tg), phi) * nu_c
                kcross[2 * nds + c, s + 1] += np.einsum("g,gk->k", wr * tg, phi) * nu_c
                q_equid[2 * nds + c] += (
                    frames.nu[s, 0] * nu_c * np.einsum("g,gk->k", wbase, phi)
                )
    return InterfaceCoupling(kcross, q_equid, pieces)


def curve_nu_mass(curve):
    """M[i, (j,c)] = <(X.e1) phi_i phi_j nu_c |X_alpha|> (exact moments)."""
    nodes = _as_nodes(curve)
    frames = segment_frames(curve)
    J = nodes.shape[0] - 1
    rL, rR = nodes[:-1, 0], nodes[1:, 0]
    mLL = rL / 4.0 + rR / 12.0
    mLR = (rL + rR) / 12.0
    mRR = rL / 12.0 + rR / 4.0
    out = np.zeros((J + 1, 2 * (J + 1)))
    idx = np.arange(J)
    for c in (0, 1):
        w = frames.nu[:, c] * frames.lengths
        np.add.at(out, (idx, 2 * idx + c), mLL * w)
        np.add.at(out, (idx, 2 * (idx + 1) + c), mLR * w)
        np.add.at(out, (idx + 1, 2 * idx + c), mLR * w)
        np.add.at(out, (idx + 1, 2 * (idx + 1) + c), mRR * w)
    return out


def curve_f_mass(fvals):
    """M[i, (j,c)] = <phi_i phi_j, f_c> for a per-segment linear field f."""
    fvals = np.asarray(fvals, dtype=float)
    J = fvals.shape[0]
    h = 1.0 / J
    fL, fR = fvals[:, 0, :], fvals[:, 1, :]
    out = np.zeros((J + 1, 2 * (J + 1)))
    idx = np.arange(J)
    for c in (0, 1):
        mLL = h * (fL[:, c] / 4.0 + fR[:, c] / 12.0)
        mLR = h * (fL[:, c] + fR[:, c]) / 12.0
        mRR = h * (fL[:, c] / 12.0 + fR[:, c] / 4.0)
        np.add.at(out, (idx, 2 * idx + c), mLL)
        np.add.at(out, (idx, 2 * (idx + 1) + c), mLR)
        np.add.at(out, (idx + 1, 2 * idx + c), mLR)
        np.add.at(out, (idx + 1, 2 * (idx + 1) + c), mRR)
    return out


def curve_stiffness(curve, r_weighted=True):
    """<(X.e1)? u_alpha, eta_alpha |X_alpha|^{-1}> per velocity component."""
    nodes = _as_nodes(curve)
    frames = segment_frames(curve)
    J = nodes.shape[0] - 1
    mid_r = 0.5 * (nodes[:-1, 0] + nodes[1:, 0])
    coef = (mid_r if r_weighted else np.ones(J)) / frames.lengths
    out = np.zeros((2 * (J + 1), 2 * (J + 1)))
    idx = np.arange(J)
    for c in (0, 1):
        np.add.at(out, (2 * idx + c, 2 * idx + c), coef)
        np.add.at(out, (2 * (idx + 1) + c, 2 * (idx + 1) + c), coef)
        np.add.at(out, (2 * idx + c, 2 * (idx + 1) + c), -coef)
        np.add.at(out, (2 * (idx + 1) + c, 2 * idx + c), -coef)
    return out


def curve_lumped_normal(curve):
    """L[(i,c), i] = <kappa nu, eta |X_alpha|>^h: the mass-lumped pairing.

    Diagonal in the curvature index: node i pairs with the one-sided
    normals of its incident segments, each weighted by half the segment
    length.
    """
    frames = segment_frames(curve)
    J = len(frames.lengths)
    out = np.zeros((2 * (J + 1), J + 1))
    half = 0.5 * frames.lengths[:, None] * frames.nu
    idx = np.arange(J)
    for c in (0, 1):
        np.add.at(out, (2 * idx + c, idx), half[:, c])
        np.add.at(out, (2 * (idx + 1) + c, idx + 1), half[:, c])
    return out


def curve_length_vector(lag_curve):
    """b[(i,0)] = <eta.e1, |X_alpha|> at the lagged curve (radial loads)."""
    nodes = _as_nodes(lag_curve)
    seg = np.diff(nodes, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    J = len(lengths)
    out = np.zeros(2 * (J + 1))
    np.add.at(out, 2 * np.arange(J), 0.5 * lengths)
    np.add.at(out, 2 * np.arange(1, J + 1), 0.5 * lengths)
    return out


def curve_dof_mask(J):
    """Free curve-position dofs: all but the endpoint radial components."""
    free = np.ones(2 * (J + 1), dtype=bool)
    free[0] = free[2 * J] = False
    return np.nonzero(free)[0]
