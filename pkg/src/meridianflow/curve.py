"""Discrete generating-curve geometry.

The interface of the axisymmetric two-phase flow is tracked by a polygonal
curve in the meridian (r, z) halfplane whose endpoints sit exactly on the
rotation axis r = 0.  The curve is parameterized over the unit interval with
uniform reference spacing h = 1/J, so nodal fields on the curve are piecewise
linear in the parameter.

All quadrature on the curve is exact for the polynomial integrands that
occur, which is what makes the volume identity (see
:func:`time_weighted_normal`) and the energy estimates hold to roundoff.
"""

import numpy as np

__all__ = [
    "GeneratingCurve",
    "segment_frames",
    "enclosed_volume",
    "weighted_length",
    "time_weighted_normal",
    "lumped_inner",
    "curvature_projection",
    "equidistribution_ratio",
]

# 2-point Gauss rule on [0, 1]: exact for cubics, used for all per-segment
# curve integrals (integrands below are at most cubic per segment).
_GAUSS2_T = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_GAUSS2_W = np.array([0.5, 0.5])


class GeneratingCurve:
    """Polygonal curve in the meridian halfplane with axis-attached endpoints.

    Parameters
    ----------
    nodes : array_like, shape (J+1, 2)
        Ordered (r, z) node coordinates.  The first and last node must lie
        exactly on the axis (r = 0); interior nodes must have r > 0.
    validate : bool
        Skip invariant checks when False (used by tests that exercise
        degenerate configurations).

    Nodes are stored bottom-axis-endpoint first; a curve handed in with the
    opposite ordering is reversed on construction so that the outward normal
    convention of :func:`segment_frames` holds.
    """

    def __init__(self, nodes, validate=True):
        nodes = np.ascontiguousarray(np.asarray(nodes, dtype=float))
        if nodes.ndim != 2 or nodes.shape[1] != 2 or nodes.shape[0] < 2:
            raise ValueError("curve nodes must be an (J+1, 2) array with J >= 1")
        if validate:
            self._check_invariants(nodes)
            nodes = self._normalize_orientation(nodes)
        self.nodes = nodes

    @staticmethod
    def _check_invariants(nodes):
        if nodes[0, 0] != 0.0 or nodes[-1, 0] != 0.0:
            raise ValueError(
                "endpoint attachment violated: nodes[0].r and nodes[-1].r must be 0 "
                f"(got {nodes[0, 0]!r}, {nodes[-1, 0]!r})"
            )
        if nodes.shape[0] > 2 and np.any(nodes[1:-1, 0] <= 0.0):
            bad = int(np.nonzero(nodes[1:-1, 0] <= 0.0)[0][0]) + 1
            raise ValueError(f"interior node {bad} has r <= 0")
        seg = np.diff(nodes, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(lengths == 0.0):
            bad = int(np.nonzero(lengths == 0.0)[0][0])
            raise ValueError(f"degenerate segment {bad} (repeated node)")

    @staticmethod
    def _normalize_orientation(nodes):
        # Bottom-first storage makes the outward normal (tau_z, -tau_r); if
        # the curve came in top-first the normal at the widest segment would
        # point toward the axis, so reverse the node order.
        seg = np.diff(nodes, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        mid_r = 0.5 * (nodes[:-1, 0] + nodes[1:, 0])
        s = int(np.argmax(mid_r))
        nu_r = seg[s, 1] / lengths[s]
        if nu_r < 0.0:
            nodes = nodes[::-1].copy()
        return nodes

    @property
    def J(self):
        """Number of segments."""
        return self.nodes.shape[0] - 1

    @property
    def h(self):
        """Uniform reference parameter spacing 1/J."""
        return 1.0 / self.J

    def copy(self):
        return GeneratingCurve(self.nodes.copy(), validate=False)

    def __eq__(self, other):
        return isinstance(other, GeneratingCurve) and np.array_equal(
            self.nodes, other.nodes
        )

    def __repr__(self):
        return f"GeneratingCurve(J={self.J})"


def _as_nodes(curve):
    if isinstance(curve, GeneratingCurve):
        return curve.nodes
    return np.asarray(curve, dtype=float)


class SegmentFrame:
    """Per-segment tangent/normal frame of a generating curve.

    Attributes
    ----------
    tau : (J, 2) unit tangents along increasing parameter.
    nu : (J, 2) unit normals pointing into the outer phase.
    lengths : (J,) segment lengths.
    alpha_len : (J,) |X_alpha| = lengths / h.
    """

    def __init__(self, tau, nu, lengths, h):
        self.tau = tau
        self.nu = nu
        self.lengths = lengths
        self.h = h
        self.alpha_len = lengths / h


def segment_frames(curve):
    """Unit tangents, outward unit normals and lengths per segment.

    The normal is the clockwise quarter rotation of the tangent,
    nu = (tau_z, -tau_r), which points into the outer phase for the
    bottom-first node ordering enforced by :class:`GeneratingCurve`.
    """
    nodes = _as_nodes(curve)
    seg = np.diff(nodes, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    if np.any(lengths == 0.0):
        bad = int(np.nonzero(lengths == 0.0)[0][0])
        raise ValueError(f"degenerate segment {bad} (repeated node)")
    tau = seg / lengths[:, None]
    nu = np.column_stack([tau[:, 1], -tau[:, 0]])
    # Orientation consistency: at the segment farthest from the axis the
    # outward normal must point away from the axis.
    mid_r = 0.5 * (nodes[:-1, 0] + nodes[1:, 0])
    s = int(np.argmax(mid_r))
    if nu[s, 0] < 0.0:
        raise ValueError(
            "curve is stored top-first; construct it through GeneratingCurve "
            "so the orientation is normalized"
        )
    h = 1.0 / seg.shape[0]
    return SegmentFrame(tau, nu, lengths, h)


def enclosed_volume(curve):
    """Volume of the solid of revolution enclosed by the curve and the axis.

    Evaluates pi * <(x.e1)^2 nu, e1 |x_alpha|> with a per-segment 2-point
    Gauss rule, which integrates the piecewise-quadratic integrand exactly
    and therefore coincides with the frustum sum of the revolved polygon.
    """
    nodes = _as_nodes(curve)
    r0, r1 = nodes[:-1, 0], nodes[1:, 0]
    dz = nodes[1:, 1] - nodes[:-1, 1]
    # nu.e1 * |x_alpha| = dz/h per segment; the h cancels the parameter
    # integral, leaving Gauss on r(t)^2 * dz.
    r_at = r0[None, :] + _GAUSS2_T[:, None] * (r1 - r0)[None, :]
    seg_int = (_GAUSS2_W[:, None] * r_at**2).sum(axis=0) * dz
    return float(np.pi * seg_int.sum())


def weighted_length(curve):
    """<x.e1, |x_alpha|>: lateral area of the revolved polygon over 2 pi."""
    nodes = _as_nodes(curve)
    seg = np.diff(nodes, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    mid_r = 0.5 * (nodes[:-1, 0] + nodes[1:, 0])
    return float((mid_r * lengths).sum())


def time_weighted_normal(Xm, Xm1):
    """Time-weighted normal field f^{m+1/2} between two curves.

    Simpson-weighted combination of (X.e1) X_alpha rotated to the outward
    normal direction, evaluated at both ends of every segment (the field is
    linear in the parameter on each segment).  It satisfies the exact volume
    identity

        M(X^{m+1}) - M(X^m) = 2 pi <X^{m+1} - X^m, f^{m+1/2}>

    for any two axis-attached curves with matching J.

    Returns
    -------
    (J, 2, 2) array: f[j, 0] and f[j, 1] are the values at the left and
    right end of segment j.
    """
    a = _as_nodes(Xm)
    b = _as_nodes(Xm1)
    if a.shape != b.shape:
        raise ValueError(f"curves must share J (got {a.shape[0] - 1} and {b.shape[0] - 1})")
    mid = 0.5 * (a + b)
    h = 1.0 / (a.shape[0] - 1)

    def ends(nodes):
        # (X.e1) X_alpha at segment ends: (J, 2, 2)
        d = np.diff(nodes, axis=0) / h
        rL = nodes[:-1, 0][:, None]
        rR = nodes[1:, 0][:, None]
        return np.stack([rL * d, rR * d], axis=1)

    comb = (ends(a) + 4.0 * ends(mid) + ends(b)) / 6.0
    # Outward-normal rotation (v_r, v_z) -> (v_z, -v_r), matching nu.
    f = np.empty_like(comb)
    f[..., 0] = comb[..., 1]
    f[..., 1] = -comb[..., 0]
    return f


def inner_segment_linear(fvals, v, w=None):
    """<v, f> (or <v w, f>) for a per-segment linear field f against nodal fields.

    ``fvals`` has shape (J, 2, 2) as produced by :func:`time_weighted_normal`;
    ``v`` is a nodal (J+1, 2) vector field (piecewise linear).  With ``w``
    a nodal scalar field the product v*w is integrated.  Exact (the
    integrand is at most cubic per segment).
    """
    f_at = (1.0 - _GAUSS2_T)[None, :, None] * fvals[:, None, 0, :] + _GAUSS2_T[
        None, :, None
    ] * fvals[:, None, 1, :]
    vL, vR = v[:-1], v[1:]
    v_at = (1.0 - _GAUSS2_T)[None, :, None] * vL[:, None, :] + _GAUSS2_T[
        None, :, None
    ] * vR[:, None, :]
    prod = (f_at * v_at).sum(axis=2)
    if w is not None:
        w_at = (1.0 - _GAUSS2_T)[None, :] * w[:-1, None] + _GAUSS2_T[None, :] * w[
            1:, None
        ]
        prod = prod * w_at
    J = fvals.shape[0]
    return float((prod * _GAUSS2_W[None, :]).sum() / J)


def _segment_end_values(field, J):
    """Normalize a curve field to per-segment end values (J, 2, ...)."""
    field = np.asarray(field, dtype=float)
    if field.shape[0] == J + 1:
        return np.stack([field[:-1], field[1:]], axis=1)
    if field.shape[0] == J and field.ndim >= 2 and field.shape[1] == 2:
        return field
    raise ValueError(f"field shape {field.shape} fits neither nodal nor segment-end layout")


def lumped_inner(v, w, weight=None, J=None):
    """Mass-lumped inner product over the reference interval.

    Implements (1/2) h sum_j [(v.w)(alpha_j^-) + (v.w)(alpha_{j-1}^+)] with
    one-sided limits, so piecewise-constant fields with jumps at the nodes
    are handled exactly.  ``v`` and ``w`` may be nodal arrays of shape
    (J+1, ...) or segment-end arrays of shape (J, 2, ...); ``weight`` is an
    optional per-segment scalar factor (e.g. |X_alpha|).
    """
    if J is None:
        if weight is not None:
            J = len(weight)
        else:
            # Without a weight or explicit J the inputs are taken as nodal.
            J = np.asarray(v).shape[0] - 1
    ve = _segment_end_values(v, J)
    we = _segment_end_values(w, J)
    prod = ve * we
    while prod.ndim > 2:
        prod = prod.sum(axis=-1)
    if weight is not None:
        prod = prod * np.asarray(weight, dtype=float)[:, None]
    h = 1.0 / J
    return float(0.5 * h * prod.sum())


def equidistribution_ratio(curve):
    """Max segment length over min segment length (>= 1)."""
    nodes = _as_nodes(curve)
    seg = np.diff(nodes, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    return float(lengths.max() / lengths.min())


def _nodal_test_directions(frames, J):
    """Per-node test directions: weighted mean normal inside, e2 at the ends.

    The endpoint direction respects the constraint that test fields have a
    vanishing r-component on the axis.
    """
    omega = np.zeros((J + 1, 2))
    wsum = np.zeros(J + 1)
    contrib = frames.lengths[:, None] * frames.nu
    np.add.at(omega, np.arange(J), contrib)
    np.add.at(omega, np.arange(1, J + 1), contrib)
    np.add.at(wsum, np.arange(J), frames.lengths)
    np.add.at(wsum, np.arange(1, J + 1), frames.lengths)
    omega /= wsum[:, None]
    omega[0] = (0.0, 1.0)
    omega[-1] = (0.0, 1.0)
    return omega


def curvature_projection(curve, variant="plane"):
    """Nodal curvature of the curve by weak projection.

    variant="plane": curvature kappa of the generating curve itself, from the
    mass-lumped identity <kappa nu, eta |X_alpha|>^h = -<X_alpha, eta_alpha
    |X_alpha|^{-1}>.

    variant="mean": mean curvature varkappa of the revolved surface, from
    <(X.e1) varkappa nu, eta |X_alpha|> = -<eta.e1, |X_alpha|>
    - <(X.e1) X_alpha, eta_alpha |X_alpha|^{-1}>.

    Test directions are the length-weighted nodal normals at interior nodes
    and e2 at the axis endpoints.  Diagnostic helper used by the tests; the
    coupled schemes solve for the curvature jointly with the positions.
    """
    cn = _as_nodes(curve)
    J = cn.shape[0] - 1
    frames = segment_frames(cn if not isinstance(curve, GeneratingCurve) else curve)
    omega = _nodal_test_directions(frames, J)
    ell = frames.lengths
    nu = frames.nu

    if variant == "plane":
        # Lumped mass against the test directions is diagonal.
        diag = np.zeros(J + 1)
        np.add.at(diag, np.arange(J), 0.5 * ell * (nu * omega[:-1]).sum(axis=1))
        np.add.at(diag, np.arange(1, J + 1), 0.5 * ell * (nu * omega[1:]).sum(axis=1))
        if np.any(diag[1:-1] == 0.0):
            raise AssertionError("singular lumped mass in curvature projection")
        # rhs_j = -<X_alpha, (phi_j omega_j)_alpha |X_alpha|^{-1}>
        dX = np.diff(cn, axis=0)
        rhs = np.zeros(J + 1)
        per_seg = dX / ell[:, None]
        np.add.at(rhs, np.arange(J), (per_seg * omega[:-1]).sum(axis=1))
        np.add.at(rhs, np.arange(1, J + 1), -(per_seg * omega[1:]).sum(axis=1))
        kappa = np.zeros(J + 1)
        # Endpoint rows can degenerate (normal orthogonal to the e2 test
        # direction, e.g. a straight vertical cap); leave kappa = 0 there.
        ok = diag != 0.0
        kappa[ok] = rhs[ok] / diag[ok]
        return kappa

    if variant == "mean":
        # Tridiagonal system A[j, i] = <(X.e1) phi_i nu, phi_j omega_j |X_alpha|>.
        A = np.zeros((J + 1, J + 1))
        rL, rR = cn[:-1, 0], cn[1:, 0]
        # Per segment s, basis pairing ints of phi_i phi_j r(t) dt over [0,1]:
        # exact moments of the linear r(t).
        iLL = rL / 4.0 + rR / 12.0
        iLR = rL / 12.0 + rR / 12.0
        iRR = rL / 12.0 + rR / 4.0
        nom = (nu[:, None, :] * np.stack([omega[:-1], omega[1:]], axis=1)).sum(axis=2)
        lw = ell  # |X_alpha| * h = ell
        for s in range(J):
            A[s, s] += lw[s] * iLL[s] * nom[s, 0]
            A[s, s + 1] += lw[s] * iLR[s] * nom[s, 0]
            A[s + 1, s] += lw[s] * iLR[s] * nom[s, 1]
            A[s + 1, s + 1] += lw[s] * iRR[s] * nom[s, 1]
        rhs = np.zeros(J + 1)
        # -<eta.e1, |X_alpha|>: per segment, mean of the test r-components.
        np.add.at(rhs, np.arange(J), -0.5 * ell * omega[:-1, 0])
        np.add.at(rhs, np.arange(1, J + 1), -0.5 * ell * omega[1:, 0])
        # -<(X.e1) X_alpha, eta_alpha |X_alpha|^{-1}>
        dX = np.diff(cn, axis=0)
        mid_r = 0.5 * (rL + rR)
        per_seg = mid_r[:, None] * dX / ell[:, None]
        np.add.at(rhs, np.arange(J), (per_seg * omega[:-1]).sum(axis=1))
        np.add.at(rhs, np.arange(1, J + 1), -(per_seg * omega[1:]).sum(axis=1))
        return np.linalg.solve(A, rhs)

    raise ValueError(f"unknown curvature variant {variant!r}")
