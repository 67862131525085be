"""Benchmark quantities, discrete energy, and stability checks.

The rising-bubble monitors (degree of sphericity, rise velocity, centre
of mass, relative volume loss) integrate over the inner phase region, so
cut elements are clipped exactly against the generating-curve polygon
and the clipped parts are integrated with the interior volume rule on a
signed fan triangulation (exact for the polynomial integrands).  The
energy bookkeeping mirrors the per-step estimate the stabilized schemes
satisfy: kinetic + gamma * weighted length on the left, the transferred
fields on the right.
"""

import warnings

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .assembly import hoop_matrix, load_vector, vector_mass, viscous_matrix
from .curve import _as_nodes, enclosed_volume, weighted_length
from .mesh import CUT, MINUS, classify_elements
from .quadrature import tri_rule
from .spaces import p2_basis

__all__ = [
    "TimeSeries",
    "benchmark_quantities",
    "discrete_energy",
    "stability_residual",
    "droplet_fit",
]

COLUMNS = ("t", "sphericity", "Vc", "zc", "vDelta", "energy",
           "picard_iters", "residual")

_TRI_PTS, _TRI_WTS = tri_rule()
_TRI_PHI2 = p2_basis(_TRI_PTS)


class TimeSeries:
    """Per-step diagnostic records in the fixed column order."""

    def __init__(self, rows=None):
        self.rows = [] if rows is None else [tuple(r) for r in rows]

    def append(self, **kw):
        self.rows.append(tuple(
            int(kw[c]) if c == "picard_iters" else float(kw[c])
            for c in COLUMNS
        ))

    def column(self, name):
        i = COLUMNS.index(name)
        return np.array([row[i] for row in self.rows])

    def __len__(self):
        return len(self.rows)

    @staticmethod
    def header():
        return ",".join(COLUMNS)

    @staticmethod
    def format_row(row):
        return ",".join(
            str(v) if isinstance(v, int) else "%.17g" % v for v in row
        )

    def write_csv(self, path):
        with open(path, "w") as f:
            f.write(self.header() + "\n")
            for row in self.rows:
                f.write(self.format_row(row) + "\n")


def _clip_polygon(poly, tri):
    """Clip a simple polygon against one counter-clockwise triangle."""
    out = list(poly)
    for i in range(3):
        a = tri[i]
        e = tri[(i + 1) % 3] - a
        if not out:
            break
        res = []
        n = len(out)
        side = [e[0] * (p[1] - a[1]) - e[1] * (p[0] - a[0]) for p in out]
        for j in range(n):
            p, sp = out[j], side[j]
            q, sq = out[(j + 1) % n], side[(j + 1) % n]
            if sp >= 0.0:
                res.append(p)
            if (sp > 0.0 > sq) or (sp < 0.0 < sq):
                t = sp / (sp - sq)
                res.append(p + t * (q - p))
        out = res
    return np.asarray(out).reshape(-1, 2)


def _region_polygon(curve):
    """Inner-phase polygon: curve nodes, closed by the axis segment."""
    nodes = _as_nodes(curve)
    a, b = nodes[:-1], nodes[1:]
    area2 = (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]).sum()
    return nodes if area2 > 0.0 else nodes[::-1]


def _inner_integrals(layout, curve, U):
    """Integrals of (r, r z, r U.e2) over the region enclosed by the curve."""
    mesh = layout.mesh
    classes = classify_elements(mesh, curve)
    uz = U[2 * layout.elem_p2 + 1]

    sums = np.zeros(3)
    sel = classes == MINUS
    if np.any(sel):
        w = _TRI_WTS[None, :] * layout.detj[sel, None]
        phys = layout.v0[sel, None, :] + np.einsum(
            "eij,qj->eqi", layout.jac[sel], _TRI_PTS
        )
        rq, zq = phys[:, :, 0], phys[:, :, 1]
        uzq = np.einsum("qk,ek->eq", _TRI_PHI2, uz[sel])
        sums[0] = np.sum(w * rq)
        sums[1] = np.sum(w * rq * zq)
        sums[2] = np.sum(w * rq * uzq)

    poly = _region_polygon(curve)
    for e in np.nonzero(classes == CUT)[0]:
        tv = mesh.vertices[mesh.triangles[e]]
        clipped = _clip_polygon(poly, tv)
        if len(clipped) < 3:
            continue
        p0 = clipped[0]
        for k in range(1, len(clipped) - 1):
            a, b = clipped[k], clipped[k + 1]
            jac = np.array([[a[0] - p0[0], b[0] - p0[0]],
                            [a[1] - p0[1], b[1] - p0[1]]])
            det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
            pts = p0[None, :] + _TRI_PTS @ jac.T
            xi = np.einsum("ij,qj->qi", layout.jinv[e], pts - layout.v0[e])
            uzq = p2_basis(xi) @ uz[e]
            w = _TRI_WTS * det
            sums[0] += np.sum(w * pts[:, 0])
            sums[1] += np.sum(w * pts[:, 0] * pts[:, 1])
            sums[2] += np.sum(w * pts[:, 0] * uzq)
    return sums


def benchmark_quantities(state):
    """Sphericity, rise velocity, centre of mass, relative volume loss."""
    curve = state.curve
    M = enclosed_volume(curve)
    int_r, int_rz, int_ruz = _inner_integrals(state.layout, curve, state.U)
    sph = (9.0 / (2.0 * np.pi**2)) ** (1.0 / 3.0) * M ** (2.0 / 3.0) \
        / weighted_length(curve)
    Vc = 2.0 * np.pi * int_ruz / M
    zc = 2.0 * np.pi * int_rz / M
    vD = (M - state.M0) / state.M0
    return sph, Vc, zc, vD


def discrete_energy(state):
    """E / (2 pi): kinetic with the current density field + gamma * length."""
    kinetic = 0.5 * state.U @ (vector_mass(state.layout, state.rho) @ state.U)
    return kinetic + state.config.gamma * weighted_length(state.curve)


def stability_residual(prev_state, next_state, dt):
    """lhs - rhs of the per-step energy estimate (<= 0 for Stab/StabV).

    Uses the transfer fields retained on the advanced state: the estimate
    compares E(rho^m, U^{m+1}, X^{m+1}) plus 2 dt times the dissipation
    against E of the transferred old velocity/density on the old curve
    plus the work of gravity.
    """
    layout = next_state.layout
    U1 = next_state.U
    gamma = next_state.config.gamma
    g = np.asarray(next_state.config.g, dtype=float)
    lhs = 0.5 * U1 @ (vector_mass(layout, next_state.rho) @ U1) \
        + gamma * weighted_length(next_state.curve) \
        + dt * U1 @ (viscous_matrix(layout, next_state.mu) @ U1) \
        + dt * U1 @ (hoop_matrix(layout, next_state.mu) @ U1)
    Ut = next_state.U_tilde
    rhs = 0.5 * Ut @ (vector_mass(layout, next_state.rho_tilde) @ Ut) \
        + gamma * weighted_length(prev_state.curve) \
        + dt * U1 @ load_vector(layout, next_state.rho, g)
    return lhs - rhs


def droplet_fit(t, disp):
    """Fit A exp(-lam t) cos(om t + phi) + c to a tip-displacement series.

    Initial guesses come from the spacing of the zero crossings of the
    de-meaned signal and from the decay of its successive extrema.
    Returns (lam, om).  Raises ValueError for non-oscillatory data.
    """
    t = np.asarray(t, dtype=float)
    disp = np.asarray(disp, dtype=float)
    c0 = disp[len(disp) // 2:].mean()
    y = disp - c0
    sign = np.sign(y)
    sign[sign == 0.0] = 1.0
    crossings = np.nonzero(np.diff(sign))[0]
    if len(crossings) < 3:
        raise ValueError("non-oscillatory tip data: too few zero crossings")
    om0 = np.pi / np.mean(np.diff(t[crossings]))

    peaks = [k for k in range(1, len(y) - 1)
             if abs(y[k]) >= abs(y[k - 1]) and abs(y[k]) >= abs(y[k + 1])
             and abs(y[k]) > 1e-14]
    if len(peaks) >= 2:
        slope = np.polyfit(t[peaks], np.log(np.abs(y[peaks])), 1)[0]
        lam0 = max(-slope, 0.0)
    else:
        lam0 = 0.0

    def model(tt, A, lam, om, phi, c):
        return A * np.exp(-lam * tt) * np.cos(om * tt + phi) + c

    p0 = (y[0] if y[0] != 0.0 else np.max(np.abs(y)), lam0, om0, 0.0, c0)
    with warnings.catch_warnings():
        # a perfect fit leaves the covariance singular; only popt is used
        warnings.simplefilter("ignore", OptimizeWarning)
        popt, _ = curve_fit(model, t, disp, p0=p0, maxfev=20000)
    return abs(popt[1]), abs(popt[2])
