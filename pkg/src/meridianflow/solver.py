"""One-step coupled solves for the meridian two-phase flow.

The bulk saddle problem (velocity, pressure, optional cut-cell pressure
enrichment, and the zero-mean multiplier) is factorized once per step;
the curve unknowns (free vertex positions and nodal curvature) are
eliminated through a dense Schur complement, so each fixed-point
iteration on the lagged curve weights costs one small dense solve plus a
back-substitution.  After convergence the relative residual of the full
coupled system is required to be below 1e-10.
"""

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .assembly import (
    curve_dof_mask,
    curve_f_mass,
    curve_length_vector,
    curve_lumped_normal,
    curve_nu_mass,
    curve_stiffness,
)
from .curve import _as_nodes, time_weighted_normal

__all__ = ["SolveResult", "bulk_saddle", "solve_step", "SCHEMES"]

SCHEMES = ("stab", "stabv", "equid", "equidv")

RESIDUAL_TOL = 1e-10


class SolveResult:
    """Solution of one coupled step."""

    def __init__(self, U, P, p_extra, lam, X, kappa, n_picard, residual):
        self.U = U
        self.P = P
        self.p_extra = p_extra
        self.lam = lam
        self.X = X
        self.kappa = kappa
        self.n_picard = n_picard
        self.residual = residual


def bulk_saddle(layout, A_full, B, c_p, xfem_vec=None):
    """Assemble the bulk saddle matrix on the free velocity dofs.

    Unknown order: U_free, P1 pressure, optional enrichment coefficient,
    zero-mean multiplier.  Returns the sparse matrix and the index
    bookkeeping (n_free, n_pressure, has_enrichment).
    """
    free = layout.vel_free
    A_ff = A_full[free][:, free].tocsr()
    B_f = B[:, free].tocsr()
    n_f = len(free)
    n_p = B.shape[0]
    col_c = sparse.csr_matrix((c_p, (np.arange(n_p), np.zeros(n_p, dtype=int))),
                              shape=(n_p, 1))
    if xfem_vec is None:
        blocks = [
            [A_ff, -B_f.T, None],
            [B_f, None, col_c],
            [None, col_c.T, None],
        ]
    else:
        bx = sparse.csr_matrix(np.asarray(xfem_vec)[free][None, :])
        blocks = [
            [A_ff, -B_f.T, -bx.T, None],
            [B_f, None, None, col_c],
            [bx, None, None, None],
            [None, col_c.T, None, None],
        ]
    S = sparse.bmat(blocks, format="csc")
    return S, n_f, n_p, xfem_vec is not None


def _curve_matrix(scheme, M3, S4, CM4, xfree, dt, nw, n_x):
    """Dense curve block: normal-motion rows on top, position rows below."""
    J1 = M3.shape[0]
    E = np.zeros((nw, nw))
    E[:J1, :n_x] = M3[:, xfree] / dt
    E[J1:, :n_x] = S4[np.ix_(xfree, xfree)]
    E[J1:, n_x:] = CM4[xfree, :]
    return E


def solve_step(layout, curve_m, scheme, dt, gamma, A_full, rhs_u_full, B, c_p,
               xfem_vec, coupling, picard_tol=1e-8, picard_max=50):
    """Solve the coupled system of one time step.

    Fixed-point iteration on the lagged curve weights: the stretched
    variants reassemble their time-weighted normal mass each pass, the
    length-stabilized scheme only refreshes its right-hand side, and the
    plain equidistributing scheme is linear so it solves exactly once.
    Raises on non-convergence and on a final relative residual above
    RESIDUAL_TOL.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    Xm = _as_nodes(curve_m)
    J = Xm.shape[0] - 1
    xfree = curve_dof_mask(J)
    n_x = len(xfree)
    nw = n_x + (J + 1)
    Xm_flat = Xm.ravel()

    S_b, n_f, n_p, has_x = bulk_saddle(layout, A_full, B, c_p, xfem_vec)
    n_b = S_b.shape[0]
    free = layout.vel_free
    try:
        lu = splu(S_b)
    except RuntimeError as exc:
        raise RuntimeError(f"bulk factorization failed (scheme {scheme})") from exc

    b_b = np.zeros(n_b)
    b_b[:n_f] = rhs_u_full[free]

    C = np.zeros((n_b, nw))
    C[:n_f, n_x:] = -gamma * coupling.kcross[free]
    D = np.zeros((nw, n_b))
    D[: J + 1, :n_f] = -coupling.kcross[free].T

    y0 = lu.solve(b_b)
    # only the kappa columns of C are nonzero; solve just those
    Zc = np.zeros((n_b, nw))
    Zc[:, n_x:] = lu.solve(C[:, n_x:])
    DZ = D @ Zc
    Dy0 = D @ y0

    if scheme in ("stab", "equid"):
        M3 = curve_nu_mass(curve_m)
    if scheme in ("stab", "stabv"):
        S4 = curve_stiffness(curve_m, r_weighted=True)
        CM4 = None
    else:
        S4 = curve_stiffness(curve_m, r_weighted=False)
        CM4 = curve_lumped_normal(curve_m)

    X_prev = Xm.copy()
    n_picard = 0
    while True:
        n_picard += 1
        if scheme in ("stabv", "equidv"):
            M3 = curve_f_mass(time_weighted_normal(Xm, X_prev))
        if scheme in ("stab", "stabv"):
            CM4 = M3.T
        E = _curve_matrix(scheme, M3, S4, CM4, xfree, dt, nw, n_x)
        b_w = np.zeros(nw)
        b_w[: J + 1] = (M3 @ Xm_flat) / dt
        if scheme in ("stab", "stabv"):
            b_w[J + 1 :] = -curve_length_vector(X_prev)[xfree]
        w = np.linalg.solve(E - DZ, b_w - Dy0)
        X_new = Xm.copy()
        X_new.ravel()[xfree] = w[:n_x]
        disp = np.max(np.hypot(*(X_new - X_prev).T))
        X_prev = X_new
        if scheme == "equid" or disp <= picard_tol:
            break
        if n_picard >= picard_max:
            raise RuntimeError(
                f"curve iteration stalled after {picard_max} passes "
                f"(last displacement {disp:.3e}, scheme {scheme})"
            )

    y = y0 - Zc @ w
    r_b = S_b @ y + C @ w - b_b
    r_w = D @ y + E @ w - b_w
    denom = max(np.linalg.norm(np.concatenate([b_b, b_w])), 1e-300)
    residual = np.linalg.norm(np.concatenate([r_b, r_w])) / denom
    if residual > RESIDUAL_TOL:
        raise RuntimeError(
            f"coupled solve residual {residual:.3e} above {RESIDUAL_TOL:g}"
        )

    U = np.zeros(layout.n_velocity)
    U[free] = y[:n_f]
    P = y[n_f : n_f + n_p]
    p_extra = float(y[n_f + n_p]) if has_x else 0.0
    lam = float(y[-1])
    kappa = w[n_x:]
    return SolveResult(U, P, p_extra, lam, X_new, kappa, n_picard, residual)
