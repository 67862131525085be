"""Time stepping for the coupled meridian two-phase flow.

Every step rebuilds the graded bulk mesh from the current generating
curve (reusing the previous mesh object verbatim when the triangulation
is unchanged, which makes the transfers exact copies), classifies
elements against the curve, moves the old velocity by nodal
interpolation and the old density by exact elementwise averaging,
assembles the momentum/continuity/coupling blocks, and hands the system
to the one-step solver.  State objects are plain and picklable, so a
serialized state resumes a run bitwise.
"""

import numpy as np

from .assembly import (
    advection_matrix,
    divergence_matrix,
    hoop_matrix,
    interface_coupling,
    load_vector,
    pressure_mean_vector,
    vector_mass,
    viscous_matrix,
)
from .curve import GeneratingCurve, enclosed_volume, weighted_length
from .diagnostics import TimeSeries, benchmark_quantities
from .mesh import (
    build_adaptive_mesh,
    classify_elements,
    material_fields,
    meshes_equal,
    transfer_p0,
    write_vtk,
)
from .solver import SCHEMES, solve_step
from .spaces import build_layout, interpolate_velocity

__all__ = ["SimState", "initial_state", "step", "run", "SCHEMES"]


class SimState:
    """State after m steps: curve, bulk fields, transfers, diagnostics.

    The velocity lives on the mesh built from the *previous* curve; the
    density/viscosity fields are the classification of that mesh at the
    time it was built.  The transfer fields (interpolated velocity and
    averaged density used on the right-hand side of the step that
    produced this state) are retained for the energy estimate.
    """

    def __init__(self, m, t, curve, mesh, layout, classes, rho, mu, U, P,
                 config, M0, series, rho_tilde, U_tilde,
                 n_picard=0, residual=0.0):
        self.m = m
        self.t = t
        self.curve = curve
        self.mesh = mesh
        self.layout = layout
        self.classes = classes
        self.rho = rho
        self.mu = mu
        self.U = U
        self.P = P
        self.config = config
        self.M0 = M0
        self.series = series
        self.rho_tilde = rho_tilde
        self.U_tilde = U_tilde
        self.n_picard = n_picard
        self.residual = residual


def _append_row(state):
    sph, Vc, zc, vD = benchmark_quantities(state)
    kinetic = 0.5 * state.U @ (vector_mass(state.layout, state.rho) @ state.U)
    energy = kinetic + state.config.gamma * weighted_length(state.curve)
    state.series.append(t=state.t, sphericity=sph, Vc=Vc, zc=zc, vDelta=vD,
                        energy=energy, picard_iters=state.n_picard,
                        residual=state.residual)


def initial_state(config):
    """Rest state on the mesh graded to the configured initial curve."""
    curve = config.curve0
    if not isinstance(curve, GeneratingCurve):
        curve = GeneratingCurve(np.asarray(curve, dtype=float))
    mesh = build_adaptive_mesh(curve, config.r_max, config.z_max,
                               config.n_coarse, config.n_fine)
    layout = build_layout(mesh)
    classes = classify_elements(mesh, curve)
    rho, mu = material_fields(classes, config.rho_minus, config.rho_plus,
                              config.mu_minus, config.mu_plus)
    U = np.zeros(layout.n_velocity)
    P = np.zeros(layout.n_pressure)
    state = SimState(
        m=0, t=0.0, curve=curve, mesh=mesh, layout=layout, classes=classes,
        rho=rho, mu=mu, U=U, P=P, config=config, M0=enclosed_volume(curve),
        series=TimeSeries(), rho_tilde=rho.copy(), U_tilde=U.copy(),
    )
    _append_row(state)
    return state


def step(state, scheme, dt, xfem=None):
    """Advance one time level; returns the new state with a row appended."""
    config = state.config
    if xfem is None:
        xfem = getattr(config, "xfem", True)
    try:
        return _step(state, scheme, dt, xfem)
    except (RuntimeError, ValueError) as exc:
        raise type(exc)(f"step {state.m} ({scheme}): {exc}") from exc


def _step(state, scheme, dt, xfem):
    config = state.config
    curve = state.curve

    mesh = build_adaptive_mesh(curve, config.r_max, config.z_max,
                               config.n_coarse, config.n_fine)
    if meshes_equal(mesh, state.mesh):
        mesh, layout = state.mesh, state.layout
    else:
        layout = build_layout(mesh)
    classes = classify_elements(mesh, curve)
    rho_m, mu_m = material_fields(classes, config.rho_minus, config.rho_plus,
                                  config.mu_minus, config.mu_plus)

    U_tilde = interpolate_velocity(state.layout, state.U, layout)
    rho_tilde = transfer_p0(state.mesh, state.rho, mesh)

    Mv_tilde = vector_mass(layout, rho_tilde)
    A = (0.5 / dt) * (vector_mass(layout, rho_m) + Mv_tilde) \
        + viscous_matrix(layout, mu_m) + hoop_matrix(layout, mu_m)
    W = advection_matrix(layout, rho_m, U_tilde)
    A = A + 0.5 * (W - W.T)
    B = divergence_matrix(layout)
    c_p = pressure_mean_vector(layout)
    coupling = interface_coupling(layout, curve)

    g = np.asarray(config.g, dtype=float)
    rhs = (1.0 / dt) * (Mv_tilde @ U_tilde) + load_vector(layout, rho_m, g)
    if scheme in ("equid", "equidv"):
        rhs = rhs - config.gamma * coupling.q_equid

    xfem_vec = None
    if xfem:
        omega = (enclosed_volume(curve) / (2.0 * np.pi)) \
            / (0.5 * config.r_max**2 * config.z_max)
        xfem_vec = coupling.l_vec - omega * np.asarray(B.sum(axis=0)).ravel()

    res = solve_step(
        layout, curve, scheme, dt, config.gamma, A, rhs, B, c_p,
        xfem_vec, coupling,
        picard_tol=getattr(config, "picard_tol", 1e-8),
        picard_max=getattr(config, "picard_max", 50),
    )

    new = SimState(
        m=state.m + 1, t=state.t + dt, curve=GeneratingCurve(res.X),
        mesh=mesh, layout=layout, classes=classes, rho=rho_m, mu=mu_m,
        U=res.U, P=res.P, config=config, M0=state.M0, series=state.series,
        rho_tilde=rho_tilde, U_tilde=U_tilde,
        n_picard=res.n_picard, residual=res.residual,
    )
    _append_row(new)
    return new


def _snapshot_steps(config, dt, n_steps):
    times = getattr(config, "snapshot_times", ()) or ()
    out = {}
    for s in times:
        k = int(round(s / dt))
        if 0 <= k <= n_steps:
            out.setdefault(k, s)
    return out


def run(config, outdir=None):
    """Execute t_max / dt steps; stream outputs when a directory is given.

    Returns (series, snapshots, final_state) where snapshots is a list of
    (time, state) pairs at the configured snapshot times.  On a failed
    step the partially written outputs are left on disk and the error is
    re-raised.
    """
    if outdir is None:
        outdir = getattr(config, "outdir", None)
    dt = config.dt
    n_steps = int(round(config.t_max / dt))
    snap_at = _snapshot_steps(config, dt, n_steps)

    state = initial_state(config)
    snapshots = []
    series_file = None
    if outdir is not None:
        import os

        from .harness import write_config_echo, write_curve_file

        os.makedirs(outdir, exist_ok=True)
        write_config_echo(os.path.join(outdir, "config.echo"), config)
        series_file = open(os.path.join(outdir, "series.csv"), "w")
        series_file.write(TimeSeries.header() + "\n")
        series_file.write(TimeSeries.format_row(state.series.rows[-1]) + "\n")
        series_file.flush()

    def snap(k, st):
        t_req = snap_at[k]
        snapshots.append((t_req, st))
        if outdir is not None:
            tag = "%g" % t_req
            write_curve_file(os.path.join(outdir, f"curve_t{tag}.txt"), st.curve)
            write_vtk(os.path.join(outdir, f"mesh_t{tag}.vtk"), st.mesh,
                      cell_data={"phase": st.classes})

    try:
        if 0 in snap_at:
            snap(0, state)
        for k in range(1, n_steps + 1):
            state = step(state, config.scheme, dt)
            if series_file is not None:
                series_file.write(
                    TimeSeries.format_row(state.series.rows[-1]) + "\n")
                series_file.flush()
            if k in snap_at:
                snap(k, state)
    finally:
        if series_file is not None:
            series_file.close()
    return state.series, snapshots, state
