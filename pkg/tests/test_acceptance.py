"""Acceptance suite: headline conservation, stability, benchmark, and
convergence properties, one test per criterion.

Long runs are cached under test_artifacts/acceptance/ (see
_acceptance_data.py); missing runs are executed inline, so a cold start
of this module takes a couple of hours of desk time.  Each test prints
one pass/fail line; the printed values are also kept in the assert
messages.
"""

import os

import numpy as np
import pytest

import _acceptance_data as accept
from meridianflow import assembly as asm
from meridianflow import solver
from meridianflow.curve import (
    GeneratingCurve,
    equidistribution_ratio,
    inner_segment_linear,
    time_weighted_normal,
)
from meridianflow.diagnostics import droplet_fit
from meridianflow.spaces import build_layout


def _series(name):
    path = os.path.join(accept.ensure_run(name), "series.csv")
    return np.genfromtxt(path, delimiter=",", names=True)


def _report(num, ok, desc):
    print(f"[criterion {num}] {'PASS' if ok else 'FAIL'}: {desc}")
    assert ok, f"criterion {num}: {desc}"


def test_criterion_1_exact_volume_conservation():
    worst = {}
    for name in ("bubble1_stabv", "bubble1_equidv"):
        worst[name] = np.abs(_series(name)["vDelta"]).max()
    ok = all(v <= 1e-9 for v in worst.values())
    _report(1, ok, "conserving schemes keep |vDelta| <= 1e-9 for all t "
            f"(worst: { {k: float(v) for k, v in worst.items()} })")


def test_criterion_2_near_conservation_plain_schemes():
    finals = {}
    for name in ("bubble1_stab", "bubble1_equid"):
        finals[name] = abs(float(_series(name)["vDelta"][-1]))
    ok = all(v <= 5e-3 for v in finals.values())
    _report(2, ok, "plain schemes keep |vDelta(3)| <= 5e-3 "
            f"(finals: { {k: float(v) for k, v in finals.items()} })")


def test_criterion_3_unconditional_stability():
    worst = {}
    for name in ("droplet_stab", "droplet_stabv"):
        path = os.path.join(accept.ensure_run(name), "stability.csv")
        data = np.genfromtxt(path, delimiter=",", names=True)
        worst[name] = float((data["residual"] / data["energy0"]).max())
    ok = all(v <= 1e-10 for v in worst.values())
    _report(3, ok, "per-step energy estimate residual <= 1e-10 x E0 "
            f"(worst normalized: {worst})")


def test_criterion_4_volume_update_identity():
    from test_curve import frustum_volume_oracle, random_valid_curve

    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        J = int(rng.integers(3, 40))
        a = random_valid_curve(rng, J)
        b = random_valid_curve(rng, J)
        Va = frustum_volume_oracle(a.nodes)
        Vb = frustum_volume_oracle(b.nodes)
        f = time_weighted_normal(a, b)
        rhs = 2.0 * np.pi * inner_segment_linear(f, b.nodes - a.nodes)
        scale = max(abs(Va), abs(Vb), 1e-30)
        worst = max(worst, abs((Vb - Va) - rhs) / scale)
    ok = worst <= 1e-13
    _report(4, ok, "time-weighted-normal pairing equals frustum volume "
            f"change on 1000 random pairs (worst rel {worst:.2e})")


def test_criterion_5_bubble_case_one_benchmarks():
    data = _series("bubble1_stabv")
    s_min = float(data["sphericity"].min())
    vc_max = float(data["Vc"].max())
    zc_end = float(data["zc"][-1])
    ok = (abs(s_min - 0.9630) <= 0.005 and abs(vc_max - 0.3687) <= 0.01
          and abs(zc_end - 1.4834) <= 0.01)
    _report(5, ok, "case I: s_min=%.4f (0.9630±0.005), Vc_max=%.4f "
            "(0.3687±0.01), zc(3)=%.4f (1.4834±0.01)"
            % (s_min, vc_max, zc_end))


def test_criterion_6_bubble_case_two_benchmarks():
    data = _series("bubble2_stabv")
    s_min = float(data["sphericity"].min())
    vc_max = float(data["Vc"].max())
    zc_end = float(data["zc"][-1])
    ok = (abs(s_min - 0.81) <= 0.02 and abs(zc_end - 0.983) <= 0.01
          and abs(vc_max - 0.363) <= 0.01)
    _report(6, ok, "case II: s_min=%.4f (0.81±0.02), Vc_max=%.4f "
            "(0.363±0.01), zc(1.5)=%.4f (0.983±0.01)"
            % (s_min, vc_max, zc_end))


def test_criterion_7_droplet_oscillation_fit():
    path = os.path.join(accept.ensure_run("droplet_equid"), "tip.csv")
    data = np.genfromtxt(path, delimiter=",", names=True)
    disp = data["z_tip"] - 1.3  # offset from the unperturbed tip
    lam, om = droplet_fit(data["t"], disp)
    om_ref = (8.0 / 9.0) * np.sqrt(15.0)
    lam_ref = 1.0 / 9.0
    ok = (abs(om - om_ref) / om_ref <= 0.05
          and abs(lam - lam_ref) / lam_ref <= 0.25)
    _report(7, ok, "droplet fit: omega=%.4f (ref %.4f, 5%%), "
            "lambda=%.4f (ref %.4f, 25%%)" % (om, om_ref, lam, lam_ref))


def test_criterion_8_equidistribution_relaxation():
    # quadratically clustered nodes on a semicircle; curve subsystem only
    # (velocity pinned to zero), which makes each step independent of dt
    J = 8
    s = np.linspace(0.0, 1.0, J + 1) ** 2.0
    th = -0.5 * np.pi + np.pi * s
    nodes = np.column_stack([0.25 * np.cos(th), 0.5 + 0.25 * np.sin(th)])
    nodes[0, 0] = nodes[-1, 0] = 0.0
    curve = GeneratingCurve(nodes)
    r_init = equidistribution_ratio(curve)
    xfree = asm.curve_dof_mask(J)
    n_x = len(xfree)
    nw = n_x + J + 1
    reached = None
    for k in range(1, 501):
        X = curve.nodes
        M3 = asm.curve_nu_mass(curve)
        E = solver._curve_matrix(
            "equid", M3, asm.curve_stiffness(curve, r_weighted=False),
            asm.curve_lumped_normal(curve), xfree, 1e-3, nw, n_x)
        b = np.zeros(nw)
        b[:J + 1] = (M3 @ X.ravel()) / 1e-3
        w = np.linalg.solve(E, b)
        Xn = X.copy()
        Xn.ravel()[xfree] = w[:n_x]
        curve = GeneratingCurve(Xn)
        if equidistribution_ratio(curve) < 1.05:
            reached = k
            break
    ok = reached is not None
    _report(8, ok, "relaxation reaches ratio < 1.05 (start %.2f, %s steps)"
            % (r_init, reached))


def test_criterion_9_oracle_equivalence_and_orders():
    from test_assembly import _rel, ref_blocks, two_triangle_layout
    from test_solver import _manufactured_errors

    layout = two_triangle_layout()
    rng = np.random.default_rng(17)
    rho = 1.0 + rng.random(2)
    mu = 0.5 + rng.random(2)
    v_field = rng.standard_normal(layout.n_velocity)
    M, A, H, W, B, cp = ref_blocks(layout, rho, mu, v_field)
    rels = [
        _rel(asm.mass_matrix(layout, rho).toarray() - M, M),
        _rel(asm.viscous_matrix(layout, mu).toarray() - A, A),
        _rel(asm.hoop_matrix(layout, mu).toarray() - H, H),
        _rel(asm.advection_matrix(layout, rho, v_field).toarray() - W, W),
        _rel(asm.divergence_matrix(layout).toarray() - B, B),
        _rel(asm.pressure_mean_vector(layout) - cp, cp),
    ]
    blocks_ok = max(rels) < 1e-13

    errs = np.array([_manufactured_errors(n) for n in (4, 8, 16)])
    h = np.array([0.125, 0.0625, 0.03125])
    order_u = np.polyfit(np.log(h), np.log(errs[:, 0]), 1)[0]
    order_p = np.polyfit(np.log(h), np.log(errs[:, 1]), 1)[0]
    orders_ok = order_u >= 2.7 and order_p >= 1.7
    _report(9, blocks_ok and orders_ok,
            "reference blocks match to %.1e; orders (u, p) = (%.2f, %.2f)"
            % (max(rels), order_u, order_p))
