"""Benchmark-quantity, energy, and fitting diagnostics."""

import numpy as np
import pytest
from types import SimpleNamespace

from meridianflow import diagnostics, schemes
from meridianflow.curve import GeneratingCurve, enclosed_volume
from meridianflow.diagnostics import (
    COLUMNS,
    TimeSeries,
    _inner_integrals,
    benchmark_quantities,
    discrete_energy,
    droplet_fit,
    stability_residual,
)


def semicircle(J, radius=0.25, z0=0.5):
    th = np.linspace(-np.pi / 2, np.pi / 2, J + 1)
    nodes = np.column_stack([radius * np.cos(th), z0 + radius * np.sin(th)])
    nodes[0, 0] = nodes[-1, 0] = 0.0
    return GeneratingCurve(nodes)


def wobbly(J, radius=0.22, z0=0.9):
    th = np.linspace(-np.pi / 2, np.pi / 2, J + 1)
    rr = radius * (1.0 + 0.15 * np.cos(3.0 * th))
    nodes = np.column_stack([rr * np.cos(th), z0 + rr * np.sin(th)])
    nodes[0, 0] = nodes[-1, 0] = 0.0
    return GeneratingCurve(nodes)


def bubble_config(curve, gamma=24.5, g=(0.0, -0.98), n_fine=16, **kw):
    base = dict(
        curve0=curve, r_max=0.5, z_max=2.0, n_coarse=4, n_fine=n_fine,
        rho_minus=100.0, rho_plus=1000.0, mu_minus=1.0, mu_plus=10.0,
        gamma=gamma, g=g, scheme="stabv", dt=1e-3, t_max=3.0, xfem=True,
        picard_tol=1e-12, snapshot_times=(),
    )
    base.update(kw)
    return SimpleNamespace(**base)


def test_sphere_at_rest_benchmarks():
    state = schemes.initial_state(bubble_config(semicircle(64)))
    sph, Vc, zc, vD = benchmark_quantities(state)
    assert 1.0 - 2e-3 < sph <= 1.0 + 1e-8
    assert Vc == 0.0
    assert abs(zc - 0.5) < 1e-10
    assert vD == 0.0


def test_uniform_vertical_velocity_is_rise_velocity():
    state = schemes.initial_state(bubble_config(semicircle(32)))
    state.U[1::2] = 0.37
    _, Vc, _, _ = benchmark_quantities(state)
    assert abs(Vc - 0.37) < 1e-10


@pytest.mark.parametrize("make", [semicircle, wobbly])
def test_inner_region_volume_consistency(make):
    curve = make(48)
    state = schemes.initial_state(bubble_config(curve, n_fine=32))
    int_r, _, _ = _inner_integrals(state.layout, curve, state.U)
    M = enclosed_volume(curve)
    assert abs(2.0 * np.pi * int_r - M) / M < 1e-10


def test_energy_zero_state_and_linearity():
    from meridianflow.curve import weighted_length

    cfg = bubble_config(semicircle(64))
    state = schemes.initial_state(cfg)
    E1 = discrete_energy(state)
    assert E1 == cfg.gamma * weighted_length(state.curve)
    assert abs(E1 - 24.5 / 8.0) < 0.005
    cfg.gamma *= 2.0
    assert discrete_energy(state) == 2.0 * E1


def test_stability_residual_zero_state():
    state = schemes.initial_state(bubble_config(semicircle(16), g=(0.0, 0.0)))
    assert stability_residual(state, state, 1e-3) == 0.0


def test_droplet_fit_roundtrip():
    lam, om = 1.0 / 9.0, (8.0 / 9.0) * np.sqrt(15.0)
    t = np.linspace(0.0, 4.0, 2001)
    disp = 0.024 * np.exp(-lam * t) * np.cos(om * t)
    lam_f, om_f = droplet_fit(t, disp)
    assert abs(lam_f - lam) < 1e-6
    assert abs(om_f - om) < 1e-6


def test_droplet_fit_pure_cosine():
    t = np.linspace(0.0, 4.0, 2001)
    lam_f, om_f = droplet_fit(t, 0.01 * np.cos(3.0 * t))
    assert lam_f < 1e-8
    assert abs(om_f - 3.0) < 1e-8


def test_droplet_fit_non_oscillatory_raises():
    t = np.linspace(0.0, 4.0, 200)
    with pytest.raises(ValueError, match="oscillat"):
        droplet_fit(t, np.exp(-t))


def test_time_series_csv_roundtrip(tmp_path):
    ts = TimeSeries()
    ts.append(t=0.0, sphericity=1.0, Vc=0.0, zc=0.5, vDelta=0.0,
              energy=3.0625, picard_iters=0, residual=0.0)
    ts.append(t=1e-3, sphericity=0.1 + 0.2, Vc=-1.2345678901234567e-5,
              zc=0.5000000001, vDelta=-3.3e-16, energy=np.pi,
              picard_iters=17, residual=2.5e-13)
    path = tmp_path / "series.csv"
    ts.write_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == ",".join(COLUMNS)
    assert len(lines) == 3
    back = [float(x) for x in lines[2].split(",")]
    for got, want in zip(back, ts.rows[1]):
        assert got == want
    assert ts.column("picard_iters")[1] == 17
