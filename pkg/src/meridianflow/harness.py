"""Run configuration, presets, command line, and file output.

The three presets reproduce the benchmark setups: two rising-bubble
cases (a moderately and a strongly deformed bubble) and a levitated
oscillating droplet, all on the meridian domain [0, r_max] x [0, z_max].
Mesh resolution is controlled by the pair (k, l): the graded bulk mesh
uses macro cells of size r_max/2^l refined to r_max/2^k near the curve,
the curve itself carries 2^k segments by default, and the time step is
1e-3/n.
"""

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from .curve import GeneratingCurve
from .diagnostics import TimeSeries
from .mesh import write_vtk
from .solver import SCHEMES

__all__ = [
    "RunConfig",
    "PRESETS",
    "make_config",
    "initial_curve",
    "parse_cli",
    "write_outputs",
    "write_curve_file",
    "read_curve_file",
    "write_config_echo",
    "read_config_echo",
    "main",
]

PRESETS = ("bubble1", "bubble2", "droplet", "custom")

# Physical data and resolution defaults per preset.  The bubble rows use
# the standard density/viscosity ratios 10/10 and 1000/100 with surface
# tension picked so the final shapes are ellipsoidal resp. skirted; the
# droplet row is the levitated high-density drop whose small shape
# oscillation has the known decay rate 1/9 and frequency (8/9)sqrt(15).
_PRESET_DATA = {
    "bubble1": dict(rho_plus=1000.0, rho_minus=100.0, mu_plus=10.0,
                    mu_minus=1.0, gamma=24.5, g=(0.0, -0.98),
                    t_max=3.0, k=5, l=3),
    "bubble2": dict(rho_plus=1000.0, rho_minus=1.0, mu_plus=10.0,
                    mu_minus=0.1, gamma=1.96, g=(0.0, -0.98),
                    t_max=1.5, k=5, l=2),
    "droplet": dict(rho_plus=1.0, rho_minus=1000.0, mu_plus=0.01,
                    mu_minus=2.0, gamma=40.0, g=(0.0, 0.0),
                    t_max=4.0, k=6, l=3),
}
_PRESET_DATA["custom"] = dict(_PRESET_DATA["bubble1"])

# droplet initial shape: degree-2 Legendre perturbation of a sphere of
# radius R0, written in polar form about the centre (0, 1)
_R0 = 0.3
_EPS0 = 0.08


@dataclass(eq=False)
class RunConfig:
    """Fully resolved run description; everything a run needs, nothing more.

    dt, n_fine, and n_coarse are derived from (n, k, l), so echoing the
    fields below reproduces a run bitwise.
    """

    preset: str = "bubble1"
    scheme: str = "stabv"
    xfem: bool = True
    k: int = 5
    l: int = 3
    n: int = 1
    j_gamma: int = 32
    t_max: float = 3.0
    picard_tol: float = 1e-8
    picard_max: int = 50
    outdir: str = None
    snapshot_times: tuple = ()
    r_max: float = 0.5
    z_max: float = 2.0
    rho_minus: float = 100.0
    rho_plus: float = 1000.0
    mu_minus: float = 1.0
    mu_plus: float = 10.0
    gamma: float = 24.5
    g: tuple = (0.0, -0.98)
    curve0: object = None

    @property
    def dt(self):
        return 1e-3 / self.n

    @property
    def n_fine(self):
        return 2 ** self.k

    @property
    def n_coarse(self):
        return 2 ** self.l


def initial_curve(preset, J):
    """Initial generating curve of a preset with J segments.

    Nodes are placed at uniform parameter values (theta for the polar
    shapes used here), with the two endpoints exactly on the axis.
    """
    th = np.linspace(-0.5 * np.pi, 0.5 * np.pi, J + 1)
    if preset in ("bubble1", "bubble2"):
        rad = np.full(J + 1, 0.25)
        z0 = 0.5
    elif preset == "droplet":
        rad = _R0 * (1.0 + 0.5 * _EPS0 * (3.0 * np.sin(th) ** 2 - 1.0)
                     - 0.2 * _EPS0 ** 2)
        z0 = 1.0
    else:
        raise ValueError(f"no initial curve for preset {preset!r}")
    nodes = np.column_stack([rad * np.cos(th), z0 + rad * np.sin(th)])
    nodes[0, 0] = nodes[-1, 0] = 0.0
    return GeneratingCurve(nodes)


def make_config(preset="bubble1", **overrides):
    """Resolved RunConfig for a preset, with keyword overrides.

    j_gamma defaults to 2^k (after overrides), and curve0 is built for
    the preset unless supplied.  The custom preset must bring its own
    curve0.
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    data = dict(_PRESET_DATA[preset])
    data.update(overrides)
    if not data.get("j_gamma"):
        data["j_gamma"] = 2 ** data["k"]
    if "snapshot_times" in data:
        data["snapshot_times"] = tuple(float(s) for s in data["snapshot_times"])
    if "g" in data:
        data["g"] = tuple(float(c) for c in data["g"])
    cfg = RunConfig(preset=preset, **data)
    if cfg.scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {cfg.scheme!r}")
    if cfg.n < 1:
        raise ValueError("time refinement n must be >= 1")
    if cfg.t_max <= 0.0:
        raise ValueError("t_max must be positive")
    if cfg.curve0 is None:
        if preset == "custom":
            raise ValueError("custom preset needs an explicit curve0")
        cfg.curve0 = initial_curve(preset, cfg.j_gamma)
    elif not isinstance(cfg.curve0, GeneratingCurve):
        cfg.curve0 = GeneratingCurve(np.asarray(cfg.curve0, dtype=float))
    return cfg


def parse_cli(args):
    """Parse command line flags into a RunConfig.

    Called with no arguments at all, prints usage and exits nonzero;
    unknown flags and invalid values exit through the usual argparse
    error path.
    """
    parser = argparse.ArgumentParser(
        prog="meridianflow",
        description="Axisymmetric two-phase flow runs "
                    "(rising bubbles, oscillating droplet).")
    parser.add_argument("--preset", choices=PRESETS, default="bubble1")
    parser.add_argument("--scheme", choices=SCHEMES, default="stabv")
    parser.add_argument("--adapt", metavar="K,L",
                        help="mesh levels: fine 2^K near the curve, coarse 2^L")
    parser.add_argument("--nt", type=int, default=1, metavar="N",
                        help="time substeps: dt = 1e-3/N")
    parser.add_argument("--jgamma", type=int, default=0, metavar="J",
                        help="curve segments (default 2^K)")
    parser.add_argument("--tmax", type=float, default=None, metavar="T")
    parser.add_argument("--tol", type=float, default=1e-8,
                        help="curve fixed-point tolerance")
    parser.add_argument("--xfem", choices=("on", "off"), default="on",
                        help="enriched pressure space")
    parser.add_argument("--out", default=None, metavar="DIR",
                        help="write series.csv, snapshots, config.echo here")
    parser.add_argument("--snap", default="", metavar="T1,T2,...",
                        help="times at which to write curve/mesh snapshots")
    if not args:
        parser.print_usage(sys.stderr)
        sys.exit(2)
    ns = parser.parse_args(args)

    overrides = dict(scheme=ns.scheme, xfem=(ns.xfem == "on"), n=ns.nt,
                     picard_tol=ns.tol, outdir=ns.out)
    if ns.adapt is not None:
        try:
            k_s, l_s = ns.adapt.split(",")
            overrides["k"], overrides["l"] = int(k_s), int(l_s)
        except ValueError:
            parser.error("--adapt expects two comma-separated integers K,L")
    if ns.jgamma:
        overrides["j_gamma"] = ns.jgamma
    if ns.tmax is not None:
        overrides["t_max"] = ns.tmax
    if ns.snap:
        try:
            overrides["snapshot_times"] = tuple(
                float(s) for s in ns.snap.split(",") if s)
        except ValueError:
            parser.error("--snap expects comma-separated times")
    try:
        config = make_config(ns.preset, **overrides)
    except ValueError as exc:
        parser.error(str(exc))

    if not config.xfem and config.scheme in ("stabv", "equidv"):
        print(f"warning: {config.scheme} without the enriched pressure "
              "space loses exact volume conservation; proceeding",
              file=sys.stderr)
    return config


def write_curve_file(path, curve):
    """Write a curve snapshot: `J_GAMMA <J>` header, then J+1 `r z` lines."""
    nodes = np.asarray(getattr(curve, "nodes", curve), dtype=float)
    with open(path, "w") as fh:
        fh.write("J_GAMMA %d\n" % (nodes.shape[0] - 1))
        for r, z in nodes:
            fh.write("%.17g %.17g\n" % (r, z))


def read_curve_file(path):
    """Read a curve snapshot back; inverse of write_curve_file, bitwise."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "J_GAMMA":
            raise ValueError(f"{path}: expected 'J_GAMMA <int>' header")
        J = int(header[1])
        nodes = np.loadtxt(fh, dtype=float, ndmin=2)
    if nodes.shape != (J + 1, 2):
        raise ValueError(f"{path}: expected {J + 1} nodes, found {nodes.shape}")
    return GeneratingCurve(nodes)


def _echo_value(v):
    if isinstance(v, GeneratingCurve):
        v = v.nodes
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, (int, np.integer)):
        return "%d" % v
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, np.ndarray):
        return ";".join("%.17g,%.17g" % (r, z) for r, z in v.reshape(-1, 2))
    if isinstance(v, (tuple, list)):
        return ",".join("%.17g" % float(x) for x in v)
    if v is None:
        return ""
    return str(v)


def write_config_echo(path, config):
    """Write every field of the resolved config as sorted key=value lines."""
    with open(path, "w") as fh:
        for key in sorted(vars(config)):
            fh.write("%s=%s\n" % (key, _echo_value(getattr(config, key))))


_TUPLE_KEYS = ("g", "snapshot_times")


def read_config_echo(path):
    """Rebuild a RunConfig from an echo file (inverse of write_config_echo).

    Keys that are not RunConfig fields (e.g. derived values echoed from a
    hand-rolled config object) are ignored.
    """
    ref = RunConfig()
    kwargs = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or "=" not in line:
                continue
            key, _, raw = line.partition("=")
            if key == "curve0":
                if raw:
                    pts = [tuple(float(c) for c in p.split(","))
                           for p in raw.split(";")]
                    kwargs[key] = GeneratingCurve(np.asarray(pts))
                continue
            if key in _TUPLE_KEYS:
                kwargs[key] = tuple(float(x) for x in raw.split(",") if x)
                continue
            if not hasattr(ref, key):
                continue
            default = getattr(ref, key)
            if isinstance(default, bool):
                kwargs[key] = raw == "on"
            elif isinstance(default, int):
                kwargs[key] = int(raw)
            elif isinstance(default, float):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = raw or None
    return RunConfig(**kwargs)


def write_outputs(series, snapshots, outdir, config=None):
    """Write series.csv, curve/mesh snapshot files, and the config echo.

    snapshots is the list of (time, state) pairs returned by run(); an
    empty series still produces a header-only CSV.
    """
    try:
        os.makedirs(outdir, exist_ok=True)
        series.write_csv(os.path.join(outdir, "series.csv"))
        for t_req, st in snapshots:
            tag = "%g" % t_req
            write_curve_file(os.path.join(outdir, f"curve_t{tag}.txt"),
                             st.curve)
            write_vtk(os.path.join(outdir, f"mesh_t{tag}.vtk"), st.mesh,
                      cell_data={"phase": st.classes})
        if config is not None:
            write_config_echo(os.path.join(outdir, "config.echo"), config)
    except OSError as exc:
        raise OSError(f"writing outputs under {outdir!r}: {exc}") from exc


def main(argv=None):
    """Console entry point: run a configured simulation, print the last row."""
    config = parse_cli(sys.argv[1:] if argv is None else argv)
    from .schemes import run

    series, _, _ = run(config)
    print(TimeSeries.header())
    print(TimeSeries.format_row(series.rows[-1]))
    return 0
