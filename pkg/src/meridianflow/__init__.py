"""Axisymmetric two-phase incompressible flow on the meridian halfplane."""

from .curve import (
    GeneratingCurve,
    segment_frames,
    enclosed_volume,
    weighted_length,
    time_weighted_normal,
    lumped_inner,
    curvature_projection,
    equidistribution_ratio,
)
from .mesh import (
    TriMesh,
    build_adaptive_mesh,
    classify_elements,
    material_fields,
    locate,
    transfer_p0,
    meshes_equal,
    write_vtk,
    MINUS,
    PLUS,
    CUT,
)
from .spaces import DofLayout, build_layout, interpolate_velocity
from .solver import SCHEMES, SolveResult, bulk_saddle, solve_step
from .schemes import SimState, initial_state, step, run
from .diagnostics import (
    TimeSeries,
    benchmark_quantities,
    discrete_energy,
    stability_residual,
    droplet_fit,
)
from .harness import (
    RunConfig,
    PRESETS,
    make_config,
    initial_curve,
    parse_cli,
    write_outputs,
    write_curve_file,
    read_curve_file,
    write_config_echo,
    read_config_echo,
)
