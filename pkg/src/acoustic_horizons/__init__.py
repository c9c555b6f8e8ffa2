"""Acoustic spacetimes toolkit.

Builds Lorentzian metrics for waves in moving media, locates ergospheres
and event horizons (closed characteristic curves found as limit cycles of
the characteristic direction fields), classifies black versus white holes,
and verifies by direct simulation that horizons trap signals and make the
boundary inverse problem nonunique.
"""

__version__ = "0.1.0"

from .chargeo import (
    FramePair,
    HoleClass,
    NullDirectionPair,
    char_frames,
    characteristic_residual,
    classify_hole,
    ergosphere_null_covector,
    flow_alignment_condition,
    inner_boundary_condition,
    spatial_null_covectors,
    time_root_at_null,
)
from .config import ScenarioConfig, builtin_scenarios, parse_config
from .horizons import (
    HorizonReport,
    LimitCycle,
    PoincareSection,
    ergosphere_locus,
    find_limit_cycles,
    horizon_report,
    return_map,
)
from .inverse import (
    DNTrace,
    PerturbationSpec,
    dn_trace,
    gradient_flow_pair,
    nonuniqueness_experiment,
)
from .metrics import (
    AxisymmetricForm,
    Domain,
    FlowSpec,
    SpacetimeMetric,
    acoustic_metric,
    axisym_reduce,
    gordon_metric,
    lower_metric,
    minkowski_metric,
    polar_components,
    radial_linear_flow,
    radial_profile_flow,
    slow_medium_metric,
    spatial_det,
    uniform_flow,
    validate_hyperbolicity,
    vortex_flow,
)
from .rays import (
    PhasePoint,
    PlanarOrbit,
    RayOptions,
    RayPath,
    hamiltonian,
    integrate_planar_orbit,
    integrate_ray,
    lift_time_direction,
    null_phase_point,
)
from .tolerances import DEFAULT_TOL, Tolerances
from .wave import (
    AnnularGrid,
    BoundaryMultipole,
    GaussianPulse,
    WaveOptions,
    WaveSolver,
    boundary_h1_norm,
    cfl_dt,
    first_order_reduce,
    run_scenario,
    trapping_metric,
)
