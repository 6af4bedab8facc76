"""vortexlab: a desk-scale laboratory for viscous 2D vortex dynamics.

Pseudo-spectral evolution of signed vorticity components on a periodic box,
a point-vortex integrator for the matching idealized system, and the
concentration diagnostics (centroids, second-moment radii, outer mass,
transport bounds) used to compare the two.
"""

__version__ = "0.1.0"

from .accel import BACKEND as kernel_backend  # noqa: E402
from .config import ExperimentConfig  # noqa: E402
from .diagnostics import (  # noqa: E402
    ComponentDiagnostics,
    DiagnosticsSeries,
    RateFit,
    centroid,
    centroid_velocity_fd,
    intensity,
    lp_norm,
    measure_components,
    outer_mass,
    rate_fit,
    w1_upper_bound,
    w2_to_point,
)
from .errors import (  # noqa: E402
    CflViolation,
    CollisionError,
    ConfigError,
    NumericalAbort,
    SignViolation,
    TheoryCheckFailure,
    VortexLabError,
)
from .experiments import (  # noqa: E402
    run_experiment,
    run_sweep,
    summarize_sweep,
    validate_lamb_oseen,
)
from .fields import (  # noqa: E402
    Grid,
    ScalarField,
    VectorField,
    biot_savart,
    curl,
    dealias_23,
    divergence,
    integral,
    make_grid,
    read_snapshot,
    write_snapshot,
)
from .initial_data import (  # noqa: E402
    BlobSpec,
    assemble_configuration,
    disc_component,
    gaussian_component,
    lamb_oseen_exact,
    stretched_gaussian_component,
    verify_assumptions,
)
from .point_vortex import (  # noqa: E402
    PVState,
    PVTrajectory,
    hamiltonian,
    pv_invariants,
    pv_run,
    pv_step_rk4,
    pv_velocities,
)
from .solver import (  # noqa: E402
    ComponentSet,
    RunResult,
    SolverParams,
    advect_diffuse_rhs,
    cfl_dt,
    run,
    step,
    velocity,
)
from .theory_checks import run_checks  # noqa: E402
