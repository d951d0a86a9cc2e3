"""Pseudo-spectral Hall-MHD simulator with dyadic-shell synchronization analysis."""

from .grid import (
    Grid,
    PhysicalField,
    SpectralField,
    curl,
    dealiased_product,
    laplacian,
    leray_project,
    norm,
    to_physical,
    to_spectral,
)
from .lp import (
    DyadicPartition,
    bernstein_ratio,
    bony_decompose,
    build_partition,
    commutator_convection,
    commutator_hall,
    lowpass,
    lp_sobolev_norm,
    project,
)
from .dynamics import (
    SolverParams,
    State,
    energy_report,
    hall_term,
    rhs_emhd,
    rhs_induction,
    rhs_momentum,
    step,
    step_emhd,
)
from .wavenumbers import (
    SENTINEL_UNRESOLVED,
    BoundMonitor,
    ShellReading,
    WavenumberParams,
    lambda_b,
    lambda_u,
    pairwise_max,
)
from .twin import fit_decay_rate, run_emhd_twin, run_simulation, run_twin
from .config import RunConfig, parse_config, serialize_config

__version__ = "0.1.0"
