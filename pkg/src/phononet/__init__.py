"""phononet: rate calculators and a deterministic delay-network simulator for
phonon-mediated quantum state transfer between driven defect nodes coupled
through a 1D waveguide."""

from .config import (
    BranchSpec,
    ConfigError,
    DriveProgram,
    FarDetuningWarning,
    NetworkConfig,
    NodeSpec,
    Segment,
    ValidatedConfig,
    load_config,
    parse_config,
    validate,
    with_receiver_position,
)
from .dynamics import (
    Trajectory,
    node_derivative,
    output_field,
    scattered_field,
    simulate,
    trajectory_to_csv,
)
from .analytics import (
    CLASSICAL_BOUND,
    ConnectivityMatrix,
    FidelityResult,
    SweepResult,
    connectivity_matrix,
    detuned_fidelity_estimate,
    detuned_fidelity_estimate_rate,
    fidelity,
    multimode_leak,
    position_sweep,
    single_mode_oracle,
    small_displacement_leak,
)
from .protocols import (
    DarkStateController,
    constant_drive,
    dark_state_program,
    dark_state_update,
    exponential_ramp,
    exponential_ramp_fraction,
)
from . import presets, rates, units

__version__ = "0.1.0"

__all__ = [
    "BranchSpec",
    "ConfigError",
    "DriveProgram",
    "FarDetuningWarning",
    "NetworkConfig",
    "NodeSpec",
    "Segment",
    "ValidatedConfig",
    "load_config",
    "parse_config",
    "validate",
    "with_receiver_position",
    "Trajectory",
    "simulate",
    "node_derivative",
    "output_field",
    "scattered_field",
    "trajectory_to_csv",
    "CLASSICAL_BOUND",
    "ConnectivityMatrix",
    "FidelityResult",
    "SweepResult",
    "connectivity_matrix",
    "detuned_fidelity_estimate",
    "detuned_fidelity_estimate_rate",
    "fidelity",
    "multimode_leak",
    "position_sweep",
    "single_mode_oracle",
    "small_displacement_leak",
    "DarkStateController",
    "constant_drive",
    "dark_state_program",
    "dark_state_update",
    "exponential_ramp",
    "exponential_ramp_fraction",
    "presets",
    "rates",
    "units",
    "__version__",
]
